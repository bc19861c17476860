#pragma once

// Dense complex linear algebra at desk scale (N <= 32).
//
// Everything here is a pure function of its inputs. Storage is Eigen's
// dynamic complex matrix; the algorithms that the rest of the library relies
// on for exactness claims (matrix exponential, Sylvester solve, pivot-checked
// inversion) are implemented here with explicit tolerances.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pexp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a linear matrix equation has no solution. Carries the
/// least-squares residual of the best approximate solution.
class NoSolutionError : public std::runtime_error {
public:
    NoSolutionError(const std::string& what, double residual)
        : std::runtime_error(what + " (least-squares residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small helpers

inline bool all_finite(const CMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

/// Entry point for external data: rejects NaN/Inf.
inline CMatrix require_finite(CMatrix m, const std::string& what = "matrix") {
    if (!all_finite(m)) throw std::invalid_argument(what + " has non-finite entries");
    return m;
}

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

inline void require_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline double hermitian_defect(const CMatrix& m) { return (m - m.adjoint()).norm(); }

inline bool is_hermitian(const CMatrix& m, double rel_tol) {
    return m.rows() == m.cols() && hermitian_defect(m) <= rel_tol * m.norm();
}

inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

inline CMatrix block_diag(const std::vector<CMatrix>& blocks) {
    Eigen::Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    CMatrix out = CMatrix::Zero(rows, cols);
    Eigen::Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

inline CMatrix hcat(const std::vector<CMatrix>& blocks) {
    if (blocks.empty()) return {};
    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        if (b.rows() != blocks.front().rows()) throw DimensionError("hcat: row counts differ");
        cols += b.cols();
    }
    CMatrix out(blocks.front().rows(), cols);
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        out.middleCols(c, b.cols()) = b;
        c += b.cols();
    }
    return out;
}

inline CMatrix diag(const std::vector<Complex>& d) {
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    return out;
}

/// Smallest eigenvalue of the Hermitian part of S.
inline double min_hermitian_eigenvalue(const CMatrix& s) {
    require_square(s, "min_hermitian_eigenvalue");
    if (s.rows() == 0) return std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(s), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Kronecker product

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// ---------------------------------------------------------------------------
// Matrix exponential

namespace detail {

/// Exact finite Taylor sum when M^k vanishes for some k <= dim (up to a
/// roundoff-level tolerance relative to ||M||^k); nullopt otherwise.
inline std::optional<CMatrix> exp_nilpotent(const CMatrix& m) {
    const Eigen::Index n = m.rows();
    const double norm = m.norm();
    if (norm == 0.0) return identity(n);
    CMatrix sum = identity(n);
    CMatrix power = identity(n);
    double factorial = 1.0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        power = power * m;
        const double tol = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n) *
                           std::pow(norm, static_cast<double>(k));
        if (power.norm() <= tol) return sum;
        factorial *= static_cast<double>(k);
        sum += power / factorial;
    }
    return std::nullopt;
}

/// Scaling and squaring with a truncated Taylor series. After scaling the
/// 1-norm is at most 1/2 and the degree is the first one whose remainder bound
/// drops below 1e-17.
inline CMatrix exp_scaling_squaring(const CMatrix& m) {
    const Eigen::Index n = m.rows();
    const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const CMatrix t = m / std::ldexp(1.0, squarings);
    const double theta = norm1 / std::ldexp(1.0, squarings);

    int degree = 1;
    double term = theta;  // theta^degree / degree!
    while (degree < 40) {
        const double remainder = term * theta / (degree + 1) / (1.0 - theta / (degree + 2));
        if (remainder < 1e-17) break;
        ++degree;
        term *= theta / degree;
    }

    // Horner: I + T(I + T/2(I + T/3(...)))
    CMatrix result = identity(n);
    for (int k = degree; k >= 1; --k) result = identity(n) + (t * result) / static_cast<double>(k);
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace detail

inline CMatrix mat_exp(const CMatrix& m) {
    require_square(m, "mat_exp");
    if (m.rows() == 0) return m;
    if (auto exact = detail::exp_nilpotent(m)) return *exact;
    return detail::exp_scaling_squaring(m);
}

// ---------------------------------------------------------------------------
// Sylvester equation  A X + X B = Q  via Kronecker vectorisation

struct SylvesterSolution {
    CMatrix x;
    bool singular = false;  // operator I (x) A + B^T (x) I is rank deficient
    double residual = 0.0;  // ||A X + X B - Q||_F
};

inline constexpr double kSylvesterRelTol = 1e-10;

inline SylvesterSolution solve_sylvester_ex(const CMatrix& a, const CMatrix& b, const CMatrix& q) {
    require_square(a, "solve_sylvester(A)");
    require_square(b, "solve_sylvester(B)");
    if (q.rows() != a.rows() || q.cols() != b.rows())
        throw DimensionError("solve_sylvester: Q must be " + std::to_string(a.rows()) + "x" +
                             std::to_string(b.rows()));
    const Eigen::Index n = a.rows(), m = b.rows();
    SylvesterSolution out;
    if (n == 0 || m == 0) {
        out.x = CMatrix::Zero(n, m);
        return out;
    }

    const CMatrix op = kron(identity(m), a) + kron(b.transpose(), identity(n));
    const CVector rhs = Eigen::Map<const CVector>(q.data(), n * m);

    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
    cod.setThreshold(1e-12);
    cod.compute(op);
    out.singular = cod.rank() < n * m;
    const CVector v = cod.solve(rhs);
    out.x = Eigen::Map<const CMatrix>(v.data(), n, m);

    const bool lyapunov_form = (b - a.adjoint()).norm() == 0.0 && hermitian_defect(q) <= 1e-14 * q.norm();
    if (lyapunov_form) out.x = hermitian_part(out.x);

    out.residual = (a * out.x + out.x * b - q).norm();
    if (out.residual > kSylvesterRelTol * (1.0 + q.norm()))
        throw NoSolutionError("Sylvester equation AX + XB = Q is inconsistent", out.residual);
    return out;
}

/// Solves AX + XB = Q. Singular but consistent systems yield the minimum-norm
/// solution; for B = A^*, Q = Q^* the result is Hermitian.
inline CMatrix solve_sylvester(const CMatrix& a, const CMatrix& b, const CMatrix& q) {
    return solve_sylvester_ex(a, b, q).x;
}

// ---------------------------------------------------------------------------
// Pivot-checked linear solves

inline constexpr double kSingularPivotRelTol = 1e-12;

/// Full-pivot LU of a square matrix that refuses to solve when the smallest
/// pivot is below 1e-12 * ||S||_F.
class CheckedSolver {
public:
    explicit CheckedSolver(const CMatrix& s) : lu_(s), norm_(s.norm()) {
        require_square(s, "CheckedSolver");
        if (s.rows() == 0) return;
        const auto pivots = lu_.matrixLU().diagonal().cwiseAbs();
        min_pivot_ = pivots.minCoeff();
        singular_ = !(min_pivot_ >= kSingularPivotRelTol * norm_) || norm_ == 0.0;
    }

    bool singular() const noexcept { return singular_; }
    double min_pivot() const noexcept { return min_pivot_; }
    Eigen::Index dim() const noexcept { return lu_.rows(); }

    CMatrix solve(const CMatrix& rhs) const {
        if (rhs.rows() != lu_.rows()) throw DimensionError("CheckedSolver::solve: row mismatch");
        if (singular_) throw std::logic_error("CheckedSolver::solve called on a singular matrix");
        return lu_.solve(rhs);
    }

    CMatrix inverse() const { return solve(identity(lu_.rows())); }

private:
    Eigen::FullPivLU<CMatrix> lu_;
    double norm_ = 0.0;
    double min_pivot_ = 0.0;
    bool singular_ = false;
};

/// S^{-1} RHS, or nullopt where S fails the pivot threshold.
inline std::optional<CMatrix> solve_hermitian_system(const CMatrix& s, const CMatrix& rhs) {
    require_square(s, "solve_hermitian_system");
    if (rhs.rows() != s.rows()) throw DimensionError("solve_hermitian_system: RHS rows must match S");
    CheckedSolver solver(s);
    if (solver.singular()) return std::nullopt;
    return solver.solve(rhs);
}

// ---------------------------------------------------------------------------
// Eigenvalues (hypothesis checks only)

inline double min_singular_value(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

struct SpectrumInfo {
    std::vector<Complex> eigenvalues;
    std::string method;
    double residual_bound = 0.0;  // max_i min_{|v|=1} |(A - l_i I) v|
};

namespace detail {

/// Characteristic polynomial coefficients c[0..n] (c[n] = 1) of det(zI - A) by
/// Faddeev-LeVerrier. Adequate for the small fallback sizes it is used at.
inline std::vector<Complex> characteristic_polynomial(const CMatrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<Complex> c(static_cast<std::size_t>(n) + 1);
    c[static_cast<std::size_t>(n)] = 1.0;
    CMatrix mk = CMatrix::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        mk = a * mk + c[static_cast<std::size_t>(n - k + 1)] * identity(n);
        c[static_cast<std::size_t>(n - k)] = -(a * mk).trace() / static_cast<double>(k);
    }
    return c;
}

inline Complex eval_poly(const std::vector<Complex>& c, Complex z) {
    Complex v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * z + c[i];
    return v;
}

/// Durand-Kerner (Weierstrass) iteration on a monic polynomial.
inline std::vector<Complex> durand_kerner(const std::vector<Complex>& c, int max_iter = 2000) {
    const std::size_t n = c.size() - 1;
    std::vector<Complex> z(n);
    double radius = 0.0;  // Cauchy bound
    for (std::size_t i = 0; i < n; ++i) radius = std::max(radius, std::abs(c[i]));
    radius += 1.0;
    const Complex seed(0.4, 0.9);
    Complex p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        p *= seed;
        z[i] = radius * p / std::abs(p) * 0.5;
    }
    for (int it = 0; it < max_iter; ++it) {
        double change = 0.0, mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            if (denom == Complex(0.0)) denom = 1e-300;
            const Complex step = eval_poly(c, z[i]) / denom;
            z[i] -= step;
            change = std::max(change, std::abs(step));
            mag = std::max(mag, std::abs(z[i]));
        }
        if (change <= 1e-15 * (1.0 + mag)) return z;
    }
    throw ConvergenceError("Durand-Kerner iteration did not converge");
}

inline SpectrumInfo eigenvalues_durand_kerner(const CMatrix& a) {
    SpectrumInfo info;
    info.method = "durand-kerner";
    info.eigenvalues = durand_kerner(characteristic_polynomial(a));
    for (const auto& l : info.eigenvalues)
        info.residual_bound = std::max(info.residual_bound, min_singular_value(a - l * identity(a.rows())));
    return info;
}

}  // namespace detail

inline SpectrumInfo eigenvalues(const CMatrix& a) {
    require_square(a, "eigenvalues");
    if (a.rows() > 32) throw DimensionError("eigenvalues: dimension above 32");
    if (!all_finite(a)) throw std::invalid_argument("eigenvalues: non-finite input");
    SpectrumInfo info;
    if (a.rows() == 0) {
        info.method = "empty";
        return info;
    }
    Eigen::ComplexEigenSolver<CMatrix> es(a, true);
    if (es.info() != Eigen::Success) {
        if (a.rows() <= 12) return detail::eigenvalues_durand_kerner(a);
        throw ConvergenceError("eigenvalues: QR iteration failed to converge");
    }
    info.method = "hessenberg-qr";
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const Complex l = es.eigenvalues()(i);
        info.eigenvalues.push_back(l);
        const CVector v = es.eigenvectors().col(i).normalized();
        info.residual_bound = std::max(info.residual_bound, (a * v - l * v).norm());
    }
    return info;
}

/// min_{i,j} |l_i + conj(m_j)|: zero exactly when sigma(A) meets sigma(-B^*).
inline double spectral_gap_to_minus_adjoint(const CMatrix& a, const CMatrix& b) {
    const auto sa = eigenvalues(a).eigenvalues;
    const auto sb = eigenvalues(b).eigenvalues;
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& l : sa)
        for (const auto& m : sb) gap = std::min(gap, std::abs(l + std::conj(m)));
    return gap;
}

// ---------------------------------------------------------------------------
// Controllability / full-range rank

inline CMatrix krylov_matrix(const CMatrix& a, const CMatrix& chat) {
    require_square(a, "krylov_matrix");
    if (chat.rows() != a.rows()) throw DimensionError("krylov_matrix: Chat rows must match A");
    const Eigen::Index n = a.rows(), p = chat.cols();
    CMatrix k(n, n * p);
    CMatrix block = chat;
    for (Eigen::Index l = 0; l < n; ++l) {
        k.middleCols(l * p, p) = block;
        block = a * block;
    }
    return k;
}

/// rank [Chat, A Chat, ..., A^{N-1} Chat] with threshold 1e-10 * largest column norm.
inline std::size_t full_range_rank(const CMatrix& a, const CMatrix& chat) {
    const CMatrix k = krylov_matrix(a, chat);
    if (k.size() == 0) return 0;
    const double largest = k.colwise().norm().maxCoeff();
    if (largest == 0.0) return 0;
    Eigen::ColPivHouseholderQR<CMatrix> qr(k);
    const auto r = qr.matrixQR().diagonal().cwiseAbs();
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        if (r(i) > 1e-10 * largest) ++rank;
    return rank;
}

inline std::size_t numerical_rank(const CMatrix& m, double rel_tol = 1e-10) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++rank;
    return rank;
}

}  // namespace pexp
