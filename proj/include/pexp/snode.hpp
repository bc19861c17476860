#pragma once

// Symmetric S-nodes and S-multinodes:
//   A_i A_k = A_k A_i,   A_k R + R A_k^* = sign_k * Chat nu_k Chat^*,
//   R = R^*,  nu_k = nu_k^*.

#include "pexp/numkernel.hpp"

#include <sstream>

namespace pexp {

inline constexpr double kIdentityRelTol = 1e-10;
inline constexpr double kCommutatorRelTol = 1e-10;
inline constexpr double kHermitianRelTol = 1e-12;

class SMultinode {
public:
    SMultinode(std::vector<CMatrix> a, std::vector<CMatrix> nu, CMatrix r, CMatrix chat, std::vector<int> signs)
        : a_(std::move(a)), nu_(std::move(nu)), r_(std::move(r)), chat_(std::move(chat)), signs_(std::move(signs)) {
        if (a_.empty()) throw std::invalid_argument("SMultinode: need at least one A_k");
        if (nu_.size() != a_.size() || signs_.size() != a_.size())
            throw DimensionError("SMultinode: A, nu and sign lists must have equal length");
        const Eigen::Index n = r_.rows();
        require_square(r_, "SMultinode R");
        if (chat_.rows() != n) throw DimensionError("SMultinode: Chat rows must equal dim R");
        for (std::size_t k = 0; k < a_.size(); ++k) {
            if (a_[k].rows() != n || a_[k].cols() != n) throw DimensionError("SMultinode: A_k must be N x N");
            if (nu_[k].rows() != chat_.cols() || nu_[k].cols() != chat_.cols())
                throw DimensionError("SMultinode: nu_k must be p x p");
            if (hermitian_defect(nu_[k]) != 0.0) throw std::invalid_argument("SMultinode: nu_k must be exactly Hermitian");
            if (signs_[k] != 1 && signs_[k] != -1) throw std::invalid_argument("SMultinode: signs must be +1 or -1");
        }
    }

    std::size_t order() const noexcept { return a_.size(); }
    const std::vector<CMatrix>& a() const noexcept { return a_; }
    const std::vector<CMatrix>& nu() const noexcept { return nu_; }
    const CMatrix& r() const noexcept { return r_; }
    const CMatrix& chat() const noexcept { return chat_; }
    const std::vector<int>& signs() const noexcept { return signs_; }

    /// sign_k * Chat nu_k Chat^*
    CMatrix identity_rhs(std::size_t k) const { return static_cast<double>(signs_[k]) * chat_ * nu_[k] * chat_.adjoint(); }

private:
    std::vector<CMatrix> a_;
    std::vector<CMatrix> nu_;
    CMatrix r_;
    CMatrix chat_;
    std::vector<int> signs_;
};

struct ValidationReport {
    std::vector<double> identity_residuals;  // ||A_k R + R A_k^* - rhs_k||_F
    std::vector<double> identity_scales;     // 1 + 2||A_k|| ||R|| + ||rhs_k||
    std::vector<double> commutator_norms;    // upper triangle, row-major over (i, k), i < k
    double r_hermitian_defect = 0.0;
    bool pass = true;
    std::vector<std::string> failures;

    std::string summary() const {
        std::ostringstream os;
        os << (pass ? "pass" : "fail");
        for (const auto& f : failures) os << "; " << f;
        return os.str();
    }
};

inline ValidationReport validate(const SMultinode& node) {
    ValidationReport rep;
    const CMatrix& r = node.r();
    for (std::size_t k = 0; k < node.order(); ++k) {
        const CMatrix& a = node.a()[k];
        const CMatrix rhs = node.identity_rhs(k);
        const double res = (a * r + r * a.adjoint() - rhs).norm();
        const double scale = 1.0 + 2.0 * a.norm() * r.norm() + rhs.norm();
        rep.identity_residuals.push_back(res);
        rep.identity_scales.push_back(scale);
        if (!(res <= kIdentityRelTol * scale)) {
            rep.pass = false;
            rep.failures.push_back("identity " + std::to_string(k + 1) + " residual " + std::to_string(res));
        }
    }
    for (std::size_t i = 0; i < node.order(); ++i)
        for (std::size_t k = i + 1; k < node.order(); ++k) {
            const CMatrix& ai = node.a()[i];
            const CMatrix& ak = node.a()[k];
            const double c = commutator(ai, ak).norm();
            rep.commutator_norms.push_back(c);
            if (!(c <= kCommutatorRelTol * std::max(1.0, ai.norm() * ak.norm()))) {
                rep.pass = false;
                rep.failures.push_back("A_" + std::to_string(i + 1) + " and A_" + std::to_string(k + 1) +
                                       " do not commute");
            }
        }
    rep.r_hermitian_defect = hermitian_defect(r);
    if (!(rep.r_hermitian_defect <= kHermitianRelTol * r.norm())) {
        rep.pass = false;
        rep.failures.push_back("R is not Hermitian");
    }
    return rep;
}

/// Hermitian R with A R + R A^* = rhs. Unique when sigma(A) and sigma(-A^*)
/// are disjoint, min-norm Hermitian otherwise; throws NoSolutionError when
/// inconsistent.
inline SylvesterSolution solve_for_r_ex(const CMatrix& a, const CMatrix& rhs) {
    require_square(a, "solve_for_R");
    if (rhs.rows() != a.rows() || rhs.cols() != a.rows()) throw DimensionError("solve_for_R: rhs must be N x N");
    if (hermitian_defect(rhs) > kHermitianRelTol * rhs.norm())
        throw std::invalid_argument("solve_for_R: right-hand side must be Hermitian");
    return solve_sylvester_ex(a, a.adjoint(), hermitian_part(rhs));
}

inline CMatrix solve_for_r(const CMatrix& a, const CMatrix& rhs) { return solve_for_r_ex(a, rhs).x; }

class BlockSolveError : public std::runtime_error {
public:
    BlockSolveError(std::size_t block, const std::string& why)
        : std::runtime_error("block " + std::to_string(block + 1) + ": " + why), block_(block) {}
    std::size_t block() const noexcept { return block_; }

private:
    std::size_t block_;
};

/// R = diag(R_11, ..., R_mm) with A R_kk + R_kk A^* = sign_k col_k col_k^*.
inline CMatrix build_block_diag_r(const CMatrix& a, const std::vector<CVector>& columns, const std::vector<int>& signs) {
    require_square(a, "build_block_diag_R");
    if (columns.size() != signs.size()) throw DimensionError("build_block_diag_R: one sign per column");
    std::vector<CMatrix> blocks;
    blocks.reserve(columns.size());
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k].size() != a.rows()) throw DimensionError("build_block_diag_R: column length must equal dim A");
        const CMatrix rhs = static_cast<double>(signs[k]) * columns[k] * columns[k].adjoint();
        try {
            blocks.push_back(solve_for_r(a, rhs));
        } catch (const NoSolutionError& e) {
            throw BlockSolveError(k, e.what());
        }
    }
    return block_diag(blocks);
}

}  // namespace pexp
