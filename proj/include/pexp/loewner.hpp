#pragma once

// Loewner system  Psi_x = L(x, y) Psi_y  with
//   Lambda_i = Cc_i exp(x D (x) A_i + y I_m (x) A_i) Chat_i,
//   Cc_i = sum_k (e_k e_k^*) (x) (e_k^* c_i),
//   Psi = Lambda_1^{-1} Lambda_2,   L = Lambda_1^{-1} D Lambda_1.

#include "pexp/genexp.hpp"
#include "pexp/verify.hpp"

namespace pexp::loewner {

struct LoewnerScenario {
    std::vector<double> d;  // diagonal of D, real
    CMatrix a1, a2;
    CMatrix c1, c2;
    CMatrix chat1, chat2;
    CMatrix block_c1, block_c2;  // the block-selection matrices Cc_i
    PseudoExpFamily family;      // variables (x, y); Pi = [Lambda_1  Lambda_2]

    Eigen::Index m() const { return static_cast<Eigen::Index>(d.size()); }
    Eigen::Index n() const { return chat2.cols(); }
    CMatrix d_matrix() const {
        std::vector<Complex> dc(d.begin(), d.end());
        return diag(dc);
    }
};

/// sum_k (e_k e_k^*) (x) (row k of c): row k is c's row k placed in block k.
inline CMatrix block_selection(const CMatrix& c) {
    const Eigen::Index m = c.rows(), l = c.cols();
    CMatrix out = CMatrix::Zero(m, m * l);
    for (Eigen::Index k = 0; k < m; ++k) {
        CMatrix ek = CMatrix::Zero(m, m);
        ek(k, k) = 1.0;
        out += kron(ek, c.row(k));
    }
    return out;
}

inline LoewnerScenario build(const std::vector<double>& d, const CMatrix& a1, const CMatrix& a2, const CMatrix& c1,
                             const CMatrix& c2, const CMatrix& chat1, const CMatrix& chat2,
                             bool allow_repeated_d = false) {
    const auto m = static_cast<Eigen::Index>(d.size());
    if (m == 0) throw DimensionError("loewner: D is empty");
    require_square(a1, "loewner A1");
    require_square(a2, "loewner A2");
    if (c1.rows() != m || c1.cols() != a1.rows()) throw DimensionError("loewner: c1 must be m x l1");
    if (c2.rows() != m || c2.cols() != a2.rows()) throw DimensionError("loewner: c2 must be m x l2");
    if (chat1.rows() != m * a1.rows() || chat1.cols() != m) throw DimensionError("loewner: Chat1 must be m*l1 x m");
    if (chat2.rows() != m * a2.rows()) throw DimensionError("loewner: Chat2 must have m*l2 rows");
    for (double v : d)
        if (!std::isfinite(v)) throw std::invalid_argument("loewner: D entries must be finite");
    if (!allow_repeated_d)
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t k = i + 1; k < d.size(); ++k)
                if (d[i] == d[k]) throw std::invalid_argument("loewner: D entries must be distinct");

    LoewnerScenario sc{d, a1, a2, c1, c2, chat1, chat2, block_selection(c1), block_selection(c2), {}};
    const CMatrix dm = sc.d_matrix();
    auto recipe = [&](const CMatrix& a) {
        return ExponentRecipe({{Polynomial::variable(0), kron(dm, a)}, {Polynomial::variable(1), kron(identity(m), a)}});
    };
    sc.family = PseudoExpFamily({"x", "y"}, {{sc.block_c1, recipe(a1), chat1}, {sc.block_c2, recipe(a2), chat2}}, {},
                                CMatrix(), {});
    return sc;
}

struct LoewnerFields {
    bool singular = true;
    CMatrix psi;  // m x n
    CMatrix l;    // m x m
};

inline LoewnerFields eval_loewner(const LoewnerScenario& sc, double x, double y) {
    FamilyPoint fp(sc.family, {x, y, 0.0});
    const CMatrix lambda1 = fp.pi_block(0);
    CheckedSolver solver(lambda1);
    LoewnerFields f;
    f.singular = solver.singular();
    if (f.singular) return f;
    f.psi = solver.solve(fp.pi_block(1));
    f.l = solver.solve(sc.d_matrix() * lambda1);
    return f;
}

/// max_i ||(Lambda_i)_x - D (Lambda_i)_y|| / (1 + ||(Lambda_i)_x||), analytic.
inline double premise_residual(const LoewnerScenario& sc, const Point& p) {
    FamilyPoint fp(sc.family, p);
    double worst = 0.0;
    for (std::size_t b = 0; b < 2; ++b) {
        const CMatrix lx = fp.pi_block(b, MultiIndex::of(0));
        const CMatrix ly = fp.pi_block(b, MultiIndex::of(1));
        worst = std::max(worst, (lx - sc.d_matrix() * ly).norm() / (1.0 + lx.norm()));
    }
    return worst;
}

inline PointResidual residual_at(const LoewnerScenario& sc, const Point& p, const FdSpec& fd) {
    PointResidual out;
    FamilyPoint fp(sc.family, p);
    const CMatrix lambda1 = fp.pi_block(0);
    CheckedSolver solver(lambda1);
    if (solver.singular()) {
        out.masked = true;
        return out;
    }
    const CMatrix dm = sc.d_matrix();
    const CMatrix psi = solver.solve(fp.pi_block(1));
    const CMatrix l = solver.solve(dm * lambda1);
    out.field_norm = std::max(psi.norm(), l.norm());

    // d(Lambda_1^{-1} Lambda_2) = Lambda_1^{-1} (dLambda_2 - dLambda_1 Psi)
    auto dpsi = [&](std::size_t v) {
        const auto a = MultiIndex::of(v);
        return CMatrix(solver.solve(fp.pi_block(1, a) - fp.pi_block(0, a) * psi));
    };
    out.analytic = (dpsi(0) - l * dpsi(1)).norm();

    PointFunction psi_fn = [&](const Point& q) -> MaybeMatrix {
        auto f = eval_loewner(sc, q[0], q[1]);
        if (f.singular) return std::nullopt;
        return f.psi;
    };
    const auto dx = fd_partial(psi_fn, p, 0, 1, fd);
    const auto dy = fd_partial(psi_fn, p, 1, 1, fd);
    if (!dx || !dy) {
        out.masked = true;
        return out;
    }
    out.fd = (*dx - l * *dy).norm();
    out.premise = premise_residual(sc, p);
    return out;
}

inline ResidualReport residual_loewner(const LoewnerScenario& sc, const Grid& grid, const FdSpec& fd = {},
                                       const Tolerances& tol = {}, std::size_t workers = 0) {
    return sweep([&](const Point& p) { return residual_at(sc, p, fd); }, grid, tol, workers);
}

/// max over the spectrum of L of the distance to the nearest entry of D
/// (and vice versa), after sorting both by real part.
inline double spectrum_mismatch(const LoewnerScenario& sc, const CMatrix& l) {
    auto ev = eigenvalues(l).eigenvalues;
    std::vector<double> dv = sc.d;
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
    std::sort(dv.begin(), dv.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < ev.size(); ++i) worst = std::max(worst, std::abs(ev[i] - dv[i]));
    return worst;
}

}  // namespace pexp::loewner
