#pragma once

// Non-stationary Dirac system  Psi_t + sigma_2 Psi_y - i V Psi = 0  with
//   Pi = C exp(t A_1 + y A_2) Chat,  Chat = [g_1^*  g_2^*],
//   Psi = Pi^* S^{-1},  V = i (Q sigma_2 - sigma_2 Q),  Q = Pi^* S^{-1} Pi,
// built from a symmetric 2-node with nu_1 = sigma_2, nu_2 = -I_2.

#include "pexp/genexp.hpp"
#include "pexp/snode.hpp"
#include "pexp/verify.hpp"

namespace pexp::dirac {

inline CMatrix sigma2() {
    CMatrix s(2, 2);
    s << 0.0, -kI, kI, 0.0;
    return s;
}

class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DiracScenario {
    SMultinode node;
    CMatrix c;
    CMatrix s0;
    PseudoExpFamily family;  // variables (t, y)
};

/// (||g_1 A_1^* - i g_2 A_2^*||, ||g_2 A_1^* + i g_1 A_2^*||) with g_k^* the
/// columns of Chat.
inline std::pair<double, double> constraint_residuals(const CMatrix& a1, const CMatrix& a2, const CMatrix& chat) {
    const CMatrix g1 = chat.col(0).adjoint();
    const CMatrix g2 = chat.col(1).adjoint();
    return {(g1 * a1.adjoint() - kI * g2 * a2.adjoint()).norm(), (g2 * a1.adjoint() + kI * g1 * a2.adjoint()).norm()};
}

inline PseudoExpFamily make_family(const SMultinode& node, const CMatrix& c, const CMatrix& s0) {
    ExponentRecipe recipe({{Polynomial::variable(0), node.a()[0]}, {Polynomial::variable(1), node.a()[1]}});
    // S_t = Pi sigma_2 Pi^*, S_y = -Pi Pi^*
    std::vector<SRule> rules(2);
    rules[0].push_back({1.0, 0, {}, sigma2(), {}});
    rules[1].push_back({-1.0, 0, {}, CMatrix(), {}});
    return PseudoExpFamily({"t", "y"}, {{c, recipe, node.chat()}}, {{1, 0, node.r()}}, s0, std::move(rules));
}

/// General scenario: R is taken from `r` when given, otherwise solved from the
/// sigma_2 identity; both identities and the Pi-constraints are then checked.
inline DiracScenario build(const CMatrix& a1, const CMatrix& a2, const CMatrix& chat, const CMatrix& c, const CMatrix& s0,
                           std::optional<CMatrix> r = std::nullopt) {
    require_square(a1, "dirac A1");
    if (a2.rows() != a1.rows() || a2.cols() != a1.cols()) throw DimensionError("dirac: A2 must match A1");
    if (chat.rows() != a1.rows() || chat.cols() != 2) throw DimensionError("dirac: Chat must be N x 2");
    if (c.cols() != a1.rows()) throw DimensionError("dirac: C must have N columns");
    if (!r) {
        try {
            r = solve_for_r(a1, chat * sigma2() * chat.adjoint());
        } catch (const NoSolutionError& e) {
            throw ConstructionError(std::string("dirac: no R for the first identity: ") + e.what());
        }
    }
    SMultinode node({a1, a2}, {sigma2(), -identity(2)}, *r, chat, {1, 1});
    const auto rep = validate(node);
    if (!rep.pass) throw ConstructionError("dirac: 2-node invalid: " + rep.summary());
    const auto [c1, c2] = constraint_residuals(a1, a2, chat);
    const double scale = 1.0 + chat.norm() * (a1.norm() + a2.norm());
    if (c1 > kIdentityRelTol * scale || c2 > kIdentityRelTol * scale)
        throw ConstructionError("dirac: constraints on the columns of Chat are violated");
    auto family = make_family(node, c, s0);
    return {std::move(node), c, s0, std::move(family)};
}

/// Block-diagonal construction: g_2 = -i g_1 j, A_1 = D, A_2 = D j and
/// R = diag(R_11, R_22) with D_1 R_11 + R_11 D_1^* = -2 a^* a,
/// D_2 R_22 + R_22 D_2^* = 2 b^* b where g_1 = [a b] splits at n1.
inline DiracScenario build_block_diagonal(const CVector& g1_row, std::size_t n1, const std::vector<Complex>& d,
                                          const CMatrix& c, const CMatrix& s0) {
    const auto n = static_cast<Eigen::Index>(d.size());
    if (g1_row.size() != n) throw DimensionError("dirac: g1 length must equal dim D");
    if (n1 > d.size()) throw DimensionError("dirac: n1 exceeds dim D");
    const auto k1 = static_cast<Eigen::Index>(n1);
    const auto k2 = n - k1;

    const CMatrix dm = diag(d);
    CMatrix j = identity(n);
    for (Eigen::Index i = k1; i < n; ++i) j(i, i) = -1.0;

    auto check_block = [&](Eigen::Index off, Eigen::Index len, const char* name) {
        if (len == 0) return;
        const CMatrix blk = dm.block(off, off, len, len);
        if (spectral_gap_to_minus_adjoint(blk, blk) <= 1e-10 * (1.0 + blk.norm()))
            throw ConstructionError(std::string("dirac: spectrum of ") + name + " meets spectrum of its negative adjoint");
    };
    check_block(0, k1, "D1");
    check_block(k1, k2, "D2");

    const CMatrix g1 = g1_row.transpose();  // 1 x n
    const CMatrix g2 = -kI * g1 * j;
    CMatrix chat(n, 2);
    chat.col(0) = g1.adjoint();
    chat.col(1) = g2.adjoint();

    const CMatrix a = g1.leftCols(k1);
    const CMatrix b = g1.rightCols(k2);
    std::vector<CMatrix> blocks;
    try {
        if (k1 > 0) blocks.push_back(solve_for_r(dm.topLeftCorner(k1, k1), -2.0 * a.adjoint() * a));
        if (k2 > 0) blocks.push_back(solve_for_r(dm.bottomRightCorner(k2, k2), 2.0 * b.adjoint() * b));
    } catch (const NoSolutionError& e) {
        throw ConstructionError(std::string("dirac: block Lyapunov solve failed: ") + e.what());
    }
    return build(dm, dm * j, chat, c, s0, block_diag(blocks));
}

struct DiracFields {
    bool singular = true;
    CMatrix v;    // 2 x 2 potential
    CMatrix psi;  // 2 x n solution Pi^* S^{-1}
};

inline CMatrix potential_from_q(const CMatrix& q) { return kI * (q * sigma2() - sigma2() * q); }

inline DiracFields fields(const DiracScenario& sc, double t, double y) {
    InversePoint ip(sc.family, {t, y, 0.0});
    DiracFields f;
    f.singular = ip.singular();
    if (f.singular) return f;
    f.v = potential_from_q(ip.q());
    f.psi = ip.w();
    return f;
}

inline std::optional<CMatrix> potential_v(const DiracScenario& sc, double t, double y) {
    auto f = fields(sc, t, y);
    if (f.singular) return std::nullopt;
    return f.v;
}

/// Analytic H Psi; nullopt at singular points.
inline std::optional<CMatrix> h_psi_analytic(const DiracScenario& sc, const Point& p) {
    InversePoint ip(sc.family, p);
    if (ip.singular()) return std::nullopt;
    const CMatrix v = potential_from_q(ip.q());
    return CMatrix(ip.w(MultiIndex::of(0)) + sigma2() * ip.w(MultiIndex::of(1)) - kI * v * ip.w());
}

/// H_0 Pi^* = (Pi_t)^* + sigma_2 (Pi_y)^*; vanishes by the Chat constraints.
inline CMatrix h0_pi_adjoint(const DiracScenario& sc, const Point& p) {
    FamilyPoint fp(sc.family, p);
    return fp.pi(MultiIndex::of(0)).adjoint() + sigma2() * fp.pi(MultiIndex::of(1)).adjoint();
}

inline PointResidual residual_at(const DiracScenario& sc, const Point& p, const FdSpec& fd) {
    PointResidual out;
    InversePoint ip(sc.family, p);
    if (ip.singular()) {
        out.masked = true;
        return out;
    }
    const CMatrix psi = ip.w();
    const CMatrix v = potential_from_q(ip.q());
    out.field_norm = std::max(psi.norm(), v.norm());
    out.analytic = (ip.w(MultiIndex::of(0)) + sigma2() * ip.w(MultiIndex::of(1)) - kI * v * psi).norm();

    PointFunction psi_fn = [&](const Point& q) -> MaybeMatrix {
        return eval_w(sc.family, q);
    };
    const auto dt = fd_partial(psi_fn, p, 0, 1, fd);
    const auto dy = fd_partial(psi_fn, p, 1, 1, fd);
    if (!dt || !dy) {
        out.masked = true;
        return out;
    }
    out.fd = (*dt + sigma2() * *dy - kI * v * psi).norm();

    const FamilyPoint& fp = ip.family_point();
    const CMatrix pit = fp.pi(MultiIndex::of(0));
    out.premise = (pit.adjoint() + sigma2() * fp.pi(MultiIndex::of(1)).adjoint()).norm() / (1.0 + pit.norm());
    return out;
}

inline ResidualReport residual_dirac(const DiracScenario& sc, const Grid& grid, const FdSpec& fd = {},
                                     const Tolerances& tol = {}, std::size_t workers = 0) {
    return sweep([&](const Point& p) { return residual_at(sc, p, fd); }, grid, tol, workers);
}

}  // namespace pexp::dirac
