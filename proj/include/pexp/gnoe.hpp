#pragma once

// Generalised nonlinear optics (N-wave) equation
//   [D, xi_t] - [Dt, xi_x] = [[D, xi], [Dt, xi]] + D xi_y Dt - Dt xi_y D,
//   xi^* = B xi B,
// from  Pi = C exp(x D(x)A + t Dt(x)A + y I(x)A) Chat,
//       Chat = sum_k (e_k e_k^*) (x) (chat e_k),  R = diag(R_11, ..., R_mm),
//       A R_kk + R_kk A^* = -b_k (chat e_k)(chat e_k)^*,
//       xi = Pi^* S^{-1} Pi B.
// Variables are ordered (x, t, y).

#include "pexp/genexp.hpp"
#include "pexp/snode.hpp"
#include "pexp/verify.hpp"

namespace pexp::gnoe {

class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kX = 0, kT = 1, kY = 2;

struct GnoeScenario {
    CMatrix a;       // l x l
    CMatrix chat_small;  // l x m
    CMatrix c;       // n x N, N = m l
    std::vector<double> d, dtilde;
    std::vector<int> b;
    CMatrix s0;
    CMatrix r;                // block diagonal
    CMatrix a1, a2, a3, chat;  // Kronecker-structured node
    PseudoExpFamily family;

    Eigen::Index m() const { return static_cast<Eigen::Index>(d.size()); }
    CMatrix d_matrix() const { return diag(std::vector<Complex>(d.begin(), d.end())); }
    CMatrix dtilde_matrix() const { return diag(std::vector<Complex>(dtilde.begin(), dtilde.end())); }
    CMatrix b_matrix() const { return diag(std::vector<Complex>(b.begin(), b.end())); }
};

/// sum_k (e_k e_k^*) (x) (chat e_k): column k carries chat's column k in block k.
inline CMatrix assemble_chat(const CMatrix& chat_small) {
    const Eigen::Index l = chat_small.rows(), m = chat_small.cols();
    CMatrix out = CMatrix::Zero(m * l, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        CMatrix ek = CMatrix::Zero(m, m);
        ek(k, k) = 1.0;
        out += kron(ek, chat_small.col(k));
    }
    return out;
}

inline GnoeScenario build(const CMatrix& a, const CMatrix& chat_small, const CMatrix& c, const std::vector<double>& d,
                          const std::vector<double>& dtilde, const std::vector<int>& b, const CMatrix& s0) {
    require_square(a, "gnoe A");
    const auto l = a.rows();
    const auto m = static_cast<Eigen::Index>(d.size());
    if (m == 0) throw DimensionError("gnoe: D is empty");
    if (static_cast<Eigen::Index>(dtilde.size()) != m || static_cast<Eigen::Index>(b.size()) != m)
        throw DimensionError("gnoe: D, Dtilde and B must have the same length");
    if (chat_small.rows() != l || chat_small.cols() != m) throw DimensionError("gnoe: chat must be l x m");
    if (c.cols() != m * l) throw DimensionError("gnoe: C must have m*l columns");
    if (s0.rows() != c.rows() || s0.cols() != c.rows()) throw DimensionError("gnoe: S0 must be n x n");
    for (Eigen::Index k = 0; k < m; ++k) {
        if (!(d[k] > 0.0) || !(dtilde[k] > 0.0)) throw std::invalid_argument("gnoe: D and Dtilde must be positive");
        if (b[k] != 1 && b[k] != -1) throw std::invalid_argument("gnoe: B entries must be +1 or -1");
    }

    GnoeScenario sc{a, chat_small, c, d, dtilde, b, s0, {}, {}, {}, {}, {}, {}};
    std::vector<CVector> columns;
    std::vector<int> signs;
    for (Eigen::Index k = 0; k < m; ++k) {
        columns.push_back(chat_small.col(k));
        signs.push_back(-b[k]);
    }
    try {
        sc.r = build_block_diag_r(a, columns, signs);
    } catch (const BlockSolveError& e) {
        throw ConstructionError(std::string("gnoe: ") + e.what());
    }

    const CMatrix dm = sc.d_matrix(), dt = sc.dtilde_matrix(), bm = sc.b_matrix();
    sc.a1 = kron(dm, a);
    sc.a2 = kron(dt, a);
    sc.a3 = kron(identity(m), a);
    sc.chat = assemble_chat(chat_small);

    // A_1 R + R A_1^* = -Chat B D Chat^*, A_2: B Dt, A_3: B.
    SMultinode node({sc.a1, sc.a2, sc.a3}, {bm * dm, bm * dt, bm}, sc.r, sc.chat, {-1, -1, -1});
    const auto rep = validate(node);
    if (!rep.pass) throw ConstructionError("gnoe: assembled 3-node invalid: " + rep.summary());

    ExponentRecipe recipe(
        {{Polynomial::variable(kX), sc.a1}, {Polynomial::variable(kT), sc.a2}, {Polynomial::variable(kY), sc.a3}});
    std::vector<SRule> rules(3);
    rules[kX] = {{-1.0, 0, {}, CMatrix(bm * dm), {}}};
    rules[kT] = {{-1.0, 0, {}, CMatrix(bm * dt), {}}};
    rules[kY] = {{-1.0, 0, {}, bm, {}}};
    sc.family = PseudoExpFamily({"x", "t", "y"}, {{c, recipe, sc.chat}}, {{1, 0, sc.r}}, s0, std::move(rules));
    return sc;
}

inline std::optional<CMatrix> xi(const GnoeScenario& sc, double x, double t, double y) {
    InversePoint ip(sc.family, {x, t, y});
    if (ip.singular()) return std::nullopt;
    return CMatrix(ip.q() * sc.b_matrix());
}

/// ||xi^* - B xi B||
inline double reduction_defect(const GnoeScenario& sc, const CMatrix& x) {
    const CMatrix bm = sc.b_matrix();
    return (x.adjoint() - bm * x * bm).norm();
}

inline CMatrix equation_lhs_minus_rhs(const GnoeScenario& sc, const CMatrix& x, const CMatrix& xx, const CMatrix& xt,
                                      const CMatrix& xy) {
    const CMatrix dm = sc.d_matrix(), dt = sc.dtilde_matrix();
    return commutator(dm, xt) - commutator(dt, xx) - commutator(commutator(dm, x), commutator(dt, x)) - dm * xy * dt +
           dt * xy * dm;
}

/// max of ||Pi_x - Pi_y D|| / (1 + ||Pi_x||) and the same for Pi_t, Dt.
inline double premise_residual(const GnoeScenario& sc, const Point& p) {
    FamilyPoint fp(sc.family, p);
    const CMatrix px = fp.pi(MultiIndex::of(kX));
    const CMatrix pt = fp.pi(MultiIndex::of(kT));
    const CMatrix py = fp.pi(MultiIndex::of(kY));
    return std::max((px - py * sc.d_matrix()).norm() / (1.0 + px.norm()),
                    (pt - py * sc.dtilde_matrix()).norm() / (1.0 + pt.norm()));
}

inline PointResidual residual_at(const GnoeScenario& sc, const Point& p, const FdSpec& fd) {
    PointResidual out;
    InversePoint ip(sc.family, p);
    if (ip.singular()) {
        out.masked = true;
        return out;
    }
    const CMatrix bm = sc.b_matrix();
    const CMatrix x0 = ip.q() * bm;
    out.field_norm = x0.norm();
    out.analytic = equation_lhs_minus_rhs(sc, x0, ip.q(MultiIndex::of(kX)) * bm, ip.q(MultiIndex::of(kT)) * bm,
                                          ip.q(MultiIndex::of(kY)) * bm)
                       .norm();

    PointFunction xi_fn = [&](const Point& q) -> MaybeMatrix { return xi(sc, q[0], q[1], q[2]); };
    const auto dx = fd_partial(xi_fn, p, kX, 1, fd);
    const auto dt = fd_partial(xi_fn, p, kT, 1, fd);
    const auto dy = fd_partial(xi_fn, p, kY, 1, fd);
    if (!dx || !dt || !dy) {
        out.masked = true;
        return out;
    }
    out.fd = equation_lhs_minus_rhs(sc, x0, *dx, *dt, *dy).norm();
    out.premise = premise_residual(sc, p);
    return out;
}

inline ResidualReport residual_gnoe(const GnoeScenario& sc, const Grid& grid, const FdSpec& fd = {},
                                    const Tolerances& tol = {}, std::size_t workers = 0) {
    return sweep([&](const Point& p) { return residual_at(sc, p, fd); }, grid, tol, workers);
}

}  // namespace pexp::gnoe
