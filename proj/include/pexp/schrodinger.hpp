#pragma once

// Non-stationary Schroedinger equation  (i d_t + d_xx - q) Psi = 0  with
//   Pi = C e_A Chat,  e_A = exp(x A - i t A^2),  A R + R A^* = Chat Chat^*,
//   S = S0 + C e_A R e_A^* C^*,   Psi = Pi^* S^{-1},
//   q = -2 (Pi^* S^{-1} Pi)_x.

#include "pexp/genexp.hpp"
#include "pexp/snode.hpp"
#include "pexp/verify.hpp"

namespace pexp::schrodinger {

class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SchrodingerScenario {
    CMatrix a, c, chat, r, s0;
    bool r_was_singular_solve = false;  // Lyapunov operator rank deficient
    PseudoExpFamily family;             // variables (x, t)
};

inline PseudoExpFamily make_family(const CMatrix& a, const CMatrix& c, const CMatrix& chat, const CMatrix& r,
                                   const CMatrix& s0) {
    ExponentRecipe recipe({{Polynomial::variable(0), a}, {Polynomial::variable(1, -kI), a * a}});
    std::vector<SRule> rules(2);
    // S_x = Pi Pi^*
    rules[0].push_back({1.0, 0, {}, CMatrix(), {}});
    // S_t = -i (Pi_x Pi^* - Pi Pi_x^*)
    rules[1].push_back({-kI, 0, MultiIndex::of(0), CMatrix(), {}});
    rules[1].push_back({kI, 0, {}, CMatrix(), MultiIndex::of(0)});
    return PseudoExpFamily({"x", "t"}, {{c, recipe, chat}}, {{1, 0, r}}, s0, std::move(rules));
}

inline SchrodingerScenario build(const CMatrix& a, const CMatrix& c, const CMatrix& chat, const CMatrix& s0,
                                 std::optional<CMatrix> r = std::nullopt) {
    require_square(a, "schrodinger A");
    if (c.cols() != a.rows()) throw DimensionError("schrodinger: C must have N columns");
    if (chat.rows() != a.rows()) throw DimensionError("schrodinger: Chat must have N rows");
    if (s0.rows() != c.rows() || s0.cols() != c.rows()) throw DimensionError("schrodinger: S0 must be n x n");
    const CMatrix rhs = chat * chat.adjoint();
    SchrodingerScenario sc{a, c, chat, {}, s0, false, {}};
    if (r) {
        if (r->rows() != a.rows() || r->cols() != a.rows()) throw DimensionError("schrodinger: R must be N x N");
        sc.r = *r;
    } else {
        try {
            auto sol = solve_for_r_ex(a, rhs);
            sc.r = sol.x;
            sc.r_was_singular_solve = sol.singular;
        } catch (const NoSolutionError& e) {
            throw ConstructionError(std::string("schrodinger: A R + R A^* = Chat Chat^* has no solution: ") + e.what());
        }
    }
    SMultinode node({a}, {identity(chat.cols())}, sc.r, chat, {1});
    const auto rep = validate(node);
    if (!rep.pass) throw ConstructionError("schrodinger: S-node invalid: " + rep.summary());
    sc.family = make_family(a, c, chat, sc.r, s0);
    return sc;
}

/// For the 2x2 Jordan cell with Re mu0 = 0 and Chat = [1; 0] the identity
/// leaves a family of Hermitian solutions: r11 real, r12 + conj(r12) = 1,
/// r22 = 0. Returns that R, throwing if (r11, r12) violate the constraints.
inline CMatrix jordan_kappa_zero_r(double r11, Complex r12) {
    if (std::abs(r12.real() - 0.5) > 1e-14) throw std::invalid_argument("jordan_kappa_zero_r: Re r12 must be 1/2");
    CMatrix r(2, 2);
    r << r11, r12, std::conj(r12), 0.0;
    return r;
}

inline CMatrix jordan_cell(Complex mu0) {
    CMatrix a(2, 2);
    a << mu0, 1.0, 0.0, mu0;
    return a;
}

struct SchrodingerFields {
    bool singular = true;
    CMatrix q;    // p x p potential
    CMatrix psi;  // p x n solution Pi^* S^{-1}
};

inline SchrodingerFields fields(const SchrodingerScenario& sc, double x, double t) {
    InversePoint ip(sc.family, {x, t, 0.0});
    SchrodingerFields f;
    f.singular = ip.singular();
    if (f.singular) return f;
    f.q = -2.0 * ip.q(MultiIndex::of(0));
    f.psi = ip.w();
    return f;
}

inline std::optional<CMatrix> potential_q(const SchrodingerScenario& sc, double x, double t) {
    auto f = fields(sc, x, t);
    if (f.singular) return std::nullopt;
    return f.q;
}

inline PointResidual residual_at(const SchrodingerScenario& sc, const Point& p, const FdSpec& fd) {
    PointResidual out;
    InversePoint ip(sc.family, p);
    if (ip.singular()) {
        out.masked = true;
        return out;
    }
    const CMatrix psi = ip.w();
    const CMatrix q = -2.0 * ip.q(MultiIndex::of(0));
    out.field_norm = std::max(psi.norm(), q.norm());
    out.analytic = (kI * ip.w(MultiIndex::of(1)) + ip.w(MultiIndex::of(0, 0)) - q * psi).norm();

    PointFunction psi_fn = [&](const Point& pt) -> MaybeMatrix { return eval_w(sc.family, pt); };
    const auto dt = fd_partial(psi_fn, p, 1, 1, fd);
    const auto dxx = fd_partial(psi_fn, p, 0, 2, fd);
    if (!dt || !dxx) {
        out.masked = true;
        return out;
    }
    out.fd = (kI * *dt + *dxx - q * psi).norm();
    return out;
}

inline ResidualReport residual_schrodinger(const SchrodingerScenario& sc, const Grid& grid, const FdSpec& fd = {},
                                           const Tolerances& tol = {}, std::size_t workers = 0) {
    return sweep([&](const Point& p) { return residual_at(sc, p, fd); }, grid, tol, workers);
}

// ---------------------------------------------------------------------------
// Positivity: sigma(iA) in the open upper half-plane, (A, Chat) full range,
// rank C = n and S0 >= 0 imply S(x, t) > 0.

struct PositivityReport {
    bool spectrum_in_upper_half_plane = false;
    bool full_range = false;
    bool c_full_row_rank = false;
    bool s0_positive_semidefinite = false;
    bool hypotheses_hold = false;
    double min_eigenvalue = std::numeric_limits<double>::infinity();  // over the samples
    bool positive_at_samples = false;  // meaningful only when hypotheses hold
};

inline PositivityReport check_positivity(const SchrodingerScenario& sc, const std::vector<Point>& samples) {
    PositivityReport rep;
    const auto spec = eigenvalues(kI * sc.a);
    rep.spectrum_in_upper_half_plane = true;
    for (const auto& l : spec.eigenvalues)
        if (!(l.imag() > 1e-8)) rep.spectrum_in_upper_half_plane = false;
    rep.full_range = full_range_rank(sc.a, sc.chat) == static_cast<std::size_t>(sc.a.rows());
    rep.c_full_row_rank = numerical_rank(sc.c) == static_cast<std::size_t>(sc.c.rows());
    rep.s0_positive_semidefinite =
        sc.s0.size() == 0 || min_hermitian_eigenvalue(sc.s0) >= -1e-12 * std::max(1.0, sc.s0.norm());
    rep.hypotheses_hold =
        rep.spectrum_in_upper_half_plane && rep.full_range && rep.c_full_row_rank && rep.s0_positive_semidefinite;
    for (const auto& p : samples)
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, min_hermitian_eigenvalue(eval_s(sc.family, p)));
    rep.positive_at_samples = rep.hypotheses_hold && rep.min_eigenvalue > 0.0;
    return rep;
}

}  // namespace pexp::schrodinger
