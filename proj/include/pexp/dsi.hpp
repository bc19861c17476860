#pragma once

// Matrix Davey-Stewartson I from two S-nodes:
//   Phi_1 = C_1 exp((x + y) A_1 - i t A_1^2) Chat_1,
//   Phi_2 = C_2 exp((x - y) A_2 + i t A_2^2) Chat_2,
//   S = S0 + C_1 E_1 R_1 E_1^* C_1^* - C_2 E_2 R_2 E_2^* C_2^*,
//   A_k R_k + R_k A_k^* = -Chat_k Chat_k^*,
//   u = 2 Phi_2^* S^{-1} Phi_1,
//   q_1 =  u^* u / 2 - 2 (Phi_1^* S^{-1} Phi_1)_y,
//   q_2 = -u u^* / 2 + 2 (Phi_2^* S^{-1} Phi_2)_y.
// Variables are ordered (x, t, y).

#include "pexp/genexp.hpp"
#include "pexp/snode.hpp"
#include "pexp/verify.hpp"

namespace pexp::dsi {

class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kX = 0, kT = 1, kY = 2;

struct DsiScenario {
    CMatrix a1, a2, c1, c2, chat1, chat2, r1, r2, s0;
    PseudoExpFamily family;

    Eigen::Index m1() const { return chat1.cols(); }
    Eigen::Index m2() const { return chat2.cols(); }
    CMatrix j() const {
        CMatrix out = identity(m1() + m2());
        out.bottomRightCorner(m2(), m2()) *= -1.0;
        return out;
    }
};

inline PseudoExpFamily make_family(const DsiScenario& sc) {
    using P = Polynomial;
    ExponentRecipe e1({{P::variable(kX) + P::variable(kY), sc.a1}, {P::variable(kT, -kI), sc.a1 * sc.a1}});
    ExponentRecipe e2({{P::variable(kX) - P::variable(kY), sc.a2}, {P::variable(kT, kI), sc.a2 * sc.a2}});
    std::vector<SRule> rules(3);
    // S_x = -Pi j Pi^* = -Phi_1 Phi_1^* + Phi_2 Phi_2^*
    rules[kX] = {{-1.0, 0, {}, CMatrix(), {}}, {1.0, 1, {}, CMatrix(), {}}};
    // S_t = i (Pi_y j Pi^* - Pi j Pi_y^*)
    const auto dy = MultiIndex::of(kY);
    rules[kT] = {{kI, 0, dy, CMatrix(), {}},
                 {-kI, 0, {}, CMatrix(), dy},
                 {-kI, 1, dy, CMatrix(), {}},
                 {kI, 1, {}, CMatrix(), dy}};
    // S_y = -Pi Pi^*
    rules[kY] = {{-1.0, 0, {}, CMatrix(), {}}, {-1.0, 1, {}, CMatrix(), {}}};
    return PseudoExpFamily({"x", "t", "y"}, {{sc.c1, e1, sc.chat1}, {sc.c2, e2, sc.chat2}}, {{1, 0, sc.r1}, {-1, 1, sc.r2}},
                           sc.s0, std::move(rules));
}

inline DsiScenario build(const CMatrix& a1, const CMatrix& a2, const CMatrix& c1, const CMatrix& c2,
                         const CMatrix& chat1, const CMatrix& chat2, const CMatrix& s0,
                         std::optional<CMatrix> r1 = std::nullopt, std::optional<CMatrix> r2 = std::nullopt) {
    require_square(a1, "dsi A1");
    require_square(a2, "dsi A2");
    if (c1.cols() != a1.rows() || c2.cols() != a2.rows()) throw DimensionError("dsi: C_k must have N_k columns");
    if (c1.rows() != c2.rows()) throw DimensionError("dsi: C_1 and C_2 must have the same row count");
    if (chat1.rows() != a1.rows() || chat2.rows() != a2.rows()) throw DimensionError("dsi: Chat_k must have N_k rows");
    if (s0.rows() != c1.rows() || s0.cols() != c1.rows()) throw DimensionError("dsi: S0 must be n x n");

    auto solve = [](const CMatrix& a, const CMatrix& chat, std::optional<CMatrix> given, int k) {
        CMatrix r;
        if (given) {
            r = *given;
        } else {
            try {
                r = solve_for_r(a, -chat * chat.adjoint());
            } catch (const NoSolutionError& e) {
                throw ConstructionError("dsi: identity " + std::to_string(k) + " has no solution: " + e.what());
            }
        }
        SMultinode node({a}, {-identity(chat.cols())}, r, chat, {1});
        const auto rep = validate(node);
        if (!rep.pass) throw ConstructionError("dsi: identity " + std::to_string(k) + " invalid: " + rep.summary());
        return r;
    };
    DsiScenario sc{a1, a2, c1, c2, chat1, chat2, solve(a1, chat1, r1, 1), solve(a2, chat2, r2, 2), s0, {}};
    sc.family = make_family(sc);
    return sc;
}

struct DsiFields {
    bool singular = true;
    CMatrix u;   // m2 x m1
    CMatrix q1;  // m1 x m1
    CMatrix q2;  // m2 x m2
};

inline DsiFields fields_from(const DsiScenario& sc, const InversePoint& ip) {
    DsiFields f;
    f.singular = ip.singular();
    if (f.singular) return f;
    const auto m1 = sc.m1(), m2 = sc.m2();
    const CMatrix q = ip.q();
    const CMatrix qy = ip.q(MultiIndex::of(kY));
    f.u = 2.0 * q.bottomLeftCorner(m2, m1);
    f.q1 = 0.5 * f.u.adjoint() * f.u - 2.0 * qy.topLeftCorner(m1, m1);
    f.q2 = -0.5 * f.u * f.u.adjoint() + 2.0 * qy.bottomRightCorner(m2, m2);
    return f;
}

inline DsiFields fields_uq(const DsiScenario& sc, double x, double t, double y) {
    return fields_from(sc, InversePoint(sc.family, {x, t, y}));
}

/// Premise identities Pi_x = Pi_y j and Pi_t = -i Pi_yy j, normalised by
/// 1 + ||Pi_x|| and 1 + ||Pi_t||.
inline double premise_residual(const DsiScenario& sc, const Point& p) {
    FamilyPoint fp(sc.family, p);
    const CMatrix j = sc.j();
    const CMatrix px = fp.pi(MultiIndex::of(kX));
    const CMatrix pt = fp.pi(MultiIndex::of(kT));
    const double r1 = (px - fp.pi(MultiIndex::of(kY)) * j).norm() / (1.0 + px.norm());
    const double r2 = (pt + kI * fp.pi(MultiIndex::of(kY, kY)) * j).norm() / (1.0 + pt.norm());
    return std::max(r1, r2);
}

struct DsiEquationResiduals {
    double u_equation = 0.0;   // i u_t - (u_xx + u_yy)/2 - (u q1 - q2 u)
    double q1_equation = 0.0;  // (q1)_x - (q1)_y - ((u^*u)_y + (u^*u)_x)/2
    double q2_equation = 0.0;  // (q2)_x + (q2)_y - ((uu^*)_y - (uu^*)_x)/2
};

/// FD evaluation of the three DS I equations at p; nullopt when any stencil
/// point is singular.
inline std::optional<DsiEquationResiduals> equation_residuals_fd(const DsiScenario& sc, const Point& p, const FdSpec& fd) {
    const auto f0 = fields_uq(sc, p[0], p[1], p[2]);
    if (f0.singular) return std::nullopt;
    auto field = [&](int which) -> PointFunction {
        return [&sc, which](const Point& q) -> MaybeMatrix {
            const auto f = fields_uq(sc, q[0], q[1], q[2]);
            if (f.singular) return std::nullopt;
            switch (which) {
            case 0: return f.u;
            case 1: return f.q1;
            case 2: return f.q2;
            case 3: return CMatrix(f.u.adjoint() * f.u);
            default: return CMatrix(f.u * f.u.adjoint());
            }
        };
    };
    const auto u = field(0), q1 = field(1), q2 = field(2), uu = field(3), uU = field(4);
    const auto ut = fd_partial(u, p, kT, 1, fd);
    const auto uxx = fd_partial(u, p, kX, 2, fd);
    const auto uyy = fd_partial(u, p, kY, 2, fd);
    const auto q1x = fd_partial(q1, p, kX, 1, fd);
    const auto q1y = fd_partial(q1, p, kY, 1, fd);
    const auto q2x = fd_partial(q2, p, kX, 1, fd);
    const auto q2y = fd_partial(q2, p, kY, 1, fd);
    const auto uux = fd_partial(uu, p, kX, 1, fd);
    const auto uuy = fd_partial(uu, p, kY, 1, fd);
    const auto uUx = fd_partial(uU, p, kX, 1, fd);
    const auto uUy = fd_partial(uU, p, kY, 1, fd);
    if (!ut || !uxx || !uyy || !q1x || !q1y || !q2x || !q2y || !uux || !uuy || !uUx || !uUy) return std::nullopt;
    DsiEquationResiduals r;
    r.u_equation = (kI * *ut - 0.5 * (*uxx + *uyy) - (f0.u * f0.q1 - f0.q2 * f0.u)).norm();
    r.q1_equation = (*q1x - *q1y - 0.5 * (*uuy + *uux)).norm();
    r.q2_equation = (*q2x + *q2y - 0.5 * (*uUy - *uUx)).norm();
    return r;
}

inline PointResidual residual_at(const DsiScenario& sc, const Point& p, const FdSpec& fd) {
    PointResidual out;
    const auto f = fields_uq(sc, p[0], p[1], p[2]);
    if (f.singular) {
        out.masked = true;
        return out;
    }
    out.field_norm = std::max({f.u.norm(), f.q1.norm(), f.q2.norm()});
    const auto eq = equation_residuals_fd(sc, p, fd);
    if (!eq) {
        out.masked = true;
        return out;
    }
    out.fd = std::max({eq->u_equation, eq->q1_equation, eq->q2_equation});
    out.premise = premise_residual(sc, p);
    return out;
}

/// FD-only verification (default tolerance 1e-5 relative).
inline ResidualReport residual_dsi(const DsiScenario& sc, const Grid& grid, const FdSpec& fd = {},
                                   Tolerances tol = {1e-9, 1e-5, 1e-12}, std::size_t workers = 0) {
    return sweep([&](const Point& p) { return residual_at(sc, p, fd); }, grid, tol, workers);
}

}  // namespace pexp::dsi
