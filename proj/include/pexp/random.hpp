#pragma once

// Seeded scenario generators. Each draw is chosen so that S (or Lambda_1 for
// Loewner) stays well away from singular on the family's default grid.

#include <random>

#include "pexp/dirac.hpp"
#include "pexp/dsi.hpp"
#include "pexp/gnoe.hpp"
#include "pexp/loewner.hpp"
#include "pexp/schrodinger.hpp"

namespace pexp::random {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    int sign() { return integer(0, 1) == 0 ? -1 : 1; }
    Complex complex_normal() { return {normal(), normal()}; }

    CMatrix matrix(Eigen::Index rows, Eigen::Index cols) {
        CMatrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal();
        return m;
    }

    /// Random matrix with spectrum shifted to Re lambda >= margin (sign = +1)
    /// or Re lambda <= -margin (sign = -1).
    CMatrix half_plane(Eigen::Index n, int side, double spread = 0.3, double margin = 0.3) {
        CMatrix a = spread * matrix(n, n);
        const auto ev = eigenvalues(a).eigenvalues;
        double lo = ev[0].real() * side;
        for (const auto& l : ev) lo = std::min(lo, l.real() * side);
        a += (margin - lo + uniform(0.0, 0.5)) * side * identity(n);
        return a;
    }

    CMatrix positive_definite(Eigen::Index n, double floor = 1.0) {
        const CMatrix g = matrix(n, n);
        return g * g.adjoint() / static_cast<double>(n) + floor * identity(n);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline Grid dirac_grid() { return Grid::cube({"t", "y"}, -1.0, 1.0, 21); }
inline Grid loewner_grid() { return Grid::cube({"x", "y"}, -1.0, 1.0, 21); }
inline Grid schrodinger_grid() { return Grid::cube({"x", "t"}, -1.0, 1.0, 21); }
inline Grid dsi_grid() { return Grid::cube({"x", "t", "y"}, -1.0, 1.0, 9); }
inline Grid gnoe_grid() { return Grid::cube({"x", "t", "y"}, -1.0, 1.0, 9); }

/// Block-diagonal Dirac draw: Re D_1 < 0 and Re D_2 > 0 make R >= 0, and
/// S_0 > 0 keeps S invertible.
inline dirac::DiracScenario dirac_scenario(Rng& rng) {
    const int n = rng.integer(2, 4);
    const int n1 = rng.integer(1, n - 1);
    std::vector<Complex> d;
    for (int i = 0; i < n; ++i) {
        const double re = rng.uniform(0.3, 1.2) * (i < n1 ? -1.0 : 1.0);
        d.emplace_back(re, rng.uniform(-1.0, 1.0));
    }
    const int rows = rng.integer(1, n);
    CVector g1 = rng.matrix(n, 1).col(0);
    return dirac::build_block_diagonal(g1, static_cast<std::size_t>(n1), d, rng.matrix(rows, n),
                                       rng.positive_definite(rows));
}

/// Smallest sigma_min(Lambda_1) / ||Lambda_1|| over a grid.
inline double lambda1_conditioning(const loewner::LoewnerScenario& sc, const Grid& grid) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        FamilyPoint fp(sc.family, grid.point(i));
        const CMatrix l1 = fp.pi_block(0);
        worst = std::min(worst, min_singular_value(l1) / l1.norm());
    }
    return worst;
}

/// m = 2, l_1 = l_2 = 2, n = 2 draw; rejects draws whose Lambda_1 becomes
/// ill-conditioned on the default grid.
inline loewner::LoewnerScenario loewner_scenario(Rng& rng, double min_conditioning = 0.05) {
    const Eigen::Index m = 2, l = 2, n = 2;
    const Grid probe = Grid::cube({"x", "y"}, -1.0, 1.0, 11);
    for (;;) {
        std::vector<double> d{rng.uniform(0.3, 1.2), rng.uniform(-1.2, -0.3)};
        auto sc = loewner::build(d, 0.4 * rng.matrix(l, l), 0.4 * rng.matrix(l, l), rng.matrix(m, l), rng.matrix(m, l),
                                 rng.matrix(m * l, m), rng.matrix(m * l, n));
        if (lambda1_conditioning(sc, probe) >= min_conditioning) return sc;
    }
}

/// Smallest lambda_min(S) / ||S|| over a grid.
inline double s_conditioning(const PseudoExpFamily& family, const Grid& grid) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const CMatrix s = eval_s(family, grid.point(i));
        worst = std::min(worst, min_hermitian_eigenvalue(s) / s.norm());
    }
    return worst;
}

/// Draw satisfying the positivity hypotheses: Re sigma(A) > 0, full-range
/// (A, Chat), C of full row rank, S_0 >= 0 (possibly singular). A positive
/// min_conditioning also rejects draws whose S is nearly singular on [-1, 1]^2,
/// where rounding in S^-1 would dominate the residuals.
inline schrodinger::SchrodingerScenario positive_schrodinger(Rng& rng, double min_conditioning = 0.0) {
    const Grid probe = Grid::cube({"x", "t"}, -1.0, 1.0, 11);
    for (;;) {
        const int big_n = rng.integer(2, 3);
        const int p = rng.integer(1, 2);
        const int n = rng.integer(1, big_n);
        const CMatrix a = rng.half_plane(big_n, +1, 0.4, 0.3);
        const CMatrix chat = rng.matrix(big_n, p);
        const CMatrix c = rng.matrix(n, big_n);
        if (full_range_rank(a, chat) != big_n || numerical_rank(c) != n) continue;
        const int k = rng.integer(0, n);
        const CMatrix g = rng.matrix(n, k);
        const CMatrix s0 = k == 0 ? CMatrix(CMatrix::Zero(n, n)) : CMatrix(g * g.adjoint());
        auto sc = schrodinger::build(a, c, chat, s0);
        if (min_conditioning <= 0.0 || s_conditioning(sc.family, probe) >= min_conditioning) return sc;
    }
}

inline Grid cube_probe() { return Grid::cube({"x", "t", "y"}, -1.0, 1.0, 5); }

/// A_1 stable, A_2 anti-stable: R_1 >= 0 >= R_2 so S >= S_0 > 0. Draws with
/// lambda_min(S) / ||S|| below min_conditioning on [-1, 1]^3 are rejected.
inline dsi::DsiScenario dsi_scenario(Rng& rng, double min_conditioning = 1e-3) {
    const Eigen::Index big_n = 2;
    for (;;) {
        const int m1 = rng.integer(1, 2), m2 = rng.integer(1, 2), n = rng.integer(1, 2);
        const CMatrix a1 = rng.half_plane(big_n, -1, 0.3, 0.2);
        const CMatrix a2 = rng.half_plane(big_n, +1, 0.3, 0.2);
        auto sc = dsi::build(a1, a2, 0.7 * rng.matrix(n, big_n), 0.7 * rng.matrix(n, big_n), rng.matrix(big_n, m1),
                             rng.matrix(big_n, m2), rng.positive_definite(n));
        if (min_conditioning <= 0.0 || s_conditioning(sc.family, cube_probe()) >= min_conditioning) return sc;
    }
}

/// l = 2, m = 2. B = I with stable A or B = -I with anti-stable A, so R >= 0.
/// Same conditioning guard as dsi_scenario.
inline gnoe::GnoeScenario gnoe_scenario(Rng& rng, double min_conditioning = 1e-3) {
    const Eigen::Index l = 2, m = 2;
    for (;;) {
        const int side = rng.sign();
        const CMatrix a = rng.half_plane(l, -side, 0.3, 0.2);
        const int n = rng.integer(1, 3);
        std::vector<double> d{rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
        std::vector<double> dt{rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
        auto sc = gnoe::build(a, rng.matrix(l, m), 0.5 * rng.matrix(n, m * l), d, dt, {side, side},
                              rng.positive_definite(n));
        if (min_conditioning <= 0.0 || s_conditioning(sc.family, cube_probe()) >= min_conditioning) return sc;
    }
}

// Parameter draws for the three Jordan-cell examples.

struct JordanImaginaryParams {  // mu_0 = i*omega, S_0 = [[0, b], [conj b, d]]
    double omega, d, r11;
    Complex b, r12;
};

struct JordanPositiveParams {  // Re mu_0 > 0; d is the S_0 entry (unused for the 1x1 case)
    Complex mu0;
    double d;
};

inline JordanImaginaryParams jordan_imaginary_params(Rng& rng) {
    JordanImaginaryParams p;
    p.omega = rng.uniform(0.3, 1.5) * rng.sign();
    p.d = rng.uniform(0.5, 2.0);
    p.r11 = rng.uniform(-1.0, 2.0);
    p.b = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    p.r12 = {0.5, rng.uniform(-1.0, 1.0)};
    return p;
}

inline JordanPositiveParams jordan_positive_params(Rng& rng) {
    return {{rng.uniform(0.3, 1.5), rng.uniform(-1.0, 1.0)}, rng.uniform(0.2, 3.0)};
}

/// Jordan cell with mu_0 = i omega, Chat = [1; 0], C = I, S_0 = [[0, b], [conj b, d]]
/// and the supplied admissible R.
inline schrodinger::SchrodingerScenario jordan_imaginary_scenario(const JordanImaginaryParams& p) {
    CMatrix chat(2, 1);
    chat << 1.0, 0.0;
    CMatrix s0(2, 2);
    s0 << 0.0, p.b, std::conj(p.b), p.d;
    return schrodinger::build(schrodinger::jordan_cell(kI * p.omega), identity(2), chat, s0,
                              schrodinger::jordan_kappa_zero_r(p.r11, p.r12));
}

/// Jordan cell with Re mu_0 > 0, Chat = [0; 1], C = [1 1], S_0 = 0.
inline schrodinger::SchrodingerScenario jordan_scalar_scenario(const JordanPositiveParams& p) {
    CMatrix chat(2, 1), c(1, 2);
    chat << 0.0, 1.0;
    c << 1.0, 1.0;
    return schrodinger::build(schrodinger::jordan_cell(p.mu0), c, chat, CMatrix::Zero(1, 1));
}

/// Jordan cell with Re mu_0 > 0, Chat = [0; 1], C = I, S_0 = diag(0, d).
inline schrodinger::SchrodingerScenario jordan_matrix_scenario(const JordanPositiveParams& p) {
    CMatrix chat(2, 1);
    chat << 0.0, 1.0;
    CMatrix s0 = CMatrix::Zero(2, 2);
    s0(1, 1) = p.d;
    return schrodinger::build(schrodinger::jordan_cell(p.mu0), identity(2), chat, s0);
}

}  // namespace pexp::random
