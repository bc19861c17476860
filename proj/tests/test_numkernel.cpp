#include <cmath>

#include "pexp/random.hpp"
#include "test_util.hpp"

using namespace pexp;
using testutil::mat;
using testutil::near;

TEST(MatExp, ZeroIsIdentity) { EXPECT_TRUE(near(mat_exp(CMatrix::Zero(2, 2)), identity(2), 0.0)); }

TEST(MatExp, JordanCellAtUnitX) {
    const Complex mu0 = kI;
    const CMatrix a = mat({{mu0, 1.0}, {0.0, mu0}});
    const CMatrix expected = std::exp(kI) * mat({{1.0, 1.0}, {0.0, 1.0}});
    EXPECT_TRUE(near(mat_exp(1.0 * a - kI * 0.0 * a * a), expected, 1e-14));
}

TEST(MatExp, Diagonal) {
    const CMatrix m = mat({{Complex(1, 2), 0.0}, {0.0, -3.0}});
    const CMatrix expected = mat({{std::exp(Complex(1, 2)), 0.0}, {0.0, std::exp(-3.0)}});
    EXPECT_TRUE(near(mat_exp(m), expected, 1e-14));
}

TEST(MatExp, RejectsNonSquare) { EXPECT_THROW(mat_exp(CMatrix::Zero(2, 3)), DimensionError); }

TEST(MatExp, CommutingSumFactorises) {
    random::Rng rng(11);
    for (int k = 0; k < 50; ++k) {
        const CMatrix a = 0.5 * rng.matrix(4, 4);
        const CMatrix m1 = 0.3 * a + 0.2 * a * a, m2 = Complex(0.1, -0.4) * a * a * a - 0.7 * a;
        const CMatrix lhs = mat_exp(m1 + m2), rhs = mat_exp(m1) * mat_exp(m2);
        EXPECT_LE((lhs - rhs).norm(), 1e-9 * (1.0 + lhs.norm()));
    }
}

TEST(MatExp, NilpotentMatchesTaylorSum) {
    random::Rng rng(12);
    for (int k = 0; k < 20; ++k) {
        CMatrix m = rng.matrix(4, 4).triangularView<Eigen::StrictlyUpper>();
        CMatrix taylor = identity(4), term = identity(4);
        for (int j = 1; j < 4; ++j) {
            term = term * m / static_cast<double>(j);
            taylor += term;
        }
        const CMatrix e = mat_exp(m);
        EXPECT_LE((e - taylor).norm(), 1e-14 * (1.0 + taylor.norm()));
    }
}

TEST(MatExp, AgreesWithEigenDecomposition) {
    random::Rng rng(13);
    for (int k = 0; k < 20; ++k) {
        const CMatrix a = rng.matrix(5, 5);
        Eigen::ComplexEigenSolver<CMatrix> es(a);
        const CMatrix v = es.eigenvectors();
        const CMatrix ref = v * es.eigenvalues().array().exp().matrix().asDiagonal() * v.inverse();
        EXPECT_LE((mat_exp(a) - ref).norm(), 1e-10 * (1.0 + ref.norm()));
    }
}

TEST(Sylvester, IdentityShift) {
    random::Rng rng(14);
    const CMatrix q = rng.matrix(3, 2);
    EXPECT_TRUE(near(solve_sylvester(identity(3), identity(2), q), q / 2.0, 1e-14));
}

TEST(Sylvester, JordanLyapunovKappaTwo) {
    const CMatrix a = mat({{1.0, 1.0}, {0.0, 1.0}});
    const CMatrix x = solve_sylvester(a, a.adjoint(), mat({{0.0, 0.0}, {0.0, 1.0}}));
    EXPECT_TRUE(near(x, mat({{0.25, -0.25}, {-0.25, 0.5}}), 1e-12));
}

TEST(Sylvester, InconsistentScalarThrows) {
    const CMatrix a = mat({{kI}});
    try {
        solve_sylvester(a, a.adjoint(), mat({{1.0}}));
        FAIL() << "expected NoSolutionError";
    } catch (const NoSolutionError& e) {
        EXPECT_NEAR(e.residual(), 1.0, 1e-12);
    }
}

TEST(Sylvester, DimensionMismatch) {
    EXPECT_THROW(solve_sylvester(identity(2), identity(2), CMatrix::Zero(3, 2)), DimensionError);
}

TEST(Sylvester, SingularConsistentIsMinNorm) {
    // A = i*I_1: A X + X A^* = 0 for every X, so Q = 0 gives X = 0.
    const auto sol = solve_sylvester_ex(mat({{kI}}), mat({{-kI}}), mat({{0.0}}));
    EXPECT_TRUE(sol.singular);
    EXPECT_EQ(sol.x.norm(), 0.0);
}

TEST(Sylvester, RandomWellPosedResidualBound) {
    random::Rng rng(15);
    for (int k = 0; k < 1000; ++k) {
        const int n = rng.integer(1, 4), m = rng.integer(1, 4);
        // spectrum of A in Re >= 0.25, spectrum of -B in Re <= -0.25: separation >= 0.5
        const CMatrix a = rng.half_plane(n, +1, 0.5, 0.25);
        const CMatrix b = rng.half_plane(m, +1, 0.5, 0.25);
        const CMatrix q = rng.matrix(n, m);
        const CMatrix x = solve_sylvester(a, b, q);
        ASSERT_LE((a * x + x * b - q).norm(), 1e-10 * (1.0 + q.norm()));
    }
}

TEST(Sylvester, LyapunovIsSymmetrised) {
    random::Rng rng(16);
    const CMatrix a = rng.half_plane(3, +1);
    const CMatrix g = rng.matrix(3, 2);
    const CMatrix q = g * g.adjoint();
    const CMatrix x = solve_sylvester(a, a.adjoint(), q);
    EXPECT_EQ(hermitian_defect(x), 0.0);
    EXPECT_LE((a * x + x * a.adjoint() - q).norm(), 1e-10 * (1.0 + q.norm()));
}

TEST(Kron, Definitions) {
    const CMatrix b = mat({{1.0, 2.0}, {3.0, kI}});
    EXPECT_TRUE(near(kron(identity(2), b), block_diag({b, b}), 0.0));
    EXPECT_TRUE(near(kron(mat({{2.0, 0.0}, {0.0, -1.0}}), b), block_diag({2.0 * b, -1.0 * b}), 0.0));
    EXPECT_TRUE(near(kron(mat({{0.0, 1.0}, {0.0, 0.0}}), mat({{2.0}})), mat({{0.0, 2.0}, {0.0, 0.0}}), 0.0));
}

TEST(HermitianSolve, Cases) {
    random::Rng rng(17);
    const CMatrix q = rng.matrix(3, 2);
    EXPECT_TRUE(near(*solve_hermitian_system(identity(3), q), q, 0.0));
    EXPECT_TRUE(near(*solve_hermitian_system(mat({{0.25}}), mat({{1.0}})), mat({{4.0}}), 1e-15));
    EXPECT_FALSE(solve_hermitian_system(CMatrix::Zero(2, 2), q.topRows(2)).has_value());
    EXPECT_THROW(solve_hermitian_system(identity(2), q), DimensionError);
}

TEST(HermitianSolve, NearSingularPivotIsFlagged) {
    const CMatrix s = mat({{1.0, 1.0}, {1.0, 1.0 + 1e-14}});
    EXPECT_FALSE(solve_hermitian_system(s, identity(2)).has_value());
}

TEST(Eigenvalues, Simple) {
    auto ev = eigenvalues(mat({{1.0, 0.0}, {0.0, 2.0}})).eigenvalues;
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
    EXPECT_NEAR(std::abs(ev[0] - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(ev[1] - 2.0), 0.0, 1e-14);
    const Complex mu0(0.3, -1.2);
    for (const auto& l : eigenvalues(schrodinger::jordan_cell(mu0)).eigenvalues) EXPECT_LT(std::abs(l - mu0), 1e-7);
}

TEST(Eigenvalues, DeterminantAndTraceOracle) {
    random::Rng rng(18);
    for (int k = 0; k < 50; ++k) {
        const CMatrix a = rng.matrix(4, 4);
        const auto info = eigenvalues(a);
        ASSERT_EQ(info.eigenvalues.size(), 4u);
        Complex sum = 0.0;
        for (const auto& l : info.eigenvalues) {
            sum += l;
            EXPECT_LT(std::abs((a - l * identity(4)).determinant()), 1e-9 * std::pow(1.0 + a.norm(), 4));
        }
        EXPECT_LE(std::abs(sum - a.trace()), 1e-9 * a.norm());
    }
}

TEST(Eigenvalues, DurandKernerFallbackAgrees) {
    random::Rng rng(19);
    const CMatrix a = rng.matrix(5, 5);
    const auto dk = detail::eigenvalues_durand_kerner(a);
    EXPECT_EQ(dk.method, "durand-kerner");
    EXPECT_LT(dk.residual_bound, 1e-8);
    Complex sum = 0.0;
    for (const auto& l : dk.eigenvalues) sum += l;
    EXPECT_LE(std::abs(sum - a.trace()), 1e-9 * a.norm());
}

TEST(Eigenvalues, RejectsLarge) { EXPECT_THROW(eigenvalues(CMatrix::Zero(33, 33)), DimensionError); }

TEST(FullRange, JordanCell) {
    const CMatrix a = schrodinger::jordan_cell(Complex(0.7, 0.1));
    EXPECT_EQ(full_range_rank(a, mat({{0.0}, {1.0}})), 2u);
    EXPECT_EQ(full_range_rank(a, mat({{1.0}, {0.0}})), 1u);
    EXPECT_EQ(full_range_rank(a, CMatrix::Zero(2, 1)), 0u);
}
