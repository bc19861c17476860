#include "pexp/random.hpp"
#include "test_util.hpp"

using namespace pexp;
using testutil::mat;
using testutil::near;

TEST(SolveForR, JordanCellKappaTwo) {
    const CMatrix r = solve_for_r(mat({{1.0, 1.0}, {0.0, 1.0}}), mat({{0.0, 0.0}, {0.0, 1.0}}));
    EXPECT_TRUE(near(r, mat({{0.25, -0.25}, {-0.25, 0.5}}), 1e-12));
}

TEST(SolveForR, Scalar) { EXPECT_TRUE(near(solve_for_r(mat({{1.0}}), mat({{-2.0}})), mat({{-1.0}}), 1e-14)); }

TEST(SolveForR, ZeroRhsUnique) {
    random::Rng rng(21);
    EXPECT_EQ(solve_for_r(rng.half_plane(3, +1), CMatrix::Zero(3, 3)).norm(), 0.0);
}

TEST(SolveForR, RejectsNonHermitianRhs) {
    EXPECT_THROW(solve_for_r(identity(2), mat({{0.0, 1.0}, {0.0, 0.0}})), std::invalid_argument);
}

TEST(SolveForR, ImaginaryJordanIsSingularConsistentMinNorm) {
    const CMatrix a = schrodinger::jordan_cell(kI);
    const auto sol = solve_for_r_ex(a, mat({{1.0, 0.0}, {0.0, 0.0}}));
    EXPECT_TRUE(sol.singular);
    EXPECT_TRUE(near(sol.x, mat({{0.0, 0.5}, {0.5, 0.0}}), 1e-12));
}

TEST(SolveForR, ScalingCovariance) {
    random::Rng rng(22);
    const CMatrix a = rng.half_plane(3, -1);
    const CMatrix chat = rng.matrix(3, 2);
    const CMatrix r1 = solve_for_r(a, chat * chat.adjoint());
    const double c = 1.7;
    const CMatrix r2 = solve_for_r(a, (c * chat) * (c * chat).adjoint());
    EXPECT_TRUE(near(r2, c * c * r1, 1e-12 * r2.norm()));
}

namespace {
SMultinode dirac_node() {
    const CMatrix chat = mat({{1.0, kI}, {1.0, -kI}});
    const CMatrix d = mat({{1.0, 0.0}, {0.0, 2.0}});
    const CMatrix j = mat({{1.0, 0.0}, {0.0, -1.0}});
    return SMultinode({d, d * j}, {dirac::sigma2(), -identity(2)}, mat({{-1.0, 0.0}, {0.0, 0.5}}), chat, {1, 1});
}
}  // namespace

TEST(Validate, DiracTwoNodePasses) {
    const auto node = dirac_node();
    const auto rep = validate(node);
    EXPECT_TRUE(rep.pass) << rep.summary();
    EXPECT_TRUE(near(node.identity_rhs(0), mat({{-2.0, 0.0}, {0.0, 2.0}}), 1e-15));
    EXPECT_TRUE(near(node.identity_rhs(1), mat({{-2.0, 0.0}, {0.0, -2.0}}), 1e-15));
}

TEST(Validate, PerturbedRFails) {
    const auto node = dirac_node();
    CMatrix r = node.r();
    r(0, 0) += 1e-3;
    const SMultinode bad(node.a(), node.nu(), r, node.chat(), node.signs());
    const auto rep = validate(bad);
    EXPECT_FALSE(rep.pass);
    EXPECT_NEAR(rep.identity_residuals[0], 2e-3, 1e-9);
}

TEST(Validate, SolvedSingleNodePasses) {
    random::Rng rng(23);
    const CMatrix a = rng.half_plane(3, +1);
    const CMatrix chat = rng.matrix(3, 2);
    const SMultinode node({a}, {identity(2)}, solve_for_r(a, chat * chat.adjoint()), chat, {1});
    EXPECT_TRUE(validate(node).pass);
}

TEST(Validate, NonCommutingFails) {
    const CMatrix a1 = mat({{0.0, 1.0}, {0.0, 0.0}}), a2 = mat({{0.0, 0.0}, {1.0, 0.0}});
    const SMultinode node({a1, a2}, {identity(1), identity(1)}, CMatrix::Zero(2, 2), CMatrix::Zero(2, 1), {1, 1});
    const auto rep = validate(node);
    EXPECT_FALSE(rep.pass);
    EXPECT_GT(rep.commutator_norms[0], 0.5);
}

TEST(SMultinode, ConstructionChecks) {
    EXPECT_THROW(SMultinode({identity(2)}, {mat({{0.0, 1.0}, {0.0, 0.0}})}, identity(2), identity(2), {1}),
                 std::invalid_argument);
    EXPECT_THROW(SMultinode({identity(2)}, {identity(2)}, identity(2), identity(2), {2}), std::invalid_argument);
    EXPECT_THROW(SMultinode({identity(2)}, {identity(3)}, identity(2), identity(2), {1}), DimensionError);
}

TEST(BlockDiagR, SingleBlockMatchesSolve) {
    random::Rng rng(24);
    const CMatrix a = rng.half_plane(2, +1);
    const CVector col = rng.matrix(2, 1).col(0);
    EXPECT_TRUE(near(build_block_diag_r(a, {col}, {-1}), solve_for_r(a, -1.0 * col * col.adjoint()), 0.0));
}

TEST(BlockDiagR, DiagonalClosedForm) {
    const std::vector<Complex> ad{Complex(1.0, 0.5), Complex(2.0, -1.0)};
    const CMatrix a = diag(ad);
    CVector c1(2), c2(2);
    c1 << 1.0, Complex(0.0, 2.0);
    c2 << Complex(-1.0, 1.0), 0.5;
    const CMatrix r = build_block_diag_r(a, {c1, c2}, {1, -1});
    const std::vector<CVector> cols{c1, c2};
    const int signs[] = {1, -1};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const Complex expected =
                    static_cast<double>(signs[k]) * cols[k](i) * std::conj(cols[k](j)) / (ad[i] + std::conj(ad[j]));
                EXPECT_LT(std::abs(r(2 * k + i, 2 * k + j) - expected), 1e-14);
            }
    EXPECT_EQ(r.block(0, 2, 2, 2).norm(), 0.0);
}

TEST(BlockDiagR, ZeroColumns) {
    random::Rng rng(25);
    const CVector z = CVector::Zero(2);
    EXPECT_EQ(build_block_diag_r(rng.half_plane(2, +1), {z, z, z}, {1, -1, 1}).norm(), 0.0);
}

TEST(BlockDiagR, ErrorNamesBlock) {
    const CMatrix a = mat({{kI}});
    CVector zero(1), one(1);
    zero << 0.0;
    one << 1.0;
    try {
        build_block_diag_r(a, {zero, one}, {1, 1});
        FAIL() << "expected BlockSolveError";
    } catch (const BlockSolveError& e) {
        EXPECT_EQ(e.block(), 1u);
        EXPECT_NE(std::string(e.what()).find("block 2"), std::string::npos);
    }
}
