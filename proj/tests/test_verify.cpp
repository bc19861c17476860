#include <cmath>

#include "pexp/random.hpp"
#include "test_util.hpp"

using namespace pexp;
using testutil::mat;
using testutil::near;

TEST(FdPartial, ConstantHasZeroDerivatives) {
    const CMatrix m = mat({{1.0, kI}});
    PointFunction f = [&](const Point&) -> MaybeMatrix { return m; };
    for (int acc : {2, 4}) {
        // Stencil weights cancel only up to rounding, amplified by 1/h^order.
        EXPECT_LE(fd_partial(f, {0.3, 0, 0}, 0, 1, acc, 1e-3)->norm(), 1e-12);
        EXPECT_LE(fd_partial(f, {0.3, 0, 0}, 0, 2, acc, 1e-3)->norm(), 1e-9);
    }
}

TEST(FdPartial, QuadraticSecondDerivative) {
    const CMatrix m = mat({{1.0, 2.0}, {kI, -3.0}});
    PointFunction f = [&](const Point& p) -> MaybeMatrix { return CMatrix(p[0] * p[0] * m); };
    EXPECT_TRUE(near(*fd_partial(f, {1.0, 0, 0}, 0, 2, 4, 1e-2), 2.0 * m, 1e-8));
}

TEST(FdPartial, OrderFourSlope) {
    PointFunction f = [](const Point& p) -> MaybeMatrix { return mat({{std::exp(Complex(p[1], 0.5 * p[1]))}}); };
    const Point p{0.0, 0.3, 0.0};
    const Complex z(1.0, 0.5);
    for (int order : {1, 2}) {
        const Complex exact = std::pow(z, order) * std::exp(z * 0.3);
        std::vector<double> err;
        for (double h : {1e-1, 1e-2, 1e-3}) err.push_back(std::abs((*fd_partial(f, p, 1, order, 4, h))(0, 0) - exact));
        // fit over the first two decades; the last one already sits near roundoff for order 2
        const double slope1 = std::log10(err[0] / err[1]);
        EXPECT_NEAR(slope1, 4.0, 0.3) << "order " << order;
        if (order == 1) EXPECT_NEAR(std::log10(err[1] / err[2]), 4.0, 0.3);
    }
}

TEST(FdPartial, MaskingIsContagious) {
    PointFunction f = [](const Point& p) -> MaybeMatrix {
        if (std::abs(p[0] - 0.002) < 1e-12) return std::nullopt;
        return mat({{p[0]}});
    };
    EXPECT_FALSE(fd_partial(f, {0.0, 0, 0}, 0, 1, 4, 1e-3).has_value());
    EXPECT_TRUE(fd_partial(f, {0.0, 0, 0}, 0, 1, 2, 1e-3).has_value());
    EXPECT_FALSE(fd_mixed(f, {0.0, 0, 0}, 0, 1, 4, 1e-3).has_value());
}

TEST(FdPartial, RejectsUnsupportedStencils) {
    PointFunction f = [](const Point&) -> MaybeMatrix { return mat({{1.0}}); };
    EXPECT_THROW(fd_partial(f, {0, 0, 0}, 0, 3, 4, 1e-3), std::invalid_argument);
    EXPECT_THROW(fd_partial(f, {0, 0, 0}, 0, 1, 6, 1e-3), std::invalid_argument);
}

TEST(FdMixed, Bilinear) {
    PointFunction f = [](const Point& p) -> MaybeMatrix { return mat({{p[0] * p[2] * 3.0}}); };
    EXPECT_NEAR((*fd_mixed(f, {0.4, 0.0, -1.0}, 0, 2, 4, 1e-2))(0, 0).real(), 3.0, 1e-10);
}

TEST(FdPartial, CrossOracleAgainstAnalyticPi) {
    random::Rng rng(41);
    const auto sc = random::gnoe_scenario(rng);
    const Point p{0.1, -0.2, 0.3};
    PointFunction f = [&](const Point& q) -> MaybeMatrix { return eval_pi(sc.family, q); };
    const double scale = 1.0 + eval_pi(sc.family, p).norm();
    for (std::size_t v = 0; v < 3; ++v)
        EXPECT_LE((*fd_partial(f, p, v, 1, FdSpec{}) - eval_pi(sc.family, p, MultiIndex::of(v))).norm(), 1e-7 * scale);
}

TEST(Grid, ValidationAndOrdering) {
    EXPECT_THROW(Grid({{"x", 1.0, 1.0, 3}}), GridError);
    EXPECT_THROW(Grid({{"x", 2.0, 1.0, 3}}), GridError);
    EXPECT_THROW(Grid({{"x", 0.0, 1.0, 1}}), GridError);
    EXPECT_THROW(Grid(std::vector<GridAxis>{}), GridError);
    const Grid g({{"x", 0.0, 1.0, 3}, {"t", -1.0, 1.0, 2}});
    EXPECT_EQ(g.size(), 6u);
    EXPECT_EQ(g.point(0), (Point{0.0, -1.0, 0.0}));
    EXPECT_EQ(g.point(1), (Point{0.0, 1.0, 0.0}));
    EXPECT_EQ(g.point(5), (Point{1.0, 1.0, 0.0}));
}

TEST(Sweep, ZeroResidualPasses) {
    const auto rep = sweep([](const Point&) { return PointResidual{false, 0.0, 0.0, 0.0, 1.0}; },
                           Grid::cube({"x", "y"}, 0, 1, 5), {});
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.max_rel_analytic, 0.0);
    EXPECT_EQ(rep.failing_points, 0u);
}

TEST(Sweep, ConstantResidualFails) {
    const auto rep = sweep([](const Point&) { return PointResidual{false, 1e-3, kNaN, kNaN, 0.0}; },
                           Grid::cube({"x"}, 0, 1, 4), {1e-6, 1e-6, 1e-12});
    EXPECT_FALSE(rep.pass);
    EXPECT_EQ(rep.failing_points, 4u);
    EXPECT_DOUBLE_EQ(rep.max_rel_analytic, 1e-3);
}

TEST(Sweep, MaskedPointsAreCountedAndExcluded) {
    const auto rep = sweep(
        [](const Point& p) {
            if (p[0] > 0.5) return PointResidual{true};
            return PointResidual{false, 0.0, kNaN, kNaN, 2.0};
        },
        Grid::cube({"x"}, 0, 1, 5), {});
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.singular_count, 2u);
    EXPECT_DOUBLE_EQ(rep.field_scale, 2.0);
    EXPECT_DOUBLE_EQ(rep.relative(3.0), 1.0);
}

TEST(Sweep, WorkerCountDoesNotChangeResult) {
    random::Rng rng(42);
    const auto sc = random::dirac_scenario(rng);
    const auto grid = Grid::cube({"t", "y"}, -1, 1, 7);
    const auto a = dirac::residual_dirac(sc, grid, {}, {}, 1);
    const auto b = dirac::residual_dirac(sc, grid, {}, {}, 3);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].analytic, b.points[i].analytic);
        EXPECT_EQ(a.points[i].fd, b.points[i].fd);
    }
    EXPECT_EQ(a.max_rel_fd, b.max_rel_fd);
}

TEST(Sweep, PropagatesWorkerExceptions) {
    EXPECT_THROW(sweep([](const Point&) -> PointResidual { throw std::runtime_error("boom"); },
                       Grid::cube({"x"}, 0, 1, 4), {}, 2),
                 std::runtime_error);
}

TEST(Sweep, EmptyGridThrows) {
    EXPECT_THROW(sweep([](const Point&) { return PointResidual{}; }, Grid(), {}), GridError);
}
