#pragma once

// Finite-difference oracle and residual aggregation over tensor grids.

#include "pexp/genexp.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace pexp {

using MaybeMatrix = std::optional<CMatrix>;
using PointFunction = std::function<MaybeMatrix(const Point&)>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct FdSpec {
    int accuracy = 4;
    double h = 1e-3;
};

namespace detail {

struct Stencil {
    std::vector<int> offsets;
    std::vector<double> weights;
    double denom_power;
};

inline Stencil central_stencil(int order, int accuracy) {
    if (order == 1 && accuracy == 2) return {{1, -1}, {0.5, -0.5}, 1};
    if (order == 1 && accuracy == 4) return {{2, 1, -1, -2}, {-1.0 / 12, 8.0 / 12, -8.0 / 12, 1.0 / 12}, 1};
    if (order == 2 && accuracy == 2) return {{1, 0, -1}, {1.0, -2.0, 1.0}, 2};
    if (order == 2 && accuracy == 4)
        return {{2, 1, 0, -1, -2}, {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12}, 2};
    throw std::invalid_argument("central_stencil: order must be 1 or 2 and accuracy 2 or 4");
}

}  // namespace detail

/// Central difference of f along one variable. Any masked stencil point masks
/// the result.
inline MaybeMatrix fd_partial(const PointFunction& f, const Point& p, std::size_t var, int order, int accuracy,
                              double h) {
    if (var >= kMaxVars) throw std::out_of_range("fd_partial: variable index");
    if (!(h > 0.0)) throw std::invalid_argument("fd_partial: step must be positive");
    const auto st = detail::central_stencil(order, accuracy);
    CMatrix acc;
    for (std::size_t i = 0; i < st.offsets.size(); ++i) {
        Point q = p;
        q[var] += st.offsets[i] * h;
        const auto v = f(q);
        if (!v) return std::nullopt;
        if (i == 0)
            acc = st.weights[i] * *v;
        else
            acc += st.weights[i] * *v;
    }
    return CMatrix(acc / std::pow(h, st.denom_power));
}

inline MaybeMatrix fd_partial(const PointFunction& f, const Point& p, std::size_t var, int order, const FdSpec& s) {
    return fd_partial(f, p, var, order, s.accuracy, s.h);
}

/// d^2 f / dv dw as nested first-derivative stencils.
inline MaybeMatrix fd_mixed(const PointFunction& f, const Point& p, std::size_t v, std::size_t w, int accuracy,
                            double h) {
    if (v == w) return fd_partial(f, p, v, 2, accuracy, h);
    PointFunction inner = [&](const Point& q) { return fd_partial(f, q, w, 1, accuracy, h); };
    return fd_partial(inner, p, v, 1, accuracy, h);
}

// ---------------------------------------------------------------------------
// Grids

struct GridAxis {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 2;

    double value(std::size_t i) const {
        if (i + 1 == count) return max;
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
        if (axes_.empty() || axes_.size() > kMaxVars) throw GridError("grid must have 1 to 3 axes");
        for (const auto& a : axes_) {
            if (a.count < 2) throw GridError("grid axis '" + a.name + "' needs count >= 2");
            if (!std::isfinite(a.min) || !std::isfinite(a.max) || !(a.min < a.max))
                throw GridError("grid axis '" + a.name + "' needs finite min < max");
        }
    }

    /// Uniform cube with the same range on each axis.
    static Grid cube(const std::vector<std::string>& names, double lo, double hi, std::size_t count) {
        std::vector<GridAxis> axes;
        for (const auto& n : names) axes.push_back({n, lo, hi, count});
        return Grid(std::move(axes));
    }

    const std::vector<GridAxis>& axes() const noexcept { return axes_; }
    std::size_t dims() const noexcept { return axes_.size(); }

    std::size_t size() const {
        std::size_t n = axes_.empty() ? 0 : 1;
        for (const auto& a : axes_) n *= a.count;
        return n;
    }

    /// Row-major: the first axis varies slowest.
    Point point(std::size_t index) const {
        Point p{};
        for (std::size_t k = axes_.size(); k-- > 0;) {
            p[k] = axes_[k].value(index % axes_[k].count);
            index /= axes_[k].count;
        }
        return p;
    }

private:
    std::vector<GridAxis> axes_;
};

// ---------------------------------------------------------------------------
// Residual reports

/// Residuals at one point. NaN means "path not evaluated". `premise` is
/// already normalised by the family; `analytic` and `fd` are absolute.
struct PointResidual {
    bool masked = false;
    double analytic = kNaN;
    double fd = kNaN;
    double premise = kNaN;
    double field_norm = 0.0;
};

struct Tolerances {
    double analytic = 1e-9;
    double fd = 1e-6;
    double premise = 1e-12;
};

struct ResidualReport {
    Grid grid;
    Tolerances tolerances;
    std::vector<PointResidual> points;
    double field_scale = 0.0;
    double max_rel_analytic = 0.0;
    double mean_rel_analytic = 0.0;
    double max_rel_fd = 0.0;
    double mean_rel_fd = 0.0;
    double max_premise = 0.0;
    bool has_analytic = false;
    bool has_fd = false;
    bool has_premise = false;
    std::size_t singular_count = 0;
    std::size_t failing_points = 0;
    bool pass = true;

    double relative(double absolute) const { return absolute / (1.0 + field_scale); }
};

using ResidualFunction = std::function<PointResidual(const Point&)>;

inline ResidualReport aggregate(Grid grid, std::vector<PointResidual> points, const Tolerances& tol) {
    ResidualReport rep;
    rep.grid = std::move(grid);
    rep.tolerances = tol;
    rep.points = std::move(points);
    for (const auto& r : rep.points) {
        if (r.masked) {
            ++rep.singular_count;
            continue;
        }
        rep.field_scale = std::max(rep.field_scale, r.field_norm);
    }
    std::size_t n_an = 0, n_fd = 0;
    double sum_an = 0.0, sum_fd = 0.0;
    for (const auto& r : rep.points) {
        if (r.masked) continue;
        bool bad = false;
        if (!std::isnan(r.analytic)) {
            rep.has_analytic = true;
            const double rel = rep.relative(r.analytic);
            rep.max_rel_analytic = std::max(rep.max_rel_analytic, rel);
            sum_an += rel;
            ++n_an;
            bad = bad || !(rel <= tol.analytic);
        }
        if (!std::isnan(r.fd)) {
            rep.has_fd = true;
            const double rel = rep.relative(r.fd);
            rep.max_rel_fd = std::max(rep.max_rel_fd, rel);
            sum_fd += rel;
            ++n_fd;
            bad = bad || !(rel <= tol.fd);
        }
        if (!std::isnan(r.premise)) {
            rep.has_premise = true;
            rep.max_premise = std::max(rep.max_premise, r.premise);
            bad = bad || !(r.premise <= tol.premise);
        }
        if (bad) ++rep.failing_points;
    }
    rep.mean_rel_analytic = n_an ? sum_an / static_cast<double>(n_an) : 0.0;
    rep.mean_rel_fd = n_fd ? sum_fd / static_cast<double>(n_fd) : 0.0;
    rep.pass = rep.failing_points == 0;
    return rep;
}

inline std::size_t default_workers() {
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Evaluates f at every grid point; worker w handles indices w, w + workers, ...
template <typename T>
std::vector<T> map_grid(const std::function<T(const Point&)>& f, const Grid& grid, std::size_t workers = 0) {
    const std::size_t n = grid.size();
    std::vector<T> out(n);
    if (workers == 0) workers = default_workers();
    workers = std::max<std::size_t>(1, std::min(workers, n));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](std::size_t first) {
        try {
            for (std::size_t i = first; i < n; i += workers) out[i] = f(grid.point(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// Evaluates `residual` at every grid point, fanning out to `workers` threads
/// (0 = hardware concurrency). Results are stored by grid index, so the report
/// does not depend on scheduling.
inline ResidualReport sweep(const ResidualFunction& residual, const Grid& grid, const Tolerances& tol,
                            std::size_t workers = 0) {
    if (grid.size() == 0) throw GridError("sweep: empty grid");
    return aggregate(grid, map_grid<PointResidual>(residual, grid, workers), tol);
}

}  // namespace pexp
