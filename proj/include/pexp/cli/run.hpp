#pragma once

// Config parsing, grid evaluation, field export and residual reporting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pexp/cli/scenarios.hpp"

namespace pexp::cli {

enum ExitCode : int { kExitPass = 0, kExitResidual = 1, kExitConfig = 2, kExitConstruction = 3 };

struct OutputSpec {
    std::vector<std::string> fields;  // empty = all
    std::string format = "csv";
    std::string path;
};

struct RunConfig {
    std::string family;
    json params;
    std::optional<Grid> grid;
    FdSpec fd;
    std::optional<json> tolerance;
    OutputSpec output;
    std::uint64_t seed = 0;
    std::string source;  // file stem, used for the default output path
};

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

inline Grid parse_grid(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("grid: expected a non-empty array of axes");
    std::vector<GridAxis> axes;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = "grid[" + std::to_string(i) + "]";
        const auto& a = j[i];
        const auto& name = member(a, "name", w);
        const auto& count = member(a, "count", w);
        if (!name.is_string()) throw ConfigError(w + ".name: expected a string");
        if (!count.is_number_integer() || count.get<long long>() < 2) throw ConfigError(w + ".count: expected an integer >= 2");
        axes.push_back({name.get<std::string>(), parse_real(member(a, "min", w), w + ".min"),
                        parse_real(member(a, "max", w), w + ".max"), count.get<std::size_t>()});
    }
    try {
        return Grid(std::move(axes));
    } catch (const GridError& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

inline RunConfig parse_config(const json& j, std::string source = "scenario") {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    RunConfig cfg;
    cfg.source = std::move(source);
    const auto& fam = member(j, "family", "config");
    if (!fam.is_string()) throw ConfigError("family: expected a string");
    cfg.family = fam.get<std::string>();
    if (std::find(families().begin(), families().end(), cfg.family) == families().end())
        throw ConfigError("family: unknown family '" + cfg.family + "'");
    cfg.params = member(j, "params", "config");
    if (auto it = j.find("grid"); it != j.end()) cfg.grid = parse_grid(*it);
    if (auto it = j.find("verify"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("verify: expected an object");
        if (auto h = it->find("h"); h != it->end()) {
            cfg.fd.h = parse_real(*h, "verify.h");
            if (!(cfg.fd.h > 0.0)) throw ConfigError("verify.h: must be positive");
        }
        if (auto a = it->find("accuracy"); a != it->end()) {
            if (!a->is_number_integer() || (a->get<int>() != 2 && a->get<int>() != 4))
                throw ConfigError("verify.accuracy: must be 2 or 4");
            cfg.fd.accuracy = a->get<int>();
        }
        if (auto t = it->find("tolerance"); t != it->end()) {
            if (!t->is_object()) throw ConfigError("verify.tolerance: expected an object");
            cfg.tolerance = *t;
        }
    }
    if (auto it = j.find("output"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("output: expected an object");
        if (auto f = it->find("fields"); f != it->end()) {
            if (!f->is_array()) throw ConfigError("output.fields: expected an array of names");
            for (const auto& n : *f) {
                if (!n.is_string()) throw ConfigError("output.fields: expected strings");
                cfg.output.fields.push_back(n.get<std::string>());
            }
        }
        if (auto f = it->find("format"); f != it->end()) {
            if (!f->is_string() || (f->get<std::string>() != "csv" && f->get<std::string>() != "json"))
                throw ConfigError("output.format: must be \"csv\" or \"json\"");
            cfg.output.format = f->get<std::string>();
        }
        if (auto p = it->find("path"); p != it->end()) {
            if (!p->is_string() || p->get<std::string>().empty()) throw ConfigError("output.path: expected a string");
            cfg.output.path = p->get<std::string>();
        }
    }
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
        cfg.seed = it->get<std::uint64_t>();
    }
    return cfg;
}

inline Tolerances resolve_tolerances(const CliScenario& sc, const std::optional<json>& t) {
    Tolerances tol = sc.default_tolerances;
    if (!t) return tol;
    for (const auto& [key, value] : t->items()) {
        const double v = parse_real(value, "verify.tolerance." + key);
        if (!(v > 0.0)) throw ConfigError("verify.tolerance." + key + ": must be positive");
        if (key == "analytic")
            tol.analytic = v;
        else if (key == "fd")
            tol.fd = v;
        else if (key == "premise")
            tol.premise = v;
        else
            throw ConfigError("verify.tolerance: unknown key '" + key + "'");
    }
    return tol;
}

inline void check_grid_matches(const CliScenario& sc, const Grid& grid) {
    if (grid.dims() != sc.variables.size())
        throw ConfigError("grid: family '" + sc.family + "' needs " + std::to_string(sc.variables.size()) + " axes");
    for (std::size_t i = 0; i < grid.dims(); ++i)
        if (grid.axes()[i].name != sc.variables[i])
            throw ConfigError("grid: axis " + std::to_string(i) + " must be named '" + sc.variables[i] + "'");
}

inline std::vector<std::size_t> selected_fields(const CliScenario& sc, const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    if (names.empty()) {
        for (std::size_t i = 0; i < sc.fields.size(); ++i) out.push_back(i);
        return out;
    }
    for (const auto& n : names) {
        std::size_t k = 0;
        while (k < sc.fields.size() && sc.fields[k].name != n) ++k;
        if (k == sc.fields.size()) throw ConfigError("output.fields: '" + n + "' is not a field of " + sc.family);
        out.push_back(k);
    }
    return out;
}

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const CliScenario& sc, const Grid& grid, const std::vector<std::size_t>& sel,
                      const std::vector<FieldSample>& samples) {
    for (const auto& v : sc.variables) os << v << ',';
    os << "singular";
    for (auto k : sel) {
        const auto& f = sc.fields[k];
        for (Eigen::Index i = 0; i < f.rows; ++i)
            for (Eigen::Index j = 0; j < f.cols; ++j) {
                const std::string base = f.name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
                os << ',' << base << ".re," << base << ".im";
            }
    }
    os << '\n';
    for (std::size_t n = 0; n < samples.size(); ++n) {
        const Point p = grid.point(n);
        for (std::size_t v = 0; v < grid.dims(); ++v) os << format_double(p[v]) << ',';
        const auto& s = samples[n];
        os << (s.singular ? 1 : 0);
        for (auto k : sel) {
            const auto& f = sc.fields[k];
            for (Eigen::Index i = 0; i < f.rows; ++i)
                for (Eigen::Index j = 0; j < f.cols; ++j) {
                    if (s.singular)
                        os << ",nan,nan";
                    else
                        os << ',' << format_double(s.values[k](i, j).real()) << ','
                           << format_double(s.values[k](i, j).imag());
                }
        }
        os << '\n';
    }
}

inline json grid_to_json(const Grid& g) {
    json axes = json::array();
    for (const auto& a : g.axes()) axes.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"count", a.count}});
    return axes;
}

inline json fields_to_json(const CliScenario& sc, const Grid& grid, const std::vector<std::size_t>& sel,
                           const std::vector<FieldSample>& samples) {
    json names = json::array(), points = json::array();
    for (auto k : sel) names.push_back(sc.fields[k].name);
    for (std::size_t n = 0; n < samples.size(); ++n) {
        const Point p = grid.point(n);
        json coords = json::array();
        for (std::size_t v = 0; v < grid.dims(); ++v) coords.push_back(p[v]);
        json values = nullptr;
        if (!samples[n].singular) {
            values = json::object();
            for (auto k : sel) values[sc.fields[k].name] = matrix_to_json(samples[n].values[k]);
        }
        points.push_back({{"coords", coords}, {"singular", samples[n].singular}, {"values", values}});
    }
    return {{"family", sc.family}, {"variables", sc.variables}, {"fields", names}, {"points", points}};
}

inline json optional_number(bool has, double v) { return has ? json(v) : json(nullptr); }

struct RunResult {
    int exit_code = kExitPass;
    ResidualReport report;
    double structural_max = 0.0;
    std::filesystem::path fields_path, report_path;
};

inline json report_to_json(const RunConfig& cfg, const CliScenario& sc, const RunResult& r,
                           const std::string& fields_file) {
    const auto& rep = r.report;
    json mask = json::array();
    for (std::size_t i = 0; i < rep.points.size(); ++i)
        if (rep.points[i].masked) mask.push_back(i);
    const bool structural_pass = r.structural_max <= sc.structural_tolerance;
    return {
        {"family", sc.family},
        {"source", cfg.source},
        {"seed", cfg.seed},
        {"grid", grid_to_json(rep.grid)},
        {"verify",
         {{"h", cfg.fd.h},
          {"accuracy", cfg.fd.accuracy},
          {"tolerance",
           {{"analytic", rep.tolerances.analytic}, {"fd", rep.tolerances.fd}, {"premise", rep.tolerances.premise}}}}},
        {"construction", sc.construction},
        {"points", rep.points.size()},
        {"singular_count", rep.singular_count},
        {"singular_indices", mask},
        {"field_scale", rep.field_scale},
        {"max_rel_analytic", optional_number(rep.has_analytic, rep.max_rel_analytic)},
        {"mean_rel_analytic", optional_number(rep.has_analytic, rep.mean_rel_analytic)},
        {"max_rel_fd", optional_number(rep.has_fd, rep.max_rel_fd)},
        {"mean_rel_fd", optional_number(rep.has_fd, rep.mean_rel_fd)},
        {"max_premise", optional_number(rep.has_premise, rep.max_premise)},
        {"failing_points", rep.failing_points},
        {"structural",
         {{"name", sc.structural_name},
          {"max", r.structural_max},
          {"tolerance", sc.structural_tolerance},
          {"pass", structural_pass}}},
        {"fields_file", fields_file},
        {"pass", rep.pass && structural_pass},
    };
}

inline std::size_t workers_from_env() {
    if (const char* w = std::getenv("PEXP_WORKERS")) {
        try {
            const long v = std::stol(w);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
        throw ConfigError("PEXP_WORKERS must be a positive integer");
    }
    return default_workers();
}

/// Full pipeline. Throws ConfigError / ConstructionFailure; the caller maps
/// them to exit codes.
inline RunResult run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::size_t workers) {
    const CliScenario sc = make_scenario(cfg.family, cfg.params, cfg.seed);
    const Grid grid = cfg.grid ? *cfg.grid : sc.default_grid;
    check_grid_matches(sc, grid);
    const Tolerances tol = resolve_tolerances(sc, cfg.tolerance);
    const auto sel = selected_fields(sc, cfg.output.fields);

    RunResult r;
    r.report = sc.residual(grid, cfg.fd, tol, workers);
    const auto samples = map_grid<FieldSample>(sc.evaluate, grid, workers);
    for (const auto& s : samples)
        if (!s.singular) r.structural_max = std::max(r.structural_max, s.structural);

    std::filesystem::path base = cfg.output.path.empty() ? std::filesystem::path(cfg.source) : std::filesystem::path(cfg.output.path);
    if (base.is_relative()) base = out_dir / base;
    if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
    r.fields_path = base;
    r.fields_path += "." + cfg.output.format;
    r.report_path = base;
    r.report_path += ".report.json";

    {
        std::ofstream out(r.fields_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + r.fields_path.string() + "'");
        if (cfg.output.format == "csv")
            write_csv(out, sc, grid, sel, samples);
        else
            out << fields_to_json(sc, grid, sel, samples).dump(1) << '\n';
    }
    const json report = report_to_json(cfg, sc, r, r.fields_path.filename().string());
    {
        std::ofstream out(r.report_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + r.report_path.string() + "'");
        out << report.dump(2) << '\n';
    }
    r.exit_code = report["pass"].get<bool>() ? kExitPass : kExitResidual;
    return r;
}

/// Schema and construction only.
inline json validate_config(const RunConfig& cfg) {
    const CliScenario sc = make_scenario(cfg.family, cfg.params, cfg.seed);
    if (cfg.grid) check_grid_matches(sc, *cfg.grid);
    resolve_tolerances(sc, cfg.tolerance);
    selected_fields(sc, cfg.output.fields);
    json fields = json::array();
    for (const auto& f : sc.fields) fields.push_back({{"name", f.name}, {"rows", f.rows}, {"cols", f.cols}});
    return {{"family", sc.family}, {"variables", sc.variables}, {"fields", fields}, {"construction", sc.construction}};
}

}  // namespace pexp::cli
