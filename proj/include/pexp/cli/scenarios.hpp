#pragma once

// Family-independent view of a scenario for the command-line runner.

#include <functional>
#include <memory>

#include "pexp/cli/json_io.hpp"
#include "pexp/random.hpp"

namespace pexp::cli {

/// Construction failed for mathematical reasons (identity unsolvable or invalid).
class ConstructionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FieldSpec {
    std::string name;
    Eigen::Index rows, cols;
};

struct FieldSample {
    bool singular = true;
    std::vector<CMatrix> values;  // one per FieldSpec
    double structural = 0.0;      // family reduction defect, relative
};

struct CliScenario {
    std::string family;
    std::vector<std::string> variables;
    std::vector<FieldSpec> fields;
    std::string structural_name;
    double structural_tolerance = 0.0;
    Tolerances default_tolerances;
    Grid default_grid;
    json construction = json::object();
    std::function<FieldSample(const Point&)> evaluate;
    std::function<ResidualReport(const Grid&, const FdSpec&, const Tolerances&, std::size_t)> residual;
};

namespace detail {

inline double relative_defect(double defect, double norm) { return norm > 0.0 ? defect / norm : 0.0; }

inline bool wants_random(const json& params) {
    auto it = params.find("random");
    return it != params.end() && it->is_boolean() && it->get<bool>();
}

inline int sign_of(const json& j, const std::string& where) {
    if (!j.is_number_integer() || (j.get<int>() != 1 && j.get<int>() != -1))
        throw ConfigError(where + ": entries must be +1 or -1");
    return j.get<int>();
}

inline CliScenario wrap_dirac(std::shared_ptr<const dirac::DiracScenario> sc) {
    CliScenario out;
    out.family = "dirac";
    out.variables = {"t", "y"};
    out.fields = {{"v", 2, 2}, {"psi", 2, sc->c.rows()}};
    out.structural_name = "v_hermitian_defect";
    out.structural_tolerance = 1e-10;
    out.default_grid = random::dirac_grid();
    const auto rep = validate(sc->node);
    out.construction = {{"identity_residuals", rep.identity_residuals}, {"R", matrix_to_json(sc->node.r())},
                        {"Chat", matrix_to_json(sc->node.chat())}};
    out.evaluate = [sc](const Point& p) {
        FieldSample s;
        const auto f = dirac::fields(*sc, p[0], p[1]);
        s.singular = f.singular;
        if (f.singular) return s;
        s.values = {f.v, f.psi};
        s.structural = relative_defect(hermitian_defect(f.v), f.v.norm());
        return s;
    };
    out.residual = [sc](const Grid& g, const FdSpec& fd, const Tolerances& tol, std::size_t w) {
        return dirac::residual_dirac(*sc, g, fd, tol, w);
    };
    return out;
}

inline CliScenario wrap_loewner(std::shared_ptr<const loewner::LoewnerScenario> sc) {
    CliScenario out;
    out.family = "loewner";
    out.variables = {"x", "y"};
    out.fields = {{"psi", sc->m(), sc->n()}, {"l", sc->m(), sc->m()}};
    out.structural_name = "spectrum_mismatch";
    out.structural_tolerance = 1e-8;
    out.default_grid = random::loewner_grid();
    out.evaluate = [sc](const Point& p) {
        FieldSample s;
        const auto f = loewner::eval_loewner(*sc, p[0], p[1]);
        s.singular = f.singular;
        if (f.singular) return s;
        s.values = {f.psi, f.l};
        s.structural = loewner::spectrum_mismatch(*sc, f.l);
        return s;
    };
    out.residual = [sc](const Grid& g, const FdSpec& fd, const Tolerances& tol, std::size_t w) {
        return loewner::residual_loewner(*sc, g, fd, tol, w);
    };
    return out;
}

inline CliScenario wrap_schrodinger(std::shared_ptr<const schrodinger::SchrodingerScenario> sc) {
    CliScenario out;
    out.family = "schrodinger";
    out.variables = {"x", "t"};
    out.fields = {{"q", sc->chat.cols(), sc->chat.cols()}, {"psi", sc->chat.cols(), sc->c.rows()}};
    out.structural_name = "q_hermitian_defect";
    out.structural_tolerance = 1e-10;
    out.default_grid = random::schrodinger_grid();
    out.construction = {{"R", matrix_to_json(sc->r)}, {"R_from_singular_solve", sc->r_was_singular_solve}};
    out.evaluate = [sc](const Point& p) {
        FieldSample s;
        const auto f = schrodinger::fields(*sc, p[0], p[1]);
        s.singular = f.singular;
        if (f.singular) return s;
        s.values = {f.q, f.psi};
        s.structural = relative_defect(hermitian_defect(f.q), 1.0 + f.q.norm());
        return s;
    };
    out.residual = [sc](const Grid& g, const FdSpec& fd, const Tolerances& tol, std::size_t w) {
        return schrodinger::residual_schrodinger(*sc, g, fd, tol, w);
    };
    return out;
}

inline CliScenario wrap_dsi(std::shared_ptr<const dsi::DsiScenario> sc) {
    CliScenario out;
    out.family = "dsi";
    out.variables = {"x", "t", "y"};
    out.fields = {{"u", sc->m2(), sc->m1()}, {"q1", sc->m1(), sc->m1()}, {"q2", sc->m2(), sc->m2()}};
    out.structural_name = "q_hermitian_defect";
    out.structural_tolerance = 1e-10;
    out.default_tolerances = {1e-9, 1e-5, 1e-12};
    out.default_grid = random::dsi_grid();
    out.construction = {{"R1", matrix_to_json(sc->r1)}, {"R2", matrix_to_json(sc->r2)}};
    out.evaluate = [sc](const Point& p) {
        FieldSample s;
        const auto f = dsi::fields_uq(*sc, p[0], p[1], p[2]);
        s.singular = f.singular;
        if (f.singular) return s;
        s.values = {f.u, f.q1, f.q2};
        s.structural = std::max(relative_defect(hermitian_defect(f.q1), 1.0 + f.q1.norm()),
                                relative_defect(hermitian_defect(f.q2), 1.0 + f.q2.norm()));
        return s;
    };
    out.residual = [sc](const Grid& g, const FdSpec& fd, const Tolerances& tol, std::size_t w) {
        return dsi::residual_dsi(*sc, g, fd, tol, w);
    };
    return out;
}

inline CliScenario wrap_gnoe(std::shared_ptr<const gnoe::GnoeScenario> sc) {
    CliScenario out;
    out.family = "gnoe";
    out.variables = {"x", "t", "y"};
    out.fields = {{"xi", sc->m(), sc->m()}};
    out.structural_name = "reduction_defect";
    out.structural_tolerance = 1e-12;
    out.default_grid = random::gnoe_grid();
    out.construction = {{"R", matrix_to_json(sc->r)}};
    out.evaluate = [sc](const Point& p) {
        FieldSample s;
        const auto x = gnoe::xi(*sc, p[0], p[1], p[2]);
        s.singular = !x;
        if (!x) return s;
        s.values = {*x};
        s.structural = relative_defect(gnoe::reduction_defect(*sc, *x), x->norm());
        return s;
    };
    out.residual = [sc](const Grid& g, const FdSpec& fd, const Tolerances& tol, std::size_t w) {
        return gnoe::residual_gnoe(*sc, g, fd, tol, w);
    };
    return out;
}

inline dirac::DiracScenario build_dirac(const json& p, random::Rng& rng) {
    const std::string w = "params";
    if (wants_random(p)) return random::dirac_scenario(rng);
    const auto c = matrix_member(p, "C", w);
    const auto s0 = matrix_member(p, "S0", w);
    if (p.contains("g1")) {
        const auto g1 = parse_complex_list(member(p, "g1", w), w + ".g1");
        const auto& n1 = member(p, "n1", w);
        if (!n1.is_number_unsigned()) throw ConfigError(w + ".n1: expected a non-negative integer");
        const auto d = parse_complex_list(member(p, "D", w), w + ".D");
        CVector g(static_cast<Eigen::Index>(g1.size()));
        for (std::size_t i = 0; i < g1.size(); ++i) g(static_cast<Eigen::Index>(i)) = g1[i];
        return dirac::build_block_diagonal(g, n1.get<std::size_t>(), d, c, s0);
    }
    return dirac::build(matrix_member(p, "A1", w), matrix_member(p, "A2", w), matrix_member(p, "Chat", w), c, s0,
                        optional_matrix(p, "R", w));
}

inline loewner::LoewnerScenario build_loewner(const json& p, random::Rng& rng) {
    const std::string w = "params";
    if (wants_random(p)) return random::loewner_scenario(rng);
    bool repeated = false;
    if (auto it = p.find("allow_repeated_D"); it != p.end()) {
        if (!it->is_boolean()) throw ConfigError(w + ".allow_repeated_D: expected a boolean");
        repeated = it->get<bool>();
    }
    return loewner::build(parse_real_list(member(p, "D", w), w + ".D"), matrix_member(p, "A1", w),
                          matrix_member(p, "A2", w), matrix_member(p, "c1", w), matrix_member(p, "c2", w),
                          matrix_member(p, "Chat1", w), matrix_member(p, "Chat2", w), repeated);
}

inline schrodinger::SchrodingerScenario build_schrodinger(const json& p, random::Rng& rng) {
    const std::string w = "params";
    if (wants_random(p)) return random::positive_schrodinger(rng, 1e-3);
    return schrodinger::build(matrix_member(p, "A", w), matrix_member(p, "C", w), matrix_member(p, "Chat", w),
                              matrix_member(p, "S0", w), optional_matrix(p, "R", w));
}

inline dsi::DsiScenario build_dsi(const json& p, random::Rng& rng) {
    const std::string w = "params";
    if (wants_random(p)) return random::dsi_scenario(rng);
    return dsi::build(matrix_member(p, "A1", w), matrix_member(p, "A2", w), matrix_member(p, "C1", w),
                      matrix_member(p, "C2", w), matrix_member(p, "Chat1", w), matrix_member(p, "Chat2", w),
                      matrix_member(p, "S0", w), optional_matrix(p, "R1", w), optional_matrix(p, "R2", w));
}

inline gnoe::GnoeScenario build_gnoe(const json& p, random::Rng& rng) {
    const std::string w = "params";
    if (wants_random(p)) return random::gnoe_scenario(rng);
    const auto& bj = member(p, "B", w);
    if (!bj.is_array() || bj.empty()) throw ConfigError(w + ".B: expected a non-empty array");
    std::vector<int> b;
    for (std::size_t i = 0; i < bj.size(); ++i) b.push_back(sign_of(bj[i], w + ".B[" + std::to_string(i) + "]"));
    return gnoe::build(matrix_member(p, "A", w), matrix_member(p, "chat", w), matrix_member(p, "C", w),
                       parse_real_list(member(p, "D", w), w + ".D"), parse_real_list(member(p, "Dtilde", w), w + ".Dtilde"),
                       b, matrix_member(p, "S0", w));
}

}  // namespace detail

inline const std::vector<std::string>& families() {
    static const std::vector<std::string> f{"dirac", "loewner", "schrodinger", "dsi", "gnoe"};
    return f;
}

/// Builds the scenario for `family` from `params`. Schema problems raise
/// ConfigError; mathematical failures raise ConstructionFailure.
inline CliScenario make_scenario(const std::string& family, const json& params, std::uint64_t seed) {
    if (!params.is_object()) throw ConfigError("params: expected an object");
    random::Rng rng(seed);
    try {
        if (family == "dirac") return detail::wrap_dirac(std::make_shared<dirac::DiracScenario>(detail::build_dirac(params, rng)));
        if (family == "loewner")
            return detail::wrap_loewner(std::make_shared<loewner::LoewnerScenario>(detail::build_loewner(params, rng)));
        if (family == "schrodinger")
            return detail::wrap_schrodinger(
                std::make_shared<schrodinger::SchrodingerScenario>(detail::build_schrodinger(params, rng)));
        if (family == "dsi") return detail::wrap_dsi(std::make_shared<dsi::DsiScenario>(detail::build_dsi(params, rng)));
        if (family == "gnoe") return detail::wrap_gnoe(std::make_shared<gnoe::GnoeScenario>(detail::build_gnoe(params, rng)));
    } catch (const ConfigError&) {
        throw;
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("params: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params: ") + e.what());
    } catch (const std::runtime_error& e) {
        throw ConstructionFailure(e.what());
    }
    throw ConfigError("family: unknown family '" + family + "'");
}

}  // namespace pexp::cli
