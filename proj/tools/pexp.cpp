#include <CLI11.hpp>
#include <iostream>

#include "pexp/cli/catalog.hpp"
#include "pexp/cli/run.hpp"

namespace fs = std::filesystem;
using namespace pexp::cli;

namespace {

/// Accepts a config path or a catalog id.
RunConfig load(const std::string& target) {
    fs::path path = target;
    if (!fs::exists(path)) {
        const auto* entry = find_entry(target);
        if (!entry) throw ConfigError("'" + target + "' is neither a readable file nor a catalog id");
        path = catalog_path(*entry);
    }
    return parse_config(read_json_file(path), path.stem().string());
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConstructionFailure& e) {
        std::cerr << "construction error: " << e.what() << '\n';
        return kExitConstruction;
    }
}

std::string describe(const json& v) { return v.is_null() ? "n/a" : format_double(v.get<double>()); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-exponential solutions of integrable wave equations: build, evaluate and verify."};
    app.require_subcommand(1);

    std::string target;
    std::string out_dir = ".";
    bool quiet = false;

    auto* run_cmd = app.add_subcommand("run", "evaluate a scenario on its grid, write fields and a residual report");
    run_cmd->add_option("config", target, "config file or catalog id")->required();
    run_cmd->add_option("--out-dir", out_dir, "directory for relative output paths");
    run_cmd->add_flag("-q,--quiet", quiet, "suppress the summary line");

    auto* validate_cmd = app.add_subcommand("validate", "check schema and construction without a sweep");
    validate_cmd->add_option("config", target, "config file or catalog id")->required();

    auto* examples_cmd = app.add_subcommand("examples", "list the built-in scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    if (examples_cmd->parsed()) {
        for (const auto& e : catalog())
            std::cout << e.id << '\t' << e.family << '\t' << catalog_path(e).string() << '\t' << e.description << '\n';
        return 0;
    }

    if (validate_cmd->parsed()) {
        return guarded([&] {
            const auto info = validate_config(load(target));
            std::cout << info.dump(2) << '\n';
            return static_cast<int>(kExitPass);
        });
    }

    return guarded([&] {
        const auto cfg = load(target);
        const auto workers = workers_from_env();
        const auto result = run(cfg, out_dir, workers);
        if (!quiet) {
            const auto report = read_json_file(result.report_path);
            std::cout << (result.exit_code == kExitPass ? "PASS " : "FAIL ") << cfg.source << " family=" << cfg.family
                      << " points=" << report["points"] << " singular=" << report["singular_count"]
                      << " max_rel_analytic=" << describe(report["max_rel_analytic"])
                      << " max_rel_fd=" << describe(report["max_rel_fd"])
                      << " max_premise=" << describe(report["max_premise"]) << " report=" << result.report_path.string()
                      << '\n';
        }
        return result.exit_code;
    });
}
