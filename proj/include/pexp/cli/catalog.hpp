#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace pexp::cli {

struct CatalogEntry {
    std::string id;
    std::string family;
    std::string description;
};

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries{
        {"example-2.2", "dirac", "block-diagonal 2-node, g1 = [1, 1], D = diag(1, 2)"},
        {"example-3.2", "schrodinger", "Jordan cell, mu0 = i, grid crossing the singular line"},
        {"example-3.4", "schrodinger", "Jordan cell, mu0 = 1, scalar rational potential"},
        {"example-3.6", "schrodinger", "Jordan cell, mu0 = 1, C = I, S0 = diag(0, 1)"},
        {"dsi-rational", "dsi", "nilpotent A1 = A2, rational fields"},
        {"gnoe-diagonal", "gnoe", "diagonal A, mixed B = diag(1, -1)"},
    };
    return entries;
}

/// PEXP_CONFIG_DIR from the environment, else the compiled-in default.
inline std::filesystem::path config_dir() {
    if (const char* env = std::getenv("PEXP_CONFIG_DIR"); env && *env) return env;
#ifdef PEXP_CONFIG_DIR
    return PEXP_CONFIG_DIR;
#else
    return "configs";
#endif
}

inline std::filesystem::path catalog_path(const CatalogEntry& e) { return config_dir() / (e.id + ".json"); }

inline const CatalogEntry* find_entry(const std::string& id) {
    for (const auto& e : catalog())
        if (e.id == id) return &e;
    return nullptr;
}

}  // namespace pexp::cli
