#pragma once

// JSON encoding of scalars and matrices: complex values are [re, im] (a bare
// number is read as real), matrices are row-major nested arrays.

#include <json.hpp>

#include "pexp/numkernel.hpp"

namespace pexp::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Complex parse_complex(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(where + ": expected a number or a [re, im] pair");
}

inline double parse_real(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline std::vector<Complex> parse_complex_list(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
    std::vector<Complex> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_complex(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::vector<double> parse_real_list(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_real(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline CMatrix parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
    const auto rows = j.size();
    if (!j[0].is_array() || j[0].empty()) throw ConfigError(where + ": rows must be non-empty arrays");
    const auto cols = j[0].size();
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(where + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_complex(j[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    if (!all_finite(m)) throw ConfigError(where + ": entries must be finite");
    return m;
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Required member lookup with a schema error naming the key.
inline const json& member(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing '" + key + "'");
    return *it;
}

inline CMatrix matrix_member(const json& obj, const std::string& key, const std::string& where) {
    return parse_matrix(member(obj, key, where), where + "." + key);
}

inline std::optional<CMatrix> optional_matrix(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return parse_matrix(*it, where + "." + key);
}

}  // namespace pexp::cli
