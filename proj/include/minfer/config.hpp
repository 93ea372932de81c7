#ifndef MINFER_CONFIG_HPP
#define MINFER_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "minfer/linalg.hpp"

namespace minfer {

/// Runtime configuration shared by the CLI commands. Loadable from a JSON
/// file with the same field names.
struct Config {
    LinalgTolerances tolerances{};
    std::size_t n_limit = 20; // explicit-materialization limit
    std::uint64_t seed = 0;
    std::string format = "json"; // json | csv | text

    void validate() const {
        if (tolerances.sigma_tol <= 0.0 || tolerances.delta_tol <= 0.0 ||
            tolerances.refactor_period <= 0 || tolerances.drift_bound <= 0.0)
            throw std::invalid_argument("config: tolerances must be positive");
        if (n_limit > 20) throw std::invalid_argument("config: n_limit must be <= 20");
        if (format != "json" && format != "csv" && format != "text")
            throw std::invalid_argument("config: unknown format '" + format + "'");
    }
};

inline Config parse_config(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Config cfg;
    if (j.contains("sigma_tol")) cfg.tolerances.sigma_tol = j["sigma_tol"].get<double>();
    if (j.contains("delta_tol")) cfg.tolerances.delta_tol = j["delta_tol"].get<double>();
    if (j.contains("refactor_period"))
        cfg.tolerances.refactor_period = j["refactor_period"].get<int>();
    if (j.contains("drift_bound")) cfg.tolerances.drift_bound = j["drift_bound"].get<double>();
    if (j.contains("n_limit")) cfg.n_limit = j["n_limit"].get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("format")) cfg.format = j["format"].get<std::string>();
    cfg.validate();
    return cfg;
}

} // namespace minfer

#endif
