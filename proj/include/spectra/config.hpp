#pragma once

// Experiment configuration: JSON ingestion with strict field checking
// (unknown keys are rejected), full validation of nested invariants, and a
// stable digest over the physics-affecting fields.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectra/basis.hpp"
#include "spectra/errors.hpp"
#include "spectra/scatterers.hpp"
#include "spectra/secular.hpp"

namespace spectra {

struct StatsSettings {
    int bins = 30;
    double s_max = 3.0;
    std::vector<double> L_values = {2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    double window_step_fraction = 0.25;  // Delta3 windows slide by this * L

    void validate() const {
        if (bins < 1) throw ConfigError("stats.bins must be >= 1");
        if (!(s_max > 0.0)) throw ConfigError("stats.s_max must be > 0");
        if (L_values.empty()) throw ConfigError("stats.L_values must not be empty");
        for (double l : L_values)
            if (!(l > 0.0)) throw ConfigError("stats.L_values entries must be > 0");
        if (!(window_step_fraction > 0.0))
            throw ConfigError("stats.window_step_fraction must be > 0");
    }
};

struct SweepSettings {
    std::vector<double> inverse_strengths;  // applied to every scatterer
    std::vector<int> scatterer_counts;      // first N configured positions

    bool empty() const { return inverse_strengths.empty() && scatterer_counts.empty(); }
};

struct ExperimentConfig {
    BilliardConfig billiard;
    ScattererSet scatterers;  // empty set = calibration mode (unperturbed levels)
    Window window;
    SolverSettings solver;
    StatsSettings stats;
    SweepSettings sweep;
    std::uint64_t seed = 1;
    std::string output_dir = ".";  // cosmetic: excluded from the digest

    void validate() const {
        billiard.validate();
        if (!scatterers.positions.empty()) scatterers.validate(billiard);
        window.validate();
        if (!(solver.energy_cutoff > 0.0)) throw ConfigError("solver.energy_cutoff must be > 0");
        if (!(solver.safety_fraction > 0.0 && solver.safety_fraction <= 1.0))
            throw ConfigError("solver.safety_fraction must be in (0, 1]");
        if (!(solver.tol_omega_factor > 0.0))
            throw ConfigError("solver.tol_omega_factor must be > 0");
        if (!(solver.pole_exclusion_factor > 0.0))
            throw ConfigError("solver.pole_exclusion_factor must be > 0");
        if (window.kind == Window::Kind::Energy &&
            window.hi > solver.safety_fraction * solver.energy_cutoff) {
            std::ostringstream msg;
            msg << "window.hi = " << window.hi << " exceeds the truncation-safe limit "
                << solver.safety_fraction * solver.energy_cutoff
                << "; raise solver.energy_cutoff";
            throw ConfigError(msg.str());
        }
        stats.validate();
        for (int n : sweep.scatterer_counts) {
            if (n < 0) throw ConfigError("sweep.scatterer_counts entries must be >= 0");
            if (static_cast<std::size_t>(n) > scatterers.positions.size())
                throw ConfigError(
                    "sweep.scatterer_counts entry exceeds the number of configured positions");
        }
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const char* section) {
    if (!j.is_object()) {
        std::ostringstream msg;
        msg << "config section '" << section << "' must be a JSON object";
        throw ConfigError(msg.str());
    }
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok) {
            std::ostringstream msg;
            msg << "unknown field '" << item.key() << "' in config section '" << section << "'";
            throw ConfigError(msg.str());
        }
    }
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception& e) {
            std::ostringstream msg;
            msg << "field '" << key << "': " << e.what();
            throw ConfigError(msg.str());
        }
    }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    detail::check_keys(j, {"billiard", "scatterers", "window", "solver", "stats", "sweep", "seed",
                           "output_dir"},
                       "<root>");
    ExperimentConfig cfg;

    if (auto it = j.find("billiard"); it != j.end()) {
        detail::check_keys(*it, {"lx", "ly", "mass", "lambda"}, "billiard");
        detail::read_if(*it, "lx", cfg.billiard.lx);
        detail::read_if(*it, "ly", cfg.billiard.ly);
        detail::read_if(*it, "mass", cfg.billiard.mass);
        detail::read_if(*it, "lambda", cfg.billiard.lambda);
    }
    if (auto it = j.find("scatterers"); it != j.end()) {
        detail::check_keys(*it, {"positions", "inverse_strengths"}, "scatterers");
        detail::read_if(*it, "positions", cfg.scatterers.positions);
        detail::read_if(*it, "inverse_strengths", cfg.scatterers.inverse_strengths);
    }
    if (auto it = j.find("window"); it != j.end()) {
        detail::check_keys(*it, {"kind", "lo", "hi"}, "window");
        std::string kind = "energy";
        detail::read_if(*it, "kind", kind);
        if (kind == "energy")
            cfg.window.kind = Window::Kind::Energy;
        else if (kind == "index")
            cfg.window.kind = Window::Kind::Index;
        else
            throw ConfigError("window.kind must be 'energy' or 'index', got '" + kind + "'");
        detail::read_if(*it, "lo", cfg.window.lo);
        detail::read_if(*it, "hi", cfg.window.hi);
    }
    if (auto it = j.find("solver"); it != j.end()) {
        detail::check_keys(*it,
                           {"energy_cutoff", "safety_fraction", "tol_omega_factor",
                            "pole_exclusion_factor", "tail_correction"},
                           "solver");
        detail::read_if(*it, "energy_cutoff", cfg.solver.energy_cutoff);
        detail::read_if(*it, "safety_fraction", cfg.solver.safety_fraction);
        detail::read_if(*it, "tol_omega_factor", cfg.solver.tol_omega_factor);
        detail::read_if(*it, "pole_exclusion_factor", cfg.solver.pole_exclusion_factor);
        detail::read_if(*it, "tail_correction", cfg.solver.tail_correction);
    }
    if (auto it = j.find("stats"); it != j.end()) {
        detail::check_keys(*it, {"bins", "s_max", "L_values", "window_step_fraction"}, "stats");
        detail::read_if(*it, "bins", cfg.stats.bins);
        detail::read_if(*it, "s_max", cfg.stats.s_max);
        detail::read_if(*it, "L_values", cfg.stats.L_values);
        detail::read_if(*it, "window_step_fraction", cfg.stats.window_step_fraction);
    }
    if (auto it = j.find("sweep"); it != j.end()) {
        detail::check_keys(*it, {"inverse_strengths", "scatterer_counts"}, "sweep");
        detail::read_if(*it, "inverse_strengths", cfg.sweep.inverse_strengths);
        detail::read_if(*it, "scatterer_counts", cfg.sweep.scatterer_counts);
    }
    detail::read_if(j, "seed", cfg.seed);
    detail::read_if(j, "output_dir", cfg.output_dir);

    cfg.validate();
    return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["billiard"] = {{"lx", cfg.billiard.lx},
                     {"ly", cfg.billiard.ly},
                     {"mass", cfg.billiard.mass},
                     {"lambda", cfg.billiard.lambda}};
    j["scatterers"] = {{"positions", cfg.scatterers.positions},
                       {"inverse_strengths", cfg.scatterers.inverse_strengths}};
    j["window"] = {{"kind", cfg.window.kind == Window::Kind::Energy ? "energy" : "index"},
                   {"lo", cfg.window.lo},
                   {"hi", cfg.window.hi}};
    j["solver"] = {{"energy_cutoff", cfg.solver.energy_cutoff},
                   {"safety_fraction", cfg.solver.safety_fraction},
                   {"tol_omega_factor", cfg.solver.tol_omega_factor},
                   {"pole_exclusion_factor", cfg.solver.pole_exclusion_factor},
                   {"tail_correction", cfg.solver.tail_correction}};
    j["stats"] = {{"bins", cfg.stats.bins},
                  {"s_max", cfg.stats.s_max},
                  {"L_values", cfg.stats.L_values},
                  {"window_step_fraction", cfg.stats.window_step_fraction}};
    j["sweep"] = {{"inverse_strengths", cfg.sweep.inverse_strengths},
                  {"scatterer_counts", cfg.sweep.scatterer_counts}};
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    return j;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

// FNV-1a over the canonical serialization of the physics-affecting fields.
// Cosmetic fields (output_dir) are excluded, so reruns that only relocate
// output keep the same digest.
inline std::string config_digest(const ExperimentConfig& cfg) {
    nlohmann::json j = config_to_json(cfg);
    j.erase("output_dir");
    const std::string canon = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream hex;
    hex << std::hex;
    hex.width(16);
    hex.fill('0');
    hex << h;
    return hex.str();
}

}  // namespace spectra
