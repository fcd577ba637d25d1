// Command-line driver: spectrum runs, statistics passes, parameter sweeps,
// strong-coupling predictions, and plot-script emission.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include "spectra/config.hpp"
#include "spectra/coupling.hpp"
#include "spectra/runner.hpp"
#include "spectra/version.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitStats = 4;

int classify_and_report(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const spectra::ConfigError*>(&e) != nullptr) return kExitConfig;
    if (dynamic_cast<const spectra::SolverError*>(&e) != nullptr) return kExitSolver;
    if (dynamic_cast<const spectra::StatsError*>(&e) != nullptr) return kExitStats;
    return kExitSolver;
}

std::filesystem::path resolve_out(const spectra::ExperimentConfig& cfg,
                                  const std::string& override_dir) {
    return override_dir.empty() ? std::filesystem::path(cfg.output_dir)
                                : std::filesystem::path(override_dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy spectra and level statistics of a rectangular billiard "
                 "with point scatterers"};
    app.set_version_flag("--version", std::string(spectra::kToolVersion));
    app.require_subcommand(1);

    std::string config_path, spectrum_path, out_override, plots_dir;

    auto* cmd_run = app.add_subcommand("run", "solve the configured spectrum window");
    cmd_run->add_option("config", config_path, "experiment config (JSON)")->required();
    cmd_run->add_option("--out", out_override, "output directory (overrides config)");

    auto* cmd_stats = app.add_subcommand("stats", "level statistics of a computed spectrum");
    cmd_stats->add_option("config", config_path, "experiment config (JSON)")->required();
    cmd_stats->add_option("spectrum", spectrum_path, "spectrum.csv from a run")->required();
    cmd_stats->add_option("--out", out_override, "output directory (overrides config)");

    auto* cmd_sweep = app.add_subcommand("sweep", "runs over strength/count grids");
    cmd_sweep->add_option("config", config_path, "experiment config (JSON)")->required();
    cmd_sweep->add_option("--out", out_override, "output directory (overrides config)");

    double vinv = 0.0, omega_lo = 0.0, omega_hi = 0.0;
    double mass = 2.0 * std::numbers::pi, lambda = 1.0;
    auto* cmd_predict = app.add_subcommand("predict", "strong-coupling band test");
    cmd_predict->add_option("--vinv", vinv, "inverse coupling strength v^-1")->required();
    cmd_predict->add_option("--omega-lo", omega_lo, "window lower edge")->required();
    cmd_predict->add_option("--omega-hi", omega_hi, "window upper edge")->required();
    cmd_predict->add_option("--mass", mass, "particle mass (default 2 pi)");
    cmd_predict->add_option("--lambda", lambda, "scale mass (default 1)");

    auto* cmd_plots = app.add_subcommand("plots", "emit gnuplot scripts for a results directory");
    cmd_plots->add_option("dir", plots_dir, "directory with pofs.csv and delta3.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (cmd_run->parsed()) {
            const auto cfg = spectra::load_config(config_path);
            const auto out = resolve_out(cfg, out_override);
            const auto spectrum = spectra::run_spectrum(cfg, out);
            std::cout << "wrote " << (out / "spectrum.csv").string() << " ("
                      << spectrum.roots.size() << " levels)\n";
        } else if (cmd_stats->parsed()) {
            const auto cfg = spectra::load_config(config_path);
            const auto out = resolve_out(cfg, out_override);
            const auto st = spectra::run_stats(cfg, spectrum_path, out);
            std::cout << "levels: " << st.level_count << "  KS(Poisson): " << st.ks_poisson
                      << "  KS(GOE): " << st.ks_goe << "\n"
                      << "wrote pofs.csv, delta3.csv, distances.json in " << out.string() << "\n";
        } else if (cmd_sweep->parsed()) {
            const auto cfg = spectra::load_config(config_path);
            const auto out = resolve_out(cfg, out_override);
            const bool ok = spectra::run_sweep(cfg, out);
            std::cout << "wrote " << (out / "sweep_summary.csv").string() << "\n";
            if (!ok) {
                std::cerr << "error: some sweep cells failed; see "
                          << (out / "sweep_errors.log").string() << "\n";
                return kExitSolver;
            }
        } else if (cmd_predict->parsed()) {
            if (!(omega_lo > 0.0) || !(omega_hi > omega_lo)) {
                std::cerr << "error: require 0 < omega-lo < omega-hi\n";
                return kExitConfig;
            }
            const spectra::CouplingBand band{mass, lambda};
            const auto lo = spectra::is_strong(band, vinv, omega_lo);
            const auto hi = spectra::is_strong(band, vinv, omega_hi);
            const auto [clo, chi] = spectra::crossover_energies(band, vinv);
            std::printf("band center g(omega) = (M/2pi) ln(omega/Lambda), width/2 = %.6g\n",
                        band.width() / 2.0);
            std::printf("g(%.6g) = %.6g, margin = %+.6g (%s)\n", omega_lo,
                        spectra::g_of_omega(band, omega_lo), lo.margin,
                        lo.strong ? "strong" : "weak");
            std::printf("g(%.6g) = %.6g, margin = %+.6g (%s)\n", omega_hi,
                        spectra::g_of_omega(band, omega_hi), hi.margin,
                        hi.strong ? "strong" : "weak");
            std::printf("strong-coupling energies for v^-1 = %.6g: [%.6g, %.6g]\n", vinv, clo,
                        chi);
            std::printf("verdict: %s\n", lo.strong && hi.strong
                                             ? "strong throughout the window"
                                             : (lo.strong || hi.strong ? "partially strong"
                                                                       : "weak throughout"));
        } else if (cmd_plots->parsed()) {
            spectra::emit_plots(plots_dir);
            std::cout << "wrote pofs.gp, delta3.gp in " << plots_dir << "\n";
        }
    } catch (const std::exception& e) {
        return classify_and_report(e);
    }
    return 0;
}
