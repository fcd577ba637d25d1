#pragma once

// Experiment orchestration: single runs, statistics passes, sweeps over
// coupling strength and scatterer count, and gnuplot script emission.
// All tabular output is strictly schema'd (fixed column order, '.' decimal
// separator, newline-terminated, 17 significant digits).

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectra/config.hpp"
#include "spectra/io.hpp"
#include "spectra/secular.hpp"
#include "spectra/stats.hpp"
#include "spectra/version.hpp"

namespace spectra {

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string sweep_cell_name(double vinv, std::size_t n_scatterers) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "v%g_N%zu", vinv, n_scatterers);
    return buf;
}

}  // namespace detail

// Solves the configured window and writes spectrum.csv plus manifest.json.
// An empty scatterer set is the calibration mode: the unperturbed levels in
// the window are emitted with zero residual.
inline PerturbedSpectrum run_spectrum(const ExperimentConfig& cfg,
                                      const std::filesystem::path& out_dir,
                                      const BasisTable* shared_basis = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();

    std::optional<BasisTable> own_basis;
    const BasisTable* basis = shared_basis;
    if (basis == nullptr) {
        own_basis.emplace(enumerate_basis(cfg.billiard, cfg.solver.energy_cutoff));
        basis = &*own_basis;
    }

    PerturbedSpectrum spectrum;
    if (cfg.scatterers.positions.empty()) {
        spectrum.indices_from_bottom = true;
        for (std::size_t i = 0; i < basis->size(); ++i) {
            const double e = basis->energy(i);
            const bool keep = cfg.window.kind == Window::Kind::Energy
                                  ? (e >= cfg.window.lo && e <= cfg.window.hi)
                                  : (i + 1 >= cfg.window.lo && i + 1 <= cfg.window.hi);
            if (keep) spectrum.roots.push_back({e, e, e, static_cast<std::int64_t>(i), 0.0, 0,
                                                false, i + 1});
        }
    } else {
        SecularProblem problem{basis, &cfg.scatterers, cfg.window, cfg.solver};
        spectrum = solve_multi(problem);
    }
    spectrum.config_digest = config_digest(cfg);

    std::ostringstream csv;
    csv << "index,omega,host_interval_lo,host_interval_hi,residual\n";
    std::size_t pole_adjacent = 0;
    std::size_t running = 0;
    for (const auto& r : spectrum.roots) {
        ++running;
        const std::uint64_t index = spectrum.indices_from_bottom ? r.global_index : running;
        csv << index << ',' << format_double(r.omega) << ',' << format_double(r.host_lo) << ','
            << format_double(r.host_hi) << ',' << format_double(r.residual) << '\n';
        if (r.pole_adjacent) ++pole_adjacent;
    }
    atomic_write_file(out_dir / "spectrum.csv", csv.str());

    nlohmann::json manifest;
    manifest["config_digest"] = spectrum.config_digest;
    manifest["tool_version"] = kToolVersion;
    manifest["timings"] = {{"spectrum_seconds", detail::seconds_since(t0)}};
    manifest["counts"] = {{"basis_levels", basis->size()},
                          {"roots", spectrum.roots.size()},
                          {"pole_adjacent", pole_adjacent}};
    manifest["index_convention"] =
        spectrum.indices_from_bottom ? "global_from_bottom_including_bound_states"
                                     : "window_relative";
    atomic_write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return spectrum;
}

struct StatsOutput {
    SpacingHistogram histogram;
    RigidityCurve rigidity;
    double ks_poisson = 0.0;
    double ks_goe = 0.0;
    std::size_t level_count = 0;
};

// Statistics pass over a spectrum.csv produced by run_spectrum: unfolds,
// histograms spacings, computes the rigidity curve and reference distances.
inline StatsOutput run_stats(const ExperimentConfig& cfg,
                             const std::filesystem::path& spectrum_csv,
                             const std::filesystem::path& out_dir) {
    cfg.validate();
    const auto rows = read_csv_rows(spectrum_csv, 5);
    if (rows.size() < 2) throw StatsError("spectrum file holds fewer than two levels");
    std::vector<double> omegas;
    omegas.reserve(rows.size());
    for (const auto& r : rows) omegas.push_back(r[1]);
    for (std::size_t i = 1; i < omegas.size(); ++i)
        if (!(omegas[i] > omegas[i - 1]))
            throw StatsError("spectrum file is not strictly ascending at row " +
                             std::to_string(i + 1));

    StatsOutput out;
    out.level_count = omegas.size();
    const UnfoldedSpectrum u = unfold(omegas, mean_level_density(cfg.billiard));
    out.histogram = spacing_histogram(u, cfg.stats.bins, cfg.stats.s_max);
    out.rigidity = delta3_curve(u, cfg.stats.L_values, cfg.stats.window_step_fraction);
    out.ks_poisson = distribution_distance(out.histogram, RefKind::Poisson);
    out.ks_goe = distribution_distance(out.histogram, RefKind::Goe);

    std::ostringstream pofs;
    pofs << "bin_center,density,reference_poisson,reference_goe\n";
    for (std::size_t b = 0; b < out.histogram.densities.size(); ++b) {
        const double c = 0.5 * (out.histogram.bin_edges[b] + out.histogram.bin_edges[b + 1]);
        pofs << format_double(c) << ',' << format_double(out.histogram.densities[b]) << ','
             << format_double(reference_pofs(RefKind::Poisson, c)) << ','
             << format_double(reference_pofs(RefKind::Goe, c)) << '\n';
    }
    atomic_write_file(out_dir / "pofs.csv", pofs.str());

    std::ostringstream d3;
    d3 << "L,value,window_count,reference_poisson,reference_goe\n";
    for (std::size_t i = 0; i < out.rigidity.L_values.size(); ++i) {
        const double L = out.rigidity.L_values[i];
        d3 << format_double(L) << ',' << format_double(out.rigidity.delta3[i]) << ','
           << out.rigidity.window_count[i] << ','
           << format_double(reference_delta3(RefKind::Poisson, L)) << ','
           << format_double(reference_delta3(RefKind::Goe, L)) << '\n';
    }
    atomic_write_file(out_dir / "delta3.csv", d3.str());

    nlohmann::json distances;
    distances["ks_poisson"] = out.ks_poisson;
    distances["ks_goe"] = out.ks_goe;
    distances["sample_count"] = out.histogram.sample_count;
    distances["overflow_count"] = out.histogram.overflow_count;
    distances["level_count"] = out.level_count;
    atomic_write_file(out_dir / "distances.json", distances.dump(2) + "\n");
    return out;
}

// Iterates the sweep grid (inverse strengths x scatterer counts; either list
// may be empty, falling back to the base configuration for that axis). Each
// cell writes its own run directory; a combined long-format table collects
// one row per (cell, L). Per-cell failures are recorded and the sweep
// continues.
inline bool run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::vector<std::optional<double>> vinvs;
    if (cfg.sweep.inverse_strengths.empty())
        vinvs.push_back(std::nullopt);
    else
        for (double v : cfg.sweep.inverse_strengths) vinvs.emplace_back(v);
    std::vector<std::optional<int>> counts;
    if (cfg.sweep.scatterer_counts.empty())
        counts.push_back(std::nullopt);
    else
        for (int n : cfg.sweep.scatterer_counts) counts.emplace_back(n);

    std::optional<BasisTable> basis;
    basis.emplace(enumerate_basis(cfg.billiard, cfg.solver.energy_cutoff));

    std::ostringstream summary;
    summary << "inverse_strength,n_scatterers,L,delta3,window_count,reference_poisson,"
               "reference_goe,ks_poisson,ks_goe,level_count\n";
    std::ostringstream errors;
    bool all_ok = true;

    for (const auto& nopt : counts) {
        for (const auto& vopt : vinvs) {
            ExperimentConfig cell = cfg;
            cell.sweep = {};
            if (nopt) {
                cell.scatterers.positions.resize(static_cast<std::size_t>(*nopt));
                cell.scatterers.inverse_strengths.resize(static_cast<std::size_t>(*nopt),
                                                         vopt ? *vopt : 0.0);
            }
            if (vopt)
                for (auto& v : cell.scatterers.inverse_strengths) v = *vopt;
            const std::size_t n = cell.scatterers.size();
            const double vlabel =
                vopt ? *vopt
                     : (cell.scatterers.inverse_strengths.empty()
                            ? 0.0
                            : cell.scatterers.inverse_strengths.front());
            const std::string name = detail::sweep_cell_name(vlabel, n);
            const std::filesystem::path cell_dir = out_dir / name;
            try {
                run_spectrum(cell, cell_dir, &*basis);
                const StatsOutput st = run_stats(cell, cell_dir / "spectrum.csv", cell_dir);
                for (std::size_t i = 0; i < st.rigidity.L_values.size(); ++i) {
                    const double L = st.rigidity.L_values[i];
                    summary << format_double(vlabel) << ',' << n << ',' << format_double(L) << ','
                            << format_double(st.rigidity.delta3[i]) << ','
                            << st.rigidity.window_count[i] << ','
                            << format_double(reference_delta3(RefKind::Poisson, L)) << ','
                            << format_double(reference_delta3(RefKind::Goe, L)) << ','
                            << format_double(st.ks_poisson) << ',' << format_double(st.ks_goe)
                            << ',' << st.level_count << '\n';
                }
            } catch (const std::exception& e) {
                all_ok = false;
                errors << name << ": " << e.what() << '\n';
            }
        }
    }
    atomic_write_file(out_dir / "sweep_summary.csv", summary.str());
    if (!all_ok) atomic_write_file(out_dir / "sweep_errors.log", errors.str());
    return all_ok;
}

// Gnuplot scripts overlaying the computed data with both reference laws.
// Regeneration is idempotent: content depends only on the file names.
inline void emit_plots(const std::filesystem::path& results_dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(results_dir / "pofs.csv") || !fs::exists(results_dir / "delta3.csv"))
        throw StatsError("emit_plots: missing pofs.csv or delta3.csv in " + results_dir.string());

    const std::string pofs_gp =
        "# Nearest-neighbor spacing distribution with reference curves.\n"
        "# Usage: gnuplot pofs.gp  (writes pofs.png next to the data)\n"
        "set terminal pngcairo size 800,600\n"
        "set output 'pofs.png'\n"
        "set datafile separator ','\n"
        "set xlabel 'S'\n"
        "set ylabel 'P(S)'\n"
        "set xrange [0:*]\n"
        "set yrange [0:*]\n"
        "set style fill solid 0.3 border -1\n"
        "poisson(x) = exp(-x)\n"
        "goe(x) = pi*x/2.0 * exp(-pi*x**2/4.0)\n"
        "plot 'pofs.csv' skip 1 using 1:2 with boxes title 'computed', \\\n"
        "     goe(x) with lines lw 2 title 'GOE', \\\n"
        "     poisson(x) with lines dashtype 2 lw 2 title 'Poisson'\n";
    atomic_write_file(results_dir / "pofs.gp", pofs_gp);

    const std::string d3_gp =
        "# Spectral rigidity with reference curves.\n"
        "# Usage: gnuplot delta3.gp  (writes delta3.png next to the data)\n"
        "set terminal pngcairo size 800,600\n"
        "set output 'delta3.png'\n"
        "set datafile separator ','\n"
        "set xlabel 'L'\n"
        "set ylabel 'Delta_3(L)'\n"
        "set key top left\n"
        "set xrange [0:*]\n"
        "set yrange [0:*]\n"
        "poisson(x) = x/15.0\n"
        "goe(x) = (log(x) - 0.0687)/pi**2\n"
        "plot 'delta3.csv' skip 1 using 1:2 with points pt 7 title 'computed', \\\n"
        "     goe(x) with lines lw 2 title 'GOE', \\\n"
        "     poisson(x) with lines dashtype 2 lw 2 title 'Poisson'\n";
    atomic_write_file(results_dir / "delta3.gp", d3_gp);
}

}  // namespace spectra
