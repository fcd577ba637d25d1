#pragma once

// Level statistics of an ordered spectrum: constant-density unfolding,
// nearest-neighbor spacing histogram with Poisson/GOE references, spectral
// rigidity Delta_3(L) by exact piecewise integration of the staircase, and
// Kolmogorov-Smirnov distances to the reference spacing laws.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include "spectra/errors.hpp"

namespace spectra {

enum class RefKind { Poisson, Goe };

struct UnfoldedSpectrum {
    std::vector<double> values;  // ascending, empirical mean spacing exactly 1
    double original_lo = 0.0;    // window endpoints before unfolding
    double original_hi = 0.0;
};

// rho * omega, then an affine rescale pinning the windowed mean spacing to 1.
inline UnfoldedSpectrum unfold(const std::vector<double>& omegas, double density) {
    if (omegas.size() < 2) throw StatsError("unfolding requires at least two levels");
    if (!(density > 0.0)) throw StatsError("unfolding requires a positive mean density");
    UnfoldedSpectrum u;
    u.original_lo = omegas.front();
    u.original_hi = omegas.back();
    const double span = density * (omegas.back() - omegas.front());
    if (!(span > 0.0)) throw StatsError("unfolding requires a strictly ascending spectrum");
    const double scale = static_cast<double>(omegas.size() - 1) / span;
    u.values.reserve(omegas.size());
    for (double w : omegas) u.values.push_back((density * w - density * omegas.front()) * scale);
    return u;
}

struct SpacingHistogram {
    std::vector<double> bin_edges;  // bins + 1 ascending edges on [0, s_max]
    std::vector<double> densities;  // probability density per bin
    std::size_t sample_count = 0;   // all spacings, overflow included
    std::size_t overflow_count = 0;

    double bin_width() const { return bin_edges[1] - bin_edges[0]; }
};

// Density-normalized histogram of consecutive spacings on [0, s_max];
// spacings above s_max are counted as overflow, never silently dropped, so
// the densities integrate to 1 - overflow/sample_count.
inline SpacingHistogram spacing_histogram(const UnfoldedSpectrum& u, int bins, double s_max) {
    if (bins < 1) throw StatsError("spacing histogram requires at least one bin");
    if (!(s_max > 0.0)) throw StatsError("spacing histogram requires s_max > 0");
    if (u.values.size() < 2) throw StatsError("spacing histogram requires at least two levels");

    SpacingHistogram h;
    h.bin_edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) h.bin_edges[i] = s_max * static_cast<double>(i) / bins;
    std::vector<std::size_t> counts(bins, 0);
    for (std::size_t i = 1; i < u.values.size(); ++i) {
        const double s = u.values[i] - u.values[i - 1];
        ++h.sample_count;
        if (s > s_max) {
            ++h.overflow_count;
            continue;
        }
        auto bin = static_cast<std::size_t>(s / s_max * bins);
        if (bin >= static_cast<std::size_t>(bins)) bin = bins - 1;
        ++counts[bin];
    }
    const double width = h.bin_edges[1] - h.bin_edges[0];
    h.densities.resize(bins);
    for (int i = 0; i < bins; ++i)
        h.densities[i] = static_cast<double>(counts[i]) /
                         (static_cast<double>(h.sample_count) * width);
    return h;
}

// Reference spacing densities: exp(-s) and the GOE Wigner surmise.
inline double reference_pofs(RefKind kind, double s) {
    if (s < 0.0) throw StatsError("spacing density is defined for s >= 0");
    if (kind == RefKind::Poisson) return std::exp(-s);
    return std::numbers::pi * s / 2.0 * std::exp(-std::numbers::pi * s * s / 4.0);
}

inline double reference_cdf(RefKind kind, double s) {
    if (kind == RefKind::Poisson) return 1.0 - std::exp(-s);
    return 1.0 - std::exp(-std::numbers::pi * s * s / 4.0);
}

// Reference rigidity: L/15 (Poisson) and (ln L - 0.0687)/pi^2 (GOE).
inline double reference_delta3(RefKind kind, double L) {
    if (!(L > 0.0)) throw StatsError("reference Delta3 requires L > 0");
    if (kind == RefKind::Poisson) return L / 15.0;
    return (std::log(L) - 0.0687) / (std::numbers::pi * std::numbers::pi);
}

struct Delta3Result {
    double value = 0.0;
    std::size_t window_count = 0;
};

// Spectral rigidity: mean over sliding windows of the least-squares
// deviation of the staircase from its best straight line. The staircase is
// piecewise constant, so with t the offset from the window center and t_k
// the sorted levels inside the window,
//   Int N dt      = sum (L/2 - t_k),
//   Int t N dt    = sum (L^2/8 - t_k^2 / 2),
//   Int N^2 dt    = sum (2k - 1)(L/2 - t_k),
// and the fitted residual is (Int N^2 - (Int N)^2/L - 12 (Int t N)^2/L^3)/L.
inline Delta3Result delta3(const UnfoldedSpectrum& u, double L, double window_step) {
    const auto& x = u.values;
    if (x.size() < 2) throw StatsError("Delta3 requires at least two levels");
    if (!(L > 0.0) || !(window_step > 0.0)) throw StatsError("Delta3 requires L > 0 and step > 0");
    if (x.back() - x.front() < L) {
        std::ostringstream msg;
        msg << "Delta3 window L = " << L << " exceeds the unfolded span "
            << x.back() - x.front();
        throw StatsError(msg.str());
    }

    Delta3Result out;
    double acc = 0.0;
    for (double c = x.front() + L / 2.0; c <= x.back() - L / 2.0 + 1e-12; c += window_step) {
        const double wlo = c - L / 2.0, whi = c + L / 2.0;
        const auto first = std::lower_bound(x.begin(), x.end(), wlo);
        const auto last = std::upper_bound(first, x.end(), whi);
        double i0 = 0.0, i1 = 0.0, i2 = 0.0;
        std::size_t k = 0;
        for (auto it = first; it != last; ++it) {
            const double t = *it - c;
            ++k;
            i0 += L / 2.0 - t;
            i1 += L * L / 8.0 - t * t / 2.0;
            i2 += static_cast<double>(2 * k - 1) * (L / 2.0 - t);
        }
        acc += (i2 - i0 * i0 / L - 12.0 * i1 * i1 / (L * L * L)) / L;
        ++out.window_count;
    }
    if (out.window_count == 0) throw StatsError("Delta3 produced no windows");
    out.value = acc / static_cast<double>(out.window_count);
    return out;
}

struct RigidityCurve {
    std::vector<double> L_values;
    std::vector<double> delta3;
    std::vector<std::size_t> window_count;
};

inline RigidityCurve delta3_curve(const UnfoldedSpectrum& u, const std::vector<double>& L_values,
                                  double window_step_fraction) {
    RigidityCurve curve;
    for (double L : L_values) {
        const auto r = delta3(u, L, L * window_step_fraction);
        curve.L_values.push_back(L);
        curve.delta3.push_back(r.value);
        curve.window_count.push_back(r.window_count);
    }
    return curve;
}

// Kolmogorov-Smirnov distance between the histogram's piecewise-linear
// empirical CDF and the reference CDF, evaluated on [0, s_max] (the sup is
// scanned on a fine grid inside every bin). Overflow mass lives above s_max
// and only lowers the empirical CDF inside the scan range, which the scan
// already sees at the last edge.
inline double distribution_distance(const SpacingHistogram& h, RefKind kind) {
    if (h.sample_count == 0) throw StatsError("KS distance requires a nonempty histogram");
    const std::size_t bins = h.densities.size();
    double dist = 0.0;
    double cum = 0.0;
    constexpr int kScan = 64;
    for (std::size_t b = 0; b < bins; ++b) {
        const double w = h.bin_edges[b + 1] - h.bin_edges[b];
        for (int j = 0; j <= kScan; ++j) {
            const double frac = static_cast<double>(j) / kScan;
            const double s = h.bin_edges[b] + frac * w;
            const double femp = cum + h.densities[b] * frac * w;
            dist = std::max(dist, std::abs(femp - reference_cdf(kind, s)));
        }
        cum += h.densities[b] * w;
    }
    return dist;
}

}  // namespace spectra
