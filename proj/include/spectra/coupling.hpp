#pragma once

// Strong-coupling band: a scatterer with inverse strength v^-1 substantially
// mixes eigenstates at energies where |v^-1 - (M/2pi) ln(omega/Lambda)| stays
// below half the constant width Delta = pi M / 2. The center drifts
// logarithmically, so any fixed coupling decouples at high enough energy.

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "spectra/errors.hpp"

namespace spectra {

struct CouplingBand {
    double mass = 2.0 * std::numbers::pi;
    double lambda = 1.0;

    double width() const { return std::numbers::pi * mass / 2.0; }
};

// Center curve g(omega) = (M / 2pi) ln(omega / Lambda).
inline double g_of_omega(const CouplingBand& band, double omega) {
    if (!(omega > 0.0)) {
        std::ostringstream msg;
        msg << "g(omega) requires omega > 0, got " << omega;
        throw ConfigError(msg.str());
    }
    return band.mass / (2.0 * std::numbers::pi) * std::log(omega / band.lambda);
}

struct StrongCouplingResult {
    bool strong = false;
    double margin = 0.0;  // Delta/2 - |v^-1 - g(omega)|; positive inside the band
};

inline StrongCouplingResult is_strong(const CouplingBand& band, double inverse_strength,
                                      double omega) {
    const double margin = band.width() / 2.0 - std::abs(inverse_strength - g_of_omega(band, omega));
    return {margin >= 0.0, margin};
}

// Energy interval where the band condition holds:
// omega in [Lambda exp(2pi (v^-1 - Delta/2) / M), Lambda exp(2pi (v^-1 + Delta/2) / M)].
inline std::pair<double, double> crossover_energies(const CouplingBand& band,
                                                    double inverse_strength) {
    const double half = band.width() / 2.0;
    const double scale = 2.0 * std::numbers::pi / band.mass;
    return {band.lambda * std::exp(scale * (inverse_strength - half)),
            band.lambda * std::exp(scale * (inverse_strength + half))};
}

}  // namespace spectra
