#pragma once

#include <array>
#include <cstddef>
#include <sstream>
#include <vector>

#include "spectra/basis.hpp"
#include "spectra/errors.hpp"

namespace spectra {

// N point scatterers with separated boundary conditions: positions x_k and
// inverse coupling strengths v_k^-1 (the diagonal of the Hermitian matrix in
// the secular condition).
struct ScattererSet {
    std::vector<std::array<double, 2>> positions;
    std::vector<double> inverse_strengths;

    std::size_t size() const { return positions.size(); }

    // Positions must be strictly interior: on the boundary the eigenfunctions
    // vanish identically and the scatterer decouples from everything.
    void validate(const BilliardConfig& cfg) const {
        if (positions.empty()) throw ConfigError("scatterer set must contain at least one point");
        if (positions.size() != inverse_strengths.size()) {
            std::ostringstream msg;
            msg << "scatterers: " << positions.size() << " positions but "
                << inverse_strengths.size() << " inverse strengths";
            throw ConfigError(msg.str());
        }
        for (std::size_t k = 0; k < positions.size(); ++k) {
            const auto& p = positions[k];
            if (!(p[0] > 0.0 && p[0] < cfg.lx && p[1] > 0.0 && p[1] < cfg.ly)) {
                std::ostringstream msg;
                msg << "scatterer " << k + 1 << " at (" << p[0] << ", " << p[1]
                    << ") is not strictly inside the rectangle (0, " << cfg.lx << ") x (0, "
                    << cfg.ly << ")";
                throw ConfigError(msg.str());
            }
        }
        for (std::size_t k = 0; k < positions.size(); ++k) {
            for (std::size_t l = k + 1; l < positions.size(); ++l) {
                if (positions[k] == positions[l]) {
                    std::ostringstream msg;
                    msg << "scatterers " << k + 1 << " and " << l + 1 << " share the position ("
                        << positions[k][0] << ", " << positions[k][1] << ")";
                    throw ConfigError(msg.str());
                }
            }
        }
    }
};

}  // namespace spectra
