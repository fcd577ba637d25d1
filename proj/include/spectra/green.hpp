#pragma once

// Regularized Green-function matrix G(omega) between scatterer positions.
//
// Diagonal entries carry the subtraction term E_n / (E_n^2 + Lambda^2) that
// makes the 2D spectral sum converge; off-diagonal entries are the bare
// Green's function. The infinite sum is truncated at the basis cutoff; the
// truncated diagonal tail is restored in closed form by replacing
// phi_n(x_k)^2 with its mean 1/S and the level sum with a density integral:
//
//   rho/S * Int_{E_cut}^inf ( 1/(omega-E) + E/(E^2+Lambda^2) ) dE
//     = rho/S * ln( sqrt(E_cut^2+Lambda^2) / (E_cut - omega) ).
//
// No such mean-field tail exists off the diagonal (the product
// phi_n(x_k) phi_n(x_l) averages to zero for distinct interior points); its
// truncated tail is booked as an error bound instead and dominates the
// truncation budget.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <vector>

#include "spectra/basis.hpp"
#include "spectra/errors.hpp"
#include "spectra/scatterers.hpp"

namespace spectra {

struct GreenPolicy {
    double safety_fraction = 0.5;         // require omega <= safety_fraction * E_cut
    double pole_exclusion_factor = 1e-8;  // refuse |omega - E_n| below this * mean spacing
    bool tail_correction = true;
};

struct GreenEvaluation {
    double omega = 0.0;
    Eigen::MatrixXd matrix;
    double truncation_error_bound = 0.0;
};

class GreenKernel {
public:
    GreenKernel(const BasisTable& basis, const ScattererSet& scatterers,
                GreenPolicy policy = {})
        : basis_(&basis), policy_(policy), n_(scatterers.size()) {
        scatterers.validate(basis.config());
        const std::size_t nlev = basis.size();
        const auto& cfg = basis.config();

        energies_.resize(nlev);
        for (std::size_t n = 0; n < nlev; ++n) energies_[n] = basis.energy(n);

        phi_.resize(nlev * n_);
        for (std::size_t n = 0; n < nlev; ++n)
            for (std::size_t k = 0; k < n_; ++k)
                phi_[n * n_ + k] = eigenfunction_value(cfg, basis.level(n),
                                                       scatterers.positions[k][0],
                                                       scatterers.positions[k][1]);

        // pair-major products phi_n(x_k) phi_n(x_l), k <= l, so every G entry
        // is one contiguous dot product per evaluation
        npairs_ = n_ * (n_ + 1) / 2;
        pair_products_.resize(npairs_ * nlev);
        for (std::size_t k = 0; k < n_; ++k) {
            for (std::size_t l = k; l < n_; ++l) {
                double* dst = &pair_products_[pair_index(k, l) * nlev];
                for (std::size_t n = 0; n < nlev; ++n)
                    dst[n] = phi_[n * n_ + k] * phi_[n * n_ + l];
            }
        }

        // omega-independent pieces: regularization constants and the complex
        // weights used at omega = +-i Lambda
        const double lam = cfg.lambda;
        reg_constants_.assign(n_, 0.0);
        weight_re_.resize(nlev);
        weight_im_.resize(nlev);
        for (std::size_t n = 0; n < nlev; ++n) {
            const double e = basis.energy(n);
            const double denom = e * e + lam * lam;
            weight_re_[n] = -e / denom;
            weight_im_[n] = -lam / denom;
        }
        for (std::size_t k = 0; k < n_; ++k) {
            const double* pp = &pair_products_[pair_index(k, k) * nlev];
            double acc = 0.0;
            for (std::size_t n = 0; n < nlev; ++n) acc += pp[n] * (-weight_re_[n]);
            reg_constants_[k] = acc;
        }

        const double rho = mean_level_density(cfg);
        density_over_area_ = rho / cfg.area();
        mean_spacing_ = 1.0 / rho;
    }

    std::size_t n_scatterers() const { return n_; }
    const BasisTable& basis() const { return *basis_; }
    const GreenPolicy& policy() const { return policy_; }
    double mean_spacing() const { return mean_spacing_; }
    double pole_exclusion() const { return policy_.pole_exclusion_factor * mean_spacing_; }
    double safe_energy_limit() const { return policy_.safety_fraction * basis_->energy_cutoff(); }

    // phi_n(x_k) for the attached scatterer set
    double phi(std::size_t level, std::size_t k) const { return phi_[level * n_ + k]; }

    // Heuristic bound on the neglected off-diagonal tail; the recorded bound
    // must dominate observed cutoff-doubling drifts.
    double truncation_bound(double omega) const {
        return density_over_area_ * std::abs(std::log1p(-omega / basis_->energy_cutoff()));
    }

    // Throws unless omega is pole-distant and truncation-safe.
    void guard(double omega) const {
        if (omega > safe_energy_limit()) {
            std::ostringstream msg;
            msg << "omega = " << omega << " exceeds the truncation-safe limit "
                << safe_energy_limit() << " (= " << policy_.safety_fraction << " * E_cut)";
            throw TruncationUnsafeError(msg.str());
        }
        const std::size_t idx = nearest_level(omega);
        const double dist = std::abs(omega - basis_->energy(idx));
        if (dist < pole_exclusion()) {
            std::ostringstream msg;
            msg << "omega = " << omega << " within pole exclusion of level " << idx
                << " (E = " << basis_->energy(idx) << ", |omega - E| = " << dist << ")";
            throw PoleProximityError(omega, idx, dist, msg.str());
        }
    }

    double diag(std::size_t k, double omega) const {
        require_index(k);
        guard(omega);
        double g = pair_sum(pair_index(k, k), omega) + reg_constants_[k];
        if (policy_.tail_correction) g += diag_tail(omega);
        return g;
    }

    double offdiag(std::size_t k, std::size_t l, double omega) const {
        require_index(k);
        require_index(l);
        if (k == l)
            throw ConfigError("offdiag requires k != l; the diagonal uses the regularized form");
        guard(omega);
        return pair_sum(pair_index(k, l), omega);
    }

    // Full symmetric N x N matrix; each unordered pair is computed once.
    GreenEvaluation matrix(double omega) const {
        guard(omega);
        GreenEvaluation out;
        out.omega = omega;
        out.truncation_error_bound = truncation_bound(omega);
        out.matrix.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        const double tail = policy_.tail_correction ? diag_tail(omega) : 0.0;
        const double* r = reciprocals(omega);
        const std::size_t nlev = basis_->size();
        for (std::size_t k = 0; k < n_; ++k) {
            for (std::size_t l = k; l < n_; ++l) {
                double v = dot(&pair_products_[pair_index(k, l) * nlev], r, nlev);
                if (k == l) v += reg_constants_[k] + tail;
                out.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v;
                out.matrix(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
            }
        }
        return out;
    }

    // G at omega = sign * i Lambda, needed only by the transition-matrix
    // normality diagnostic. The regularization cancels the real part of the
    // diagonal exactly; the complex tail correction is the same closed form
    // continued off the real axis.
    Eigen::MatrixXcd matrix_at_ilambda(int sign) const {
        const std::size_t nlev = basis_->size();
        const double lam = basis_->config().lambda;
        const double s = sign >= 0 ? 1.0 : -1.0;
        Eigen::MatrixXcd g(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        std::complex<double> tail(0.0, 0.0);
        if (policy_.tail_correction) {
            const double ec = basis_->energy_cutoff();
            const std::complex<double> z(ec, -s * lam);
            tail = density_over_area_ * (std::log(z) - std::log(std::hypot(ec, lam)));
        }
        for (std::size_t k = 0; k < n_; ++k) {
            for (std::size_t l = k; l < n_; ++l) {
                const double* pp = &pair_products_[pair_index(k, l) * nlev];
                const double re = dot(pp, weight_re_.data(), nlev);
                const double im = s * dot(pp, weight_im_.data(), nlev);
                std::complex<double> v(re, im);
                if (k == l) v += reg_constants_[k] + tail;
                g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v;
                g(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
            }
        }
        return g;
    }

    // Index of the basis level nearest to omega.
    std::size_t nearest_level(double omega) const {
        const auto hi = static_cast<std::size_t>(
            std::lower_bound(energies_.begin(), energies_.end(), omega) - energies_.begin());
        if (hi == 0) return 0;
        if (hi >= energies_.size()) return energies_.size() - 1;
        return (omega - energies_[hi - 1] <= energies_[hi] - omega) ? hi - 1 : hi;
    }

private:
    std::size_t pair_index(std::size_t k, std::size_t l) const {
        // k <= l
        return k * n_ - k * (k - 1) / 2 + (l - k);
    }

    void require_index(std::size_t k) const {
        if (k >= n_) {
            std::ostringstream msg;
            msg << "scatterer index " << k << " out of range (N = " << n_ << ")";
            throw ConfigError(msg.str());
        }
    }

    double diag_tail(double omega) const {
        const double ec = basis_->energy_cutoff();
        const double lam = basis_->config().lambda;
        return density_over_area_ * std::log((ec - omega) / std::hypot(ec, lam));
    }

    // 1/(omega - E_n) for every retained level, in a per-thread scratch
    // buffer so concurrent evaluations at distinct omegas stay independent.
    const double* reciprocals(double omega) const {
        static thread_local std::vector<double> scratch;
        const std::size_t nlev = basis_->size();
        scratch.resize(nlev);
        const double* e = energies_.data();
        for (std::size_t n = 0; n < nlev; ++n) scratch[n] = 1.0 / (omega - e[n]);
        return scratch.data();
    }

    double pair_sum(std::size_t pair, double omega) const {
        const double* r = reciprocals(omega);
        return dot(&pair_products_[pair * basis_->size()], r, basis_->size());
    }

    // Fixed four-lane summation order: deterministic and identical across
    // worker counts.
    static double dot(const double* a, const double* b, std::size_t n) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            s0 += a[i] * b[i];
            s1 += a[i + 1] * b[i + 1];
            s2 += a[i + 2] * b[i + 2];
            s3 += a[i + 3] * b[i + 3];
        }
        for (; i < n; ++i) s0 += a[i] * b[i];
        return (s0 + s1) + (s2 + s3);
    }

    const BasisTable* basis_;
    GreenPolicy policy_;
    std::size_t n_ = 0;
    std::size_t npairs_ = 0;
    std::vector<double> energies_;       // basis energies, ascending
    std::vector<double> phi_;            // level-major phi_n(x_k)
    std::vector<double> pair_products_;  // pair-major phi_n(x_k) phi_n(x_l)
    std::vector<double> reg_constants_;  // sum phi_n(x_k)^2 E_n/(E_n^2+Lambda^2)
    std::vector<double> weight_re_, weight_im_;
    double density_over_area_ = 0.0;
    double mean_spacing_ = 1.0;
};

}  // namespace spectra
