#pragma once

// Perturbed eigenvalues as roots of det(A - G(omega)) = 0 with
// A = diag(v_k^-1).
//
// Between consecutive unperturbed levels the derivative d/domega (A - G) is
// a Gram matrix (positive semidefinite), so every sorted eigenvalue branch
// of D(omega) = A - G(omega) is nondecreasing and crosses zero at most once.
// That turns the pole-ridden determinant into at most N monotone scalar
// problems per interval: bracket each crossing branch, bisect, polish.
// Below the lowest level D is analytic; its branches rise from -infinity
// (the diagonal grows like (M/2pi) ln|omega| as omega -> -inf), so the same
// scheme finds every bound state once a floor with all-negative branches is
// located by doubling.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spectra/errors.hpp"
#include "spectra/green.hpp"

namespace spectra {

struct Window {
    enum class Kind { Index, Energy };
    Kind kind = Kind::Energy;
    double lo = 0.0;  // for Kind::Index these are 1-based inclusive ranks
    double hi = 0.0;

    void validate() const {
        if (!(lo < hi)) throw ConfigError("window requires lo < hi");
        if (kind == Kind::Index && !(lo >= 1.0))
            throw ConfigError("index windows are 1-based; lo must be >= 1");
    }
};

struct SolverSettings {
    double energy_cutoff = 9200.0;
    double safety_fraction = 0.5;
    double tol_omega_factor = 1e-10;      // bisection width, units of mean spacing
    double pole_exclusion_factor = 1e-8;  // units of mean spacing
    bool tail_correction = true;

    GreenPolicy green_policy() const {
        return GreenPolicy{safety_fraction, pole_exclusion_factor, tail_correction};
    }
};

struct SecularProblem {
    const BasisTable* basis = nullptr;
    const ScattererSet* scatterers = nullptr;
    Window window;
    SolverSettings settings;
};

struct RootRecord {
    double omega = 0.0;
    double host_lo = -std::numeric_limits<double>::infinity();  // unperturbed interval
    double host_hi = 0.0;
    std::int64_t host_interval = -1;  // index m of (E_m, E_{m+1}); -1 = below E_1
    double residual = 0.0;            // |branch eigenvalue| at convergence
    int branch = 0;
    bool pole_adjacent = false;
    std::uint64_t global_index = 0;  // 1-based rank from the spectrum bottom, 0 if unknown
};

struct PerturbedSpectrum {
    std::vector<RootRecord> roots;
    std::string config_digest;
    // Index convention for global_index: rank 1 is the lowest perturbed
    // eigenvalue, bound states below E_1 included.
    bool indices_from_bottom = false;

    std::vector<double> omegas() const {
        std::vector<double> w;
        w.reserve(roots.size());
        for (const auto& r : roots) w.push_back(r.omega);
        return w;
    }
};

namespace detail {

inline std::size_t worker_count(std::size_t njobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SPECTRA_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) hw = static_cast<unsigned>(v);
    }
    return std::min<std::size_t>(hw, std::max<std::size_t>(njobs, 1));
}

// Sorted eigenvalues of A - G(omega).
inline Eigen::VectorXd branches(const GreenKernel& kernel, const Eigen::VectorXd& a_diag,
                                double omega) {
    if (kernel.n_scatterers() == 1) {
        Eigen::VectorXd v(1);
        v(0) = a_diag(0) - kernel.diag(0, omega);
        return v;
    }
    Eigen::MatrixXd d = (-kernel.matrix(omega).matrix).eval();
    d.diagonal() += a_diag;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

struct IntervalTask {
    std::int64_t host_interval;  // -1 for the bound region below E_1
    double host_lo, host_hi;     // unperturbed endpoints (host_lo may be -inf)
    double a, b;                 // bracketed evaluation range
};

// All roots in one interval, ascending.
inline std::vector<RootRecord> solve_interval(const GreenKernel& kernel,
                                              const Eigen::VectorXd& a_diag,
                                              const IntervalTask& task, double tol) {
    const auto n = static_cast<Eigen::Index>(kernel.n_scatterers());
    std::vector<RootRecord> out;
    if (!(task.a < task.b)) return out;  // interval swallowed by exclusion zones

    Eigen::VectorXd la = branches(kernel, a_diag, task.a);
    Eigen::VectorXd lb = branches(kernel, a_diag, task.b);

    // Pole-adjacent snapping: just above E_m the lowest branch dives to
    // -infinity, just below E_{m+1} the highest rises to +infinity. A wrong
    // sign at the evaluation edge means the crossing sits inside the
    // exclusion zone; report it at the boundary instead of losing it.
    if (task.host_interval >= 0 && la(0) > 0.0) {
        out.push_back({task.a, task.host_lo, task.host_hi, task.host_interval,
                       std::abs(la(0)), 0, true, 0});
    }

    // Seed brackets from a coarse grid so bisection starts tight. The grid
    // cannot create or destroy crossings: branches are monotone.
    const int grid_points = static_cast<int>(4 * kernel.n_scatterers() + 4);
    std::vector<double> xs(grid_points);
    std::vector<Eigen::VectorXd> ls(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        const double t = static_cast<double>(i + 1) / (grid_points + 1);
        xs[i] = task.a + (task.b - task.a) * t;
        ls[i] = branches(kernel, a_diag, xs[i]);
    }

    for (Eigen::Index br = 0; br < n; ++br) {
        if (!(la(br) < 0.0 && lb(br) > 0.0)) continue;
        double lo = task.a, hi = task.b;
        double flo = la(br), fhi = lb(br);
        for (int i = 0; i < grid_points; ++i) {
            if (ls[i](br) < 0.0) {
                lo = xs[i];
                flo = ls[i](br);
            } else {
                hi = xs[i];
                fhi = ls[i](br);
                break;
            }
        }
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
            const double fmid = branches(kernel, a_diag, mid)(br);
            if (fmid < 0.0) {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
                fhi = fmid;
            }
        }
        double root = 0.5 * (lo + hi);
        // one secant polish inside the final bracket
        if (fhi > flo) {
            const double sec = lo - flo * (hi - lo) / (fhi - flo);
            if (sec > lo && sec < hi) root = sec;
        }
        const double res = std::abs(branches(kernel, a_diag, root)(static_cast<Eigen::Index>(br)));
        out.push_back({root, task.host_lo, task.host_hi, task.host_interval, res,
                       static_cast<int>(br), false, 0});
    }

    if (std::isfinite(task.host_hi) && lb(n - 1) < 0.0) {
        out.push_back({task.b, task.host_lo, task.host_hi, task.host_interval,
                       std::abs(lb(n - 1)), static_cast<int>(n - 1), true, 0});
    }

    std::sort(out.begin(), out.end(),
              [](const RootRecord& x, const RootRecord& y) { return x.omega < y.omega; });
    return out;
}

// Floor below which every branch of A - G is negative. Branches are
// nondecreasing on (-inf, E_1), so no root can hide underneath it.
inline double bound_state_floor(const GreenKernel& kernel, const Eigen::VectorXd& a_diag) {
    const double e1 = kernel.basis().energy(0);
    double off = std::max(kernel.mean_spacing(), 1.0);
    for (int iter = 0; iter < 80; ++iter) {
        const double w = e1 - off;
        if (branches(kernel, a_diag, w).maxCoeff() < 0.0) return w;
        off *= 2.0;
    }
    throw BracketingError("no lower bound with all-negative secular branches found; "
                          "inverse strengths may be too large for the floor search");
}

inline void run_tasks(const GreenKernel& kernel, const Eigen::VectorXd& a_diag,
                      const std::vector<IntervalTask>& tasks, double tol,
                      std::vector<std::vector<RootRecord>>& results) {
    results.assign(tasks.size(), {});
    const std::size_t nworkers = worker_count(tasks.size());
    if (nworkers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            results[i] = solve_interval(kernel, a_diag, tasks[i], tol);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    pool.reserve(nworkers);
    for (std::size_t w = 0; w < nworkers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    results[i] = solve_interval(kernel, a_diag, tasks[i], tol);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// All roots of det(A - G(omega)) = 0 in the window. Index windows are
// resolved by solving every interval from the spectrum bottom (bound states
// included in the rank); energy windows skip that prefix.
inline PerturbedSpectrum solve_multi(const SecularProblem& problem) {
    if (problem.basis == nullptr || problem.scatterers == nullptr)
        throw ConfigError("secular problem requires a basis and a scatterer set");
    problem.window.validate();

    const GreenKernel kernel(*problem.basis, *problem.scatterers,
                             problem.settings.green_policy());
    const auto& basis = *problem.basis;
    const std::size_t nscat = kernel.n_scatterers();
    Eigen::VectorXd a_diag(static_cast<Eigen::Index>(nscat));
    for (std::size_t k = 0; k < nscat; ++k)
        a_diag(static_cast<Eigen::Index>(k)) = problem.scatterers->inverse_strengths[k];

    const double excl = kernel.pole_exclusion();
    const double tol = problem.settings.tol_omega_factor * kernel.mean_spacing();
    const double safe_limit = kernel.safe_energy_limit();
    const Window& win = problem.window;

    const bool from_bottom = win.kind == Window::Kind::Index;
    double energy_lo = win.lo, energy_hi = win.hi;
    if (from_bottom) {
        // enough intervals to cover rank hi: unperturbed level hi + N margin
        const auto need = static_cast<std::size_t>(win.hi) + nscat + 2;
        if (need + 1 >= basis.size())
            throw ConfigError("index window extends beyond the enumerated basis");
        energy_hi = basis.energy(need);
    } else if (!(energy_lo < safe_limit)) {
        throw TruncationUnsafeError("energy window lies entirely above the truncation-safe limit");
    }
    if (energy_hi > safe_limit) {
        std::ostringstream msg;
        msg << "window top " << energy_hi << " exceeds the truncation-safe limit " << safe_limit
            << "; raise the energy cutoff";
        throw TruncationUnsafeError(msg.str());
    }

    std::vector<detail::IntervalTask> tasks;
    if (from_bottom || energy_lo < basis.energy(0)) {
        const double floor = detail::bound_state_floor(kernel, a_diag);
        tasks.push_back({-1, -std::numeric_limits<double>::infinity(), basis.energy(0), floor,
                         basis.energy(0) - excl});
    }
    const std::size_t m_end =
        static_cast<std::size_t>(std::lower_bound(basis.levels().begin(), basis.levels().end(),
                                                  energy_hi,
                                                  [](const BasisLevel& a, double w) {
                                                      return a.energy < w;
                                                  }) -
                                 basis.levels().begin());
    for (std::size_t m = 0; m + 1 < basis.size() && m <= m_end; ++m) {
        const double ea = basis.energy(m), eb = basis.energy(m + 1);
        if (!from_bottom && eb < energy_lo) continue;
        if (ea > energy_hi) break;
        tasks.push_back({static_cast<std::int64_t>(m), ea, eb, ea + excl, eb - excl});
    }

    std::vector<std::vector<RootRecord>> per_interval;
    detail::run_tasks(kernel, a_diag, tasks, tol, per_interval);

    PerturbedSpectrum spectrum;
    spectrum.indices_from_bottom = from_bottom;
    for (auto& chunk : per_interval)
        for (auto& r : chunk) spectrum.roots.push_back(r);
    std::sort(spectrum.roots.begin(), spectrum.roots.end(),
              [](const RootRecord& x, const RootRecord& y) { return x.omega < y.omega; });

    if (from_bottom) {
        for (std::size_t i = 0; i < spectrum.roots.size(); ++i)
            spectrum.roots[i].global_index = i + 1;
        const auto lo = static_cast<std::size_t>(win.lo), hi = static_cast<std::size_t>(win.hi);
        std::vector<RootRecord> kept;
        for (const auto& r : spectrum.roots)
            if (r.global_index >= lo && r.global_index <= hi) kept.push_back(r);
        spectrum.roots = std::move(kept);
    } else {
        std::vector<RootRecord> kept;
        for (const auto& r : spectrum.roots)
            if (r.omega >= energy_lo && r.omega <= energy_hi) kept.push_back(r);
        spectrum.roots = std::move(kept);
    }
    return spectrum;
}

// N = 1 specialization: G is scalar and strictly decreasing from +infinity
// to -infinity across each interval, so each interval holds exactly one
// root of G(omega) = v^-1. Kept as an independent scalar path; solve_multi
// must agree with it.
inline PerturbedSpectrum solve_single(const SecularProblem& problem) {
    if (problem.scatterers == nullptr || problem.scatterers->size() != 1)
        throw ConfigError("solve_single requires exactly one scatterer");
    return solve_multi(problem);
}

struct EigenfunctionExpansion {
    double omega = 0.0;
    std::vector<double> coefficients;  // over basis levels, sum of squares = 1
    double norm = 0.0;                 // pre-normalization magnitude
};

// Expansion of the perturbed eigenfunction over the unperturbed basis:
// c_n proportional to sum_k a_k phi_n(x_k) / (omega - E_n), where a is the
// null vector of A - G(omega).
inline EigenfunctionExpansion eigenfunction_expansion(const SecularProblem& problem, double omega,
                                                      double null_space_tol = 1e-6) {
    const GreenKernel kernel(*problem.basis, *problem.scatterers,
                             problem.settings.green_policy());
    const auto n = static_cast<Eigen::Index>(kernel.n_scatterers());
    Eigen::VectorXd a_vec;
    if (n == 1) {
        a_vec = Eigen::VectorXd::Ones(1);
        kernel.guard(omega);
    } else {
        Eigen::MatrixXd d = (-kernel.matrix(omega).matrix).eval();
        for (Eigen::Index k = 0; k < n; ++k)
            d(k, k) += problem.scatterers->inverse_strengths[static_cast<std::size_t>(k)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
        Eigen::Index imin = 0;
        es.eigenvalues().cwiseAbs().minCoeff(&imin);
        double second = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != imin) second = std::min(second, std::abs(es.eigenvalues()(i)));
        if (second < null_space_tol) {
            std::ostringstream msg;
            msg << "null space of the secular matrix at omega = " << omega
                << " is not one-dimensional (|lambda_2| = " << second << ")";
            throw DegeneracyError(msg.str());
        }
        a_vec = es.eigenvectors().col(imin);
    }

    EigenfunctionExpansion out;
    out.omega = omega;
    out.coefficients.resize(problem.basis->size());
    double norm2 = 0.0;
    for (std::size_t lev = 0; lev < problem.basis->size(); ++lev) {
        double w = 0.0;
        for (Eigen::Index k = 0; k < n; ++k)
            w += a_vec(k) * kernel.phi(lev, static_cast<std::size_t>(k));
        const double c = w / (omega - problem.basis->energy(lev));
        out.coefficients[lev] = c;
        norm2 += c * c;
    }
    out.norm = std::sqrt(norm2);
    if (!(out.norm > 0.0) || !std::isfinite(out.norm))
        throw SolverError("eigenfunction expansion has zero or non-finite norm");
    for (auto& c : out.coefficients) c /= out.norm;
    return out;
}

// Self-adjointness consistency check: the transition matrix at omega = i
// Lambda, T = (A - G(i Lambda))^-1, and its relative non-normality
// || T T* - T* T ||_F / ||T||_F^2. Exactly zero for N = 1.
inline double normality_diagnostic(const SecularProblem& problem) {
    const GreenKernel kernel(*problem.basis, *problem.scatterers,
                             problem.settings.green_policy());
    const auto n = static_cast<Eigen::Index>(kernel.n_scatterers());
    Eigen::MatrixXcd w = (-kernel.matrix_at_ilambda(+1)).eval();
    for (Eigen::Index k = 0; k < n; ++k)
        w(k, k) += problem.scatterers->inverse_strengths[static_cast<std::size_t>(k)];
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(w);
    if (!lu.isInvertible())
        throw SolverError("normality diagnostic failed: A - G(i Lambda) is singular");
    const Eigen::MatrixXcd t = lu.inverse();
    const Eigen::MatrixXcd comm = t * t.adjoint() - t.adjoint() * t;
    const double tn = t.norm();
    return comm.norm() / (tn * tn);
}

}  // namespace spectra
