#pragma once

// CW two-photon interference in an unbalanced Mach-Zehnder interferometer.
// Photons emitted one path delay apart meet at the output coupler; an
// auto-correlation across its outputs is recorded with the photons' relative
// polarisation set parallel or orthogonal.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "cohscat/correlations.hpp"
#include "cohscat/emitter.hpp"

namespace cohscat {

enum class Polarization { kParallel, kOrthogonal };

struct HomSetup {
    double delay = 10.4;          // ns
    double splitter_ratio = 0.5;  // intensity reflectivity R
    Polarization polarization = Polarization::kParallel;

    void validate() const {
        if (!(delay > 0.0) || !std::isfinite(delay)) throw std::invalid_argument("HomSetup: delay must be > 0");
        if (!(splitter_ratio > 0.0 && splitter_ratio < 1.0))
            throw std::invalid_argument("HomSetup: splitter_ratio must lie in (0, 1)");
    }
};

/// Post-selected correlation across the interferometer outputs:
///   orthogonal  (2RT g2(t) + R^2 g2(t - dT) + T^2 g2(t + dT)) / (R + T)^2
///   parallel    orthogonal - 2RT |g1(t)|^2 / (R + T)^2
/// clipped at zero. The tau grid must reach twice the delay.
inline CorrelationTrace hom_g2(const EmitterParams& p, double rabi, const HomSetup& setup,
                               std::span<const double> tau_grid, RegressionOptions opts = {}) {
    setup.validate();
    double reach = 0.0;
    for (double t : tau_grid) reach = std::max(reach, std::abs(t));
    if (reach < 2.0 * setup.delay * (1.0 - 1e-12))
        throw std::invalid_argument("hom_g2: tau grid must extend to at least twice the delay");

    const std::size_t n = tau_grid.size();
    std::vector<double> shifted(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        shifted[i] = tau_grid[i];
        shifted[n + i] = tau_grid[i] - setup.delay;
        shifted[2 * n + i] = tau_grid[i] + setup.delay;
    }
    const auto g2s = g2(p, rabi, shifted, opts);
    const double r = setup.splitter_ratio, t = 1.0 - r;
    const double norm = (r + t) * (r + t);
    const double w0 = 2.0 * r * t / norm, wm = r * r / norm, wp = t * t / norm;

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = w0 * g2s.values()[i] + wm * g2s.values()[n + i] + wp * g2s.values()[2 * n + i];
    if (setup.polarization == Polarization::kParallel) {
        const auto field = g1(p, rabi, tau_grid, opts);
        for (std::size_t i = 0; i < n; ++i) out[i] -= w0 * std::norm(field.complex_values()[i]);
    }
    for (double& x : out) x = std::max(0.0, x);
    return CorrelationTrace::g2({tau_grid.begin(), tau_grid.end()}, std::move(out));
}

struct VisibilityTrace {
    CorrelationTrace trace;
    std::vector<std::size_t> undefined;  // indices where the orthogonal trace vanished; value set to 0
};

/// Pointwise (g_perp - g_par) / g_perp.
inline VisibilityTrace visibility(const CorrelationTrace& parallel, const CorrelationTrace& orthogonal) {
    if (parallel.kind() != CorrelationKind::kG2 || orthogonal.kind() != CorrelationKind::kG2)
        throw std::invalid_argument("visibility: traces must be G2");
    if (parallel.tau() != orthogonal.tau()) throw std::invalid_argument("visibility: tau grids differ");
    const auto& a = parallel.values();
    const auto& b = orthogonal.values();
    std::vector<double> v(a.size());
    std::vector<std::size_t> undefined;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (b[i] < 1e-12) {
            v[i] = 0.0;
            undefined.push_back(i);
        } else {
            v[i] = (b[i] - a[i]) / b[i];
        }
    }
    return {CorrelationTrace::g2(parallel.tau(), std::move(v)), std::move(undefined)};
}

struct HomTraces {
    CorrelationTrace parallel;
    CorrelationTrace orthogonal;
};

inline HomTraces hom_pair(const EmitterParams& p, double rabi, HomSetup setup, std::span<const double> tau_grid,
                          RegressionOptions opts = {}) {
    setup.polarization = Polarization::kParallel;
    auto par = hom_g2(p, rabi, setup, tau_grid, opts);
    setup.polarization = Polarization::kOrthogonal;
    auto ort = hom_g2(p, rabi, setup, tau_grid, opts);
    return {std::move(par), std::move(ort)};
}

/// Visibility curves for a set of coherence ratios T2 / 2T1 at fixed T1,
/// optionally seen through a detector timing response.
inline std::vector<CorrelationTrace> visibility_family(const EmitterParams& base, double rabi, const HomSetup& setup,
                                                       std::span<const double> ratios,
                                                       std::span<const double> tau_grid,
                                                       const TimingResponse& irf = TimingResponse{0.0},
                                                       RegressionOptions opts = {}) {
    std::vector<CorrelationTrace> out;
    for (double ratio : ratios) {
        if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("visibility_family: ratios must lie in (0, 1]");
        const auto p = base.with_t2(std::min(2.0 * ratio * base.t1(), 2.0 * base.t1()));
        auto pair = hom_pair(p, rabi, setup, tau_grid, opts);
        if (irf.fwhm > 0.0) {
            pair.parallel = convolve_timing(pair.parallel, irf);
            pair.orthogonal = convolve_timing(pair.orthogonal, irf);
        }
        out.push_back(visibility(pair.parallel, pair.orthogonal).trace);
    }
    return out;
}

struct IrfSolution {
    double fwhm = 0.0;             // ns
    double peak_visibility = 0.0;  // at that fwhm
    int iterations = 0;
};

namespace detail {

inline double peak_visibility(const CorrelationTrace& par, const CorrelationTrace& ort, double fwhm) {
    const auto v = visibility(convolve_timing(par, {fwhm}), convolve_timing(ort, {fwhm}));
    const auto& x = v.trace.values();
    return *std::max_element(x.begin(), x.end());
}

inline CorrelationTrace crop(const CorrelationTrace& trace, double half_width) {
    std::vector<double> tau, val;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (std::abs(trace.tau()[i]) <= half_width) {
            tau.push_back(trace.tau()[i]);
            val.push_back(trace.values()[i]);
        }
    return CorrelationTrace::g2(std::move(tau), std::move(val));
}

}  // namespace detail

/// Gaussian timing-response FWHM at which the peak of the convolved
/// visibility equals `target`, by bisection on [0, fwhm_max]. Only the
/// central `window` of the traces is convolved.
inline IrfSolution solve_timing_irf(const CorrelationTrace& parallel, const CorrelationTrace& orthogonal,
                                    double target, double fwhm_max = 2.0, double window = 6.0) {
    const auto par = detail::crop(parallel, window);
    const auto ort = detail::crop(orthogonal, window);
    double lo = 0.0, hi = fwhm_max;
    const double v_lo = detail::peak_visibility(par, ort, lo);
    const double v_hi = detail::peak_visibility(par, ort, hi);
    if (!(target <= v_lo && target >= v_hi))
        throw std::invalid_argument("solve_timing_irf: target visibility not bracketed by [0, fwhm_max]");
    IrfSolution sol;
    for (sol.iterations = 1; sol.iterations <= 100; ++sol.iterations) {
        const double mid = 0.5 * (lo + hi);
        const double v = detail::peak_visibility(par, ort, mid);
        if (v > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-7) break;
    }
    sol.fwhm = 0.5 * (lo + hi);
    sol.peak_visibility = detail::peak_visibility(par, ort, sol.fwhm);
    return sol;
}

}  // namespace cohscat
