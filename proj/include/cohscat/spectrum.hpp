#pragma once

// Emission spectrum of the CW-driven emitter: a laser-width coherent line on
// top of the incoherent (Mollow) part, seen through a Lorentzian instrument.
//
// The spectrum is built in the time domain. Lorentzian broadening of FWHM G
// is multiplication of the field correlation by exp(-G |tau| / 2 hbar), so the
// laser line and the instrument response are applied before one discrete
// Fourier transform. On an M-point energy grid with spacing dE the transform
// uses M time samples spaced 2 pi hbar / (M dE); with that pairing the
// discrete integral sum(density) * dE equals g1(0) = 1 exactly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cohscat/correlations.hpp"
#include "cohscat/emitter.hpp"
#include "cohscat/least_squares.hpp"

namespace cohscat {

struct SpectralResponse {
    double instrument_fwhm = 0.78;  // ueV, Lorentzian
    double laser_fwhm = 0.37;       // ueV, Lorentzian

    void validate() const {
        if (!(instrument_fwhm >= 0.0) || !(laser_fwhm >= 0.0) || !std::isfinite(instrument_fwhm) ||
            !std::isfinite(laser_fwhm))
            throw std::invalid_argument("SpectralResponse: widths must be finite and >= 0");
    }
};

/// Spectral density on a uniform energy grid (detuning from the laser, ueV).
class SpectrumTrace {
public:
    SpectrumTrace(std::vector<double> energy, std::vector<double> density, std::vector<double> coherent_density)
        : energy_(std::move(energy)), density_(std::move(density)), coherent_(std::move(coherent_density)) {
        if (energy_.size() != density_.size() || energy_.size() != coherent_.size())
            throw std::invalid_argument("SpectrumTrace: size mismatch");
        spacing_ = detail::uniform_spacing(energy_);
        double c = 0.0;
        for (double x : coherent_) c += x;
        coherent_weight_ = std::clamp(c * spacing_, 0.0, 1.0);
    }

    const std::vector<double>& energy() const noexcept { return energy_; }
    const std::vector<double>& density() const noexcept { return density_; }
    const std::vector<double>& coherent_density() const noexcept { return coherent_; }
    std::vector<double> incoherent_density() const {
        std::vector<double> out(density_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, density_[i] - coherent_[i]);
        return out;
    }
    double coherent_weight() const noexcept { return coherent_weight_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return energy_.size(); }

    /// Riemann sum of the density over the grid.
    double integral() const noexcept {
        double s = 0.0;
        for (double x : density_) s += x;
        return s * spacing_;
    }

private:
    std::vector<double> energy_;
    std::vector<double> density_;
    std::vector<double> coherent_;
    double coherent_weight_ = 0.0;
    double spacing_ = 0.0;
};

/// Uniform grid of n points, spacing 2 half_span / n, with E = 0 at index n/2.
inline std::vector<double> spectrum_grid(double half_span = 40.0, std::size_t n = 4096) {
    if (!(half_span > 0.0) || n < 8) throw std::invalid_argument("spectrum_grid: need half_span > 0 and n >= 8");
    const double de = 2.0 * half_span / static_cast<double>(n);
    std::vector<double> out(n);
    const auto mid = static_cast<std::ptrdiff_t>(n / 2);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(static_cast<std::ptrdiff_t>(i) - mid) * de;
    return out;
}

/// Area-normalised Lorentzian of the given FWHM.
inline double lorentzian(double x, double center, double fwhm) {
    const double g = 0.5 * fwhm;
    return g / (std::numbers::pi * ((x - center) * (x - center) + g * g));
}

namespace detail {

/// Index k of each energy E = k dE; the grid must contain E = 0 on a sample.
inline std::vector<std::ptrdiff_t> energy_indices(const std::vector<double>& energy, double de) {
    std::vector<std::ptrdiff_t> k(energy.size());
    for (std::size_t i = 0; i < energy.size(); ++i) {
        const double q = energy[i] / de;
        k[i] = static_cast<std::ptrdiff_t>(std::llround(q));
        if (std::abs(q - static_cast<double>(k[i])) > 1e-6)
            throw std::invalid_argument("emission_spectrum: energy grid must contain E = 0 as a sample");
    }
    return k;
}

}  // namespace detail

/// Spectrum of the CW-driven emitter, normalised to unit area.
///
/// Energies are measured from the laser; positive E is on the blue side.
/// With detuning = w_laser - w_emitter the emitter line sits at E = -hbar detuning.
/// Refuses grids spanning less than ten natural linewidths, and grids whose
/// edge does not clear the outer Mollow sideband by one linewidth.
inline SpectrumTrace emission_spectrum(const EmitterParams& p, double rabi, const SpectralResponse& response,
                                       const std::vector<double>& energy_grid, RegressionOptions opts = {}) {
    using C = std::complex<double>;
    response.validate();
    detail::require_driven(rabi);
    const double de = detail::uniform_spacing(energy_grid);
    if (!(de > 0.0)) throw std::invalid_argument("emission_spectrum: energy grid must be increasing");
    const std::size_t m = energy_grid.size();
    const double span = de * static_cast<double>(m);
    const double lw = p.linewidth_uev();
    if (span < 10.0 * lw) throw std::invalid_argument("emission_spectrum: energy grid narrower than 10 linewidths");
    const double sideband = kHbarUevNs * std::hypot(rabi, p.detuning());
    const double edge = std::min(-energy_grid.front(), energy_grid.back());
    if (edge < sideband + lw)
        throw std::invalid_argument("emission_spectrum: energy grid does not cover the Mollow sidebands");
    const auto kidx = detail::energy_indices(energy_grid, de);

    const double dt = 2.0 * std::numbers::pi * kHbarUevNs / span;
    const auto jmin = -static_cast<std::ptrdiff_t>(m / 2);
    const auto half = static_cast<std::size_t>(-jmin);
    std::vector<double> tau_pos(half + 1);
    for (std::size_t j = 0; j <= half; ++j) tau_pos[j] = static_cast<double>(j) * dt;
    const auto field = g1(p, rabi, tau_pos, opts);
    const double offset = field.coherent_offset();

    // Time-domain signals on j = jmin .. jmin + m - 1.
    const double inst_rate = response.instrument_fwhm / (2.0 * kHbarUevNs);
    const double laser_rate = response.laser_fwhm / (2.0 * kHbarUevNs);
    std::vector<C> inc(m), coh(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::ptrdiff_t j = jmin + static_cast<std::ptrdiff_t>(i);
        const auto aj = static_cast<std::size_t>(std::abs(j));
        const double t = static_cast<double>(aj) * dt;
        const double inst = std::exp(-inst_rate * t);
        C g = field.complex_values()[aj] - offset;
        if (j < 0) g = std::conj(g);
        inc[i] = g * inst;
        coh[i] = offset * std::exp(-laser_rate * t) * inst;
    }

    std::vector<C> twiddle(m);
    for (std::size_t r = 0; r < m; ++r)
        twiddle[r] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(m));
    const auto mm = static_cast<std::ptrdiff_t>(m);
    const double scale = dt / (2.0 * std::numbers::pi * kHbarUevNs);

    std::vector<double> density(m), coherent(m);
    for (std::size_t e = 0; e < m; ++e) {
        C si = 0.0, sc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::ptrdiff_t j = jmin + static_cast<std::ptrdiff_t>(i);
            const auto r = static_cast<std::size_t>((((kidx[e] * j) % mm) + mm) % mm);
            si += inc[i] * twiddle[r];
            sc += coh[i] * twiddle[r];
        }
        coherent[e] = std::max(0.0, scale * sc.real());
        density[e] = coherent[e] + std::max(0.0, scale * si.real());
    }
    return SpectrumTrace(energy_grid, std::move(density), std::move(coherent));
}

struct LinewidthFit {
    double intrinsic_fwhm = 0.0;  // fitted width minus instrument width, ueV
    double total_fwhm = 0.0;      // fitted Lorentzian FWHM, ueV
    double center = 0.0;          // ueV
    double amplitude = 0.0;       // peak height above baseline, 1/ueV
    double baseline = 0.0;        // 1/ueV
    double residual_norm = 0.0;
};

/// Least-squares Lorentzian-plus-constant fit to the dominant peak.
///
/// A Lorentzian intrinsic line seen through a Lorentzian instrument is a
/// Lorentzian whose width is the sum, so the intrinsic width is the fitted
/// width minus `instrument_fwhm`. The fit window is four estimated widths on
/// each side of the peak.
inline LinewidthFit fit_linewidth(const std::vector<double>& energy, const std::vector<double>& density,
                                  double instrument_fwhm, FitOptions opts = {}) {
    if (energy.size() != density.size()) throw std::invalid_argument("fit_linewidth: size mismatch");
    if (!(instrument_fwhm >= 0.0)) throw std::invalid_argument("fit_linewidth: instrument_fwhm must be >= 0");
    const double de = detail::uniform_spacing(energy);
    const auto n = static_cast<std::ptrdiff_t>(energy.size());
    const auto peak = std::max_element(density.begin(), density.end()) - density.begin();
    const double top = density[static_cast<std::size_t>(peak)];
    std::ptrdiff_t lo = peak, hi = peak;
    while (lo > 0 && density[static_cast<std::size_t>(lo - 1)] > 0.5 * top) --lo;
    while (hi < n - 1 && density[static_cast<std::size_t>(hi + 1)] > 0.5 * top) ++hi;
    if (hi - lo < 2) throw std::invalid_argument("fit_linewidth: peak not resolved by the energy grid");
    const double w_est = static_cast<double>(hi - lo + 1) * de;

    const auto reach = std::max<std::ptrdiff_t>(5, static_cast<std::ptrdiff_t>(std::ceil(4.0 * w_est / de)));
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, peak - reach);
    const std::ptrdiff_t b = std::min<std::ptrdiff_t>(n - 1, peak + reach);
    std::vector<double> xs(energy.begin() + a, energy.begin() + b + 1);
    std::vector<double> ys(density.begin() + a, density.begin() + b + 1);
    const double floor = *std::min_element(ys.begin(), ys.end());

    auto model = [](double x, const std::array<double, 4>& q) {
        const double g = 0.5 * q[2];
        return q[0] * g * g / ((x - q[1]) * (x - q[1]) + g * g) + q[3];
    };
    const auto fit = levenberg_marquardt<4>(model, xs, ys,
                                            {top - floor, energy[static_cast<std::size_t>(peak)], w_est, floor}, opts);
    LinewidthFit out;
    out.amplitude = fit.params[0];
    out.center = fit.params[1];
    out.total_fwhm = std::abs(fit.params[2]);
    out.baseline = fit.params[3];
    out.intrinsic_fwhm = out.total_fwhm - instrument_fwhm;
    out.residual_norm = fit.residual_norm;
    return out;
}

inline LinewidthFit fit_linewidth(const SpectrumTrace& trace, const SpectralResponse& response,
                                  FitOptions opts = {}) {
    response.validate();
    return fit_linewidth(trace.energy(), trace.density(), response.instrument_fwhm, opts);
}

}  // namespace cohscat
