#pragma once

// First- and second-order correlation functions of the CW-driven emitter,
// computed with the quantum regression theorem on the Bloch equations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "cohscat/emitter.hpp"

namespace cohscat {

enum class CorrelationKind { kG1, kG2 };

class CorrelationTrace {
public:
    using Complex = std::complex<double>;

    /// Real-valued g2 trace. Values on a symmetric grid are symmetrised and
    /// clipped at zero.
    static CorrelationTrace g2(std::vector<double> tau, std::vector<double> values) {
        if (tau.size() != values.size()) throw std::invalid_argument("CorrelationTrace: size mismatch");
        CorrelationTrace t;
        t.kind_ = CorrelationKind::kG2;
        t.tau_ = std::move(tau);
        t.values_.resize(values.size());
        const bool sym = is_symmetric_grid(t.tau_);
        const std::size_t n = values.size();
        for (std::size_t i = 0; i < n; ++i) {
            double x = sym ? 0.5 * (values[i] + values[n - 1 - i]) : values[i];
            t.values_[i] = std::max(0.0, x);
        }
        return t;
    }

    static CorrelationTrace g1(std::vector<double> tau, std::vector<Complex> values, double coherent_offset) {
        if (tau.size() != values.size()) throw std::invalid_argument("CorrelationTrace: size mismatch");
        CorrelationTrace t;
        t.kind_ = CorrelationKind::kG1;
        t.tau_ = std::move(tau);
        t.g1_ = std::move(values);
        t.coherent_offset_ = coherent_offset;
        return t;
    }

    CorrelationKind kind() const noexcept { return kind_; }
    const std::vector<double>& tau() const noexcept { return tau_; }
    std::size_t size() const noexcept { return tau_.size(); }

    /// g2 samples (G2 traces only).
    const std::vector<double>& values() const {
        if (kind_ != CorrelationKind::kG2) throw std::logic_error("values(): trace is not G2");
        return values_;
    }
    /// Complex g1 samples (G1 traces only).
    const std::vector<Complex>& complex_values() const {
        if (kind_ != CorrelationKind::kG1) throw std::logic_error("complex_values(): trace is not G1");
        return g1_;
    }
    /// |<sigma>|^2 / rho_ee, the non-decaying part of g1.
    double coherent_offset() const noexcept { return coherent_offset_; }

    /// g1(tau) minus its coherent offset.
    std::vector<Complex> incoherent_part() const {
        std::vector<Complex> out = complex_values();
        for (auto& z : out) z -= coherent_offset_;
        return out;
    }

    static bool is_symmetric_grid(const std::vector<double>& tau, double tol = 1e-12) {
        const std::size_t n = tau.size();
        if (n == 0) return false;
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(tau[i] + tau[n - 1 - i]) > tol * std::max(1.0, std::abs(tau[i]))) return false;
        return true;
    }

private:
    CorrelationKind kind_ = CorrelationKind::kG2;
    std::vector<double> tau_;
    std::vector<double> values_;
    std::vector<Complex> g1_;
    double coherent_offset_ = 0.0;
};

struct BlinkingParams {
    double amplitude = 0.1;  // >= 0
    double timescale = 50.0; // ns, > 0

    void validate() const {
        if (!(amplitude >= 0.0)) throw std::invalid_argument("blinking amplitude must be >= 0");
        if (!(timescale > 0.0)) throw std::invalid_argument("blinking timescale must be > 0");
    }
};

struct TimingResponse {
    double fwhm = 0.1;  // ns, 0 = ideal detector

    void validate() const {
        if (!(fwhm >= 0.0)) throw std::invalid_argument("timing response fwhm must be >= 0");
    }
};

struct RegressionOptions {
    double tolerance = 1e-12;
};

namespace detail {

struct AbsGrid {
    std::vector<double> points;        // sorted unique |tau|, starting at 0
    std::vector<std::size_t> index;    // tau[i] -> points[index[i]]
};

inline AbsGrid absolute_grid(std::span<const double> tau) {
    AbsGrid g;
    g.points.reserve(tau.size() + 1);
    g.points.push_back(0.0);
    for (double t : tau) {
        if (!std::isfinite(t)) throw std::invalid_argument("tau grid must be finite");
        g.points.push_back(std::abs(t));
    }
    std::sort(g.points.begin(), g.points.end());
    g.points.erase(std::unique(g.points.begin(), g.points.end()), g.points.end());
    g.index.reserve(tau.size());
    for (double t : tau)
        g.index.push_back(static_cast<std::size_t>(
            std::lower_bound(g.points.begin(), g.points.end(), std::abs(t)) - g.points.begin()));
    return g;
}

inline void require_driven(double rabi) {
    if (!(std::isfinite(rabi) && rabi > 0.0))
        throw std::invalid_argument("correlation functions need a finite CW Rabi frequency > 0");
}

inline double require_cw(const DriveField& drive) {
    if (!drive.is_cw()) throw std::invalid_argument("correlation functions require a CW drive");
    return drive.rabi();
}

}  // namespace detail

/// Normalised intensity correlation g2(tau): the population regrowth from the
/// ground state (the state left behind by a detection) over its steady value.
inline CorrelationTrace g2(const EmitterParams& p, double rabi, std::span<const double> tau_grid,
                           RegressionOptions opts = {}) {
    detail::require_driven(rabi);
    const auto grid = detail::absolute_grid(tau_grid);
    const double rho_ss = steady_state(p, rabi).rho_ee();

    BlochRhs<double, ConstantDrive> rhs{1.0 / p.t1(), 1.0 / p.t2(), p.detuning(), ConstantDrive{rabi}};
    OdeOptions ode;
    ode.rel_tol = ode.abs_tol = opts.tolerance;
    const auto states = integrate_on_grid<double, 4>(rhs, {0.0, 0.0, -1.0, 1.0}, grid.points, ode);

    std::vector<double> values(tau_grid.size());
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        const auto& y = states[grid.index[i]];
        values[i] = 0.5 * (y[3] + y[2]) / rho_ss;
    }
    return CorrelationTrace::g2({tau_grid.begin(), tau_grid.end()}, std::move(values));
}

inline CorrelationTrace g2(const EmitterParams& p, const DriveField& drive, std::span<const double> tau_grid,
                           RegressionOptions opts = {}) {
    return g2(p, detail::require_cw(drive), tau_grid, opts);
}

/// Normalised field correlation g1(tau) = <s+(t+tau) s-(t)> / rho_ee, with
/// g1(-tau) = conj(g1(tau)).
inline CorrelationTrace g1(const EmitterParams& p, double rabi, std::span<const double> tau_grid,
                           RegressionOptions opts = {}) {
    using C = std::complex<double>;
    detail::require_driven(rabi);
    const auto grid = detail::absolute_grid(tau_grid);
    const BlochState ss = steady_state(p, rabi);
    const double rho = ss.rho_ee();
    const C lower = ss.lowering();  // <s->

    // Pauli components of X = s- rho_ss: (rho_ee, -i rho_ee, -<s->, <s->).
    const std::array<C, 4> x0{C(rho, 0.0), C(0.0, -rho), -lower, lower};
    BlochRhs<C, ConstantDrive> rhs{1.0 / p.t1(), 1.0 / p.t2(), p.detuning(), ConstantDrive{rabi}};
    OdeOptions ode;
    // Complex magnitudes scale with rho_ee; keep the absolute tolerance relative to it.
    ode.rel_tol = opts.tolerance;
    ode.abs_tol = opts.tolerance * rho;
    const auto states = integrate_on_grid<C, 4>(rhs, x0, grid.points, ode);

    std::vector<C> values(tau_grid.size());
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        const auto& y = states[grid.index[i]];
        // Tr(s+ X) = (Tr X sx + i Tr X sy) / 2.
        C val = 0.5 * (y[0] + C(0.0, 1.0) * y[1]) / rho;
        values[i] = tau_grid[i] < 0.0 ? std::conj(val) : val;
    }
    return CorrelationTrace::g1({tau_grid.begin(), tau_grid.end()}, std::move(values), ss.coherence_squared() / rho);
}

inline CorrelationTrace g1(const EmitterParams& p, const DriveField& drive, std::span<const double> tau_grid,
                           RegressionOptions opts = {}) {
    return g1(p, detail::require_cw(drive), tau_grid, opts);
}

/// Multiply a g2 trace by the intermittency envelope 1 + a exp(-|tau|/tau_b).
inline CorrelationTrace apply_blinking(const CorrelationTrace& trace, const BlinkingParams& blinking) {
    if (trace.kind() != CorrelationKind::kG2) throw std::invalid_argument("apply_blinking: trace must be G2");
    blinking.validate();
    std::vector<double> values = trace.values();
    const auto& tau = trace.tau();
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] *= 1.0 + blinking.amplitude * std::exp(-std::abs(tau[i]) / blinking.timescale);
    return CorrelationTrace::g2(tau, std::move(values));
}

namespace detail {

inline double uniform_spacing(const std::vector<double>& tau) {
    if (tau.size() < 2) throw std::invalid_argument("grid needs at least two points");
    const double dt = (tau.back() - tau.front()) / static_cast<double>(tau.size() - 1);
    for (std::size_t i = 1; i < tau.size(); ++i)
        if (std::abs((tau[i] - tau[i - 1]) - dt) > 1e-9 * std::max(dt, 1e-300) + 1e-12 * std::abs(tau[i]))
            throw std::invalid_argument("grid must be uniform");
    return dt;
}

/// Convolve with a sampled Gaussian. Each input bin is spread with weights
/// renormalised over the bins that exist, so the discrete sum is conserved.
template <class T>
std::vector<T> gaussian_spread(const std::vector<T>& in, double dt, double fwhm) {
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const auto n = static_cast<std::ptrdiff_t>(in.size());
    const auto half = static_cast<std::ptrdiff_t>(std::ceil(8.0 * sigma / dt));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
        const double x = static_cast<double>(k) * dt / sigma;
        kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * x * x);
    }
    std::vector<T> out(in.size(), T{});
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-half, -i);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(half, n - 1 - i);
        double norm = 0.0;
        for (std::ptrdiff_t k = lo; k <= hi; ++k) norm += kernel[static_cast<std::size_t>(k + half)];
        const T src = in[static_cast<std::size_t>(i)] / norm;
        for (std::ptrdiff_t k = lo; k <= hi; ++k)
            out[static_cast<std::size_t>(i + k)] += kernel[static_cast<std::size_t>(k + half)] * src;
    }
    return out;
}

}  // namespace detail

/// Gaussian detector timing response applied on a uniform tau grid.
inline CorrelationTrace convolve_timing(const CorrelationTrace& trace, const TimingResponse& irf) {
    irf.validate();
    const double dt = detail::uniform_spacing(trace.tau());
    if (irf.fwhm == 0.0) return trace;
    if (trace.kind() == CorrelationKind::kG2)
        return CorrelationTrace::g2(trace.tau(), detail::gaussian_spread(trace.values(), dt, irf.fwhm));
    return CorrelationTrace::g1(trace.tau(), detail::gaussian_spread(trace.complex_values(), dt, irf.fwhm),
                                trace.coherent_offset());
}

/// Uniform grid of `n` points on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) return {lo};
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

/// Symmetric uniform grid with odd length so that tau = 0 is a sample.
inline std::vector<double> symmetric_grid(double tau_max, std::size_t half_points) {
    auto g = linspace(-tau_max, tau_max, 2 * half_points + 1);
    g[half_points] = 0.0;
    return g;
}

}  // namespace cohscat
