#pragma once

// Two-level emitter: parameters, drive envelopes, optical Bloch equations,
// steady state, coherent-scattering fraction and the gated saturation curve.
//
// Units: time in ns, angular frequencies in rad/ns, energies in ueV.
//
// Bloch equations (u, v = real/imag parts of 2*coherence, w = rho_ee - rho_gg):
//   du/dt = -u/T2 + D v
//   dv/dt = -D u - v/T2 - W w
//   dw/dt =  W v - (w + 1)/T1
// which is the rotating-frame evolution under H = (W sx - D sz)/2 with u, v, w
// the expectation values of sx, sy, sz.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cohscat/ode.hpp"

namespace cohscat {

/// Reduced Planck constant in ueV*ns.
inline constexpr double kHbarUevNs = 0.6582119;

class EmitterParams {
public:
    EmitterParams() : EmitterParams(1.0, 0.6) {}

    EmitterParams(double t1, double t2, double detuning = 0.0, double cavity_q = 0.0, double purcell_factor = 1.0)
        : t1_(t1), t2_(t2), detuning_(detuning), cavity_q_(cavity_q), purcell_factor_(purcell_factor) {
        if (!(std::isfinite(t1) && t1 > 0.0)) throw std::invalid_argument("EmitterParams: t1 must be > 0");
        if (!(std::isfinite(t2) && t2 > 0.0)) throw std::invalid_argument("EmitterParams: t2 must be > 0");
        // Relative slack so parameters rebuilt from a linewidth are not rejected by rounding.
        if (t2 > 2.0 * t1 * (1.0 + 1e-12))
            throw std::invalid_argument("EmitterParams: t2 must not exceed 2*t1");
        if (!std::isfinite(detuning)) throw std::invalid_argument("EmitterParams: detuning must be finite");
        if (!(purcell_factor >= 1.0)) throw std::invalid_argument("EmitterParams: purcell_factor must be >= 1");
        if (!(cavity_q >= 0.0)) throw std::invalid_argument("EmitterParams: cavity_q must be >= 0");
    }

    /// Emitter whose homogeneous linewidth 2*hbar/T2 equals `linewidth_uev`, with T2 = ratio * 2 T1.
    static EmitterParams from_linewidth(double linewidth_uev, double coherence_ratio = 1.0) {
        if (!(linewidth_uev > 0.0)) throw std::invalid_argument("linewidth must be > 0");
        if (!(coherence_ratio > 0.0 && coherence_ratio <= 1.0))
            throw std::invalid_argument("coherence_ratio must be in (0, 1]");
        const double t2 = 2.0 * kHbarUevNs / linewidth_uev;
        return EmitterParams(t2 / (2.0 * coherence_ratio), t2);
    }

    double t1() const noexcept { return t1_; }
    double t2() const noexcept { return t2_; }
    double detuning() const noexcept { return detuning_; }
    double hbar_const() const noexcept { return kHbarUevNs; }
    double cavity_q() const noexcept { return cavity_q_; }
    double purcell_factor() const noexcept { return purcell_factor_; }

    /// T2 / (2 T1).
    double coherence_ratio() const noexcept { return t2_ / (2.0 * t1_); }
    /// Homogeneous linewidth (FWHM) 2*hbar/T2 in ueV.
    double linewidth_uev() const noexcept { return 2.0 * kHbarUevNs / t2_; }
    /// Saturation parameter s = W^2 T1 T2.
    double saturation(double rabi) const noexcept { return rabi * rabi * t1_ * t2_; }
    /// Rabi frequency giving saturation parameter s.
    double rabi_for_saturation(double s) const { return std::sqrt(s / (t1_ * t2_)); }

    EmitterParams with_t2(double t2) const { return {t1_, t2, detuning_, cavity_q_, purcell_factor_}; }
    EmitterParams with_detuning(double d) const { return {t1_, t2_, d, cavity_q_, purcell_factor_}; }

private:
    double t1_;
    double t2_;
    double detuning_;
    double cavity_q_;
    double purcell_factor_;
};

/// Bulk (no cavity) emitter: T1 = 1 ns, T2 = 0.6 ns.
inline EmitterParams bulk_emitter() { return EmitterParams(1.0, 0.6); }

/// Cavity-enhanced emitter: 6.14 ueV linewidth, T2 = 2 T1, Q = 8900.
inline EmitterParams cavity_emitter() {
    const double t2 = 2.0 * kHbarUevNs / 6.14;
    return EmitterParams(t2 / 2.0, t2, 0.0, 8900.0, 1.0);
}

// ---------------------------------------------------------------------------
// Rabi frequency unit conversion.

enum class RabiConvention {
    kCyclic,   // the quoted GHz value is W/2pi
    kAngular,  // the quoted GHz value is W itself in rad/ns
};

inline double rabi_from_ghz(double ghz, RabiConvention conv = RabiConvention::kCyclic) {
    return conv == RabiConvention::kCyclic ? 2.0 * std::numbers::pi * ghz : ghz;
}

inline double rabi_to_ghz(double rabi, RabiConvention conv = RabiConvention::kCyclic) {
    return conv == RabiConvention::kCyclic ? rabi / (2.0 * std::numbers::pi) : rabi;
}

// ---------------------------------------------------------------------------
// Drive field.

struct ContinuousWave {};
struct SquarePulse {
    double duration;  // ns
};
struct GaussianPulse {
    double fwhm;  // ns
};

using Envelope = std::variant<ContinuousWave, SquarePulse, GaussianPulse>;

/// Drive W(t) = rabi * envelope(t - center). Pulses are centred on `center`.
class DriveField {
public:
    static DriveField cw(double rabi) { return DriveField(rabi, ContinuousWave{}, 0.0); }

    static DriveField square(double rabi, double duration, double center = 0.0) {
        if (!(duration > 0.0)) throw std::invalid_argument("square pulse duration must be > 0");
        return DriveField(rabi, SquarePulse{duration}, center);
    }
    static DriveField gaussian(double rabi, double fwhm, double center = 0.0) {
        if (!(fwhm > 0.0)) throw std::invalid_argument("gaussian pulse fwhm must be > 0");
        return DriveField(rabi, GaussianPulse{fwhm}, center);
    }
    static DriveField square_with_area(double area, double duration, double center = 0.0) {
        return square(area / duration, duration, center);
    }
    static DriveField gaussian_with_area(double area, double fwhm, double center = 0.0) {
        return gaussian(area / (fwhm * gaussian_area_factor()), fwhm, center);
    }

    double rabi() const noexcept { return rabi_; }
    double center() const noexcept { return center_; }
    const Envelope& envelope() const noexcept { return envelope_; }
    bool is_cw() const noexcept { return std::holds_alternative<ContinuousWave>(envelope_); }

    /// Integral of W(t) over all time; throws for CW.
    double pulse_area() const {
        if (const auto* sq = std::get_if<SquarePulse>(&envelope_)) return rabi_ * sq->duration;
        if (const auto* g = std::get_if<GaussianPulse>(&envelope_)) return rabi_ * g->fwhm * gaussian_area_factor();
        throw std::logic_error("pulse_area is undefined for a CW drive");
    }

    double operator()(double t) const noexcept {
        if (const auto* sq = std::get_if<SquarePulse>(&envelope_)) {
            const double half = 0.5 * sq->duration;
            return (t >= center_ - half && t < center_ + half) ? rabi_ : 0.0;
        }
        if (const auto* g = std::get_if<GaussianPulse>(&envelope_)) {
            const double x = (t - center_) / g->fwhm;
            return rabi_ * std::exp(-4.0 * std::numbers::ln2 * x * x);
        }
        return rabi_;
    }

    /// Interval outside which the drive is zero (or below exp(-69) for Gaussians).
    std::array<double, 2> support() const noexcept {
        if (const auto* sq = std::get_if<SquarePulse>(&envelope_))
            return {center_ - 0.5 * sq->duration, center_ + 0.5 * sq->duration};
        if (const auto* g = std::get_if<GaussianPulse>(&envelope_))
            return {center_ - 5.0 * g->fwhm, center_ + 5.0 * g->fwhm};
        return {-INFINITY, INFINITY};
    }

    /// Times where the drive is discontinuous.
    std::vector<double> breakpoints() const {
        if (std::holds_alternative<SquarePulse>(envelope_)) {
            auto s = support();
            return {s[0], s[1]};
        }
        return {};
    }

    /// Area of a unit-peak Gaussian divided by its FWHM: sqrt(pi / (4 ln 2)).
    static double gaussian_area_factor() noexcept { return std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2)); }

private:
    DriveField(double rabi, Envelope env, double center) : rabi_(rabi), envelope_(env), center_(center) {
        if (!(std::isfinite(rabi) && rabi >= 0.0)) throw std::invalid_argument("rabi must be finite and >= 0");
    }

    double rabi_;
    Envelope envelope_;
    double center_;
};

// ---------------------------------------------------------------------------
// Bloch state.

/// Bloch vector. The excited population is stored directly so that weakly
/// driven states keep full relative precision in rho_ee.
class BlochState {
public:
    constexpr BlochState() = default;

    static constexpr BlochState from_uvw(double u, double v, double w) { return {u, v, 0.5 * (1.0 + w)}; }
    static constexpr BlochState from_population(double u, double v, double rho_ee) { return {u, v, rho_ee}; }
    static constexpr BlochState ground() { return {0.0, 0.0, 0.0}; }
    static constexpr BlochState excited() { return {0.0, 0.0, 1.0}; }

    double u() const noexcept { return u_; }
    double v() const noexcept { return v_; }
    double w() const noexcept { return 2.0 * rho_ee_ - 1.0; }
    double rho_ee() const noexcept { return rho_ee_; }

    double norm_squared() const noexcept { return u_ * u_ + v_ * v_ + w() * w(); }
    /// <sigma_-> = (u - i v) / 2.
    std::complex<double> lowering() const noexcept { return {0.5 * u_, -0.5 * v_}; }
    /// |<sigma>|^2 = (u^2 + v^2) / 4.
    double coherence_squared() const noexcept { return 0.25 * (u_ * u_ + v_ * v_); }
    bool in_bloch_ball(double tol = 1e-9) const noexcept { return norm_squared() <= 1.0 + tol; }

private:
    constexpr BlochState(double u, double v, double rho_ee) : u_(u), v_(v), rho_ee_(rho_ee) {}

    double u_ = 0.0;
    double v_ = 0.0;
    double rho_ee_ = 0.0;
};

/// Bloch equations extended to arbitrary (non-Hermitian, non-unit-trace) operators.
///
/// Components are (Tr X sx, Tr X sy, Tr X sz, Tr X); the trace is conserved and
/// enters the relaxation term of the population. For a density matrix this is
/// the ordinary Bloch system with trace 1.
template <class T, class Drive>
struct BlochRhs {
    double inv_t1;
    double inv_t2;
    double detuning;
    Drive drive;

    void operator()(double t, const std::array<T, 4>& y, std::array<T, 4>& dy) const {
        const double rabi = drive(t);
        dy[0] = -inv_t2 * y[0] + detuning * y[1];
        dy[1] = -detuning * y[0] - inv_t2 * y[1] - rabi * y[2];
        dy[2] = rabi * y[1] - inv_t1 * (y[2] + y[3]);
        dy[3] = T{};
    }
};

struct ConstantDrive {
    double rabi;
    double operator()(double) const noexcept { return rabi; }
};

// ---------------------------------------------------------------------------
// Operations.

/// Steady state of the Bloch equations under CW drive `rabi` (rad/ns).
inline BlochState steady_state(const EmitterParams& p, double rabi) {
    if (!std::isfinite(rabi)) throw std::invalid_argument("steady_state: rabi must be finite");
    if (rabi < 0.0) throw std::invalid_argument("steady_state: rabi must be >= 0");
    const double g = 1.0 / p.t2();
    const double d = p.detuning();
    // u = D v T2 from the first equation, then v and w follow linearly.
    const double s = rabi * rabi * p.t1() * p.t2();
    const double detuned = 1.0 + d * d / (g * g);
    const double denom = detuned + s;
    const double w = -detuned / denom;
    const double v = -rabi * w * g / (g * g + d * d);
    const double u = d * v / g;
    return BlochState::from_population(u, v, 0.5 * s / denom);
}

struct EvolveOptions {
    double tolerance = 1e-10;
};

/// Integrate the Bloch equations from `initial` at t_grid[0]; one state per grid point.
inline std::vector<BlochState> evolve(const EmitterParams& p, const DriveField& drive, const BlochState& initial,
                                      std::span<const double> t_grid, EvolveOptions opts = {}) {
    if (!initial.in_bloch_ball()) throw std::invalid_argument("evolve: initial state outside the Bloch ball");
    BlochRhs<double, DriveField> rhs{1.0 / p.t1(), 1.0 / p.t2(), p.detuning(), drive};
    OdeOptions ode;
    ode.rel_tol = opts.tolerance;
    ode.abs_tol = opts.tolerance;
    if (!drive.is_cw()) {
        // Never let a step jump over the whole pulse.
        const auto sup = drive.support();
        ode.max_step = 0.05 * (sup[1] - sup[0]);
    }
    const auto bps = drive.breakpoints();
    const auto raw = integrate_on_grid<double, 4>(rhs, std::array<double, 4>{initial.u(), initial.v(), initial.w(), 1.0},
                                                  t_grid, ode, bps);
    std::vector<BlochState> out;
    out.reserve(raw.size());
    for (const auto& y : raw) out.push_back(BlochState::from_uvw(y[0], y[1], y[2]));
    return out;
}

/// Fraction of emitted light that is coherently scattered: T2 / (2 T1 (1 + W^2 T1 T2)).
inline double rrs_fraction(const EmitterParams& p, double rabi) {
    if (!(std::isfinite(rabi) && rabi >= 0.0)) throw std::invalid_argument("rrs_fraction: rabi must be finite, >= 0");
    return p.t2() / (2.0 * p.t1() * (1.0 + p.saturation(rabi)));
}

/// Same ratio formed from the steady state, |<sigma>|^2 / rho_ee. Undefined (NaN) at rabi = 0.
inline double coherent_fraction_from_steady_state(const EmitterParams& p, double rabi) {
    const BlochState ss = steady_state(p, rabi);
    return ss.coherence_squared() / ss.rho_ee();
}

// ---------------------------------------------------------------------------
// Gated saturation curve.

struct GatingModel {
    double charge_occupation = 1.0;      // [0, 1]
    double laser_leakage = 0.0;          // counts/s per nW
    double collection_efficiency = 1.0;  // detected per emitted

    void validate() const {
        if (!(charge_occupation >= 0.0 && charge_occupation <= 1.0))
            throw std::invalid_argument("charge_occupation must be in [0, 1]");
        if (!(laser_leakage >= 0.0)) throw std::invalid_argument("laser_leakage must be >= 0");
        if (!(collection_efficiency >= 0.0)) throw std::invalid_argument("collection_efficiency must be >= 0");
    }
};

struct SaturationPoint {
    double power;   // nW
    double counts;  // counts/s
};

/// Detected count rate versus incident power; the emitter term is present only when `gate_on`.
inline std::vector<SaturationPoint> saturation_curve(const EmitterParams& p, const GatingModel& gating,
                                                     std::span<const double> powers, double rabi_per_sqrt_power,
                                                     bool gate_on) {
    gating.validate();
    // Rate in 1/ns converted to counts/s.
    constexpr double kPerNsToPerS = 1e9;
    std::vector<SaturationPoint> out;
    out.reserve(powers.size());
    for (double power : powers) {
        if (!(power >= 0.0)) throw std::invalid_argument("saturation_curve: powers must be >= 0");
        const double rabi = rabi_per_sqrt_power * std::sqrt(power);
        double counts = gating.laser_leakage * power;
        if (gate_on)
            counts += gating.charge_occupation * gating.collection_efficiency * steady_state(p, rabi).rho_ee() /
                      p.t1() * kPerNsToPerS;
        out.push_back({power, counts});
    }
    return out;
}

/// Power at which s = 1 (the saturation knee).
inline double saturation_power(const EmitterParams& p, double rabi_per_sqrt_power) {
    const double rabi = p.rabi_for_saturation(1.0);
    return (rabi / rabi_per_sqrt_power) * (rabi / rabi_per_sqrt_power);
}

/// Laser leakage that makes the emitter/laser count ratio equal `ratio` at the saturation knee.
inline double leakage_for_ratio(const EmitterParams& p, const GatingModel& gating, double rabi_per_sqrt_power,
                                double ratio) {
    const double p_sat = saturation_power(p, rabi_per_sqrt_power);
    GatingModel no_laser = gating;
    no_laser.laser_leakage = 0.0;
    const double power = p_sat;
    const double emitter = saturation_curve(p, no_laser, std::span<const double>(&power, 1), rabi_per_sqrt_power,
                                            true)
                               .front()
                               .counts;
    return emitter / (ratio * p_sat);
}

// ---------------------------------------------------------------------------
// Cavity-derived parameters.

/// Emitter with lifetime reduced by `purcell_factor` and T2 = coherence_ratio * 2 T1.
inline EmitterParams derive_cavity_params(double t1_bulk, double purcell_factor, double coherence_ratio,
                                          double cavity_q = 0.0) {
    if (!(t1_bulk > 0.0)) throw std::invalid_argument("t1_bulk must be > 0");
    if (!(purcell_factor >= 1.0)) throw std::invalid_argument("purcell_factor must be >= 1");
    if (!(coherence_ratio > 0.0 && coherence_ratio <= 1.0))
        throw std::invalid_argument("coherence_ratio must be in (0, 1]");
    const double t1 = t1_bulk / purcell_factor;
    return EmitterParams(t1, coherence_ratio * 2.0 * t1, 0.0, cavity_q, purcell_factor);
}

}  // namespace cohscat
