#pragma once

// Pulsed excitation: Rabi curves, Monte Carlo photon streams from a
// quantum-jump unravelling, HBT peak-area analysis and a click-level model of
// pulsed two-photon interference.
//
// Trajectories evolve the unnormalised no-emission state (u, v, w, tr) where
// tr is the probability of no emission since the last jump. A photon is
// emitted when tr falls to a uniform deviate r; the emitter then restarts in
// the ground state with a fresh deviate. Between pulses the no-emission
// evolution is solved in closed form.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cohscat/emitter.hpp"
#include "cohscat/ode.hpp"
#include "cohscat/parallel.hpp"
#include "cohscat/rng.hpp"

namespace cohscat {

enum class PulseShape { kGaussian, kSquare };

struct PulseTrain {
    double pulse_area = 0.71 * std::numbers::pi;
    double pulse_fwhm = 0.057;   // ns; the full duration for square pulses
    double separation = 2.36;    // ns between the two pulses of a pair
    double pair_period = 13.1;   // ns between pairs
    std::uint64_t n_pairs = 1000;
    PulseShape shape = PulseShape::kGaussian;

    /// Half width of the window outside which a pulse's drive is treated as zero.
    double window_half() const noexcept { return shape == PulseShape::kGaussian ? 5.0 * pulse_fwhm : 0.5 * pulse_fwhm; }

    /// Pulse `index` (0 or 1) of pair `pair`.
    double pulse_center(std::uint64_t pair, int index) const noexcept {
        return static_cast<double>(pair) * pair_period + window_half() + index * separation;
    }

    DriveField pulse(std::uint64_t pair, int index) const {
        const double c = pulse_center(pair, index);
        return shape == PulseShape::kGaussian ? DriveField::gaussian_with_area(pulse_area, pulse_fwhm, c)
                                              : DriveField::square_with_area(pulse_area, pulse_fwhm, c);
    }

    void validate() const {
        if (!(pulse_area >= 0.0) || !std::isfinite(pulse_area))
            throw std::invalid_argument("PulseTrain: pulse_area must be finite and >= 0");
        if (!(pulse_fwhm > 0.0)) throw std::invalid_argument("PulseTrain: pulse_fwhm must be > 0");
        if (!(separation > pulse_fwhm)) throw std::invalid_argument("PulseTrain: pulse_fwhm must be < separation");
        if (!(pair_period > separation)) throw std::invalid_argument("PulseTrain: separation must be < pair_period");
        if (pair_period - separation < 2.0 * window_half())
            throw std::invalid_argument("PulseTrain: pulses of consecutive pairs overlap");
        if (n_pairs < 1) throw std::invalid_argument("PulseTrain: n_pairs must be >= 1");
    }
};

struct PhotonTag {
    std::uint64_t pair = 0;
    int pulse = 0;
    double time = 0.0;  // ns

    friend bool operator==(const PhotonTag&, const PhotonTag&) = default;
};

struct PhotonStream {
    std::vector<PhotonTag> tags;  // ascending in time
    std::uint64_t seed = 0;
    EmitterParams params = bulk_emitter();
    PulseTrain train;

    /// Photon count per (pair, pulse), laid out as counts[2 * pair + pulse].
    std::vector<std::uint32_t> counts() const {
        std::vector<std::uint32_t> n(2 * train.n_pairs, 0);
        for (const auto& t : tags) ++n[2 * t.pair + static_cast<std::uint64_t>(t.pulse)];
        return n;
    }
};

namespace detail {

struct NoEmissionRhs {
    double inv_t1, inv_t2, detuning;
    const std::vector<DriveField>* fields;
    double lo, hi;

    void operator()(double t, const std::array<double, 4>& y, std::array<double, 4>& dy) const {
        t = std::clamp(t, lo, hi);
        double rabi = 0.0;
        for (const auto& f : *fields) rabi += f(t);
        const double decay = 0.5 * inv_t1 * (y[2] + y[3]);
        dy[0] = -inv_t2 * y[0] + detuning * y[1];
        dy[1] = -detuning * y[0] - inv_t2 * y[1] - rabi * y[2];
        dy[2] = rabi * y[1] - decay;
        dy[3] = -decay;
    }
};

/// Quantum-jump simulation of one block of pulses that starts in the ground state.
class JumpSimulator {
public:
    using State = std::array<double, 4>;

    JumpSimulator(const EmitterParams& p, std::vector<DriveField> pulses, double rel_tol = 1e-9)
        : p_(p), rel_tol_(rel_tol) {
        std::sort(pulses.begin(), pulses.end(),
                  [](const DriveField& a, const DriveField& b) { return a.center() < b.center(); });
        for (const auto& f : pulses) {
            const auto sup = f.support();
            starts_.push_back(sup[0]);
            const double scale =
                std::holds_alternative<GaussianPulse>(f.envelope()) ? std::get<GaussianPulse>(f.envelope()).fwhm
                                                                    : sup[1] - sup[0];
            if (!segments_.empty() && sup[0] < segments_.back().end) {
                auto& s = segments_.back();
                s.end = std::max(s.end, sup[1]);
                s.fields.push_back(f);
                s.max_step = std::min(s.max_step, 0.25 * scale);
            } else {
                segments_.push_back({sup[0], sup[1], {f}, 0.25 * scale});
            }
        }
    }

    /// Calls emit(pulse_index, time) for every emission. Pulse index is the
    /// latest pulse whose window has started.
    template <class Emit>
    void run(PhiloxStream& rng, Emit&& emit) const {
        State y = ground();
        double r = rng.uniform();
        double t = segments_.empty() ? 0.0 : segments_.front().start;
        auto on_jump = [&](double tj) {
            emit(pulse_index(tj), tj);
            y = ground();
            r = rng.uniform();
        };
        for (const auto& seg : segments_) {
            free_evolve(y, r, t, seg.start, on_jump);
            t = seg.start;
            driven_evolve(seg, y, r, t, on_jump);
            t = seg.end;
        }
        free_evolve(y, r, t, std::numeric_limits<double>::infinity(), on_jump);
    }

private:
    struct Segment {
        double start, end;
        std::vector<DriveField> fields;
        double max_step;
    };

    static State ground() { return {0.0, 0.0, -1.0, 1.0}; }

    int pulse_index(double t) const {
        const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
        return static_cast<int>(std::max<std::ptrdiff_t>(0, (it - starts_.begin()) - 1));
    }

    template <class OnJump>
    void free_evolve(State& y, double r, double t0, double t1, OnJump& on_jump) const {
        const double p0 = 0.5 * (y[3] + y[2]);
        if (p0 > 0.0) {
            const double need = (y[3] - r) / p0;  // fraction of p0 that must decay for tr to reach r
            if (need < 1.0) {
                const double tj = t0 - p_.t1() * std::log1p(-std::max(0.0, need));
                if (tj <= t1) {
                    on_jump(tj);
                    return;
                }
            }
        }
        if (std::isinf(t1)) return;
        const double len = t1 - t0;
        const double keep = std::exp(-len / p_.t1());
        const std::complex<double> z =
            std::complex<double>(y[0], y[1]) * std::exp(std::complex<double>(-len / p_.t2(), -p_.detuning() * len));
        const double tr = y[3] - p0 * (1.0 - keep);
        const double pe = p0 * keep;
        y = {z.real(), z.imag(), 2.0 * pe - tr, tr};
    }

    template <class OnJump>
    void driven_evolve(const Segment& seg, State& y, double& r, double t0, OnJump& on_jump) const {
        OdeOptions opts;
        opts.rel_tol = rel_tol_;
        opts.abs_tol = 1e-3 * rel_tol_;
        opts.max_step = seg.max_step;
        const NoEmissionRhs rhs{1.0 / p_.t1(), 1.0 / p_.t2(), p_.detuning(), &seg.fields,
                                std::nextafter(seg.start, seg.end), std::nextafter(seg.end, seg.start)};
        double t = t0;
        while (t < seg.end) {
            DormandPrince<double, 4, NoEmissionRhs> solver(rhs, t, y, opts);
            bool jumped = false;
            while (solver.time() < seg.end) {
                solver.step(seg.end);
                if (solver.state()[3] < r) {
                    double a = solver.previous_time(), b = solver.time();
                    for (int k = 0; k < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++k) {
                        const double m = 0.5 * (a + b);
                        (solver.interpolate(m)[3] < r ? b : a) = m;
                    }
                    on_jump(b);
                    t = b;
                    jumped = true;
                    break;
                }
            }
            if (!jumped) {
                y = solver.state();
                return;
            }
        }
    }

    EmitterParams p_;
    double rel_tol_;
    std::vector<Segment> segments_;
    std::vector<double> starts_;
};

}  // namespace detail

/// Monte Carlo photon stream for a two-pulse-per-pair train.
///
/// Pair a draws from the Philox substream (seed, a) and starts in the ground
/// state, so the stream is identical for every worker count.
inline PhotonStream simulate_stream(const EmitterParams& p, const PulseTrain& train, std::uint64_t seed,
                                    unsigned threads = 1) {
    train.validate();
    PhotonStream out;
    out.seed = seed;
    out.params = p;
    out.train = train;
    if (train.pulse_area == 0.0) return out;

    const detail::JumpSimulator sim(p, {train.pulse(0, 0), train.pulse(0, 1)});
    const auto n = static_cast<std::size_t>(train.n_pairs);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
    std::vector<std::vector<PhotonTag>> parts(workers);
    parallel_chunks(workers, workers, [&](std::size_t wb, std::size_t we) {
        for (std::size_t w = wb; w < we; ++w) {
            const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
            auto& part = parts[w];
            for (std::size_t a = begin; a < end; ++a) {
                PhiloxStream rng(seed, a);
                const double offset = static_cast<double>(a) * train.pair_period;
                sim.run(rng, [&](int pulse, double t) { part.push_back({a, pulse, t + offset}); });
            }
        }
    });
    for (auto& part : parts) out.tags.insert(out.tags.end(), part.begin(), part.end());
    std::stable_sort(out.tags.begin(), out.tags.end(),
                     [](const PhotonTag& x, const PhotonTag& y) { return x.time < y.time; });
    return out;
}

struct RabiPoint {
    double area = 0.0;
    double probability = 0.0;  // expected photons per pulse
    double std_error = 0.0;    // zero for the deterministic curve
};

/// Expected photon number emitted per pulse, starting from the ground state:
/// the integral of rho_ee / T1 across the pulse plus the population left to
/// decay afterwards.
inline std::vector<RabiPoint> rabi_curve(const EmitterParams& p, std::span<const double> areas, double pulse_fwhm,
                                         PulseShape shape = PulseShape::kGaussian) {
    std::vector<RabiPoint> out;
    for (double area : areas) {
        if (!(area >= 0.0)) throw std::invalid_argument("rabi_curve: areas must be >= 0");
        if (area == 0.0) {
            out.push_back({0.0, 0.0, 0.0});
            continue;
        }
        const DriveField f = shape == PulseShape::kGaussian ? DriveField::gaussian_with_area(area, pulse_fwhm)
                                                            : DriveField::square_with_area(area, pulse_fwhm);
        const auto sup = f.support();
        const double inv_t1 = 1.0 / p.t1(), inv_t2 = 1.0 / p.t2(), d = p.detuning();
        const double lo = std::nextafter(sup[0], sup[1]), hi = std::nextafter(sup[1], sup[0]);
        auto rhs = [&](double t, const std::array<double, 5>& y, std::array<double, 5>& dy) {
            const double rabi = f(std::clamp(t, lo, hi));
            const double pe = 0.5 * (y[2] + 1.0);
            dy[0] = -inv_t2 * y[0] + d * y[1];
            dy[1] = -d * y[0] - inv_t2 * y[1] - rabi * y[2];
            dy[2] = rabi * y[1] - inv_t1 * (y[2] + 1.0);
            dy[3] = 0.0;
            dy[4] = inv_t1 * pe;
        };
        OdeOptions opts;
        opts.rel_tol = opts.abs_tol = 1e-11;
        opts.max_step = 0.25 * (shape == PulseShape::kGaussian ? pulse_fwhm : sup[1] - sup[0]);
        const std::array<double, 2> grid{sup[0], sup[1]};
        const auto ys = integrate_on_grid<double, 5>(rhs, {0.0, 0.0, -1.0, 1.0, 0.0}, grid, opts);
        out.push_back({area, ys.back()[4] + 0.5 * (ys.back()[2] + 1.0), 0.0});
    }
    return out;
}

/// Monte Carlo estimate of the same curve: mean photons per pulse over
/// `n_pulses` independent single pulses, with its standard error.
inline std::vector<RabiPoint> rabi_curve_mc(const EmitterParams& p, std::span<const double> areas, double pulse_fwhm,
                                            std::uint64_t n_pulses, std::uint64_t seed, unsigned threads = 1,
                                            PulseShape shape = PulseShape::kGaussian) {
    if (n_pulses < 2) throw std::invalid_argument("rabi_curve_mc: need at least two pulses");
    std::vector<RabiPoint> out;
    std::uint64_t stream_base = 0;
    for (double area : areas) {
        if (!(area >= 0.0)) throw std::invalid_argument("rabi_curve_mc: areas must be >= 0");
        const DriveField f = shape == PulseShape::kGaussian ? DriveField::gaussian_with_area(area, pulse_fwhm)
                                                            : DriveField::square_with_area(area, pulse_fwhm);
        const detail::JumpSimulator sim(p, {f});
        const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), n_pulses));
        std::vector<std::uint64_t> sum(workers, 0), sum_sq(workers, 0);
        parallel_chunks(workers, workers, [&](std::size_t wb, std::size_t we) {
            for (std::size_t w = wb; w < we; ++w) {
                const std::uint64_t begin = n_pulses * w / workers, end = n_pulses * (w + 1) / workers;
                for (std::uint64_t i = begin; i < end; ++i) {
                    PhiloxStream rng(seed, stream_base + i);
                    std::uint64_t k = 0;
                    if (area > 0.0) sim.run(rng, [&](int, double) { ++k; });
                    sum[w] += k;
                    sum_sq[w] += k * k;
                }
            }
        });
        double s = 0.0, s2 = 0.0;
        for (unsigned w = 0; w < workers; ++w) {
            s += static_cast<double>(sum[w]);
            s2 += static_cast<double>(sum_sq[w]);
        }
        const double nn = static_cast<double>(n_pulses);
        const double mean = s / nn;
        const double var = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
        out.push_back({area, mean, std::sqrt(var / nn)});
        stream_base += n_pulses;
    }
    return out;
}

// ---------------------------------------------------------------------------
// HBT analysis.

struct PeakLag {
    int pair_lag = 0;   // k: pair-period offset
    int pulse_lag = 0;  // d: pulse offset within the period, -1, 0 or +1

    friend auto operator<=>(const PeakLag&, const PeakLag&) = default;
};

struct PeakReport {
    std::map<PeakLag, double> peak_areas;  // ordered photon pairs per peak
    double g_metric = 0.0;
    double g_metric_error = 0.0;
    double g2_zero = 0.0;
    double g2_zero_error = 0.0;
    double overlap = std::numeric_limits<double>::quiet_NaN();
    double overlap_error = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> bin_centers;  // ns
    std::vector<double> histogram;    // coincidences per bin
};

namespace detail {

inline double ratio_error(double num, double den, double ratio) {
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return ratio * std::sqrt(1.0 / num + 1.0 / den);
}

}  // namespace detail

/// Coincidence peak areas from photon-pair counting.
///
/// A(k, d) counts ordered pairs of distinct photons whose pulses lie k pair
/// periods and d pulses apart. The Santori metric compares the same-pulse
/// peak with the mean side cluster (|k| >= 2) scaled to one pulse pair:
///   g = 2 A(0, 0) / <sum_d A(k, d)>,
/// an estimate of <n(n-1)> / <n>^2. g2_zero is A(0, 0) / <A(k, 0)>.
inline PeakReport hbt_analyze(const PhotonStream& stream, double bin_width, int max_pair_lag = 3) {
    if (stream.tags.empty()) throw std::invalid_argument("hbt_analyze: empty stream");
    if (!(bin_width > 0.0)) throw std::invalid_argument("hbt_analyze: bin width must be > 0");
    if (max_pair_lag < 2) throw std::invalid_argument("hbt_analyze: max_pair_lag must be >= 2");
    const auto np = static_cast<std::int64_t>(stream.train.n_pairs);
    if (np <= max_pair_lag) throw std::invalid_argument("hbt_analyze: stream has too few pairs");
    const auto n = stream.counts();

    PeakReport rep;
    for (int k = -max_pair_lag; k <= max_pair_lag; ++k)
        for (int d = -1; d <= 1; ++d) {
            double acc = 0.0;
            for (std::int64_t a = std::max<std::int64_t>(0, -k); a < std::min<std::int64_t>(np, np - k); ++a)
                for (int q = 0; q < 2; ++q) {
                    const int q2 = q + d;
                    if (q2 < 0 || q2 > 1) continue;
                    const double x = n[static_cast<std::size_t>(2 * a + q)];
                    const double y = n[static_cast<std::size_t>(2 * (a + k) + q2)];
                    acc += (k == 0 && d == 0) ? x * (x - 1.0) : x * y;
                }
            rep.peak_areas[{k, d}] = acc;
        }

    const double center = rep.peak_areas[{0, 0}];
    double cluster_rate = 0.0, single_rate = 0.0, cluster_counts = 0.0, single_counts = 0.0;
    int sides = 0;
    for (int k = -max_pair_lag; k <= max_pair_lag; ++k) {
        if (std::abs(k) < 2) continue;
        const double pairs = static_cast<double>(np - std::abs(k));
        double cl = 0.0;
        for (int d = -1; d <= 1; ++d) cl += rep.peak_areas[{k, d}];
        cluster_rate += cl / pairs;
        single_rate += rep.peak_areas[{k, 0}] / pairs;
        cluster_counts += cl;
        single_counts += rep.peak_areas[{k, 0}];
        ++sides;
    }
    cluster_rate /= sides;
    single_rate /= sides;
    const double center_rate = center / static_cast<double>(np);
    rep.g_metric = cluster_rate > 0.0 ? 2.0 * center_rate / cluster_rate : 0.0;
    rep.g2_zero = single_rate > 0.0 ? center_rate / single_rate : 0.0;
    // With an empty centre peak the error is the one-count level.
    const double one = 1.0 / static_cast<double>(np);
    rep.g_metric_error = center > 0.0 ? detail::ratio_error(center, cluster_counts, rep.g_metric)
                                      : 2.0 * one / std::max(cluster_rate, 1e-300);
    rep.g2_zero_error = center > 0.0 ? detail::ratio_error(center, single_counts, rep.g2_zero)
                                     : one / std::max(single_rate, 1e-300);

    // Time-difference histogram over ordered photon pairs.
    const double reach = (max_pair_lag + 0.5) * stream.train.pair_period;
    const auto nbins = static_cast<std::size_t>(std::ceil(2.0 * reach / bin_width));
    rep.histogram.assign(nbins, 0.0);
    rep.bin_centers.resize(nbins);
    const double lo = -0.5 * static_cast<double>(nbins) * bin_width;
    for (std::size_t b = 0; b < nbins; ++b) rep.bin_centers[b] = lo + (static_cast<double>(b) + 0.5) * bin_width;
    const auto& tags = stream.tags;
    auto add = [&](double dt) {
        const auto b = static_cast<std::ptrdiff_t>(std::floor((dt - lo) / bin_width));
        if (b >= 0 && b < static_cast<std::ptrdiff_t>(nbins)) rep.histogram[static_cast<std::size_t>(b)] += 1.0;
    };
    for (std::size_t i = 0; i < tags.size(); ++i)
        for (std::size_t j = i + 1; j < tags.size() && tags[j].time - tags[i].time <= reach; ++j) {
            add(tags[j].time - tags[i].time);
            add(tags[i].time - tags[j].time);
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Pulsed two-photon interference.

struct PulsedHomReport {
    PeakReport parallel;    // overlap estimate stored here
    PeakReport orthogonal;
    double central_parallel = 0.0;    // A_par(0)
    double central_orthogonal = 0.0;  // A_perp(0)
    double g_metric = 0.0;            // from an HBT analysis of the same stream
};

/// Click-level Monte Carlo of the pulsed HOM measurement.
///
/// Each photon takes the short or the delayed arm and then a random output
/// with probability 1/2 each; arrivals are binned in slots (pulse + arm).
/// Cross-detector coincidences are counted by (pair lag, slot lag). In the
/// parallel setting a coincidence between a first-pulse photon on the long
/// arm and a second-pulse photon on the short arm is removed with
/// probability `overlap_true`; the orthogonal setting uses the same draws.
///
/// With A(0) the central peak, the overlap estimate
///   M = (1 + 2g) (1 - A_par(0) / A_perp(0))
/// removes the same-pulse multi-photon contribution, g being the HBT
/// metric of the stream.
inline PulsedHomReport pulsed_hom(const PhotonStream& stream, double overlap_true, std::uint64_t seed,
                                  double delay, int max_pair_lag = 3) {
    if (!(overlap_true >= 0.0 && overlap_true <= 1.0))
        throw std::invalid_argument("pulsed_hom: overlap_true must lie in [0, 1]");
    if (std::abs(delay - stream.train.separation) > 1e-9)
        throw std::invalid_argument("pulsed_hom: interferometer delay must equal the pulse separation");
    const auto np = static_cast<std::size_t>(stream.train.n_pairs);

    struct Click {
        int slot;  // 0..2
        int port;  // 0 or 1
    };
    std::vector<std::vector<Click>> clicks(np);
    std::vector<std::vector<int>> pulse_of(np);
    for (const auto& t : stream.tags) pulse_of[t.pair].push_back(t.pulse);

    PulsedHomReport rep;
    double par0 = 0.0, ort0 = 0.0;
    for (std::size_t a = 0; a < np; ++a) {
        PhiloxStream rng(seed, a);
        for (int pulse : pulse_of[a]) {
            const int arm = rng.uniform() < 0.5 ? 1 : 0;
            const int port = rng.uniform() < 0.5 ? 1 : 0;
            clicks[a].push_back({pulse + arm, port});
        }
        const auto& c = clicks[a];
        const auto& pp = pulse_of[a];
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j) {
                if (c[i].slot != c[j].slot || c[i].port == c[j].port) continue;
                ort0 += 1.0;
                const bool crossed = pp[i] != pp[j];
                const bool drop = crossed && rng.uniform() < overlap_true;
                if (!drop) par0 += 1.0;
            }
    }

    // Side peaks: cross-detector coincidences by (pair lag, slot lag), both orders.
    auto fill = [&](PeakReport& r, double central) {
        for (int k = -max_pair_lag; k <= max_pair_lag; ++k)
            for (int ds = -2; ds <= 2; ++ds) r.peak_areas[{k, ds}] = 0.0;
        for (std::size_t a = 0; a < np; ++a)
            for (int k = 0; k <= max_pair_lag && a + static_cast<std::size_t>(k) < np; ++k) {
                const auto& x = clicks[a];
                const auto& y = clicks[a + static_cast<std::size_t>(k)];
                for (std::size_t i = 0; i < x.size(); ++i)
                    for (std::size_t j = (k == 0 ? i + 1 : 0); j < y.size(); ++j) {
                        if (x[i].port == y[j].port) continue;
                        const int ds = y[j].slot - x[i].slot;
                        if (k == 0 && ds == 0) continue;
                        r.peak_areas[{k, ds}] += 1.0;
                        r.peak_areas[{-k, -ds}] += 1.0;
                    }
            }
        r.peak_areas[{0, 0}] = central;
    };
    fill(rep.parallel, par0);
    fill(rep.orthogonal, ort0);
    rep.central_parallel = par0;
    rep.central_orthogonal = ort0;

    const auto hbt = hbt_analyze(stream, 0.1 * stream.train.separation, max_pair_lag);
    rep.g_metric = hbt.g_metric;
    if (ort0 > 0.0) {
        const double q = par0 / ort0;
        rep.parallel.overlap = std::clamp((1.0 + 2.0 * rep.g_metric) * (1.0 - q), 0.0, 1.0);
        rep.parallel.overlap_error =
            (1.0 + 2.0 * rep.g_metric) * q * std::sqrt(1.0 / std::max(par0, 1.0) + 1.0 / ort0);
    }
    return rep;
}

/// Synthetic stream for estimator checks: every pulse emits one photon, or two
/// with probability p2 chosen so that <n(n-1)>/<n>^2 = 2 p2 / (1 + p2)^2 = g.
/// Emission times are the pulse centre plus an exponential delay of mean t1.
inline PhotonStream synthetic_stream(const PulseTrain& train, double g, double t1, std::uint64_t seed) {
    train.validate();
    if (!(g >= 0.0 && g <= 0.5)) throw std::invalid_argument("synthetic_stream: g must lie in [0, 0.5]");
    if (!(t1 > 0.0)) throw std::invalid_argument("synthetic_stream: t1 must be > 0");
    const double p2 = g == 0.0 ? 0.0 : ((1.0 - g) - std::sqrt(1.0 - 2.0 * g)) / g;
    PhotonStream out;
    out.seed = seed;
    out.params = EmitterParams(t1, 2.0 * t1);
    out.train = train;
    for (std::uint64_t a = 0; a < train.n_pairs; ++a) {
        PhiloxStream rng(seed, a);
        for (int q = 0; q < 2; ++q) {
            const int photons = rng.bernoulli(p2) ? 2 : 1;
            for (int k = 0; k < photons; ++k)
                out.tags.push_back({a, q, train.pulse_center(a, q) - t1 * std::log(rng.uniform())});
        }
    }
    std::stable_sort(out.tags.begin(), out.tags.end(),
                     [](const PhotonTag& x, const PhotonTag& y) { return x.time < y.time; });
    return out;
}

}  // namespace cohscat
