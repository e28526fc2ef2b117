#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
//
// States are std::array<T, N> where T is double or std::complex<double>;
// the error norm uses |.| so complex-valued linear systems (regression
// of operator expectation values) integrate with the same code path.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cohscat {

/// Raised when the step size collapses below the representable spacing at `time`.
class IntegrationFailure : public std::runtime_error {
public:
    explicit IntegrationFailure(double time)
        : std::runtime_error("integration failed: step size underflow at t = " + std::to_string(time) + " ns"),
          time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 = automatic
    std::size_t max_steps = 50'000'000;
};

namespace detail {

template <class T> inline double magnitude(const T& x) { return std::abs(x); }

}  // namespace detail

/// One-step Dormand-Prince stepper with FSAL reuse and cubic Hermite dense output.
///
/// `Rhs` is callable as `void(double t, const State& y, State& dydt)`.
template <class T, std::size_t N, class Rhs>
class DormandPrince {
public:
    using State = std::array<T, N>;

    DormandPrince(Rhs rhs, double t0, const State& y0, OdeOptions opts = {})
        : rhs_(std::move(rhs)), opts_(opts), t_(t0), y_(y0) {
        rhs_(t_, y_, f_);
        h_ = opts_.initial_step > 0.0 ? opts_.initial_step : initial_step();
    }

    double time() const noexcept { return t_; }
    const State& state() const noexcept { return y_; }
    const State& derivative() const noexcept { return f_; }

    // Previous accepted point, for dense output over [t_prev, t].
    double previous_time() const noexcept { return t_prev_; }

    /// Cubic Hermite interpolant on the last accepted step.
    State interpolate(double t) const {
        const double h = t_ - t_prev_;
        if (h <= 0.0) return y_;
        const double s = (t - t_prev_) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        State out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = h00 * y_prev_[i] + h10 * h * f_prev_[i] + h01 * y_[i] + h11 * h * f_[i];
        return out;
    }

    /// Advance by one accepted step without passing `t_stop`.
    void step(double t_stop) {
        if (!(t_stop > t_)) return;
        const double h_min = 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
        if (t_stop - t_ <= h_min) {
            // Rounding-level gap: a single Euler step is exact to working precision.
            t_prev_ = t_;
            y_prev_ = y_;
            f_prev_ = f_;
            for (std::size_t i = 0; i < N; ++i) y_[i] += (t_stop - t_) * f_[i];
            t_ = t_stop;
            rhs_(t_, y_, f_);
            return;
        }
        for (;;) {
            if (++steps_ > opts_.max_steps) throw IntegrationFailure(t_);
            double h = std::min({h_, opts_.max_step, t_stop - t_});
            const bool hits_stop = (h == t_stop - t_);
            if (h <= h_min) throw IntegrationFailure(t_);

            State y_new, f_new;
            const double err = trial(h, y_new, f_new);
            if (err <= 1.0) {
                t_prev_ = t_;
                y_prev_ = y_;
                f_prev_ = f_;
                t_ = hits_stop ? t_stop : t_ + h;
                y_ = y_new;
                f_ = f_new;
                const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                // Keep the proposed step when the stop point truncated it.
                if (!hits_stop || fac < 1.0) h_ = h * fac;
                return;
            }
            h_ = h * std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9);
        }
    }

    /// Integrate up to exactly `t_end`.
    void advance_to(double t_end) {
        while (t_ < t_end) step(t_end);
    }

    /// Restart from a new state at the current time (e.g. after a quantum jump).
    void reset_state(const State& y) {
        y_ = y;
        rhs_(t_, y_, f_);
        t_prev_ = t_;
        y_prev_ = y_;
        f_prev_ = f_;
    }

private:
    double initial_step() {
        double d0 = 0, d1 = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opts_.abs_tol + opts_.rel_tol * detail::magnitude(y_[i]);
            d0 = std::max(d0, detail::magnitude(y_[i]) / sc);
            d1 = std::max(d1, detail::magnitude(f_[i]) / sc);
        }
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min(h, opts_.max_step);
    }

    double trial(double h, State& y_new, State& f_new) {
        // Dormand & Prince (1980) tableau.
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                         a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                         e6 = 22.0 / 525, e7 = -1.0 / 40;

        State k2, k3, k4, k5, k6, tmp;
        const State& k1 = f_;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a21 * k1[i]);
        rhs_(t_ + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs_(t_ + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(t_ + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs_(t_ + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs_(t_ + h, tmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y_[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs_(t_ + h, y_new, f_new);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const T e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * f_new[i]);
            const double sc =
                opts_.abs_tol + opts_.rel_tol * std::max(detail::magnitude(y_[i]), detail::magnitude(y_new[i]));
            err = std::max(err, detail::magnitude(e) / sc);
        }
        if (!std::isfinite(err)) return 1e10;
        return err;
    }

    Rhs rhs_;
    OdeOptions opts_;
    double t_;
    State y_;
    State f_{};
    double t_prev_ = 0.0;
    State y_prev_{};
    State f_prev_{};
    double h_ = 0.0;
    std::size_t steps_ = 0;
};

/// Integrate `rhs` from (grid[0], y0) and return the state at every grid point.
/// The grid must be strictly increasing. `breakpoints` are times where the
/// right-hand side may jump: integration restarts there and each segment sees
/// the right-hand side evaluated strictly inside its own interval.
template <class T, std::size_t N, class Rhs>
std::vector<std::array<T, N>> integrate_on_grid(Rhs rhs, const std::array<T, N>& y0, std::span<const double> grid,
                                                const OdeOptions& opts = {},
                                                std::span<const double> breakpoints = {}) {
    if (grid.empty()) return {};
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");

    std::vector<double> edges;
    for (double b : breakpoints)
        if (b > grid.front() && b < grid.back()) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges.push_back(grid.back());

    std::vector<std::array<T, N>> out;
    out.reserve(grid.size());
    out.push_back(y0);

    std::array<T, N> y = y0;
    double seg_start = grid.front();
    std::size_t next = 1;
    for (double seg_end : edges) {
        const double lo = std::nextafter(seg_start, seg_end);
        const double hi = std::nextafter(seg_end, seg_start);
        auto clamped = [&rhs, lo, hi](double t, const std::array<T, N>& x, std::array<T, N>& dx) {
            rhs(std::clamp(t, lo, hi), x, dx);
        };
        DormandPrince<T, N, decltype(clamped)> solver(clamped, seg_start, y, opts);
        while (next < grid.size() && grid[next] <= seg_end) {
            solver.advance_to(grid[next]);
            out.push_back(solver.state());
            ++next;
        }
        solver.advance_to(seg_end);
        y = solver.state();
        seg_start = seg_end;
    }
    return out;
}

}  // namespace cohscat
