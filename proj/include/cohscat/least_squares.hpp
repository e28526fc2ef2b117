#pragma once

// Small dense Levenberg-Marquardt solver for curve fits with a handful of
// parameters. Jacobians are taken by central differences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cohscat {

/// A fit that failed to converge, carrying the residual norm it stopped at.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, double residual_norm)
        : std::runtime_error(what + " (residual norm " + std::to_string(residual_norm) + ")"),
          residual_norm_(residual_norm) {}
    double residual_norm() const noexcept { return residual_norm_; }

private:
    double residual_norm_;
};

template <std::size_t P>
struct FitResult {
    std::array<double, P> params{};
    double residual_norm = 0.0;
    int iterations = 0;
};

struct FitOptions {
    int max_iterations = 500;
    double param_tol = 1e-12;
    double cost_tol = 1e-15;
};

namespace detail {

/// Solve A x = b for a small symmetric positive definite A by Cholesky.
/// Returns false when A is not numerically positive definite.
template <std::size_t P>
bool cholesky_solve(std::array<std::array<double, P>, P> a, std::array<double, P> b, std::array<double, P>& x) {
    for (std::size_t j = 0; j < P; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
        if (!(d > 0.0)) return false;
        a[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < P; ++i) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            a[i][j] = s / a[j][j];
        }
    }
    for (std::size_t i = 0; i < P; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i][k] * b[k];
        b[i] = s / a[i][i];
    }
    for (std::size_t i = P; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < P; ++k) s -= a[k][i] * x[k];
        x[i] = s / a[i][i];
    }
    return true;
}

}  // namespace detail

/// Minimise sum_i (model(x_i, p) - y_i)^2 over p.
///
/// `model` is callable as `double(double x, const std::array<double, P>& p)`.
/// Throws FitError if the iteration limit is reached or the residual turns
/// non-finite.
template <std::size_t P, class Model>
FitResult<P> levenberg_marquardt(Model model, const std::vector<double>& x, const std::vector<double>& y,
                                 std::array<double, P> p, FitOptions opts = {}) {
    if (x.size() != y.size()) throw std::invalid_argument("levenberg_marquardt: size mismatch");
    if (x.size() < P) throw std::invalid_argument("levenberg_marquardt: fewer points than parameters");
    const std::size_t n = x.size();

    auto cost_of = [&](const std::array<double, P>& q, std::vector<double>& r) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = model(x[i], q) - y[i];
            c += r[i] * r[i];
        }
        return c;
    };

    std::vector<double> r(n), r_try(n);
    std::vector<std::array<double, P>> jac(n);
    double cost = cost_of(p, r);
    if (!std::isfinite(cost)) throw FitError("levenberg_marquardt: non-finite initial residual", cost);
    double lambda = 1e-3;

    for (int it = 1; it <= opts.max_iterations; ++it) {
        for (std::size_t k = 0; k < P; ++k) {
            const double h = 1e-7 * std::max(std::abs(p[k]), 1e-6);
            auto hi = p, lo = p;
            hi[k] += h;
            lo[k] -= h;
            for (std::size_t i = 0; i < n; ++i) jac[i][k] = (model(x[i], hi) - model(x[i], lo)) / (2.0 * h);
        }
        std::array<std::array<double, P>, P> jtj{};
        std::array<double, P> jtr{};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < P; ++a) {
                jtr[a] -= jac[i][a] * r[i];
                for (std::size_t b = 0; b < P; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
            }

        for (;;) {
            auto damped = jtj;
            for (std::size_t a = 0; a < P; ++a) damped[a][a] += lambda * std::max(jtj[a][a], 1e-300);
            std::array<double, P> step{};
            if (!detail::cholesky_solve(damped, jtr, step)) {
                lambda *= 10.0;
                if (lambda > 1e16) throw FitError("levenberg_marquardt: singular normal equations", std::sqrt(cost));
                continue;
            }
            auto trial = p;
            double step_norm = 0.0, p_norm = 0.0;
            for (std::size_t a = 0; a < P; ++a) {
                trial[a] += step[a];
                step_norm += step[a] * step[a];
                p_norm += p[a] * p[a];
            }
            const double trial_cost = cost_of(trial, r_try);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const double drop = cost - trial_cost;
                p = trial;
                r.swap(r_try);
                cost = trial_cost;
                lambda = std::max(lambda / 3.0, 1e-12);
                if (std::sqrt(step_norm) <= opts.param_tol * (std::sqrt(p_norm) + opts.param_tol) ||
                    drop <= opts.cost_tol * cost)
                    return {p, std::sqrt(cost), it};
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e16) {
                // No downhill direction left at working precision: converged.
                return {p, std::sqrt(cost), it};
            }
        }
    }
    throw FitError("levenberg_marquardt: no convergence within iteration limit", std::sqrt(cost));
}

}  // namespace cohscat
