#pragma once

// Few-photon linear optics on a handful of modes. Each photon carries a
// (mode, label) pair; photons with equal labels are identical bosons and
// interfere, photons with different labels do not. Partial
// distinguishability enters as a convex mixture of the two extremes.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cohscat/least_squares.hpp"

namespace cohscat {

using Complex = std::complex<double>;
using Matrix = std::vector<std::vector<Complex>>;

inline constexpr int kMaxPhotons = 3;

struct ExtMode {
    int mode = 0;
    int label = 0;

    friend auto operator<=>(const ExtMode&, const ExtMode&) = default;
};

/// Photons listed by extended mode, kept sorted; a multiset of creation operators.
using Configuration = std::vector<ExtMode>;

class FockState {
public:
    explicit FockState(int n_modes) : n_modes_(n_modes) {
        if (n_modes < 1) throw std::invalid_argument("FockState: need at least one mode");
    }

    /// Normalised basis state with the given photons.
    static FockState basis(int n_modes, Configuration photons) {
        FockState s(n_modes);
        s.add(std::move(photons), 1.0);
        return s;
    }

    /// Basis state from an occupation vector, all photons sharing `label`.
    static FockState from_occupation(std::span<const int> occupation, int label = 0) {
        Configuration c;
        for (std::size_t m = 0; m < occupation.size(); ++m) {
            if (occupation[m] < 0) throw std::invalid_argument("FockState: negative occupation");
            for (int k = 0; k < occupation[m]; ++k) c.push_back({static_cast<int>(m), label});
        }
        return basis(static_cast<int>(occupation.size()), std::move(c));
    }

    void add(Configuration c, Complex amp) {
        std::sort(c.begin(), c.end());
        if (static_cast<int>(c.size()) > kMaxPhotons) throw std::invalid_argument("FockState: at most 3 photons");
        for (const auto& e : c)
            if (e.mode < 0 || e.mode >= n_modes_) throw std::out_of_range("FockState: mode index out of range");
        if (!amps_.empty() && amps_.begin()->first.size() != c.size())
            throw std::invalid_argument("FockState: photon number must be the same in every term");
        amps_[std::move(c)] += amp;
    }

    int n_modes() const noexcept { return n_modes_; }
    int n_photons() const noexcept { return amps_.empty() ? 0 : static_cast<int>(amps_.begin()->first.size()); }
    const std::map<Configuration, Complex>& amplitudes() const noexcept { return amps_; }

    Complex amplitude(Configuration c) const {
        std::sort(c.begin(), c.end());
        const auto it = amps_.find(c);
        return it == amps_.end() ? Complex{} : it->second;
    }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& [c, a] : amps_) s += std::norm(a);
        return s;
    }

    /// Probability of each mode-occupation pattern, summed over labels.
    std::map<std::vector<int>, double> occupation_probabilities() const {
        std::map<std::vector<int>, double> out;
        for (const auto& [c, a] : amps_) {
            std::vector<int> occ(static_cast<std::size_t>(n_modes_), 0);
            for (const auto& e : c) ++occ[static_cast<std::size_t>(e.mode)];
            out[occ] += std::norm(a);
        }
        return out;
    }

private:
    int n_modes_;
    std::map<Configuration, Complex> amps_;
};

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

/// Product of factorials of the multiplicities of a sorted configuration.
inline double multiplicity_factor(const Configuration& c) {
    double f = 1.0;
    for (std::size_t i = 0; i < c.size();) {
        std::size_t j = i;
        while (j < c.size() && c[j] == c[i]) ++j;
        f *= factorial(static_cast<int>(j - i));
        i = j;
    }
    return f;
}

inline void require_unitary_shape(const Matrix& u, int n_modes) {
    if (static_cast<int>(u.size()) != n_modes) throw std::invalid_argument("unitary dimension mismatch");
    for (const auto& row : u)
        if (static_cast<int>(row.size()) != n_modes) throw std::invalid_argument("unitary dimension mismatch");
}

}  // namespace detail

/// Transform every creation operator a+_{m,l} -> sum_k U[k][m] a+_{k,l}.
inline FockState apply_unitary(const FockState& state, const Matrix& u) {
    detail::require_unitary_shape(u, state.n_modes());
    FockState out(state.n_modes());
    const int n = state.n_modes();
    for (const auto& [cfg, amp] : state.amplitudes()) {
        const double in_norm = 1.0 / std::sqrt(detail::multiplicity_factor(cfg));
        const std::size_t k = cfg.size();
        std::vector<int> pick(k, 0);
        for (;;) {
            Complex coeff = amp * in_norm;
            Configuration next(k);
            for (std::size_t p = 0; p < k; ++p) {
                coeff *= u[static_cast<std::size_t>(pick[p])][static_cast<std::size_t>(cfg[p].mode)];
                next[p] = {pick[p], cfg[p].label};
            }
            if (coeff != Complex{}) {
                std::sort(next.begin(), next.end());
                out.add(next, coeff * std::sqrt(detail::multiplicity_factor(next)));
            }
            std::size_t p = 0;
            while (p < k && ++pick[p] == n) pick[p++] = 0;
            if (p == k) break;
        }
    }
    return out;
}

struct CircuitElement {
    enum class Kind { kCoupler, kPhase };
    Kind kind = Kind::kCoupler;
    double value = 0.5;  // reflectivity R for couplers, phase in rad
    int i = 0;
    int j = 1;

    static CircuitElement coupler(double reflectivity, int i, int j) {
        if (!(reflectivity > 0.0 && reflectivity < 1.0))
            throw std::invalid_argument("coupler reflectivity must lie in (0, 1)");
        if (i == j) throw std::invalid_argument("coupler needs two distinct modes");
        return {Kind::kCoupler, reflectivity, i, j};
    }
    static CircuitElement phase(double phi, int i) { return {Kind::kPhase, phi, i, i}; }

    /// Mode matrix on `n_modes` modes: [[sqrt R, i sqrt(1-R)], [i sqrt(1-R), sqrt R]] on (i, j),
    /// or exp(i phi) on mode i.
    Matrix matrix(int n_modes) const {
        if (i < 0 || j < 0 || i >= n_modes || j >= n_modes)
            throw std::out_of_range("circuit element mode index out of range");
        Matrix u(static_cast<std::size_t>(n_modes), std::vector<Complex>(static_cast<std::size_t>(n_modes)));
        for (int k = 0; k < n_modes; ++k) u[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = 1.0;
        const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
        if (kind == Kind::kPhase) {
            u[si][si] = std::polar(1.0, value);
        } else {
            const double r = std::sqrt(value), t = std::sqrt(1.0 - value);
            u[si][si] = r;
            u[sj][sj] = r;
            u[si][sj] = Complex(0.0, t);
            u[sj][si] = Complex(0.0, t);
        }
        return u;
    }
};

inline FockState apply(const FockState& state, const CircuitElement& element) {
    return apply_unitary(state, element.matrix(state.n_modes()));
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size();
    Matrix c(n, std::vector<Complex>(n));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t col = 0; col < n; ++col) c[r][col] += a[r][k] * b[k][col];
    return c;
}

/// Mode matrix of a sequence of elements applied left to right.
inline Matrix compose(std::span<const CircuitElement> circuit, int n_modes) {
    Matrix u = CircuitElement::phase(0.0, 0).matrix(n_modes);
    for (const auto& e : circuit) u = multiply(e.matrix(n_modes), u);
    return u;
}

inline FockState run_circuit(FockState state, std::span<const CircuitElement> circuit) {
    for (const auto& e : circuit) state = apply(state, e);
    return state;
}

inline Complex permanent(const Matrix& m) {
    const std::size_t n = m.size();
    if (n == 0) return 1.0;
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < n; ++k) perm[k] = k;
    Complex sum = 0.0;
    do {
        Complex prod = 1.0;
        for (std::size_t r = 0; r < n; ++r) prod *= m[r][perm[r]];
        sum += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return sum;
}

/// <out| U |in> for identical bosons: Perm(U[out rows][in cols]) / sqrt(prod n_in! prod n_out!).
inline Complex permanent_amplitude(const Matrix& u, std::span<const int> in, std::span<const int> out) {
    const int n = static_cast<int>(u.size());
    detail::require_unitary_shape(u, n);
    if (static_cast<int>(in.size()) != n || static_cast<int>(out.size()) != n)
        throw std::invalid_argument("permanent_amplitude: occupation length must equal the number of modes");
    std::vector<std::size_t> rows, cols;
    double norm = 1.0;
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < out[static_cast<std::size_t>(m)]; ++k) rows.push_back(static_cast<std::size_t>(m));
        for (int k = 0; k < in[static_cast<std::size_t>(m)]; ++k) cols.push_back(static_cast<std::size_t>(m));
        norm *= detail::factorial(in[static_cast<std::size_t>(m)]) * detail::factorial(out[static_cast<std::size_t>(m)]);
    }
    if (rows.size() != cols.size()) return 0.0;
    if (static_cast<int>(rows.size()) > kMaxPhotons) throw std::invalid_argument("permanent_amplitude: at most 3 photons");
    Matrix sub(rows.size(), std::vector<Complex>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) sub[r][c] = u[rows[r]][cols[c]];
    return permanent(sub) / std::sqrt(norm);
}

// ---------------------------------------------------------------------------
// Mach-Zehnder fringes.

struct SourceModel {
    double overlap = 1.0;       // pairwise indistinguishability M
    double multiphoton_g = 0.0;

    void validate() const {
        if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("SourceModel: overlap must lie in [0, 1]");
        if (!(multiphoton_g >= 0.0) || !std::isfinite(multiphoton_g))
            throw std::invalid_argument("SourceModel: multiphoton_g must be >= 0");
    }

    /// Weight of two-photons-in-one-port events among post-selected two-photon
    /// events: g / (1 + g), with g = <n(n-1)> / <n>^2 per port.
    double contamination_weight() const noexcept { return multiphoton_g / (1.0 + multiphoton_g); }
};

enum class FringeInput { kSingle, kDual };

struct FringeTable {
    std::vector<double> phi;
    std::vector<double> p_out0;  // both photons (dual) or the photon (single) in output 0
    std::vector<double> p_out1;
    std::vector<double> p_coincidence;
};

/// Coupler R1, phase phi on mode 1, coupler R2.
inline std::vector<CircuitElement> mzi(double r1, double r2, double phi) {
    return {CircuitElement::coupler(r1, 0, 1), CircuitElement::phase(phi, 1), CircuitElement::coupler(r2, 0, 1)};
}

namespace detail {

struct TwoModeOutcome {
    double out0 = 0.0, out1 = 0.0, coinc = 0.0;
};

inline TwoModeOutcome outcome(const FockState& in, std::span<const CircuitElement> circuit) {
    const auto probs = run_circuit(in, circuit).occupation_probabilities();
    TwoModeOutcome o;
    for (const auto& [occ, p] : probs) {
        if (occ[0] > 0 && occ[1] > 0)
            o.coinc += p;
        else if (occ[0] > 0)
            o.out0 += p;
        else
            o.out1 += p;
    }
    return o;
}

}  // namespace detail

inline FringeTable mzi_fringes(const SourceModel& source, double r1, double r2, std::span<const double> phi_grid,
                               FringeInput input) {
    source.validate();
    if (phi_grid.size() < 2) throw std::invalid_argument("mzi_fringes: phi grid needs at least two points");
    const auto [lo, hi] = std::minmax_element(phi_grid.begin(), phi_grid.end());
    if (*hi - *lo < 2.0 * std::numbers::pi * (1.0 - 1e-9))
        throw std::invalid_argument("mzi_fringes: phi grid must cover at least 2 pi");

    const auto single = FockState::basis(2, {{0, 0}});
    const auto ident = FockState::basis(2, {{0, 0}, {1, 0}});
    const auto dist = FockState::basis(2, {{0, 0}, {1, 1}});
    const auto both0 = FockState::basis(2, {{0, 0}, {0, 1}});
    const auto both1 = FockState::basis(2, {{1, 0}, {1, 1}});
    const double w = source.contamination_weight();
    const double m = source.overlap;

    FringeTable t;
    for (double phi : phi_grid) {
        const auto circuit = mzi(r1, r2, phi);
        detail::TwoModeOutcome o;
        if (input == FringeInput::kSingle) {
            o = detail::outcome(single, circuit);
        } else {
            const auto a = detail::outcome(ident, circuit);
            const auto b = detail::outcome(dist, circuit);
            const auto c0 = detail::outcome(both0, circuit);
            const auto c1 = detail::outcome(both1, circuit);
            o.out0 = (1 - w) * (m * a.out0 + (1 - m) * b.out0) + w * 0.5 * (c0.out0 + c1.out0);
            o.out1 = (1 - w) * (m * a.out1 + (1 - m) * b.out1) + w * 0.5 * (c0.out1 + c1.out1);
            o.coinc = (1 - w) * (m * a.coinc + (1 - m) * b.coinc) + w * 0.5 * (c0.coinc + c1.coinc);
        }
        t.phi.push_back(phi);
        t.p_out0.push_back(o.out0);
        t.p_out1.push_back(o.out1);
        t.p_coincidence.push_back(o.coinc);
    }
    return t;
}

/// Single-photon fringe visibility at output 0 for equal couplers R1 = R2 = R:
/// P_out0 = 1 - 2RT(1 + cos phi), so V = 4RT / (2 - 4RT).
inline double single_photon_visibility(double r) {
    const double x = 4.0 * r * (1.0 - r);
    return x / (2.0 - x);
}

/// Equal-coupler reflectivity R in (0, 1/2] giving the requested output-0
/// single-photon visibility, by bisection.
inline double coupler_for_visibility(double target) {
    if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("coupler_for_visibility: target in (0, 1]");
    double lo = 1e-12, hi = 0.5;
    for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
        const double mid = 0.5 * (lo + hi);
        (single_photon_visibility(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct FringeFit {
    double visibility = 0.0;  // (max - min) / (max + min) of the fitted curve
    double frequency = 0.0;   // oscillations per 2 pi of phase
    double phase = 0.0;       // rad
    double offset = 0.0;
    double amplitude = 0.0;
    double residual_norm = 0.0;
};

/// Least-squares fit of offset + amplitude cos(f phi + phase), f starting at `harmonic`.
inline FringeFit fit_fringe(std::span<const double> phi, std::span<const double> y, int harmonic) {
    if (harmonic != 1 && harmonic != 2) throw std::invalid_argument("fit_fringe: harmonic must be 1 or 2");
    if (phi.size() != y.size() || phi.size() < 4) throw std::invalid_argument("fit_fringe: need matching data");
    const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
    const double periods = (*hi - *lo) * harmonic / (2.0 * std::numbers::pi);
    if (static_cast<double>(phi.size()) < 8.0 * periods)
        throw std::invalid_argument("fit_fringe: need at least 8 points per period");

    // Linear projection at the nominal frequency seeds the nonlinear fit.
    double c0 = 0.0, cc = 0.0, cs = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) c0 += y[k];
    c0 /= static_cast<double>(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        cc += (y[k] - c0) * std::cos(harmonic * phi[k]);
        cs += (y[k] - c0) * std::sin(harmonic * phi[k]);
    }
    cc *= 2.0 / static_cast<double>(phi.size());
    cs *= 2.0 / static_cast<double>(phi.size());
    const double amp0 = std::hypot(cc, cs);
    const double ph0 = std::atan2(-cs, cc);

    auto model = [](double x, const std::array<double, 4>& q) { return q[0] + q[1] * std::cos(q[2] * x + q[3]); };
    const std::vector<double> xs(phi.begin(), phi.end()), ys(y.begin(), y.end());
    const auto fit = levenberg_marquardt<4>(model, xs, ys, {c0, std::max(amp0, 1e-6), double(harmonic), ph0});
    FringeFit out;
    out.offset = fit.params[0];
    out.amplitude = std::abs(fit.params[1]);
    out.frequency = fit.params[2];
    out.phase = fit.params[1] < 0.0 ? fit.params[3] + std::numbers::pi : fit.params[3];
    out.phase = std::remainder(out.phase, 2.0 * std::numbers::pi);
    out.visibility = out.offset != 0.0 ? out.amplitude / std::abs(out.offset) : 0.0;
    out.residual_norm = fit.residual_norm;
    return out;
}

}  // namespace cohscat
