#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "cohscat/fock.hpp"

namespace cohscat {
namespace {

using C = std::complex<double>;
constexpr double kPi = std::numbers::pi;

template <std::size_t N>
using Mat = std::array<std::array<C, N>, N>;

template <std::size_t N>
Mat<N> identity() {
    Mat<N> m{};
    for (std::size_t k = 0; k < N; ++k) m[k][k] = 1.0;
    return m;
}

template <std::size_t N>
Mat<N> matmul(const Mat<N>& a, const Mat<N>& b) {
    Mat<N> c{};
    for (std::size_t r = 0; r < N; ++r)
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t col = 0; col < N; ++col) c[r][col] += a[r][k] * b[k][col];
    return c;
}

template <std::size_t N>
Mat<N> beamsplitter(double r, std::size_t i, std::size_t j) {
    auto m = identity<N>();
    m[i][i] = m[j][j] = std::sqrt(r);
    m[i][j] = m[j][i] = C(0.0, std::sqrt(1.0 - r));
    return m;
}

template <std::size_t N>
Mat<N> phase_shift(double phi, std::size_t i) {
    auto m = identity<N>();
    m[i][i] = std::polar(1.0, phi);
    return m;
}

// Ryser's formula, independent of the permutation sum in the library.
C ryser(const std::vector<std::vector<C>>& a) {
    const std::size_t n = a.size();
    if (n == 0) return 1.0;
    C total = 0.0;
    for (unsigned s = 1; s < (1u << n); ++s) {
        C prod = 1.0;
        for (std::size_t r = 0; r < n; ++r) {
            C row = 0.0;
            for (std::size_t c = 0; c < n; ++c)
                if (s & (1u << c)) row += a[r][c];
            prod *= row;
        }
        const int bits = __builtin_popcount(s);
        total += ((n - bits) % 2 ? -1.0 : 1.0) * prod;
    }
    return total;
}

template <std::size_t N>
C transition(const Mat<N>& u, const std::array<int, N>& in, const std::array<int, N>& out) {
    std::vector<std::size_t> rows, cols;
    double f = 1.0;
    for (std::size_t m = 0; m < N; ++m) {
        for (int k = 0; k < out[m]; ++k) rows.push_back(m);
        for (int k = 0; k < in[m]; ++k) cols.push_back(m);
        f *= std::tgamma(in[m] + 1.0) * std::tgamma(out[m] + 1.0);
    }
    std::vector<std::vector<C>> sub(rows.size(), std::vector<C>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) sub[r][c] = u[rows[r]][cols[c]];
    return ryser(sub) / std::sqrt(f);
}

std::vector<std::array<int, 3>> occupations(int n) {
    std::vector<std::array<int, 3>> out;
    for (int a = 0; a <= n; ++a)
        for (int b = 0; a + b <= n; ++b) out.push_back({a, b, n - a - b});
    return out;
}

Configuration to_config(const std::array<int, 3>& occ) {
    Configuration c;
    for (int m = 0; m < 3; ++m)
        for (int k = 0; k < occ[static_cast<std::size_t>(m)]; ++k) c.push_back({m, 0});
    return c;
}

TEST(Fock, RandomThreeModeCircuitsMatchPermanentOracle) {
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> refl(0.05, 0.95), ph(-kPi, kPi);
    std::uniform_int_distribution<int> mode(0, 2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CircuitElement> circuit;
        auto u = identity<3>();
        for (int e = 0; e < 6; ++e) {
            if (e % 2 == 0) {
                const int i = mode(gen);
                const int j = (i + 1 + mode(gen) % 2) % 3;
                const double r = refl(gen);
                circuit.push_back(CircuitElement::coupler(r, i, j));
                u = matmul(beamsplitter<3>(r, std::size_t(i), std::size_t(j)), u);
            } else {
                const int i = mode(gen);
                const double phi = ph(gen);
                circuit.push_back(CircuitElement::phase(phi, i));
                u = matmul(phase_shift<3>(phi, std::size_t(i)), u);
            }
        }
        const Matrix lib_u = compose(circuit, 3);
        for (int n = 1; n <= 3; ++n) {
            for (const auto& in : occupations(n)) {
                const auto state = run_circuit(FockState::from_occupation(in), circuit);
                EXPECT_NEAR(state.norm_squared(), 1.0, 1e-10);
                for (const auto& out : occupations(n)) {
                    const C expect = transition(u, in, out);
                    const C got = state.amplitude(to_config(out));
                    EXPECT_LT(std::abs(got - expect), 1e-10) << "trial " << trial;
                    EXPECT_LT(std::abs(permanent_amplitude(lib_u, in, out) - expect), 1e-10);
                }
            }
        }
    }
}

TEST(Fock, BalancedCouplerSuppressesCoincidences) {
    const auto out = apply(FockState::basis(2, {{0, 0}, {1, 0}}), CircuitElement::coupler(0.5, 0, 1));
    const std::array<int, 2> coinc{1, 1};
    EXPECT_LT(std::norm(out.amplitude({{0, 0}, {1, 0}})), 1e-12);
    EXPECT_NEAR(out.occupation_probabilities().at({2, 0}), 0.5, 1e-12);
    EXPECT_LT(std::norm(permanent_amplitude(compose(std::vector{CircuitElement::coupler(0.5, 0, 1)}, 2),
                                            std::array{1, 1}, coinc)),
              1e-24);

    // Distinguishable labels restore product statistics.
    const auto dist = apply(FockState::basis(2, {{0, 0}, {1, 1}}), CircuitElement::coupler(0.5, 0, 1));
    EXPECT_NEAR(dist.occupation_probabilities().at({1, 1}), 0.5, 1e-12);
}

TEST(Fock, NoonStateAcquiresDoublePhase) {
    const auto noon = apply(FockState::basis(2, {{0, 0}, {1, 0}}), CircuitElement::coupler(0.5, 0, 1));
    for (double phi : {0.3, 1.1, 2.5}) {
        const auto s = apply(noon, CircuitElement::phase(phi, 1));
        const C a20 = s.amplitude({{0, 0}, {0, 0}});
        const C a02 = s.amplitude({{1, 0}, {1, 0}});
        const C rel = a02 / a20;
        EXPECT_NEAR(std::abs(rel), 1.0, 1e-12);
        EXPECT_NEAR(std::remainder(std::arg(rel) - std::arg(noon.amplitude({{1, 0}, {1, 0}}) /
                                                                noon.amplitude({{0, 0}, {0, 0}})) -
                                       2.0 * phi,
                                   2.0 * kPi),
                    0.0, 1e-12);
        // The same shift on mode 0 conjugates the relative phase.
        const auto t = apply(noon, CircuitElement::phase(phi, 0));
        const C rel0 = t.amplitude({{1, 0}, {1, 0}}) / t.amplitude({{0, 0}, {0, 0}});
        EXPECT_NEAR(std::remainder(std::arg(rel0) - std::arg(rel) + 4.0 * phi, 2.0 * kPi), 0.0, 1e-12);
    }
}

TEST(Fock, PhaseOnEmptyModeIsIdentity) {
    const auto in = FockState::basis(3, {{0, 0}, {1, 0}});
    const auto out = apply(in, CircuitElement::phase(1.3, 2));
    for (const auto& [cfg, amp] : in.amplitudes()) EXPECT_LT(std::abs(out.amplitude(cfg) - amp), 1e-15);
}

TEST(Fock, IdentityPermanent) {
    const Matrix id = compose(std::vector<CircuitElement>{}, 3);
    for (const auto& in : occupations(2))
        for (const auto& out : occupations(2))
            EXPECT_NEAR(std::abs(permanent_amplitude(id, in, out)), in == out ? 1.0 : 0.0, 1e-15);
    EXPECT_THROW(permanent_amplitude(id, std::array{1, 1}, std::array{1, 1}), std::invalid_argument);
}

TEST(Fock, RejectsBadInput) {
    EXPECT_THROW(apply(FockState::basis(2, {{0, 0}}), CircuitElement::coupler(0.5, 0, 2)), std::out_of_range);
    EXPECT_THROW(apply(FockState::basis(2, {{0, 0}}), CircuitElement::phase(0.1, 3)), std::out_of_range);
    EXPECT_THROW(FockState::basis(2, {{0, 0}, {0, 0}, {1, 0}, {1, 0}}), std::invalid_argument);
    EXPECT_THROW(FockState::basis(2, {{2, 0}}), std::out_of_range);
    EXPECT_THROW(CircuitElement::coupler(1.0, 0, 1), std::invalid_argument);
    EXPECT_THROW(CircuitElement::coupler(0.5, 1, 1), std::invalid_argument);
}

std::vector<double> phi_grid(std::size_t n, double span = 2.0 * kPi) {
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = span * double(k) / double(n - 1);
    return g;
}

// Closed-form two-mode oracle for the MZI mixture.
struct MixtureOracle {
    double r1, r2, m, g;

    Mat<2> unitary(double phi) const {
        return matmul(beamsplitter<2>(r2, 0, 1), matmul(phase_shift<2>(phi, 1), beamsplitter<2>(r1, 0, 1)));
    }

    double coincidence(double phi) const {
        const auto u = unitary(phi);
        const double ind = std::norm(u[0][0] * u[1][1] + u[0][1] * u[1][0]);
        const double dist = std::norm(u[0][0] * u[1][1]) + std::norm(u[0][1] * u[1][0]);
        const double c20 = 2.0 * std::norm(u[0][0]) * std::norm(u[1][0]);
        const double c02 = 2.0 * std::norm(u[0][1]) * std::norm(u[1][1]);
        const double w = g / (1.0 + g);
        return (1.0 - w) * (m * ind + (1.0 - m) * dist) + w * 0.5 * (c20 + c02);
    }
};

TEST(Fringes, OutcomesSumToOne) {
    const auto grid = phi_grid(97);
    for (auto input : {FringeInput::kSingle, FringeInput::kDual}) {
        const auto t = mzi_fringes({0.7, 0.05}, 0.3, 0.6, grid, input);
        for (std::size_t k = 0; k < grid.size(); ++k)
            EXPECT_NEAR(t.p_out0[k] + t.p_out1[k] + t.p_coincidence[k], 1.0, 1e-9);
    }
}

TEST(Fringes, BalancedMziSwapsAtZeroPhase) {
    const std::vector<double> grid{0.0, kPi, 2.0 * kPi};
    const auto s = mzi_fringes({}, 0.5, 0.5, grid, FringeInput::kSingle);
    EXPECT_NEAR(s.p_out1[0], 1.0, 1e-12);
    EXPECT_NEAR(s.p_out0[0], 0.0, 1e-12);
    const auto d = mzi_fringes({}, 0.5, 0.5, grid, FringeInput::kDual);
    EXPECT_NEAR(d.p_coincidence[0], 1.0, 1e-12);
}

TEST(Fringes, CoincidencesMatchMixtureOracle) {
    const auto grid = phi_grid(121);
    for (double m : {0.0, 0.5, 0.9, 1.0})
        for (double g : {0.0, 0.02, 0.2}) {
            const MixtureOracle oracle{0.45, 0.55, m, g};
            const auto t = mzi_fringes({m, g}, 0.45, 0.55, grid, FringeInput::kDual);
            for (std::size_t k = 0; k < grid.size(); ++k)
                EXPECT_NEAR(t.p_coincidence[k], oracle.coincidence(grid[k]), 1e-12);
        }
}

TEST(Fringes, DualInputFringeHasDoubledFrequency) {
    const auto grid = phi_grid(257);
    const auto single = mzi_fringes({1.0, 0.0}, 0.5, 0.5, grid, FringeInput::kSingle);
    const auto dual = mzi_fringes({1.0, 0.0}, 0.5, 0.5, grid, FringeInput::kDual);
    const auto f1 = fit_fringe(grid, single.p_out0, 1);
    const auto f2 = fit_fringe(grid, dual.p_coincidence, 2);
    EXPECT_NEAR(f2.frequency / f1.frequency, 2.0, 0.02);
    EXPECT_LT(f2.residual_norm, 1e-8);
}

double fourier_magnitude(const std::vector<double>& phi, const std::vector<double>& y, int harmonic) {
    // Grid includes both 0 and 2 pi; drop the duplicate endpoint.
    const std::size_t n = phi.size() - 1;
    C s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += y[k] * std::polar(1.0, -harmonic * phi[k]);
    return std::abs(s) * 2.0 / double(n);
}

TEST(Fringes, DoublingHoldsForEveryPartialOverlap) {
    const auto grid = phi_grid(129);
    for (double m : {0.1, 0.3, 0.6, 0.9, 1.0}) {
        const auto t = mzi_fringes({m, 0.0}, 0.5, 0.5, grid, FringeInput::kDual);
        const double a1 = fourier_magnitude(grid, t.p_coincidence, 1);
        const double a2 = fourier_magnitude(grid, t.p_coincidence, 2);
        EXPECT_GT(a2, a1);
        EXPECT_LT(a1, 1e-9) << "M = " << m;
    }
}

TEST(Fringes, PartialOverlapLiftsTheMinimum) {
    const auto grid = phi_grid(361);
    const double g = 0.02;
    const auto t = mzi_fringes({0.9, g}, 0.5, 0.5, grid, FringeInput::kDual);
    const MixtureOracle oracle{0.5, 0.5, 0.9, g};
    std::size_t arg = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (t.p_coincidence[k] < t.p_coincidence[arg]) arg = k;
    EXPECT_GT(t.p_coincidence[arg], 0.0);
    EXPECT_NEAR(t.p_coincidence[arg], oracle.coincidence(grid[arg]), 1e-6);

    const auto ideal = mzi_fringes({1.0, 0.0}, 0.5, 0.5, grid, FringeInput::kDual);
    double lo = 1.0;
    for (double v : ideal.p_coincidence) lo = std::min(lo, v);
    EXPECT_LT(lo, 1e-12);
}

TEST(Fringes, DistinguishablePhotonsGiveProductStatistics) {
    const auto grid = phi_grid(73);
    const auto t = mzi_fringes({0.0, 0.0}, 0.4, 0.4, grid, FringeInput::kDual);
    const auto s = mzi_fringes({1.0, 0.0}, 0.4, 0.4, grid, FringeInput::kSingle);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        // Photon from port 1 leaves output 0 with the probability the port-0 photon leaves output 1.
        const double p0 = s.p_out0[k], p1 = s.p_out1[k];
        EXPECT_NEAR(t.p_coincidence[k], p0 * p0 + p1 * p1, 1e-12);
        EXPECT_NEAR(t.p_out0[k], p0 * p1, 1e-12);
    }
}

TEST(Fringes, RequiresFullPeriod) {
    EXPECT_THROW(mzi_fringes({}, 0.5, 0.5, phi_grid(50, 3.0), FringeInput::kSingle), std::invalid_argument);
    EXPECT_THROW(mzi_fringes({1.2, 0.0}, 0.5, 0.5, phi_grid(50), FringeInput::kSingle), std::invalid_argument);
    EXPECT_THROW(mzi_fringes({1.0, -0.1}, 0.5, 0.5, phi_grid(50), FringeInput::kSingle), std::invalid_argument);
}

TEST(FringeFit, RecoversSyntheticParameters) {
    const auto grid = phi_grid(200);
    std::vector<double> y;
    for (double p : grid) y.push_back(0.6 + 0.25 * std::cos(2.0 * p + 0.4));
    const auto f = fit_fringe(grid, y, 2);
    EXPECT_NEAR(f.offset, 0.6, 1e-9);
    EXPECT_NEAR(f.amplitude, 0.25, 1e-9);
    EXPECT_NEAR(f.frequency, 2.0, 1e-9);
    EXPECT_NEAR(f.phase, 0.4, 1e-9);
    EXPECT_NEAR(f.visibility, 0.25 / 0.6, 1e-9);
}

TEST(FringeFit, RejectsSparseSampling) {
    const auto grid = phi_grid(12);
    std::vector<double> y(grid.size(), 0.5);
    EXPECT_THROW(fit_fringe(grid, y, 2), std::invalid_argument);
    EXPECT_THROW(fit_fringe(grid, y, 3), std::invalid_argument);
}

TEST(FringeFit, CouplerSolverHitsTargetVisibility) {
    const double r = coupler_for_visibility(0.98);
    EXPECT_LT(r, 0.5);
    EXPECT_NEAR(single_photon_visibility(r), 0.98, 1e-12);
    const auto grid = phi_grid(181);
    const auto t = mzi_fringes({1.0, 0.0}, r, r, grid, FringeInput::kSingle);
    const auto f = fit_fringe(grid, t.p_out0, 1);
    EXPECT_NEAR(f.visibility, 0.98, 0.005);
}

}  // namespace
}  // namespace cohscat
