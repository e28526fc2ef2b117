#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "cohscat/ode.hpp"

namespace cohscat {
namespace {

TEST(DormandPrince, ExponentialDecayOnGrid) {
    auto rhs = [](double, const std::array<double, 1>& y, std::array<double, 1>& dy) { dy[0] = -2.0 * y[0]; };
    const std::vector<double> grid{0.0, 0.1, 0.5, 1.0, 3.0};
    const auto out = integrate_on_grid<double, 1>(rhs, {1.0}, grid);
    ASSERT_EQ(out.size(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(out[i][0], std::exp(-2.0 * grid[i]), 1e-10);
}

TEST(DormandPrince, HarmonicOscillatorComplex) {
    // z' = i w z, rotates on the unit circle.
    using C = std::complex<double>;
    auto rhs = [](double, const std::array<C, 1>& y, std::array<C, 1>& dy) { dy[0] = C(0, 3.0) * y[0]; };
    const std::vector<double> grid{0.0, 10.0};
    const auto out = integrate_on_grid<C, 1>(rhs, {C(1, 0)}, grid);
    EXPECT_NEAR(std::abs(out[1][0] - std::exp(C(0, 30.0))), 0.0, 1e-8);
}

TEST(DormandPrince, BreakpointsAreHonoured) {
    // y' = 1 on [1, 2), 0 elsewhere; the integral is exact only if the steps land on the edges.
    auto rhs = [](double t, const std::array<double, 1>&, std::array<double, 1>& dy) {
        dy[0] = (t >= 1.0 && t < 2.0) ? 1.0 : 0.0;
    };
    const std::vector<double> grid{0.0, 5.0};
    const std::vector<double> bps{1.0, 2.0};
    OdeOptions opts;
    opts.max_step = 0.3;
    const auto out = integrate_on_grid<double, 1>(rhs, {0.0}, grid, opts, bps);
    EXPECT_NEAR(out[1][0], 1.0, 1e-12);
}

TEST(DormandPrince, RejectsNonIncreasingGrid) {
    auto rhs = [](double, const std::array<double, 1>&, std::array<double, 1>& dy) { dy[0] = 0.0; };
    const std::vector<double> grid{0.0, 1.0, 1.0};
    EXPECT_THROW((integrate_on_grid<double, 1>(rhs, {0.0}, grid)), std::invalid_argument);
}

TEST(DormandPrince, StepUnderflowReportsTime) {
    // Blows up at t = 1.
    auto rhs = [](double, const std::array<double, 1>& y, std::array<double, 1>& dy) { dy[0] = y[0] * y[0]; };
    const std::vector<double> grid{0.0, 2.0};
    try {
        integrate_on_grid<double, 1>(rhs, {1.0}, grid);
        FAIL() << "expected IntegrationFailure";
    } catch (const IntegrationFailure& e) {
        EXPECT_NEAR(e.time(), 1.0, 1e-3);
    }
}

TEST(DormandPrince, HermiteInterpolationIsAccurate) {
    auto rhs = [](double, const std::array<double, 1>& y, std::array<double, 1>& dy) { dy[0] = -y[0]; };
    OdeOptions opts;
    opts.rel_tol = opts.abs_tol = 1e-12;
    DormandPrince<double, 1, decltype(rhs)> solver(rhs, 0.0, {1.0}, opts);
    solver.step(1.0);
    const double t0 = solver.previous_time(), t1 = solver.time();
    const double mid = 0.5 * (t0 + t1);
    EXPECT_NEAR(solver.interpolate(mid)[0], std::exp(-mid), 1e-7);
}

}  // namespace
}  // namespace cohscat
