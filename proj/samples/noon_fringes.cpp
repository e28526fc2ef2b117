// Single-photon and two-photon fringes of a Mach-Zehnder interferometer.
#include <cstdio>
#include <numbers>

#include "cohscat/correlations.hpp"
#include "cohscat/fock.hpp"

int main() {
    using namespace cohscat;
    const double r = coupler_for_visibility(0.98);
    const auto grid = linspace(0.0, 2.0 * std::numbers::pi, 181);
    const SourceModel source{0.90, 0.167};
    const auto single = mzi_fringes(source, r, r, grid, FringeInput::kSingle);
    const auto dual = mzi_fringes(source, r, r, grid, FringeInput::kDual);

    const auto f1 = fit_fringe(grid, single.p_out0, 1);
    const auto f2 = fit_fringe(grid, dual.p_coincidence, 2);
    std::printf("coupler R = %.6f\n", r);
    std::printf("single photon: V = %.4f, frequency %.4f\n", f1.visibility, f1.frequency);
    std::printf("two photon:    V = %.4f, frequency %.4f (ratio %.4f)\n", f2.visibility, f2.frequency,
                f2.frequency / f1.frequency);
}
