// Two-photon interference visibility of resonantly scattered light,
// with and without a detector timing response.
#include <cstdio>
#include <vector>

#include "cohscat/hom.hpp"

int main() {
    using namespace cohscat;
    const auto p = cavity_emitter();
    const double rabi = rabi_from_ghz(0.83);
    const auto tau = symmetric_grid(25.0, 1250);
    const auto pair = hom_pair(p, rabi, HomSetup{}, tau);
    const auto ideal = visibility(pair.parallel, pair.orthogonal).trace;

    const auto irf = solve_timing_irf(pair.parallel, pair.orthogonal, 0.89);
    std::printf("ideal V(0) = %.6f\n", ideal.values()[1250]);
    std::printf("timing response FWHM %.4f ns gives peak V = %.4f\n", irf.fwhm, irf.peak_visibility);

    for (std::size_t i = 1250; i <= 1350; i += 10)
        std::printf("tau = %6.2f ns  V = %.4f\n", tau[i], ideal.values()[i]);
}
