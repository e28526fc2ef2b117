// Steady-state scattering of the cavity emitter across a drive sweep.
#include <cstdio>

#include "cohscat/emitter.hpp"

int main() {
    const auto p = cohscat::cavity_emitter();
    std::printf("T1 = %.4f ns, T2 = %.4f ns\n", p.t1(), p.t2());
    std::printf("%10s %12s %12s\n", "rabi_ghz", "rho_ee", "rrs_frac");
    for (double ghz : {0.05, 0.1, 0.2, 0.4, 0.83, 1.5, 3.0}) {
        const double rabi = cohscat::rabi_from_ghz(ghz);
        const auto ss = cohscat::steady_state(p, rabi);
        std::printf("%10.3f %12.6f %12.6f\n", ghz, ss.rho_ee(), cohscat::rrs_fraction(p, rabi));
    }
}
