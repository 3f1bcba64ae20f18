// Solves the call and put problems for the symmetric Cauchy process with
// p = 1/2 and prints thresholds and a few values.
#include <cstdio>
#include <numbers>

#include "omegastop/omegastop.hpp"

int main() {
    using namespace omegastop;
    const StableModel m(1.0, 0.5, 1.0 / std::numbers::pi);
    std::printf("p = %.6f  delta = %.6f  q = %.6f\n", m.p(), m.delta(), m.q());

    for (double r : {0.1, -0.15}) {
        const auto sol = solve(m, make_gain(r, 1.0));
        std::printf("\nr = %g: %s, b* = %.6f\n", r, std::string(to_string(sol.regime())).c_str(), *sol.b_star());
        for (double x : {-1.0, 0.01, 0.5, 1.0, 2.0, 10.0, 100.0})
            std::printf("  v(%6g) = %.10f\n", x, sol.value(x));
    }
}
