// Evaluate L(s, g) on the critical line and list the first zeros.

#include <cstdio>

#include "hiwl/zeros.hpp"

int main() {
    const auto g = hiwl::g_form(20000);
    for (double t : {5.0, 10.0, 20.0}) {
        const auto v = hiwl::l_eval(g, {g.critical_line(), t});
        std::printf("L(2.25+%gi) = %.12f %+.12fi\n", t, v.real(), v.imag());
    }
    const auto z = hiwl::build_zeroset(g, 30.0);
    std::printf("%zu zeros below T=30 (box count %ld)\n", z.size(), z.box_count);
    for (const auto& r : z.zeros) std::printf("  %-8s beta=%.10f gamma=%.10f\n", hiwl::to_string(r.kind), r.beta, r.gamma);
}
