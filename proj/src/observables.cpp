#include "atomcavity/observables.hpp"

#include "atomcavity/errors.hpp"

namespace atomcavity {

OrderParameters order_parameters(const ModeGrid& phi)
{
    const int c = phi.cutoff();
    double norm = 0.0;
    double shift_z2 = 0.0;   // Re sum phi*_{n,m+2} phi_{n,m}
    double diag = 0.0;       // Re sum phi*_{n+1,m+1} phi_{n,m}
    double anti = 0.0;       // Re sum phi*_{n+1,m-1} phi_{n,m}
    for (int n = -c; n <= c; ++n) {
        for (int m = -c; m <= c; ++m) {
            const Complex v = phi(n, m);
            norm += std::norm(v);
            if (m + 2 <= c) shift_z2 += (std::conj(phi(n, m + 2)) * v).real();
            if (n + 1 <= c) {
                if (m + 1 <= c) diag += (std::conj(phi(n + 1, m + 1)) * v).real();
                if (m - 1 >= -c) anti += (std::conj(phi(n + 1, m - 1)) * v).real();
            }
        }
    }
    if (!(norm > 0)) throw DegenerateState("order parameter of a zero-norm state");
    // <e^{2ikz}> + c.c. = 2 shift_z2; the four diagonal shifts pair into
    // two conjugate pairs.
    return {0.5 + 0.5 * shift_z2 / norm, 0.5 * (diag + anti) / norm};
}

double bunching(const ModeGrid& phi) { return order_parameters(phi).bunching; }

double dw_order(const ModeGrid& phi) { return order_parameters(phi).dw_order; }

}  // namespace atomcavity
