#include "shaping/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shaping {

// Roots of the physicists' Hermite polynomial by Newton iteration on the
// orthonormal recurrence, weights w = 2 / H'(x)^2 in that normalization.
GaussHermite gauss_hermite(int n) {
    if (n < 1 || n > 256) throw std::invalid_argument("gauss_hermite: order out of range");

    const double pi_m4 = 0.7511255444649425;  // pi^{-1/4}
    const int half = (n + 1) / 2;
    std::vector<double> root(half, 0.0);  // positive roots, descending
    std::vector<double> weight(half, 0.0);

    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(n, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * root[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * root[1];
        } else {
            z = 2.0 * z - root[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pi_m4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double step = p1 / pp;
            z -= step;
            if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
        }
        root[i] = z;
        weight[i] = 2.0 / (pp * pp);
    }

    GaussHermite rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    for (int i = 0; i < half; ++i) {
        rule.nodes[i] = -root[i];      // ascending: most negative first
        rule.weights[i] = weight[i];
        rule.nodes[n - 1 - i] = root[i];
        rule.weights[n - 1 - i] = weight[i];
    }
    return rule;
}

}  // namespace shaping
