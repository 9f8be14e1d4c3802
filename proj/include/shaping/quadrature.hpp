#pragma once

#include <vector>

namespace shaping {

// Gauss-Hermite rule for integrals against exp(-t^2): sum_i w_i f(t_i)
// approximates the integral of f(t) exp(-t^2) dt. Nodes ascend; weights sum
// to sqrt(pi).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermite gauss_hermite(int n);

}  // namespace shaping
