#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace shaping {

// Central finite differences against an analytic gradient. Returns the
// maximum relative error over coordinates; the denominator is floored at
// 1e-3 so near-zero gradients are compared absolutely.
double max_rel_error_fd(const std::function<double(const std::vector<double>&)>& f,
                        std::vector<double> x, const std::vector<double>& analytic_grad,
                        double h = 1e-5);

struct CheckResult {
    std::string name;
    bool pass = false;
    double metric = 0.0;
    double threshold = 0.0;
    std::string detail;
};

// Fast invariant suite behind `shaper check`: gradient spot checks, sampler
// total-variation test, oracle cross-check at one SNR, decomposition
// residual. Deterministic for a fixed seed; finishes well under a minute.
std::vector<CheckResult> run_fast_checks(std::uint64_t seed = 7);

}  // namespace shaping
