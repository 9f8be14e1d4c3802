#pragma once

#include <utility>

#include "shaping/autodiff.hpp"
#include "shaping/sampler.hpp"
#include "shaping/tensor.hpp"

namespace shaping {

// N complex points stored as (re, im) rows. After normalize() the expected
// energy under the paired distribution is one.
struct Constellation {
    Tensor2 points;  // (N, 2)
    bool trainable = false;

    int order() const { return points.rows; }
    double mean_energy(const SymbolDistribution& dist) const;
};

// Probability-weighted unit-energy scaling: points / sqrt(sum_s p_s |x_s|^2).
// Throws DegenerateInputError when the weighted energy vanishes.
Constellation normalize(const Tensor2& points, const SymbolDistribution& dist);

// Square QAM grid with odd-integer levels, unit energy under the uniform
// distribution. Canonical ordering is lexicographic descending on (re, im),
// so symbol 0 of QPSK is (1+i)/sqrt(2). N must be a perfect square.
Constellation qam(int order);

// Unnormalized odd-integer grid (levels +-1, +-3, ...) in canonical order.
Tensor2 qam_grid(int order);

// Maxwell-Boltzmann family over a base geometry: p_s proportional to
// exp(-nu |x_s|^2), evaluated on the unnormalized base points. The caller
// re-normalizes energy afterwards since shaping changes the mean energy.
SymbolDistribution maxwell_boltzmann_distribution(const Constellation& base, double nu);
SymbolDistribution maxwell_boltzmann_distribution(const Tensor2& base_points, double nu);

// One member of the family: a rate parameter paired with its base geometry.
struct MaxwellBoltzmannShaping {
    double nu = 0.0;
    Constellation base;

    SymbolDistribution distribution() const { return maxwell_boltzmann_distribution(base, nu); }
    // base geometry re-normalized to unit energy under the induced weights
    Constellation shaped_constellation() const {
        return normalize(base.points, distribution());
    }
};

// Exact row selection for one sample of a normalized constellation.
std::pair<double, double> modulate(const GumbelSample& sample, const Constellation& c);

// Tape-side per-batch-element energy normalization. probs is (batch,N), the
// current distribution per element; points is the (N,2) raw geometry node.
// Returns the (batch,1) scale node 1/sqrt(sum_s p_bs |x_s|^2) with gradients
// flowing to both probs and points.
Tape::NodeId normalization_scale(Tape& tape, Tape::NodeId probs, Tape::NodeId points);

}  // namespace shaping
