#include "shaping/modulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shaping {

double Constellation::mean_energy(const SymbolDistribution& dist) const {
    if (dist.order() != order()) throw ShapeError("mean_energy: distribution order");
    double e = 0.0;
    for (int s = 0; s < order(); ++s) {
        const double re = points.at(s, 0), im = points.at(s, 1);
        e += dist.probs[s] * (re * re + im * im);
    }
    return e;
}

Constellation normalize(const Tensor2& points, const SymbolDistribution& dist) {
    if (points.cols != 2) throw ShapeError("normalize: points must be (N,2)");
    if (dist.order() != points.rows) throw ShapeError("normalize: distribution order");
    double energy = 0.0;
    for (int s = 0; s < points.rows; ++s) {
        const double re = points.at(s, 0), im = points.at(s, 1);
        energy += dist.probs[s] * (re * re + im * im);
    }
    if (!(energy > 0.0))
        throw DegenerateInputError("normalize: zero expected energy under the distribution");
    const double scale = 1.0 / std::sqrt(energy);
    Constellation c;
    c.points = points;
    for (double& v : c.points.data) v *= scale;
    return c;
}

Tensor2 qam_grid(int order) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (side * side != order || order < 4)
        throw UnsupportedOrderError("qam: order must be a perfect square >= 4, got " +
                                    std::to_string(order));
    Tensor2 grid(order, 2);
    int s = 0;
    // levels side-1, side-3, ..., -(side-1); descending on re then im
    for (int i = 0; i < side; ++i) {
        const double re = static_cast<double>(side - 1 - 2 * i);
        for (int j = 0; j < side; ++j) {
            const double im = static_cast<double>(side - 1 - 2 * j);
            grid.at(s, 0) = re;
            grid.at(s, 1) = im;
            ++s;
        }
    }
    return grid;
}

Constellation qam(int order) {
    Constellation c = normalize(qam_grid(order), SymbolDistribution::uniform(order));
    c.trainable = false;
    return c;
}

SymbolDistribution maxwell_boltzmann_distribution(const Tensor2& base_points, double nu) {
    if (nu < 0.0) throw DegenerateInputError("maxwell_boltzmann: nu must be nonnegative");
    const int n = base_points.rows;
    std::vector<double> energy(n);
    double emin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n; ++s) {
        const double re = base_points.at(s, 0), im = base_points.at(s, 1);
        energy[s] = re * re + im * im;
        emin = std::min(emin, energy[s]);
    }
    SymbolDistribution dist;
    dist.probs.resize(n);
    double z = 0.0;
    for (int s = 0; s < n; ++s) {
        // floor keeps the distribution strictly positive at extreme nu
        dist.probs[s] = std::max(std::exp(-nu * (energy[s] - emin)), 1e-300);
        z += dist.probs[s];
    }
    for (double& p : dist.probs) p /= z;
    return dist;
}

SymbolDistribution maxwell_boltzmann_distribution(const Constellation& base, double nu) {
    return maxwell_boltzmann_distribution(base.points, nu);
}

std::pair<double, double> modulate(const GumbelSample& sample, const Constellation& c) {
    return straight_through_select(sample, c.points);
}

Tape::NodeId normalization_scale(Tape& tape, Tape::NodeId probs, Tape::NodeId points) {
    // energy_s = |x_s|^2 as (N,1); per-element expected energy = probs * energy
    Tape::NodeId energy = tape.row_sumsq(points);
    Tape::NodeId expected = tape.matmul(probs, energy);
    return tape.rsqrt(expected);
}

}  // namespace shaping
