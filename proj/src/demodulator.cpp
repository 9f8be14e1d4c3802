#include "shaping/demodulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shaping {

DemodNetwork DemodNetwork::create(int order, RngStream& rng) {
    DemodNetwork net;
    net.layer1 = make_dense(3, 128, Activation::relu, rng);
    net.layer2 = make_dense(128, 128, Activation::relu, rng);
    // small output layer: fresh posteriors start near uniform
    net.layer3 = make_dense(128, order, Activation::softmax, rng, 0.02);
    return net;
}

Tape::NodeId DemodNetwork::forward(Tape& tape, Tape::NodeId input) {
    return dense_forward(tape, layer3,
                         dense_forward(tape, layer2, dense_forward(tape, layer1, input)));
}

Tensor2 DemodNetwork::eval(const Tensor2& input) const {
    return dense_eval(layer3, dense_eval(layer2, dense_eval(layer1, input)));
}

SymbolDistribution DemodNetwork::posterior(std::pair<double, double> y, double snr_db) const {
    Tensor2 in(1, 3);
    in.at(0, 0) = y.first;
    in.at(0, 1) = y.second;
    in.at(0, 2) = snr_db;
    const Tensor2 p = eval(in);
    return SymbolDistribution{p.data};
}

std::vector<Parameter*> DemodNetwork::parameters() {
    return {&layer1.weights, &layer1.bias, &layer2.weights,
            &layer2.bias,    &layer3.weights, &layer3.bias};
}

void DemodNetwork::append_named(NamedParameters& out, const std::string& prefix) {
    out.emplace_back(prefix + ".layer1.weights", &layer1.weights);
    out.emplace_back(prefix + ".layer1.bias", &layer1.bias);
    out.emplace_back(prefix + ".layer2.weights", &layer2.weights);
    out.emplace_back(prefix + ".layer2.bias", &layer2.bias);
    out.emplace_back(prefix + ".layer3.weights", &layer3.weights);
    out.emplace_back(prefix + ".layer3.bias", &layer3.bias);
}

SymbolDistribution exact_posterior_oracle(const Constellation& c, const SymbolDistribution& dist,
                                          std::pair<double, double> y, const SnrPoint& snr) {
    if (dist.order() != c.order()) throw ShapeError("exact_posterior_oracle: order mismatch");
    const int n = c.order();
    const double var = snr.noise_variance();
    SymbolDistribution post;
    post.probs.assign(n, 0.0);

    std::vector<double> d2(n);
    for (int s = 0; s < n; ++s) {
        const double dr = y.first - c.points.at(s, 0);
        const double di = y.second - c.points.at(s, 1);
        d2[s] = dr * dr + di * di;
    }
    if (var == 0.0) {
        const int k = static_cast<int>(std::min_element(d2.begin(), d2.end()) - d2.begin());
        post.probs[k] = 1.0;
        return post;
    }
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> logw(n);
    for (int s = 0; s < n; ++s) {
        logw[s] = std::log(dist.probs[s]) - d2[s] / var;
        mx = std::max(mx, logw[s]);
    }
    double z = 0.0;
    for (int s = 0; s < n; ++s) {
        post.probs[s] = std::exp(logw[s] - mx);
        z += post.probs[s];
    }
    for (double& p : post.probs) p /= z;
    return post;
}

}  // namespace shaping
