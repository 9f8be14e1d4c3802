#include "shaping/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shaping {

SymbolDistribution SymbolDistribution::uniform(int n) {
    if (n <= 0) throw DegenerateInputError("SymbolDistribution: order must be positive");
    return SymbolDistribution{std::vector<double>(n, 1.0 / n)};
}

void SymbolDistribution::validate() const {
    if (probs.empty()) throw DegenerateInputError("SymbolDistribution: empty");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p > 0.0) || !std::isfinite(p))
            throw DegenerateInputError("SymbolDistribution: entries must be positive and finite");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DegenerateInputError("SymbolDistribution: probabilities sum to " +
                                   std::to_string(sum));
}

LogitsNetwork LogitsNetwork::create(int order, RngStream& rng) {
    LogitsNetwork net;
    net.layer1 = make_dense(1, 128, Activation::relu, rng);
    // small output layer so a fresh net starts near the uniform distribution
    net.layer2 = make_dense(128, order, Activation::linear, rng, 0.02);
    return net;
}

Tape::NodeId LogitsNetwork::forward(Tape& tape, Tape::NodeId snr_col) {
    return dense_forward(tape, layer2, dense_forward(tape, layer1, snr_col));
}

Tensor2 LogitsNetwork::eval(const Tensor2& snr_col) const {
    return dense_eval(layer2, dense_eval(layer1, snr_col));
}

SymbolDistribution LogitsNetwork::distribution_at(double snr_db) const {
    const Tensor2 logits = eval(Tensor2::full(1, 1, snr_db));
    return logits_to_distribution(logits.data);
}

std::vector<Parameter*> LogitsNetwork::parameters() {
    return {&layer1.weights, &layer1.bias, &layer2.weights, &layer2.bias};
}

void LogitsNetwork::append_named(NamedParameters& out, const std::string& prefix) {
    out.emplace_back(prefix + ".layer1.weights", &layer1.weights);
    out.emplace_back(prefix + ".layer1.bias", &layer1.bias);
    out.emplace_back(prefix + ".layer2.weights", &layer2.weights);
    out.emplace_back(prefix + ".layer2.bias", &layer2.bias);
}

SymbolDistribution logits_to_distribution(const std::vector<double>& logits) {
    Tensor2 row(1, static_cast<int>(logits.size()));
    row.data = logits;
    const Tensor2 p = softmax_rows_eval(row);
    return SymbolDistribution{p.data};
}

int sample_gumbel_max(const SymbolDistribution& dist, RngStream& rng) {
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < dist.order(); ++i) {
        const double v = rng.gumbel() + std::log(dist.probs[i]);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

GumbelSample gumbel_softmax(const std::vector<double>& logits, const std::vector<double>& gumbels,
                            double tau) {
    if (logits.size() != gumbels.size())
        throw ShapeError("gumbel_softmax: logits/gumbels size mismatch");
    if (!(tau > 0.0)) throw DegenerateInputError("gumbel_softmax: tau must be positive");
    const int n = static_cast<int>(logits.size());

    // log p_i = logits_i - logsumexp(logits); the shift is constant per row
    // and cancels inside the softmax, so perturbed logits suffice.
    GumbelSample s;
    s.soft.resize(n);
    s.hard_onehot.assign(n, 0.0);
    std::vector<double> z(n);
    int best = 0;
    for (int i = 0; i < n; ++i) {
        z[i] = (logits[i] + gumbels[i]) / tau;
        if (logits[i] + gumbels[i] > logits[best] + gumbels[best]) best = i;
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        s.soft[i] = std::exp(z[i] - mx);
        sum += s.soft[i];
    }
    for (int i = 0; i < n; ++i) s.soft[i] /= sum;
    s.symbol_index = best;
    s.hard_onehot[best] = 1.0;
    return s;
}

std::pair<double, double> straight_through_select(const GumbelSample& sample,
                                                  const Tensor2& constellation_matrix) {
    if (constellation_matrix.cols != 2 ||
        constellation_matrix.rows != static_cast<int>(sample.hard_onehot.size()))
        throw ShapeError("straight_through_select: constellation shape");
    const int k = sample.symbol_index;
    return {constellation_matrix.at(k, 0), constellation_matrix.at(k, 1)};
}

double distribution_entropy(const SymbolDistribution& dist) {
    double h = 0.0;
    for (double p : dist.probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

Tape::NodeId gumbel_soft_forward(Tape& tape, Tape::NodeId logits, const Tensor2& gumbels,
                                 double tau, std::vector<int>& hard_idx) {
    const Tensor2& vl = tape.value(logits);
    if (!vl.same_shape(gumbels)) throw ShapeError("gumbel_soft_forward: gumbel shape");
    if (!(tau > 0.0)) throw DegenerateInputError("gumbel_soft_forward: tau must be positive");
    hard_idx.resize(vl.rows);
    for (int i = 0; i < vl.rows; ++i) {
        int best = 0;
        for (int j = 1; j < vl.cols; ++j)
            if (vl.at(i, j) + gumbels.at(i, j) > vl.at(i, best) + gumbels.at(i, best)) best = j;
        hard_idx[i] = best;
    }
    return tape.softmax_rows(tape.scale(tape.add(logits, tape.constant(gumbels)), 1.0 / tau));
}

}  // namespace shaping
