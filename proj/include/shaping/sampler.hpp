#pragma once

#include <utility>
#include <vector>

#include "shaping/autodiff.hpp"
#include "shaping/rng.hpp"
#include "shaping/tensor.hpp"

namespace shaping {

// Probability vector over the N symbols. Entries are strictly positive and
// sum to one within 1e-9.
struct SymbolDistribution {
    std::vector<double> probs;

    int order() const { return static_cast<int>(probs.size()); }
    static SymbolDistribution uniform(int n);
    void validate() const;  // throws DegenerateInputError
};

// One draw of the Gumbel-Softmax mechanism. hard_onehot is the exact
// categorical sample; soft is its temperature-smoothed relaxation with the
// same argmax.
struct GumbelSample {
    std::vector<double> hard_onehot;
    std::vector<double> soft;
    int symbol_index = 0;
};

// SNR-conditioned logits generator: 1 -> 128 relu -> N linear. Output row
// holds the unnormalized log probabilities of the N symbols.
struct LogitsNetwork {
    DenseLayer layer1;
    DenseLayer layer2;

    static LogitsNetwork create(int order, RngStream& rng);

    // snr_col is a (batch,1) node of SNR values in dB.
    Tape::NodeId forward(Tape& tape, Tape::NodeId snr_col);

    // (batch,1) dB values -> (batch,N) logits, no tape.
    Tensor2 eval(const Tensor2& snr_col) const;

    SymbolDistribution distribution_at(double snr_db) const;

    std::vector<Parameter*> parameters();
    void append_named(NamedParameters& out, const std::string& prefix);
};

SymbolDistribution logits_to_distribution(const std::vector<double>& logits);

// Exact categorical sampling: argmax_i(g_i + log p_i) with i.i.d. standard
// Gumbel g.
int sample_gumbel_max(const SymbolDistribution& dist, RngStream& rng);

// Temperature-tau relaxation. soft_i = softmax((g_i + log p_i)/tau) computed
// in log space; hard_onehot marks argmax(g + log p), which coincides with
// argmax(soft). Ties break to the lowest index.
GumbelSample gumbel_softmax(const std::vector<double>& logits, const std::vector<double>& gumbels,
                            double tau);

// Forward: the exact constellation row picked by the hard one-hot.
// The differentiable counterpart is Tape::straight_through.
std::pair<double, double> straight_through_select(const GumbelSample& sample,
                                                  const Tensor2& constellation_matrix);

// Shannon entropy in bits, 0 log 0 := 0.
double distribution_entropy(const SymbolDistribution& dist);

// Batched tape-side Gumbel-Softmax: returns the soft node
// softmax((logits + g)/tau) and fills hard_idx with the per-row argmax of
// logits + g. Gradients flow to the logits through the soft path only.
Tape::NodeId gumbel_soft_forward(Tape& tape, Tape::NodeId logits, const Tensor2& gumbels,
                                 double tau, std::vector<int>& hard_idx);

}  // namespace shaping
