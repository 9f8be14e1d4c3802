#pragma once

#include "shaping/autodiff.hpp"
#include "shaping/channel.hpp"
#include "shaping/modulator.hpp"
#include "shaping/sampler.hpp"

namespace shaping {

// SNR-conditioned posterior network: [Re(y), Im(y), snr_db] -> 128 relu ->
// 128 relu -> N softmax.
struct DemodNetwork {
    DenseLayer layer1;
    DenseLayer layer2;
    DenseLayer layer3;

    static DemodNetwork create(int order, RngStream& rng);

    // input is (batch,3) rows [re, im, snr_db]
    Tape::NodeId forward(Tape& tape, Tape::NodeId input);
    Tensor2 eval(const Tensor2& input) const;

    SymbolDistribution posterior(std::pair<double, double> y, double snr_db) const;

    std::vector<Parameter*> parameters();
    void append_named(NamedParameters& out, const std::string& prefix);
};

// True AWGN posterior p(s|y) proportional to p_s exp(-|y - x_s|^2 / sigma^2),
// normalized in log space. At sigma = 0 it degenerates to a one-hot at the
// nearest point.
SymbolDistribution exact_posterior_oracle(const Constellation& c, const SymbolDistribution& dist,
                                          std::pair<double, double> y, const SnrPoint& snr);

}  // namespace shaping
