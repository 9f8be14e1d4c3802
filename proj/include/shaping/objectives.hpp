#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shaping/autodiff.hpp"
#include "shaping/channel.hpp"
#include "shaping/demodulator.hpp"
#include "shaping/modulator.hpp"
#include "shaping/sampler.hpp"

namespace shaping {

// All reported quantities are bits; natural-log internals convert once.
struct LossBreakdown {
    double cross_entropy_bits = 0.0;   // L
    double source_entropy_bits = 0.0;  // H(S)
    double corrected_loss_bits = 0.0;  // L - H
    double mi_lower_bound_bits = 0.0;  // -(L - H)

    static LossBreakdown from_bits(double ce_bits, double entropy_bits);
};

// Per-SNR mutual information record for one scheme.
struct MICurve {
    std::string scheme;
    std::vector<std::pair<double, double>> entries;  // (snr_db, mi_bits)

    void validate(int order) const;
};

// Mean over the batch of -log2 posterior(true symbol), clamped at 1e-30.
double cross_entropy_loss(const std::vector<int>& labels,
                          const std::vector<SymbolDistribution>& posteriors,
                          std::int64_t* clamp_warnings = nullptr);

// Breakdown for a batch against the current training distribution.
LossBreakdown corrected_loss(const std::vector<int>& labels,
                             const std::vector<SymbolDistribution>& posteriors,
                             const SymbolDistribution& dist,
                             std::int64_t* clamp_warnings = nullptr);

// Tape-side pieces used by the trainer. Both return 1x1 nodes in nats.
Tape::NodeId cross_entropy_node(Tape& tape, Tape::NodeId posteriors,
                                const std::vector<int>& labels,
                                std::int64_t* clamp_warnings = nullptr);
Tape::NodeId mean_entropy_node(Tape& tape, Tape::NodeId probs);

// Exact I(X;Y) in bits for a discrete input over AWGN via 2-D Gauss-Hermite
// quadrature (nodes_per_axis >= 40), log-sum-exp stabilized.
double mi_oracle_quadrature(const Constellation& c, const SymbolDistribution& dist,
                            const SnrPoint& snr, int nodes_per_axis = 48);

struct MonteCarloEstimate {
    double value_bits = 0.0;
    double std_error = 0.0;
};

// Monte Carlo MI estimate with the exact conditional densities of the
// channel: AWGN directly, Rayleigh via the LMMSE-equalized channel given the
// drawn estimate (y_eq | x, hhat is Gaussian).
MonteCarloEstimate mi_oracle_monte_carlo(const Constellation& c, const SymbolDistribution& dist,
                                         const ChannelModel& channel, const SnrPoint& snr,
                                         std::int64_t samples, RngStream& rng);

// Batched posterior evaluator abstraction so the decomposition and bound
// estimators can run against either a DemodNetwork or the exact oracle.
using PosteriorFn = std::function<Tensor2(const Tensor2& inputs)>;  // (m,3) -> (m,N)
PosteriorFn posterior_fn(const DemodNetwork& net);
PosteriorFn posterior_fn(const Constellation& c, const SymbolDistribution& dist,
                         const SnrPoint& snr);

// Monte Carlo estimate of the corrected loss (and hence the bound -L^) for a
// demodulator over the given channel at one SNR.
struct BoundEstimate {
    LossBreakdown breakdown;
    double std_error_bits = 0.0;  // on the cross-entropy term
};
BoundEstimate corrected_loss_monte_carlo(const Constellation& c, const SymbolDistribution& dist,
                                         const ChannelModel& channel, const SnrPoint& snr,
                                         std::int64_t samples, RngStream& rng,
                                         const PosteriorFn& posterior);

// Mean KL(exact posterior || approximate posterior) in bits over received
// samples drawn from the true marginal (AWGN only).
MonteCarloEstimate mean_posterior_kl(const Constellation& c, const SymbolDistribution& dist,
                                     const SnrPoint& snr, std::int64_t samples, RngStream& rng,
                                     const PosteriorFn& posterior);

// Independent estimates of every term of L = H - I + E[KL] and the residual.
struct DecompositionResult {
    double loss_bits = 0.0;
    double entropy_bits = 0.0;
    double mi_bits = 0.0;
    double kl_bits = 0.0;
    double residual_bits = 0.0;
    double combined_std_error = 0.0;
};
DecompositionResult decomposition_check(const Constellation& c, const SymbolDistribution& dist,
                                        const SnrPoint& snr, std::int64_t samples, RngStream& rng,
                                        const PosteriorFn& posterior);

// Paired-sample estimate of MI(a) - MI(b) over the same channel: both
// schemes see identical fading, estimation, noise, and symbol-selection
// draws, which shrinks the standard error of the difference far below that
// of two independent estimates.
MonteCarloEstimate mi_difference_paired(const Constellation& c_a, const SymbolDistribution& d_a,
                                        const Constellation& c_b, const SymbolDistribution& d_b,
                                        const ChannelModel& channel, const SnrPoint& snr,
                                        std::int64_t samples, RngStream& rng);

// Maxwell-Boltzmann nu maximizing quadrature MI at one SNR, golden-section
// over [0, nu_max], reproducible to 1e-3.
struct MbSearchResult {
    double nu = 0.0;
    double mi_bits = 0.0;
};
MbSearchResult mb_optimal_nu(const Tensor2& base_points, const SnrPoint& snr, double nu_max = 5.0,
                             double tol = 1e-3);

// Categorical sampling by inverse CDF (deterministic given the stream).
int sample_categorical(const SymbolDistribution& dist, RngStream& rng);

}  // namespace shaping
