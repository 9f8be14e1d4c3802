#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shaping/rng.hpp"
#include "shaping/tensor.hpp"

namespace shaping {

// SNR with both representations kept consistent. Noise is complex
// circularly-symmetric Gaussian with total variance 1/snr_linear against
// unit signal energy. snr_db = +inf is the noise-off test sentinel.
struct SnrPoint {
    double snr_db = 0.0;
    double snr_linear = 1.0;

    static SnrPoint from_db(double db);
    static SnrPoint noiseless();

    double noise_variance() const;  // sigma^2, total over both components
};

enum class ChannelKind { awgn, rayleigh_lmmse };

// Test-only overrides; all false in production runs.
struct ChannelTestHooks {
    bool zero_data_noise = false;
    bool zero_pilot_noise = false;
    bool unit_fading = false;  // h := 1
};

struct ChannelModel {
    ChannelKind kind = ChannelKind::awgn;
    int pilot_count = 1;  // pilots per fading realization (rayleigh only)
    ChannelTestHooks hooks;
};

// One fading realization with its LMMSE estimate and equalizer output terms:
// y_eq = gain * x + eq_noise where gain = h conj(hhat)/|hhat|^2.
struct RayleighDraw {
    double h_re = 0.0, h_im = 0.0;
    double hhat_re = 0.0, hhat_im = 0.0;
    double gain_re = 0.0, gain_im = 0.0;
    double eq_noise_re = 0.0, eq_noise_im = 0.0;
    int pilot_redraws = 0;
};

std::pair<double, double> awgn_transmit(std::pair<double, double> x, const SnrPoint& snr,
                                        RngStream& rng, const ChannelTestHooks& hooks = {});

// Block Rayleigh fading per symbol: h ~ CN(0,1); LMMSE estimate from
// pilot_count unit-energy pilots at the data SNR; zero-forcing equalization
// on the estimate. Pilot noise is redrawn in the measure-zero event
// |hhat| < 1e-12 (counted in the returned draw).
RayleighDraw draw_rayleigh(const SnrPoint& snr, RngStream& rng, const ChannelModel& model);

struct RayleighOutput {
    std::pair<double, double> y_eq;
    RayleighDraw draw;
};

RayleighOutput rayleigh_lmmse_transmit(std::pair<double, double> x, const SnrPoint& snr,
                                       RngStream& rng, const ChannelModel& model);

// LMMSE estimation error power E|h - hhat|^2 under the model's hooks.
double estimation_error_variance(const SnrPoint& snr, const ChannelModel& model);

double capacity_awgn(const SnrPoint& snr);  // log2(1 + snr), bits

// Monte Carlo achievable-rate reference for the LMMSE-equalized channel with
// Gaussian input, treating residual estimation error plus noise as Gaussian:
// E over hhat of log2(1 + |hhat|^2 / (sigma_e^2 + sigma^2)).
double capacity_rayleigh_lower_bound(const SnrPoint& snr, std::int64_t mc_samples, RngStream& rng,
                                     const ChannelModel& model = {ChannelKind::rayleigh_lmmse, 1, {}});

// Batched draws for the training loop; one independent realization per row.
Tensor2 awgn_noise_batch(const std::vector<SnrPoint>& snrs, RngStream& rng,
                         const ChannelTestHooks& hooks = {});

struct RayleighBatch {
    Tensor2 gains;     // (batch, 2)
    Tensor2 eq_noise;  // (batch, 2)
};

RayleighBatch rayleigh_batch(const std::vector<SnrPoint>& snrs, RngStream& rng,
                             const ChannelModel& model);

}  // namespace shaping
