#include "shaping/channel.hpp"

#include <cmath>
#include <limits>

#include "shaping/errors.hpp"

namespace shaping {

SnrPoint SnrPoint::from_db(double db) {
    SnrPoint p;
    p.snr_db = db;
    p.snr_linear = std::isinf(db) && db > 0.0 ? std::numeric_limits<double>::infinity()
                                              : std::pow(10.0, db / 10.0);
    return p;
}

SnrPoint SnrPoint::noiseless() {
    return from_db(std::numeric_limits<double>::infinity());
}

double SnrPoint::noise_variance() const {
    return std::isinf(snr_linear) ? 0.0 : 1.0 / snr_linear;
}

std::pair<double, double> awgn_transmit(std::pair<double, double> x, const SnrPoint& snr,
                                        RngStream& rng, const ChannelTestHooks& hooks) {
    const double var = hooks.zero_data_noise ? 0.0 : snr.noise_variance();
    if (var == 0.0) return x;
    const auto [nr, ni] = rng.complex_normal(var);
    return {x.first + nr, x.second + ni};
}

RayleighDraw draw_rayleigh(const SnrPoint& snr, RngStream& rng, const ChannelModel& model) {
    if (model.pilot_count < 1) throw ConfigError("pilot_count: must be at least 1");
    RayleighDraw d;
    if (model.hooks.unit_fading) {
        d.h_re = 1.0;
        d.h_im = 0.0;
    } else {
        const auto [hr, hi] = rng.complex_normal(1.0);
        d.h_re = hr;
        d.h_im = hi;
    }
    const double var = snr.noise_variance();
    const double pilots = static_cast<double>(model.pilot_count);
    const double rho_p = std::isinf(snr.snr_linear) ? std::numeric_limits<double>::infinity()
                                                    : pilots * snr.snr_linear;
    const double shrink = std::isinf(rho_p) ? 1.0 : rho_p / (rho_p + 1.0);
    for (;;) {
        // pilot p = 1; average of pilot observations
        double obs_re = d.h_re, obs_im = d.h_im;
        if (!model.hooks.zero_pilot_noise && var > 0.0) {
            double acc_re = 0.0, acc_im = 0.0;
            for (int i = 0; i < model.pilot_count; ++i) {
                const auto [nr, ni] = rng.complex_normal(var);
                acc_re += nr;
                acc_im += ni;
            }
            obs_re += acc_re / pilots;
            obs_im += acc_im / pilots;
        }
        d.hhat_re = shrink * obs_re;
        d.hhat_im = shrink * obs_im;
        const double mag2 = d.hhat_re * d.hhat_re + d.hhat_im * d.hhat_im;
        if (mag2 >= 1e-24) {
            // gain = h conj(hhat) / |hhat|^2
            d.gain_re = (d.h_re * d.hhat_re + d.h_im * d.hhat_im) / mag2;
            d.gain_im = (d.h_im * d.hhat_re - d.h_re * d.hhat_im) / mag2;
            if (!model.hooks.zero_data_noise && var > 0.0) {
                const auto [nr, ni] = rng.complex_normal(var);
                d.eq_noise_re = (nr * d.hhat_re + ni * d.hhat_im) / mag2;
                d.eq_noise_im = (ni * d.hhat_re - nr * d.hhat_im) / mag2;
            }
            return d;
        }
        ++d.pilot_redraws;
        if (model.hooks.zero_pilot_noise || var == 0.0)
            throw DegenerateInputError("draw_rayleigh: degenerate estimate with pilot noise off");
    }
}

RayleighOutput rayleigh_lmmse_transmit(std::pair<double, double> x, const SnrPoint& snr,
                                       RngStream& rng, const ChannelModel& model) {
    RayleighOutput out;
    out.draw = draw_rayleigh(snr, rng, model);
    const RayleighDraw& d = out.draw;
    out.y_eq = {d.gain_re * x.first - d.gain_im * x.second + d.eq_noise_re,
                d.gain_re * x.second + d.gain_im * x.first + d.eq_noise_im};
    return out;
}

double estimation_error_variance(const SnrPoint& snr, const ChannelModel& model) {
    if (std::isinf(snr.snr_linear)) return 0.0;
    const double rho_p = static_cast<double>(model.pilot_count) * snr.snr_linear;
    if (model.hooks.zero_pilot_noise) return 1.0 / ((rho_p + 1.0) * (rho_p + 1.0));
    return 1.0 / (rho_p + 1.0);
}

double capacity_awgn(const SnrPoint& snr) { return std::log2(1.0 + snr.snr_linear); }

double capacity_rayleigh_lower_bound(const SnrPoint& snr, std::int64_t mc_samples, RngStream& rng,
                                     const ChannelModel& model) {
    if (mc_samples < 100000)
        throw DegenerateInputError("capacity_rayleigh_lower_bound: need at least 1e5 samples");
    const double sigma_e2 = estimation_error_variance(snr, model);
    const double denom = sigma_e2 + snr.noise_variance();
    double acc = 0.0;
    for (std::int64_t i = 0; i < mc_samples; ++i) {
        const RayleighDraw d = draw_rayleigh(snr, rng, model);
        const double mag2 = d.hhat_re * d.hhat_re + d.hhat_im * d.hhat_im;
        acc += std::log2(1.0 + mag2 / denom);
    }
    return acc / static_cast<double>(mc_samples);
}

Tensor2 awgn_noise_batch(const std::vector<SnrPoint>& snrs, RngStream& rng,
                         const ChannelTestHooks& hooks) {
    Tensor2 noise(static_cast<int>(snrs.size()), 2);
    if (hooks.zero_data_noise) return noise;
    for (int i = 0; i < noise.rows; ++i) {
        const double var = snrs[static_cast<std::size_t>(i)].noise_variance();
        if (var == 0.0) continue;
        const auto [nr, ni] = rng.complex_normal(var);
        noise.at(i, 0) = nr;
        noise.at(i, 1) = ni;
    }
    return noise;
}

RayleighBatch rayleigh_batch(const std::vector<SnrPoint>& snrs, RngStream& rng,
                             const ChannelModel& model) {
    RayleighBatch batch;
    const int n = static_cast<int>(snrs.size());
    batch.gains = Tensor2(n, 2);
    batch.eq_noise = Tensor2(n, 2);
    for (int i = 0; i < n; ++i) {
        const RayleighDraw d = draw_rayleigh(snrs[static_cast<std::size_t>(i)], rng, model);
        batch.gains.at(i, 0) = d.gain_re;
        batch.gains.at(i, 1) = d.gain_im;
        batch.eq_noise.at(i, 0) = d.eq_noise_re;
        batch.eq_noise.at(i, 1) = d.eq_noise_im;
    }
    return batch;
}

}  // namespace shaping
