#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shaping/channel.hpp"
#include "shaping/demodulator.hpp"
#include "shaping/modulator.hpp"
#include "shaping/objectives.hpp"
#include "shaping/sampler.hpp"

namespace shaping {

enum class TrainMode { ps_only, gs_only, joint };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& s);
std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& s);

// One piecewise-constant schedule stage: `steps` steps at `value`.
template <typename T>
struct Stage {
    std::int64_t steps = 0;
    T value{};
};

struct TrainConfig {
    TrainMode mode = TrainMode::ps_only;
    int order = 16;
    ChannelKind channel = ChannelKind::awgn;
    int pilot_count = 1;
    double snr_low_db = -2.0;
    double snr_high_db = 40.0;
    double tau = 10.0;
    std::vector<Stage<int>> batch_schedule;
    std::vector<Stage<double>> lr_schedule;
    std::uint64_t seed = 1;
    std::int64_t steps_total = 20000;
    std::int64_t checkpoint_every = 200;

    // Hard errors throw ConfigError naming the field; soft issues (batch not
    // ascending, lr not descending) come back as warnings.
    std::vector<std::string> validate() const;

    // Desk-scale defaults: four stages, batch 100 -> 10000, lr 1e-3 -> 1e-5,
    // 20k steps.
    static TrainConfig desk_default(int order, TrainMode mode,
                                    ChannelKind kind = ChannelKind::awgn);

    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
};

// The three trainable blocks. Frozen blocks (by mode) enter the training
// graph as constants and are never touched by the optimizer.
struct ShapingModel {
    TrainMode mode = TrainMode::ps_only;
    int order = 0;
    LogitsNetwork dist_net;
    Parameter mod_points;  // (N,2) raw geometry
    DemodNetwork demod;

    static ShapingModel create(const TrainConfig& cfg);

    // Active training distribution at one SNR (uniform when the sampler is
    // frozen).
    SymbolDistribution distribution_at(double snr_db) const;

    // Energy-normalized constellation for the distribution at this SNR.
    Constellation constellation_at(double snr_db) const;

    std::vector<Parameter*> trainable_parameters();
    NamedParameters named_parameters();
};

struct LossCurveRow {
    std::int64_t step = 0;
    double loss_bits = 0.0;      // L
    double entropy_bits = 0.0;   // H(S), batch mean
    double mi_bound_bits = 0.0;  // H - L
};

struct CheckpointStat {
    std::int64_t step = 0;
    double snr_min_db = 0.0;
    double snr_mean_db = 0.0;
    double snr_max_db = 0.0;
    LossBreakdown loss;
    double wall_time_s = 0.0;
};

struct TrainReport {
    std::string config_json;
    std::vector<CheckpointStat> checkpoints;
    std::vector<LossCurveRow> loss_curve;  // one row per step
    std::string final_checkpoint_json;
    std::int64_t clamp_warnings = 0;
    bool non_production = false;  // set for the uncorrected-loss control
    double total_wall_time_s = 0.0;

    std::string to_json() const;
};

struct TrainOutcome {
    TrainReport report;
    ShapingModel model;
};

// End-to-end optimization of the corrected loss L^ = L - H(S). Deterministic
// given (config, seed). Throws TrainingError on NaN loss with a diagnostic
// dump of the last batch in the exception.
TrainOutcome train(const TrainConfig& cfg);

// Negative control: identical loop minimizing the raw cross entropy L.
TrainOutcome train_with_uncorrected_loss(const TrainConfig& cfg);

struct EvalPoint {
    double snr_db = 0.0;
    double mi_bits = 0.0;
    double mi_std_error = 0.0;  // zero for the quadrature oracle
    LossBreakdown bound;        // -L^ of the trained demodulator
    double bound_std_error = 0.0;
    SymbolDistribution dist;
    Constellation constellation;
    bool extrapolated = false;
};

struct EvalResult {
    MICurve curve;
    std::vector<EvalPoint> points;
    bool any_extrapolated = false;
};

// Oracle MI of the learned (geometry, distribution) pair per grid point:
// quadrature for AWGN, Monte Carlo for Rayleigh. -L^ of the trained
// demodulator is reported alongside as the bound. Grid points outside
// [snr_low, snr_high] are computed but flagged.
EvalResult evaluate(const ShapingModel& model, const TrainConfig& cfg,
                    const std::vector<double>& snr_grid_db, const ChannelModel& channel,
                    std::int64_t mc_samples, std::uint64_t seed);

}  // namespace shaping
