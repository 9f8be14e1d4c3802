#include "shaping/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "nlohmann/json.hpp"

namespace shaping {

namespace {

constexpr double kLn2 = 0.6931471805599453;

template <typename T>
T schedule_value(const std::vector<Stage<T>>& stages, std::int64_t step) {
    std::int64_t covered = 0;
    for (const auto& st : stages) {
        covered += st.steps;
        if (step < covered) return st.value;
    }
    return stages.back().value;
}

template <typename T>
std::int64_t schedule_span(const std::vector<Stage<T>>& stages) {
    std::int64_t total = 0;
    for (const auto& st : stages) total += st.steps;
    return total;
}

nlohmann::json stages_to_json(const std::vector<Stage<int>>& stages) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& st : stages) arr.push_back({st.steps, st.value});
    return arr;
}

nlohmann::json stages_to_json(const std::vector<Stage<double>>& stages) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& st : stages) arr.push_back({st.steps, st.value});
    return arr;
}

}  // namespace

std::string to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::ps_only: return "ps_only";
        case TrainMode::gs_only: return "gs_only";
        case TrainMode::joint: return "joint";
    }
    return "ps_only";
}

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "ps_only") return TrainMode::ps_only;
    if (s == "gs_only") return TrainMode::gs_only;
    if (s == "joint") return TrainMode::joint;
    throw ConfigError("mode: unknown value '" + s + "' (expected ps_only|gs_only|joint)");
}

std::string to_string(ChannelKind kind) {
    return kind == ChannelKind::awgn ? "awgn" : "rayleigh_lmmse";
}

ChannelKind channel_kind_from_string(const std::string& s) {
    if (s == "awgn") return ChannelKind::awgn;
    if (s == "rayleigh_lmmse") return ChannelKind::rayleigh_lmmse;
    throw ConfigError("channel: unknown value '" + s + "' (expected awgn|rayleigh_lmmse)");
}

std::vector<std::string> TrainConfig::validate() const {
    std::vector<std::string> warnings;
    if (order < 2) throw ConfigError("order: must be at least 2");
    if (!(tau > 0.0)) throw ConfigError("tau: must be positive");
    if (!(snr_high_db >= snr_low_db)) throw ConfigError("snr_range_db: high below low");
    if (steps_total <= 0) throw ConfigError("steps_total: must be positive");
    if (pilot_count < 1) throw ConfigError("pilot_count: must be at least 1");
    if (batch_schedule.empty()) throw ConfigError("batch_schedule: empty");
    if (lr_schedule.empty()) throw ConfigError("lr_schedule: empty");
    for (const auto& st : batch_schedule)
        if (st.steps < 0 || st.value <= 0)
            throw ConfigError("batch_schedule: stages need positive batch sizes");
    for (const auto& st : lr_schedule)
        if (st.steps < 0 || !(st.value > 0.0))
            throw ConfigError("lr_schedule: stages need positive learning rates");
    if (schedule_span(batch_schedule) < steps_total)
        throw ConfigError("batch_schedule: stages cover fewer steps than steps_total");
    if (schedule_span(lr_schedule) < steps_total)
        throw ConfigError("lr_schedule: stages cover fewer steps than steps_total");
    for (std::size_t i = 1; i < batch_schedule.size(); ++i)
        if (batch_schedule[i].value < batch_schedule[i - 1].value) {
            warnings.push_back("batch_schedule: batch sizes not ascending");
            break;
        }
    for (std::size_t i = 1; i < lr_schedule.size(); ++i)
        if (lr_schedule[i].value > lr_schedule[i - 1].value) {
            warnings.push_back("lr_schedule: learning rates not descending");
            break;
        }
    return warnings;
}

TrainConfig TrainConfig::desk_default(int order, TrainMode mode, ChannelKind kind) {
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.order = order;
    cfg.channel = kind;
    cfg.steps_total = 20000;
    cfg.batch_schedule = {{5000, 100}, {5000, 1000}, {5000, 5000}, {5000, 10000}};
    cfg.lr_schedule = {{5000, 1e-3}, {5000, 1e-4}, {5000, 3e-5}, {5000, 1e-5}};
    return cfg;
}

std::string TrainConfig::to_json() const {
    nlohmann::json doc;
    doc["mode"] = shaping::to_string(mode);
    doc["order"] = order;
    doc["channel"] = shaping::to_string(channel);
    doc["pilot_count"] = pilot_count;
    doc["snr_range_db"] = {snr_low_db, snr_high_db};
    doc["tau"] = tau;
    doc["batch_schedule"] = stages_to_json(batch_schedule);
    doc["lr_schedule"] = stages_to_json(lr_schedule);
    doc["seed"] = seed;
    doc["steps_total"] = steps_total;
    doc["checkpoint_every"] = checkpoint_every;
    return doc.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    TrainConfig cfg;
    try {
        cfg.mode = train_mode_from_string(doc.at("mode").get<std::string>());
        cfg.order = doc.at("order").get<int>();
        if (doc.contains("channel"))
            cfg.channel = channel_kind_from_string(doc.at("channel").get<std::string>());
        if (doc.contains("pilot_count")) cfg.pilot_count = doc.at("pilot_count").get<int>();
        const auto range = doc.at("snr_range_db");
        if (!range.is_array() || range.size() != 2)
            throw ConfigError("snr_range_db: expected [low, high]");
        cfg.snr_low_db = range.at(0).get<double>();
        cfg.snr_high_db = range.at(1).get<double>();
        if (doc.contains("tau")) cfg.tau = doc.at("tau").get<double>();
        for (const auto& st : doc.at("batch_schedule"))
            cfg.batch_schedule.push_back({st.at(0).get<std::int64_t>(), st.at(1).get<int>()});
        for (const auto& st : doc.at("lr_schedule"))
            cfg.lr_schedule.push_back({st.at(0).get<std::int64_t>(), st.at(1).get<double>()});
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        cfg.steps_total = doc.at("steps_total").get<std::int64_t>();
        if (doc.contains("checkpoint_every"))
            cfg.checkpoint_every = doc.at("checkpoint_every").get<std::int64_t>();
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ShapingModel ShapingModel::create(const TrainConfig& cfg) {
    ShapingModel model;
    model.mode = cfg.mode;
    model.order = cfg.order;
    RngStream init_rng(derive_seed(cfg.seed, 0x1217));
    model.dist_net = LogitsNetwork::create(cfg.order, init_rng);
    model.demod = DemodNetwork::create(cfg.order, init_rng);
    Tensor2 points = qam(cfg.order).points;
    if (cfg.mode != TrainMode::ps_only) {
        // trainable geometry warm-starts at QAM plus small jitter
        for (double& v : points.data) v += 0.01 * init_rng.normal();
    }
    model.mod_points = Parameter(std::move(points));
    return model;
}

SymbolDistribution ShapingModel::distribution_at(double snr_db) const {
    if (mode == TrainMode::gs_only) return SymbolDistribution::uniform(order);
    return dist_net.distribution_at(snr_db);
}

Constellation ShapingModel::constellation_at(double snr_db) const {
    Constellation c = normalize(mod_points.value, distribution_at(snr_db));
    c.trainable = mode != TrainMode::ps_only;
    return c;
}

std::vector<Parameter*> ShapingModel::trainable_parameters() {
    std::vector<Parameter*> params;
    if (mode != TrainMode::gs_only)
        for (Parameter* p : dist_net.parameters()) params.push_back(p);
    if (mode != TrainMode::ps_only) params.push_back(&mod_points);
    for (Parameter* p : demod.parameters()) params.push_back(p);
    return params;
}

NamedParameters ShapingModel::named_parameters() {
    NamedParameters named;
    dist_net.append_named(named, "dist_net");
    named.emplace_back("modulator.points", &mod_points);
    demod.append_named(named, "demod");
    return named;
}

std::string TrainReport::to_json() const {
    nlohmann::json doc;
    doc["config"] = nlohmann::json::parse(config_json);
    doc["non_production"] = non_production;
    doc["clamp_warnings"] = clamp_warnings;
    doc["total_wall_time_s"] = total_wall_time_s;
    nlohmann::json cps = nlohmann::json::array();
    for (const auto& cp : checkpoints) {
        cps.push_back({{"step", cp.step},
                       {"snr_min_db", cp.snr_min_db},
                       {"snr_mean_db", cp.snr_mean_db},
                       {"snr_max_db", cp.snr_max_db},
                       {"cross_entropy_bits", cp.loss.cross_entropy_bits},
                       {"source_entropy_bits", cp.loss.source_entropy_bits},
                       {"corrected_loss_bits", cp.loss.corrected_loss_bits},
                       {"mi_lower_bound_bits", cp.loss.mi_lower_bound_bits},
                       {"wall_time_s", cp.wall_time_s}});
    }
    doc["checkpoints"] = cps;
    return doc.dump(2);
}

namespace {

TrainOutcome run_training(const TrainConfig& cfg, bool uncorrected) {
    cfg.validate();
#if defined(__GLIBC__)
    // the tape churns multi-megabyte buffers every step; keep them on the
    // heap freelist instead of mmap/munmap round trips
    mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
#endif
    const auto t0 = std::chrono::steady_clock::now();

    TrainOutcome out;
    out.model = ShapingModel::create(cfg);
    ShapingModel& model = out.model;
    TrainReport& report = out.report;
    report.config_json = cfg.to_json();
    report.non_production = uncorrected;

    RngStream rng(derive_seed(cfg.seed, 0x7241));
    const std::vector<Parameter*> active = model.trainable_parameters();
    AdamConfig adam;
    const ChannelModel channel{cfg.channel, cfg.pilot_count, {}};
    const bool use_dist_net = cfg.mode != TrainMode::gs_only;
    const bool train_geometry = cfg.mode != TrainMode::ps_only;
    const Tensor2 frozen_points = model.mod_points.value;

    Tape tape;
    for (std::int64_t step = 0; step < cfg.steps_total; ++step) {
        const int batch = schedule_value(cfg.batch_schedule, step);
        adam.learning_rate = schedule_value(cfg.lr_schedule, step);

        // draws first, so graph-shape differences cannot shift the stream
        std::vector<SnrPoint> snrs(static_cast<std::size_t>(batch));
        Tensor2 snr_col(batch, 1);
        for (int b = 0; b < batch; ++b) {
            const double db = rng.uniform(cfg.snr_low_db, cfg.snr_high_db);
            snrs[static_cast<std::size_t>(b)] = SnrPoint::from_db(db);
            snr_col.at(b, 0) = db;
        }
        Tensor2 gumbels(batch, cfg.order);
        for (double& g : gumbels.data) g = rng.gumbel();

        tape.clear();
        const Tape::NodeId snr_node = tape.constant(snr_col);
        Tape::NodeId logits;
        if (use_dist_net) {
            logits = model.dist_net.forward(tape, snr_node);
        } else {
            logits = tape.constant(Tensor2(batch, cfg.order));
        }
        const Tape::NodeId probs = tape.softmax_rows(logits);

        std::vector<int> labels;
        Tape::NodeId soft = gumbel_soft_forward(tape, logits, gumbels, cfg.tau, labels);
        if (!use_dist_net) {
            // geometric-only shaping has no sampler to relax: the one-hot is
            // exact, so the straight-through paths coincide (tau -> 0 limit)
            Tensor2 onehot(batch, cfg.order);
            for (int b = 0; b < batch; ++b) onehot.at(b, labels[static_cast<std::size_t>(b)]) = 1.0;
            soft = tape.constant(std::move(onehot));
        }

        const Tape::NodeId points =
            train_geometry ? tape.leaf(model.mod_points) : tape.constant(frozen_points);
        Tape::NodeId scale;
        if (train_geometry && use_dist_net) {
            // joint mode: the tau=10 relaxation dilutes the outward selection
            // force on the geometry while the norm path stays exact, which
            // drives the raw points through zero. Detach the row energies
            // from the geometry; the distribution keeps its full norm
            // gradient and the energy constraint still holds by construction.
            Tape::NodeId energy = tape.row_sumsq(tape.constant(model.mod_points.value));
            scale = tape.rsqrt(tape.matmul(probs, energy));
        } else {
            scale = normalization_scale(tape, probs, points);
        }
        const Tape::NodeId x =
            tape.mul_colvec(tape.straight_through(labels, soft, points), scale);

        Tape::NodeId y;
        if (cfg.channel == ChannelKind::awgn) {
            y = tape.add(x, tape.constant(awgn_noise_batch(snrs, rng)));
        } else {
            const RayleighBatch rb = rayleigh_batch(snrs, rng, channel);
            y = tape.add(tape.complex_scale(x, rb.gains), tape.constant(rb.eq_noise));
        }

        const Tape::NodeId posteriors =
            model.demod.forward(tape, tape.hstack(y, snr_node));
        const Tape::NodeId ce = cross_entropy_node(tape, posteriors, labels,
                                                   &report.clamp_warnings);
        const Tape::NodeId entropy = mean_entropy_node(tape, probs);
        const Tape::NodeId loss = uncorrected ? ce : tape.sub(ce, entropy);

        const double ce_bits = tape.value(ce).at(0, 0) / kLn2;
        const double h_bits = tape.value(entropy).at(0, 0) / kLn2;
        const double loss_value = tape.value(loss).at(0, 0);
        if (!std::isfinite(loss_value)) {
            nlohmann::json dump;
            dump["step"] = step;
            dump["batch"] = batch;
            dump["cross_entropy_bits"] = ce_bits;
            dump["entropy_bits"] = h_bits;
            dump["snr_db"] = snr_col.data;
            dump["labels"] = labels;
            throw TrainingError("train: NaN loss at step " + std::to_string(step) +
                                "; diagnostic dump: " + dump.dump());
        }

        tape.backward(loss);
        adam_step(active, adam);
        zero_grads(active);

        report.loss_curve.push_back({step, ce_bits, h_bits, h_bits - ce_bits});

        const bool checkpoint_due =
            cfg.checkpoint_every > 0 &&
            (step % cfg.checkpoint_every == 0 || step == cfg.steps_total - 1);
        if (checkpoint_due) {
            CheckpointStat cp;
            cp.step = step;
            cp.snr_min_db = *std::min_element(snr_col.data.begin(), snr_col.data.end());
            cp.snr_max_db = *std::max_element(snr_col.data.begin(), snr_col.data.end());
            double mean = 0.0;
            for (double v : snr_col.data) mean += v;
            cp.snr_mean_db = mean / static_cast<double>(batch);
            cp.loss = LossBreakdown::from_bits(ce_bits, h_bits);
            cp.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            report.checkpoints.push_back(cp);
        }
    }

    report.final_checkpoint_json = save_parameters_json(model.named_parameters());
    report.total_wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace

TrainOutcome train(const TrainConfig& cfg) { return run_training(cfg, false); }

TrainOutcome train_with_uncorrected_loss(const TrainConfig& cfg) {
    return run_training(cfg, true);
}

EvalResult evaluate(const ShapingModel& model, const TrainConfig& cfg,
                    const std::vector<double>& snr_grid_db, const ChannelModel& channel,
                    std::int64_t mc_samples, std::uint64_t seed) {
    EvalResult result;
    result.curve.scheme = to_string(model.mode);
    const PosteriorFn posterior = posterior_fn(model.demod);
    int index = 0;
    for (double db : snr_grid_db) {
        const SnrPoint snr = SnrPoint::from_db(db);
        EvalPoint pt;
        pt.snr_db = db;
        pt.extrapolated = db < cfg.snr_low_db || db > cfg.snr_high_db;
        pt.dist = model.distribution_at(db);
        pt.constellation = normalize(model.mod_points.value, pt.dist);

        RngStream rng(derive_seed(seed, 0xE7A1 + static_cast<std::uint64_t>(index)));
        if (channel.kind == ChannelKind::awgn) {
            pt.mi_bits = mi_oracle_quadrature(pt.constellation, pt.dist, snr);
            pt.mi_std_error = 0.0;
        } else {
            const MonteCarloEstimate est =
                mi_oracle_monte_carlo(pt.constellation, pt.dist, channel, snr, mc_samples, rng);
            pt.mi_bits = est.value_bits;
            pt.mi_std_error = est.std_error;
        }
        const BoundEstimate bound = corrected_loss_monte_carlo(
            pt.constellation, pt.dist, channel, snr, std::max<std::int64_t>(mc_samples / 10, 20000),
            rng, posterior);
        pt.bound = bound.breakdown;
        pt.bound_std_error = bound.std_error_bits;

        result.curve.entries.emplace_back(db, pt.mi_bits);
        result.any_extrapolated = result.any_extrapolated || pt.extrapolated;
        result.points.push_back(std::move(pt));
        ++index;
    }
    result.curve.validate(model.order);
    return result;
}

}  // namespace shaping
