#include "shaping/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "shaping/check.hpp"
#include "shaping/io.hpp"
#include "shaping/trainer.hpp"

namespace shaping::cli {

namespace fs = std::filesystem;

namespace {

std::string apply_overrides(const std::string& config_json,
                            const std::vector<std::string>& overrides) {
    if (overrides.empty()) return config_json;
    nlohmann::json doc = nlohmann::json::parse(config_json);
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set: expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(value);
        } catch (const nlohmann::json::parse_error&) {
            parsed = value;  // bare strings stay strings
        }
        doc[key] = parsed;
    }
    return doc.dump(2);
}

int classify(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UnsupportedOrderError*>(&e))
        return 2;
    return 1;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
}

void export_eval_point(const fs::path& out_dir, const EvalPoint& pt) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%g", pt.snr_db);
    write_constellation_csv(out_dir / (std::string("constellation_snr") + tag + ".csv"),
                            pt.constellation, pt.dist);
    write_distribution_csv(out_dir / (std::string("distribution_snr") + tag + ".csv"), pt.dist);
}

}  // namespace

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed,
              bool uncorrected_loss) {
    return guarded([&] {
        std::string config_json = apply_overrides(read_text_file(config_path), overrides);
        if (seed) {
            nlohmann::json doc = nlohmann::json::parse(config_json);
            doc["seed"] = *seed;
            config_json = doc.dump(2);
        }
        const TrainConfig cfg = TrainConfig::from_json(config_json);
        for (const std::string& w : cfg.validate()) std::cerr << "warning: " << w << "\n";

        const RunLock lock{fs::path(out_dir)};
        TrainOutcome outcome;
        try {
            outcome = uncorrected_loss ? train_with_uncorrected_loss(cfg) : train(cfg);
        } catch (const TrainingError& e) {
            write_text_file(fs::path(out_dir) / "diagnostic_dump.txt", e.what());
            throw;
        }

        const fs::path dir(out_dir);
        write_text_file(dir / "config_resolved.json", cfg.to_json());
        write_text_file(dir / "train_report.json", outcome.report.to_json());
        write_text_file(dir / "checkpoint.json", outcome.report.final_checkpoint_json);
        write_loss_curve_csv(dir / "loss_curve.csv", outcome.report.loss_curve);
        write_manifest(dir, uncorrected_loss ? "train --uncorrected" : "train", cfg.to_json(),
                       cfg.seed,
                       {"config_resolved.json", "train_report.json", "checkpoint.json",
                        "loss_curve.csv"});
        std::cout << "trained " << to_string(cfg.mode) << " N=" << cfg.order << " for "
                  << cfg.steps_total << " steps in " << outcome.report.total_wall_time_s << " s\n";
        return 0;
    });
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const std::string& snr_grid, const std::string& out_dir, std::int64_t mc_samples,
             std::optional<std::uint64_t> seed) {
    return guarded([&] {
        const TrainConfig cfg = TrainConfig::from_json(read_text_file(config_path));
        cfg.validate();
        const std::vector<double> grid = parse_snr_grid(snr_grid);
        ShapingModel model = ShapingModel::create(cfg);
        load_parameters_json(read_text_file(checkpoint_path), model.named_parameters());

        const RunLock lock{fs::path(out_dir)};
        const ChannelModel channel{cfg.channel, cfg.pilot_count, {}};
        const std::uint64_t eval_seed = seed.value_or(cfg.seed);
        const EvalResult result = evaluate(model, cfg, grid, channel, mc_samples, eval_seed);
        if (result.any_extrapolated)
            std::cerr << "warning: grid extends outside the trained SNR range; "
                         "extrapolated points are flagged in eval_summary.json\n";

        const fs::path dir(out_dir);
        const std::string stem = "learned_" + to_string(cfg.mode) + "_n" + std::to_string(cfg.order);
        write_mi_curve_csv(dir / (stem + ".csv"), result.curve);
        MICurve bound_curve;
        bound_curve.scheme = stem + "_bound";
        nlohmann::json summary = nlohmann::json::array();
        for (const EvalPoint& pt : result.points) {
            bound_curve.entries.emplace_back(pt.snr_db,
                                             std::max(pt.bound.mi_lower_bound_bits, 0.0));
            export_eval_point(dir, pt);
            summary.push_back({{"snr_db", pt.snr_db},
                               {"mi_bits", pt.mi_bits},
                               {"mi_std_error", pt.mi_std_error},
                               {"mi_lower_bound_bits", pt.bound.mi_lower_bound_bits},
                               {"bound_std_error", pt.bound_std_error},
                               {"entropy_bits", distribution_entropy(pt.dist)},
                               {"extrapolated", pt.extrapolated}});
        }
        write_mi_curve_csv(dir / (stem + "_bound.csv"), bound_curve);
        write_text_file(dir / "eval_summary.json", summary.dump(2));
        write_manifest(dir, "eval", cfg.to_json(), eval_seed,
                       {stem + ".csv", stem + "_bound.csv", "eval_summary.json"});
        return 0;
    });
}

int cmd_baseline(const std::string& scheme, int order, const std::string& snr_grid,
                 const std::string& out_dir, std::int64_t mc_samples,
                 std::optional<std::uint64_t> seed, const std::string& channel) {
    return guarded([&] {
        const std::vector<double> grid = parse_snr_grid(snr_grid);
        const std::uint64_t base_seed = seed.value_or(1);
        const ChannelKind kind = channel_kind_from_string(channel);
        const RunLock lock{fs::path(out_dir)};
        const fs::path dir(out_dir);

        MICurve curve;
        std::vector<std::string> outputs;
        if (scheme == "capacity") {
            curve.scheme = "capacity";
            for (double db : grid)
                curve.entries.emplace_back(db, capacity_awgn(SnrPoint::from_db(db)));
            write_mi_curve_csv(dir / "capacity.csv", curve);
            outputs.push_back("capacity.csv");
        } else if (scheme == "rayleigh_bound") {
            curve.scheme = "rayleigh_bound";
            int idx = 0;
            for (double db : grid) {
                RngStream rng(derive_seed(base_seed, 0xB0 + static_cast<std::uint64_t>(idx++)));
                curve.entries.emplace_back(
                    db, capacity_rayleigh_lower_bound(SnrPoint::from_db(db),
                                                      std::max<std::int64_t>(mc_samples, 100000),
                                                      rng));
            }
            write_mi_curve_csv(dir / "rayleigh_bound.csv", curve);
            outputs.push_back("rayleigh_bound.csv");
        } else if (scheme == "qam" || scheme == "mb_qam") {
            const Constellation base = qam(order);
            const std::string stem = scheme + "_n" + std::to_string(order);
            curve.scheme = stem;
            std::string nu_text = "snr,nu\n";
            int idx = 0;
            for (double db : grid) {
                const SnrPoint snr = SnrPoint::from_db(db);
                SymbolDistribution dist = SymbolDistribution::uniform(order);
                Constellation c = base;
                if (scheme == "mb_qam") {
                    const MbSearchResult mb = mb_optimal_nu(qam_grid(order), snr);
                    dist = maxwell_boltzmann_distribution(qam_grid(order), mb.nu);
                    c = normalize(qam_grid(order), dist);
                    nu_text += format_double(db) + "," + format_double(mb.nu) + "\n";
                }
                double mi = 0.0;
                if (kind == ChannelKind::awgn) {
                    mi = mi_oracle_quadrature(c, dist, snr);
                } else {
                    RngStream rng(derive_seed(base_seed, 0xC0 + static_cast<std::uint64_t>(idx)));
                    mi = mi_oracle_monte_carlo(c, dist, ChannelModel{kind, 1, {}}, snr,
                                               std::max<std::int64_t>(mc_samples, 100000), rng)
                             .value_bits;
                }
                curve.entries.emplace_back(db, mi);
                ++idx;
            }
            write_mi_curve_csv(dir / (stem + ".csv"), curve);
            outputs.push_back(stem + ".csv");
            if (scheme == "mb_qam") {
                write_text_file(dir / (stem + "_nu.csv"), nu_text);
                outputs.push_back(stem + "_nu.csv");
            }
        } else {
            throw ConfigError("scheme: unknown baseline '" + scheme +
                              "' (expected qam|mb_qam|capacity|rayleigh_bound)");
        }

        nlohmann::json params{{"scheme", scheme}, {"order", order},   {"snr_grid", snr_grid},
                              {"samples", mc_samples}, {"channel", channel}};
        write_manifest(dir, "baseline", params.dump(2), base_seed, outputs);
        return 0;
    });
}

int cmd_compare(const std::vector<std::string>& curve_files, const std::string& out_dir) {
    return guarded([&] {
        if (curve_files.size() < 2)
            throw ConfigError("compare: need at least two curve files (first is the reference)");
        std::vector<MICurve> curves;
        for (const std::string& f : curve_files) curves.push_back(read_mi_curve_csv(f));

        // common grid: reference points inside every curve's span
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (const MICurve& c : curves) {
            if (c.entries.empty()) throw ConfigError("compare: empty curve " + c.scheme);
            lo = std::max(lo, c.entries.front().first);
            hi = std::min(hi, c.entries.back().first);
        }
        if (lo > hi) throw ConfigError("compare: curves have disjoint SNR grids");
        std::vector<double> grid;
        for (const auto& [snr, mi] : curves[0].entries)
            if (snr >= lo - 1e-9 && snr <= hi + 1e-9) grid.push_back(snr);
        if (grid.empty()) throw ConfigError("compare: no reference grid points in the overlap");

        const auto interp = [](const MICurve& c, double snr) {
            const auto& e = c.entries;
            if (snr <= e.front().first) return e.front().second;
            if (snr >= e.back().first) return e.back().second;
            for (std::size_t i = 1; i < e.size(); ++i) {
                if (snr <= e[i].first) {
                    const double t = (snr - e[i - 1].first) / (e[i].first - e[i - 1].first);
                    return e[i - 1].second + t * (e[i].second - e[i - 1].second);
                }
            }
            return e.back().second;
        };

        bool resampled = false;
        for (const MICurve& c : curves) {
            if (c.entries.size() != curves[0].entries.size()) resampled = true;
            for (std::size_t i = 0; i < std::min(c.entries.size(), grid.size()); ++i)
                if (std::abs(c.entries[i].first - grid[i]) > 1e-9) resampled = true;
        }
        if (resampled)
            std::cerr << "warning: SNR grids differ; non-reference curves resampled by linear "
                         "interpolation\n";

        const RunLock lock{fs::path(out_dir)};
        const fs::path dir(out_dir);
        std::string wide = "snr";
        for (const MICurve& c : curves) wide += "," + c.scheme;
        wide += "\n";
        std::string gaps = "snr";
        for (std::size_t k = 1; k < curves.size(); ++k)
            gaps += "," + curves[k].scheme + "_minus_" + curves[0].scheme;
        gaps += "\n";
        for (double snr : grid) {
            wide += format_double(snr);
            gaps += format_double(snr);
            const double ref = interp(curves[0], snr);
            for (std::size_t k = 0; k < curves.size(); ++k) {
                const double v = interp(curves[k], snr);
                wide += "," + format_double(v);
                if (k > 0) gaps += "," + format_double(v - ref);
            }
            wide += "\n";
            gaps += "\n";
        }
        write_text_file(dir / "comparison.csv", wide);
        write_text_file(dir / "gaps.csv", gaps);

        nlohmann::json params{{"files", curve_files}, {"resampled", resampled}};
        write_manifest(dir, "compare", params.dump(2), 0, {"comparison.csv", "gaps.csv"});
        return 0;
    });
}

int cmd_export_constellation(const std::string& config_path, const std::string& checkpoint_path,
                             const std::string& scheme, int order, const std::string& snr_list,
                             const std::string& out_dir) {
    return guarded([&] {
        const std::vector<double> snrs = parse_snr_grid(snr_list);
        const RunLock lock{fs::path(out_dir)};
        const fs::path dir(out_dir);
        std::vector<std::string> outputs;
        std::string config_json;

        if (!checkpoint_path.empty()) {
            if (config_path.empty())
                throw ConfigError("config: required together with --checkpoint");
            const TrainConfig cfg = TrainConfig::from_json(read_text_file(config_path));
            cfg.validate();
            ShapingModel model = ShapingModel::create(cfg);
            load_parameters_json(read_text_file(checkpoint_path), model.named_parameters());
            for (double db : snrs) {
                EvalPoint pt;
                pt.snr_db = db;
                pt.dist = model.distribution_at(db);
                pt.constellation = normalize(model.mod_points.value, pt.dist);
                export_eval_point(dir, pt);
            }
            config_json = cfg.to_json();
        } else if (scheme == "qam" || scheme == "mb_qam") {
            for (double db : snrs) {
                EvalPoint pt;
                pt.snr_db = db;
                if (scheme == "qam") {
                    pt.dist = SymbolDistribution::uniform(order);
                    pt.constellation = qam(order);
                } else {
                    const MbSearchResult mb = mb_optimal_nu(qam_grid(order), SnrPoint::from_db(db));
                    pt.dist = maxwell_boltzmann_distribution(qam_grid(order), mb.nu);
                    pt.constellation = normalize(qam_grid(order), pt.dist);
                }
                export_eval_point(dir, pt);
            }
            nlohmann::json params{{"scheme", scheme}, {"order", order}};
            config_json = params.dump(2);
        } else {
            throw ConfigError("export-constellation: pass --checkpoint/--config or a scheme");
        }
        for (double db : snrs) {
            char tag[32];
            std::snprintf(tag, sizeof(tag), "%g", db);
            outputs.push_back(std::string("constellation_snr") + tag + ".csv");
        }
        write_manifest(dir, "export-constellation", config_json, 0, outputs);
        return 0;
    });
}

int cmd_check() {
    return guarded([&] {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<CheckResult> results = run_fast_checks();
        bool all_pass = true;
        std::printf("%-44s %-6s %-12s %-12s\n", "check", "status", "metric", "threshold");
        for (const CheckResult& r : results) {
            all_pass = all_pass && r.pass;
            std::printf("%-44s %-6s %-12.3e %-12.3e %s\n", r.name.c_str(),
                        r.pass ? "PASS" : "FAIL", r.metric, r.threshold, r.detail.c_str());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%zu checks in %.1f s\n", results.size(), elapsed);
        return all_pass ? 0 : 1;
    });
}

int run(int argc, const char* const* argv) {
    CLI::App app{"learned constellation shaping: training, evaluation, baselines"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", snr_grid = "-2:40:2", checkpoint_path, scheme,
                channel = "awgn", snr_list;
    std::vector<std::string> overrides, compare_files;
    std::optional<std::uint64_t> seed;
    std::int64_t mc_samples = 200000;
    int order = 16;
    bool uncorrected = false;

    CLI::App* train = app.add_subcommand("train", "train a shaping model from a JSON config");
    train->add_option("--config", config_path, "JSON run config")->required();
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--seed", seed, "override the config seed");
    train->add_option("--set", overrides, "override config keys, key=value");
    train->add_flag("--uncorrected", uncorrected,
                    "negative control: minimize L instead of L-H(S)");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on an SNR grid");
    eval->add_option("--config", config_path, "resolved config from training")->required();
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint.json from training")->required();
    eval->add_option("--snr-grid", snr_grid, "lo:hi:step or comma list");
    eval->add_option("--out", out_dir, "output directory");
    eval->add_option("--samples", mc_samples, "Monte Carlo samples per grid point");
    eval->add_option("--seed", seed, "evaluation seed");

    CLI::App* baseline = app.add_subcommand("baseline", "reference curves: qam, mb_qam, capacity, "
                                                        "rayleigh_bound");
    baseline->add_option("scheme", scheme, "qam|mb_qam|capacity|rayleigh_bound")->required();
    baseline->add_option("--order", order, "modulation order N");
    baseline->add_option("--snr-grid", snr_grid, "lo:hi:step or comma list");
    baseline->add_option("--out", out_dir, "output directory");
    baseline->add_option("--samples", mc_samples, "Monte Carlo samples (rayleigh curves)");
    baseline->add_option("--seed", seed, "Monte Carlo seed");
    baseline->add_option("--channel", channel, "awgn|rayleigh_lmmse (qam baseline)");

    CLI::App* compare = app.add_subcommand("compare", "tabulate curves against the first file");
    compare->add_option("files", compare_files, "MI curve CSV files; first is the reference")
        ->required();
    compare->add_option("--out", out_dir, "output directory");

    CLI::App* exportc = app.add_subcommand("export-constellation",
                                           "write re,im,prob CSVs for a checkpoint or baseline");
    exportc->add_option("--config", config_path, "resolved config from training");
    exportc->add_option("--checkpoint", checkpoint_path, "checkpoint.json");
    exportc->add_option("--scheme", scheme, "qam|mb_qam (instead of a checkpoint)");
    exportc->add_option("--order", order, "modulation order for scheme exports");
    exportc->add_option("--snr", snr_list, "comma list of SNRs in dB")->required();
    exportc->add_option("--out", out_dir, "output directory");

    CLI::App* check = app.add_subcommand("check", "run the fast invariant suite");
    (void)check;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (train->parsed()) return cmd_train(config_path, out_dir, overrides, seed, uncorrected);
    if (eval->parsed())
        return cmd_eval(config_path, checkpoint_path, snr_grid, out_dir, mc_samples, seed);
    if (baseline->parsed())
        return cmd_baseline(scheme, order, snr_grid, out_dir, mc_samples, seed, channel);
    if (compare->parsed()) return cmd_compare(compare_files, out_dir);
    if (exportc->parsed())
        return cmd_export_constellation(config_path, checkpoint_path, scheme, order, snr_list,
                                        out_dir);
    if (check->parsed()) return cmd_check();
    return 2;
}

}  // namespace shaping::cli
