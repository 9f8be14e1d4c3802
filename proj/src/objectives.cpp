#include "shaping/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shaping/quadrature.hpp"

namespace shaping {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kLogPi = 1.1447298858494002;  // ln(pi)

// ln sum_k p_k exp(arg_k) with max subtraction; entries more than 46 nats
// below the peak are dropped.
double log_mixture(const std::vector<double>& log_terms) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double t : log_terms) mx = std::max(mx, t);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double t : log_terms)
        if (t - mx > -46.0) acc += std::exp(t - mx);
    return mx + std::log(acc);
}

struct RunningMean {
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t n = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double std_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

}  // namespace

LossBreakdown LossBreakdown::from_bits(double ce_bits, double entropy_bits) {
    LossBreakdown b;
    b.cross_entropy_bits = ce_bits;
    b.source_entropy_bits = entropy_bits;
    b.corrected_loss_bits = ce_bits - entropy_bits;
    b.mi_lower_bound_bits = -b.corrected_loss_bits;
    return b;
}

void MICurve::validate(int order) const {
    const double cap = std::log2(static_cast<double>(order)) + 1e-9;
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& [snr, mi] : entries) {
        if (snr <= prev) throw DegenerateInputError("MICurve: snr values must strictly increase");
        if (mi < 0.0 || mi > cap)
            throw DegenerateInputError("MICurve: mi " + std::to_string(mi) + " outside [0, log2 N]");
        prev = snr;
    }
}

double cross_entropy_loss(const std::vector<int>& labels,
                          const std::vector<SymbolDistribution>& posteriors,
                          std::int64_t* clamp_warnings) {
    if (labels.empty() || labels.size() != posteriors.size())
        throw DegenerateInputError("cross_entropy_loss: empty or mismatched batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double p = posteriors[i].probs.at(static_cast<std::size_t>(labels[i]));
        if (p <= 1e-30) {
            p = 1e-30;
            if (clamp_warnings) ++*clamp_warnings;
        }
        acc -= std::log2(p);
    }
    return acc / static_cast<double>(labels.size());
}

LossBreakdown corrected_loss(const std::vector<int>& labels,
                             const std::vector<SymbolDistribution>& posteriors,
                             const SymbolDistribution& dist, std::int64_t* clamp_warnings) {
    const double ce = cross_entropy_loss(labels, posteriors, clamp_warnings);
    return LossBreakdown::from_bits(ce, distribution_entropy(dist));
}

Tape::NodeId cross_entropy_node(Tape& tape, Tape::NodeId posteriors,
                                const std::vector<int>& labels, std::int64_t* clamp_warnings) {
    return tape.mean_all(tape.gather_neglog(posteriors, labels, 1e-30, clamp_warnings));
}

Tape::NodeId mean_entropy_node(Tape& tape, Tape::NodeId probs) {
    return tape.mean_all(tape.entropy_rows(probs));
}

double mi_oracle_quadrature(const Constellation& c, const SymbolDistribution& dist,
                            const SnrPoint& snr, int nodes_per_axis) {
    if (nodes_per_axis < 40)
        throw DegenerateInputError("mi_oracle_quadrature: need at least 40 nodes per axis");
    if (dist.order() != c.order()) throw ShapeError("mi_oracle_quadrature: order mismatch");
    if (c.order() > 1024) throw UnsupportedOrderError("mi_oracle_quadrature: N > 1024");

    const double var = snr.noise_variance();
    if (var == 0.0) return distribution_entropy(dist);  // noiseless discrete channel

    const GaussHermite gh = gauss_hermite(nodes_per_axis);
    const double sigma = std::sqrt(var);
    const int n = c.order();

    std::vector<double> log_p(n);
    for (int s = 0; s < n; ++s) log_p[s] = std::log(dist.probs[s]);

    const double inv_pi = 1.0 / 3.14159265358979323846;
    double mi_nats = 0.0;
    std::vector<double> log_terms(n);
    for (int s = 0; s < n; ++s) {
        if (dist.probs[s] <= 1e-18) continue;
        const double xs_re = c.points.at(s, 0), xs_im = c.points.at(s, 1);
        double inner = 0.0;
        for (int i = 0; i < nodes_per_axis; ++i) {
            const double y_re = xs_re + sigma * gh.nodes[i];
            for (int j = 0; j < nodes_per_axis; ++j) {
                const double y_im = xs_im + sigma * gh.nodes[j];
                double peak = -std::numeric_limits<double>::infinity();
                for (int k = 0; k < n; ++k) {
                    const double dr = y_re - c.points.at(k, 0);
                    const double di = y_im - c.points.at(k, 1);
                    log_terms[k] = log_p[k] - (dr * dr + di * di) / var;
                    peak = std::max(peak, log_terms[k]);
                }
                double mix = 0.0;
                for (int k = 0; k < n; ++k)
                    if (log_terms[k] - peak > -46.0) mix += std::exp(log_terms[k] - peak);
                const double log_mix = peak + std::log(mix);
                const double log_cond =
                    -(gh.nodes[i] * gh.nodes[i] + gh.nodes[j] * gh.nodes[j]);
                inner += gh.weights[i] * gh.weights[j] * (log_cond - log_mix);
            }
        }
        mi_nats += dist.probs[s] * inner * inv_pi;
    }
    return mi_nats / kLn2;
}

int sample_categorical(const SymbolDistribution& dist, RngStream& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    const int n = dist.order();
    for (int s = 0; s < n; ++s) {
        acc += dist.probs[s];
        if (u < acc) return s;
    }
    return n - 1;
}

MonteCarloEstimate mi_oracle_monte_carlo(const Constellation& c, const SymbolDistribution& dist,
                                         const ChannelModel& channel, const SnrPoint& snr,
                                         std::int64_t samples, RngStream& rng) {
    if (samples < 100000)
        throw DegenerateInputError("mi_oracle_monte_carlo: need at least 1e5 samples");
    if (dist.order() != c.order()) throw ShapeError("mi_oracle_monte_carlo: order mismatch");
    const int n = c.order();
    const double var = snr.noise_variance();

    std::vector<double> log_p(n);
    for (int s = 0; s < n; ++s) log_p[s] = std::log(dist.probs[s]);
    std::vector<double> energy(n);
    for (int s = 0; s < n; ++s) {
        const double re = c.points.at(s, 0), im = c.points.at(s, 1);
        energy[s] = re * re + im * im;
    }
    const double sigma_e2 = channel.kind == ChannelKind::rayleigh_lmmse
                                ? estimation_error_variance(snr, channel)
                                : 0.0;

    RunningMean info;
    std::vector<double> log_terms(n);
    for (std::int64_t m = 0; m < samples; ++m) {
        const int s = sample_categorical(dist, rng);
        const double xs_re = c.points.at(s, 0), xs_im = c.points.at(s, 1);
        double y_re = 0.0, y_im = 0.0;
        double hhat2 = 1.0;
        if (channel.kind == ChannelKind::awgn) {
            const auto y = awgn_transmit({xs_re, xs_im}, snr, rng, channel.hooks);
            y_re = y.first;
            y_im = y.second;
        } else {
            const RayleighOutput out = rayleigh_lmmse_transmit({xs_re, xs_im}, snr, rng, channel);
            y_re = out.y_eq.first;
            y_im = out.y_eq.second;
            hhat2 = out.draw.hhat_re * out.draw.hhat_re + out.draw.hhat_im * out.draw.hhat_im;
        }
        // y | x_k (and hhat for rayleigh) is complex Gaussian with mean x_k
        // and total variance v_k
        double log_cond_s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double v_k = channel.kind == ChannelKind::awgn
                                   ? var
                                   : (sigma_e2 * energy[k] + var) / hhat2;
            const double dr = y_re - c.points.at(k, 0);
            const double di = y_im - c.points.at(k, 1);
            const double log_density = -kLogPi - std::log(v_k) - (dr * dr + di * di) / v_k;
            log_terms[k] = log_p[k] + log_density;
            if (k == s) log_cond_s = log_density;
        }
        info.add((log_cond_s - log_mixture(log_terms)) / kLn2);
    }
    return {info.mean, info.std_error()};
}

PosteriorFn posterior_fn(const DemodNetwork& net) {
    return [&net](const Tensor2& inputs) { return net.eval(inputs); };
}

PosteriorFn posterior_fn(const Constellation& c, const SymbolDistribution& dist,
                         const SnrPoint& snr) {
    return [&c, &dist, snr](const Tensor2& inputs) {
        Tensor2 out(inputs.rows, c.order());
        for (int i = 0; i < inputs.rows; ++i) {
            const SymbolDistribution post =
                exact_posterior_oracle(c, dist, {inputs.at(i, 0), inputs.at(i, 1)}, snr);
            for (int j = 0; j < c.order(); ++j) out.at(i, j) = post.probs[j];
        }
        return out;
    };
}

BoundEstimate corrected_loss_monte_carlo(const Constellation& c, const SymbolDistribution& dist,
                                         const ChannelModel& channel, const SnrPoint& snr,
                                         std::int64_t samples, RngStream& rng,
                                         const PosteriorFn& posterior) {
    if (samples <= 0) throw DegenerateInputError("corrected_loss_monte_carlo: empty batch");
    const int chunk = 8192;
    RunningMean ce;
    std::int64_t done = 0;
    while (done < samples) {
        const int m = static_cast<int>(std::min<std::int64_t>(chunk, samples - done));
        Tensor2 inputs(m, 3);
        std::vector<int> labels(m);
        for (int i = 0; i < m; ++i) {
            const int s = sample_categorical(dist, rng);
            labels[static_cast<std::size_t>(i)] = s;
            std::pair<double, double> x{c.points.at(s, 0), c.points.at(s, 1)};
            std::pair<double, double> y;
            if (channel.kind == ChannelKind::awgn)
                y = awgn_transmit(x, snr, rng, channel.hooks);
            else
                y = rayleigh_lmmse_transmit(x, snr, rng, channel).y_eq;
            inputs.at(i, 0) = y.first;
            inputs.at(i, 1) = y.second;
            inputs.at(i, 2) = snr.snr_db;
        }
        const Tensor2 post = posterior(inputs);
        for (int i = 0; i < m; ++i) {
            double p = post.at(i, labels[static_cast<std::size_t>(i)]);
            if (p <= 1e-30) p = 1e-30;
            ce.add(-std::log2(p));
        }
        done += m;
    }
    BoundEstimate est;
    est.breakdown = LossBreakdown::from_bits(ce.mean, distribution_entropy(dist));
    est.std_error_bits = ce.std_error();
    return est;
}

MonteCarloEstimate mean_posterior_kl(const Constellation& c, const SymbolDistribution& dist,
                                     const SnrPoint& snr, std::int64_t samples, RngStream& rng,
                                     const PosteriorFn& posterior) {
    const int chunk = 8192;
    RunningMean kl;
    std::int64_t done = 0;
    const int n = c.order();
    while (done < samples) {
        const int m = static_cast<int>(std::min<std::int64_t>(chunk, samples - done));
        Tensor2 inputs(m, 3);
        for (int i = 0; i < m; ++i) {
            const int s = sample_categorical(dist, rng);
            const auto y = awgn_transmit({c.points.at(s, 0), c.points.at(s, 1)}, snr, rng);
            inputs.at(i, 0) = y.first;
            inputs.at(i, 1) = y.second;
            inputs.at(i, 2) = snr.snr_db;
        }
        const Tensor2 approx = posterior(inputs);
        for (int i = 0; i < m; ++i) {
            const SymbolDistribution exact =
                exact_posterior_oracle(c, dist, {inputs.at(i, 0), inputs.at(i, 1)}, snr);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p = exact.probs[j];
                if (p <= 0.0) continue;
                const double q = std::max(approx.at(i, j), 1e-30);
                acc += p * std::log2(p / q);
            }
            kl.add(acc);
        }
        done += m;
    }
    return {kl.mean, kl.std_error()};
}

DecompositionResult decomposition_check(const Constellation& c, const SymbolDistribution& dist,
                                        const SnrPoint& snr, std::int64_t samples, RngStream& rng,
                                        const PosteriorFn& posterior) {
    const ChannelModel awgn{ChannelKind::awgn, 1, {}};
    const BoundEstimate loss = corrected_loss_monte_carlo(c, dist, awgn, snr, samples, rng, posterior);
    const MonteCarloEstimate kl = mean_posterior_kl(c, dist, snr, samples, rng, posterior);
    DecompositionResult r;
    r.loss_bits = loss.breakdown.cross_entropy_bits;
    r.entropy_bits = distribution_entropy(dist);
    r.mi_bits = mi_oracle_quadrature(c, dist, snr);
    r.kl_bits = kl.value_bits;
    r.residual_bits = std::abs(r.loss_bits - (r.entropy_bits - r.mi_bits + r.kl_bits));
    r.combined_std_error = std::sqrt(loss.std_error_bits * loss.std_error_bits +
                                     kl.std_error * kl.std_error);
    return r;
}

namespace {

int inverse_cdf(const SymbolDistribution& dist, double u) {
    double acc = 0.0;
    const int n = dist.order();
    for (int s = 0; s < n; ++s) {
        acc += dist.probs[s];
        if (u < acc) return s;
    }
    return n - 1;
}

// per-sample information density for one scheme given a shared fading draw
double info_sample(const Constellation& c, const std::vector<double>& log_p,
                   const std::vector<double>& energy, double sigma_e2, double var, double hhat2,
                   int s, double y_re, double y_im, std::vector<double>& log_terms) {
    double log_cond_s = 0.0;
    const int n = c.order();
    for (int k = 0; k < n; ++k) {
        const double v_k = (sigma_e2 * energy[k] + var) / hhat2;
        const double dr = y_re - c.points.at(k, 0);
        const double di = y_im - c.points.at(k, 1);
        const double log_density = -kLogPi - std::log(v_k) - (dr * dr + di * di) / v_k;
        log_terms[k] = log_p[k] + log_density;
        if (k == s) log_cond_s = log_density;
    }
    return (log_cond_s - log_mixture(log_terms)) / kLn2;
}

}  // namespace

MonteCarloEstimate mi_difference_paired(const Constellation& c_a, const SymbolDistribution& d_a,
                                        const Constellation& c_b, const SymbolDistribution& d_b,
                                        const ChannelModel& channel, const SnrPoint& snr,
                                        std::int64_t samples, RngStream& rng) {
    if (samples < 100000)
        throw DegenerateInputError("mi_difference_paired: need at least 1e5 samples");
    if (channel.kind != ChannelKind::rayleigh_lmmse)
        throw DegenerateInputError("mi_difference_paired: rayleigh channel only");
    if (c_a.order() != d_a.order() || c_b.order() != d_b.order())
        throw ShapeError("mi_difference_paired: order mismatch");

    const double var = snr.noise_variance();
    const double sigma_e2 = estimation_error_variance(snr, channel);
    const auto precompute = [](const Constellation& c, const SymbolDistribution& d,
                               std::vector<double>& log_p, std::vector<double>& energy) {
        log_p.resize(static_cast<std::size_t>(c.order()));
        energy.resize(static_cast<std::size_t>(c.order()));
        for (int s = 0; s < c.order(); ++s) {
            log_p[static_cast<std::size_t>(s)] = std::log(d.probs[static_cast<std::size_t>(s)]);
            const double re = c.points.at(s, 0), im = c.points.at(s, 1);
            energy[static_cast<std::size_t>(s)] = re * re + im * im;
        }
    };
    std::vector<double> log_pa, ea, log_pb, eb;
    precompute(c_a, d_a, log_pa, ea);
    precompute(c_b, d_b, log_pb, eb);

    RunningMean diff;
    std::vector<double> terms_a(static_cast<std::size_t>(c_a.order()));
    std::vector<double> terms_b(static_cast<std::size_t>(c_b.order()));
    for (std::int64_t m = 0; m < samples; ++m) {
        const RayleighDraw d = draw_rayleigh(snr, rng, channel);
        const double hhat2 = d.hhat_re * d.hhat_re + d.hhat_im * d.hhat_im;
        const double u = rng.uniform();
        // equalized noise from the shared draw, common to both schemes
        const double en_re = d.eq_noise_re;
        const double en_im = d.eq_noise_im;

        const auto receive = [&](const Constellation& c, int s) {
            const double xr = c.points.at(s, 0), xi = c.points.at(s, 1);
            return std::pair{d.gain_re * xr - d.gain_im * xi + en_re,
                             d.gain_re * xi + d.gain_im * xr + en_im};
        };
        const int sa = inverse_cdf(d_a, u);
        const int sb = inverse_cdf(d_b, u);
        const auto [ya_re, ya_im] = receive(c_a, sa);
        const auto [yb_re, yb_im] = receive(c_b, sb);
        const double ia = info_sample(c_a, log_pa, ea, sigma_e2, var, hhat2, sa, ya_re, ya_im,
                                      terms_a);
        const double ib = info_sample(c_b, log_pb, eb, sigma_e2, var, hhat2, sb, yb_re, yb_im,
                                      terms_b);
        diff.add(ia - ib);
    }
    return {diff.mean, diff.std_error()};
}

MbSearchResult mb_optimal_nu(const Tensor2& base_points, const SnrPoint& snr, double nu_max,
                             double tol) {
    const auto mi_at = [&](double nu) {
        const SymbolDistribution d = maxwell_boltzmann_distribution(base_points, nu);
        return mi_oracle_quadrature(normalize(base_points, d), d, snr);
    };
    const double gr = 0.6180339887498949;  // golden ratio conjugate
    double a = 0.0, b = nu_max;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = mi_at(x1), f2 = mi_at(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = mi_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = mi_at(x1);
        }
    }
    MbSearchResult res;
    res.nu = 0.5 * (a + b);
    res.mi_bits = mi_at(res.nu);
    return res;
}

}  // namespace shaping
