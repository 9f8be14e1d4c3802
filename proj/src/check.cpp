#include "shaping/check.hpp"

#include <algorithm>
#include <cmath>

#include "shaping/autodiff.hpp"
#include "shaping/channel.hpp"
#include "shaping/demodulator.hpp"
#include "shaping/modulator.hpp"
#include "shaping/objectives.hpp"
#include "shaping/sampler.hpp"

namespace shaping {

double max_rel_error_fd(const std::function<double(const std::vector<double>&)>& f,
                        std::vector<double> x, const std::vector<double>& analytic_grad,
                        double h) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        const double fd = (fp - fm) / (2.0 * h);
        const double g = analytic_grad[i];
        const double denom = std::max({std::abs(fd), std::abs(g), 1e-3});
        worst = std::max(worst, std::abs(fd - g) / denom);
    }
    return worst;
}

namespace {

// FD check of a tape-built scalar loss against backward(), with the graph a
// function of one packed parameter tensor.
double fd_vs_tape(int rows, int cols, RngStream& rng,
                  const std::function<Tape::NodeId(Tape&, Parameter&)>& build) {
    std::vector<double> x0(static_cast<std::size_t>(rows) * cols);
    for (double& v : x0) v = rng.uniform(-1.0, 1.0);

    const auto value_at = [&](const std::vector<double>& x) {
        Parameter p{Tensor2(rows, cols)};
        p.value.data = x;
        Tape tape;
        return tape.value(build(tape, p)).at(0, 0);
    };

    Parameter p{Tensor2(rows, cols)};
    p.value.data = x0;
    Tape tape;
    const Tape::NodeId loss = build(tape, p);
    tape.backward(loss);
    return max_rel_error_fd(value_at, x0, p.grad.data);
}

CheckResult gradient_checks(RngStream& rng) {
    double worst = 0.0;
    std::string worst_name = "none";
    const auto track = [&](const char* name, double err) {
        if (err > worst) {
            worst = err;
            worst_name = name;
        }
    };

    // dense relu layer, loss = mean of outputs
    {
        const Tensor2 w_in = Tensor2::from_rows({{0.3, -0.2, 0.9}, {0.7, 0.4, -0.5}});
        track("dense_relu", fd_vs_tape(3, 2, rng, [&](Tape& t, Parameter& p) {
                  Tape::NodeId in = t.constant(w_in);
                  Tape::NodeId w = t.leaf(p);
                  return t.mean_all(t.relu(t.matmul(in, w)));
              }));
    }
    // softmax rows, weighted readout
    {
        Tensor2 weights(3, 5);
        for (double& v : weights.data) v = rng.uniform(-1.0, 1.0);
        track("softmax", fd_vs_tape(3, 5, rng, [&](Tape& t, Parameter& p) {
                  return t.mean_all(t.mul(t.softmax_rows(t.leaf(p)), t.constant(weights)));
              }));
    }
    // Gumbel-Softmax soft path w.r.t. logits
    {
        Tensor2 gumbels(4, 6);
        for (double& v : gumbels.data) v = rng.gumbel();
        Tensor2 readout(4, 6);
        for (double& v : readout.data) v = rng.uniform(-1.0, 1.0);
        const double tau = 1.3;
        track("gumbel_soft", fd_vs_tape(4, 6, rng, [&](Tape& t, Parameter& p) {
                  std::vector<int> hard;
                  Tape::NodeId soft = gumbel_soft_forward(t, t.leaf(p), gumbels, tau, hard);
                  return t.mean_all(t.mul(soft, t.constant(readout)));
              }));
    }
    // energy normalization w.r.t. points
    {
        Tensor2 probs(3, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) probs.at(i, j) = 0.25;
        track("normalization_points", fd_vs_tape(4, 2, rng, [&](Tape& t, Parameter& p) {
                  Tape::NodeId pts = t.leaf(p);
                  Tape::NodeId scale = normalization_scale(t, t.constant(probs), pts);
                  return t.mean_all(scale);
              }));
    }
    // corrected loss (cross entropy minus source entropy) w.r.t. logits
    {
        const std::vector<int> labels{1, 0, 2};
        track("corrected_loss", fd_vs_tape(3, 3, rng, [&](Tape& t, Parameter& p) {
                  Tape::NodeId probs = t.softmax_rows(t.leaf(p));
                  Tape::NodeId ce = cross_entropy_node(t, probs, labels);
                  return t.sub(ce, mean_entropy_node(t, probs));
              }));
    }

    CheckResult r;
    r.name = "gradients_vs_finite_differences";
    r.metric = worst;
    r.threshold = 1e-4;
    r.pass = worst < r.threshold;
    r.detail = "worst op: " + worst_name;
    return r;
}

CheckResult sampler_tv_check(std::uint64_t seed) {
    RngStream rng(derive_seed(seed, 2));
    const std::vector<double> logits{0.9, -0.4, 0.2, 1.4, -1.0, 0.0, 0.5, -0.2};
    const SymbolDistribution dist = logits_to_distribution(logits);
    const int draws = 100000;
    std::vector<std::int64_t> counts(logits.size(), 0);
    for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(sample_gumbel_max(dist, rng))];
    double tv = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s)
        tv += std::abs(static_cast<double>(counts[s]) / draws - dist.probs[s]);
    tv *= 0.5;
    CheckResult r;
    r.name = "gumbel_max_total_variation_1e5";
    r.metric = tv;
    r.threshold = 0.01;
    r.pass = tv < r.threshold;
    return r;
}

CheckResult oracle_cross_check(std::uint64_t seed) {
    RngStream rng(derive_seed(seed, 3));
    const Constellation qpsk = qam(4);
    const SymbolDistribution uniform = SymbolDistribution::uniform(4);
    const SnrPoint snr = SnrPoint::from_db(5.0);
    const double quad = mi_oracle_quadrature(qpsk, uniform, snr);
    const MonteCarloEstimate mc =
        mi_oracle_monte_carlo(qpsk, uniform, ChannelModel{ChannelKind::awgn, 1, {}}, snr, 200000, rng);
    CheckResult r;
    r.name = "mi_quadrature_vs_monte_carlo_qpsk_5db";
    r.metric = std::abs(quad - mc.value_bits);
    r.threshold = std::max(4.0 * mc.std_error, 0.01);
    r.pass = r.metric < r.threshold;
    r.detail = "quadrature " + std::to_string(quad) + ", mc " + std::to_string(mc.value_bits);
    return r;
}

CheckResult decomposition_residual_check(std::uint64_t seed) {
    RngStream init(derive_seed(seed, 4));
    RngStream mc(derive_seed(seed, 5));
    const Constellation c = qam(4);
    const SymbolDistribution dist = logits_to_distribution({0.3, -0.1, 0.4, -0.6});
    DemodNetwork demod = DemodNetwork::create(4, init);
    const DecompositionResult res = decomposition_check(
        normalize(c.points, dist), dist, SnrPoint::from_db(5.0), 100000, mc, posterior_fn(demod));
    CheckResult r;
    r.name = "cross_entropy_decomposition_residual";
    r.metric = res.residual_bits;
    r.threshold = 3.0 * res.combined_std_error + 0.002;
    r.pass = r.metric < r.threshold;
    return r;
}

CheckResult noise_calibration_check(std::uint64_t seed) {
    RngStream rng(derive_seed(seed, 6));
    const SnrPoint snr = SnrPoint::from_db(10.0);
    const int draws = 200000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto y = awgn_transmit({0.0, 0.0}, snr, rng);
        acc += y.first * y.first + y.second * y.second;
    }
    const double measured = acc / draws;
    CheckResult r;
    r.name = "awgn_noise_energy_10db";
    r.metric = std::abs(measured / snr.noise_variance() - 1.0);
    r.threshold = 0.015;
    r.pass = r.metric < r.threshold;
    return r;
}

}  // namespace

std::vector<CheckResult> run_fast_checks(std::uint64_t seed) {
    RngStream grad_rng(derive_seed(seed, 1));
    std::vector<CheckResult> results;
    results.push_back(gradient_checks(grad_rng));
    results.push_back(sampler_tv_check(seed));
    results.push_back(oracle_cross_check(seed));
    results.push_back(decomposition_residual_check(seed));
    results.push_back(noise_calibration_check(seed));
    return results;
}

}  // namespace shaping
