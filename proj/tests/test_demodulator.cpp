#include "doctest.h"

#include <cmath>

#include "shaping/check.hpp"
#include "shaping/demodulator.hpp"
#include "shaping/objectives.hpp"

using namespace shaping;

TEST_CASE("fresh demodulator outputs near-uniform posteriors") {
    RngStream rng(51);
    for (int order : {4, 16, 64}) {
        DemodNetwork net = DemodNetwork::create(order, rng);
        for (double snr : {0.0, 10.0, 40.0}) {
            const SymbolDistribution post = net.posterior({0.7, -0.7}, snr);
            post.validate();
            for (double p : post.probs) CHECK(std::abs(p - 1.0 / order) < 0.05);
        }
    }
}

TEST_CASE("posterior is deterministic") {
    RngStream rng(52);
    const DemodNetwork net = DemodNetwork::create(16, rng);
    const SymbolDistribution a = net.posterior({0.3, 0.4}, 12.0);
    const SymbolDistribution b = net.posterior({0.3, 0.4}, 12.0);
    for (int i = 0; i < 16; ++i) CHECK(a.probs[i] == b.probs[i]);
}

TEST_CASE("posterior rows are valid distributions for random inputs") {
    RngStream rng(53);
    DemodNetwork net = DemodNetwork::create(8, rng);
    for (Parameter* p : net.parameters())
        for (double& v : p->value.data) v += 0.3 * rng.normal();
    Tensor2 in(64, 3);
    for (int i = 0; i < 64; ++i) {
        in.at(i, 0) = rng.uniform(-3.0, 3.0);
        in.at(i, 1) = rng.uniform(-3.0, 3.0);
        in.at(i, 2) = rng.uniform(-2.0, 40.0);
    }
    const Tensor2 out = net.eval(in);
    for (int i = 0; i < out.rows; ++i) {
        double sum = 0.0;
        for (int j = 0; j < out.cols; ++j) {
            CHECK(out.at(i, j) >= 0.0);
            sum += out.at(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("demodulator gradients match finite differences on weights and inputs") {
    RngStream rng(54);
    DemodNetwork net = DemodNetwork::create(4, rng);
    Tensor2 in(3, 3);
    for (int i = 0; i < 3; ++i) {
        in.at(i, 0) = rng.uniform(-1.0, 1.0);
        in.at(i, 1) = rng.uniform(-1.0, 1.0);
        in.at(i, 2) = rng.uniform(0.0, 20.0);
    }
    Tensor2 readout(3, 4);
    for (double& v : readout.data) v = rng.uniform(-1.0, 1.0);

    // w.r.t. the final layer weights
    {
        std::vector<double> w0 = net.layer3.weights.value.data;
        const auto value_at = [&](const std::vector<double>& w) {
            net.layer3.weights.value.data = w;
            Tape t;
            const Tape::NodeId out = net.forward(t, t.constant(in));
            const double v = t.value(t.mean_all(t.mul(out, t.constant(readout)))).at(0, 0);
            return v;
        };
        Tape t;
        net.layer3.weights.value.data = w0;
        zero_grads(std::vector<Parameter*>{&net.layer3.weights});
        const Tape::NodeId out = net.forward(t, t.constant(in));
        t.backward(t.mean_all(t.mul(out, t.constant(readout))));
        CHECK(max_rel_error_fd(value_at, w0, net.layer3.weights.grad.data) < 1e-4);
        net.layer3.weights.value.data = w0;
    }
    // w.r.t. the received sample y (first two input columns)
    {
        std::vector<double> y0{in.at(0, 0), in.at(0, 1)};
        const auto value_at = [&](const std::vector<double>& y) {
            Tensor2 local = in;
            local.at(0, 0) = y[0];
            local.at(0, 1) = y[1];
            Tape t;
            const Tape::NodeId out = net.forward(t, t.constant(local));
            return t.value(t.mean_all(t.mul(out, t.constant(readout)))).at(0, 0);
        };
        Tape t;
        Parameter yp{Tensor2(1, 2)};
        yp.value.data = y0;
        Tensor2 snr_col(1, 1);
        snr_col.at(0, 0) = in.at(0, 2);
        // single-row graph: hstack(y, snr) through the network
        const Tape::NodeId row = t.hstack(t.leaf(yp), t.constant(snr_col));
        Tensor2 row_readout(1, 4);
        for (int j = 0; j < 4; ++j) row_readout.at(0, j) = readout.at(0, j);
        const Tape::NodeId out = net.forward(t, row);
        t.backward(t.mean_all(t.mul(out, t.constant(row_readout))));
        const auto value_row = [&](const std::vector<double>& y) {
            Tensor2 local(1, 3);
            local.at(0, 0) = y[0];
            local.at(0, 1) = y[1];
            local.at(0, 2) = in.at(0, 2);
            const Tensor2 p = net.eval(local);
            double acc = 0.0;
            for (int j = 0; j < 4; ++j) acc += p.at(0, j) * row_readout.at(0, j);
            return acc / 4.0;
        };
        (void)value_at;
        CHECK(max_rel_error_fd(value_row, y0, yp.grad.data) < 1e-4);
    }
}

TEST_CASE("trained demodulator is confident on constellation points at 10 dB") {
    RngStream rng(55);
    const Constellation c = qam(4);
    const SymbolDistribution u = SymbolDistribution::uniform(4);
    const SnrPoint snr = SnrPoint::from_db(10.0);
    DemodNetwork net = DemodNetwork::create(4, rng);
    const std::vector<Parameter*> params = net.parameters();
    AdamConfig adam;
    for (int step = 0; step < 1200; ++step) {
        if (step == 700) adam.learning_rate = 1e-4;
        const int batch = 256;
        Tensor2 in(batch, 3);
        std::vector<int> labels(batch);
        for (int b = 0; b < batch; ++b) {
            const int s = sample_categorical(u, rng);
            labels[static_cast<std::size_t>(b)] = s;
            const auto y = awgn_transmit({c.points.at(s, 0), c.points.at(s, 1)}, snr, rng);
            in.at(b, 0) = y.first;
            in.at(b, 1) = y.second;
            in.at(b, 2) = snr.snr_db;
        }
        Tape tape;
        tape.backward(cross_entropy_node(tape, net.forward(tape, tape.constant(in)), labels));
        adam_step(params, adam);
        zero_grads(params);
    }
    for (int s = 0; s < 4; ++s) {
        const std::pair<double, double> y{c.points.at(s, 0), c.points.at(s, 1)};
        const SymbolDistribution post = net.posterior(y, snr.snr_db);
        CHECK(post.probs[static_cast<std::size_t>(s)] > 0.9);
        // the exact posterior there puts 0.9997 on the symbol
        const SymbolDistribution exact = exact_posterior_oracle(c, u, y, snr);
        CHECK(exact.probs[static_cast<std::size_t>(s)] ==
              doctest::Approx(0.9997).epsilon(2e-4));
    }
}

TEST_CASE("exact posterior oracle: symmetric split between equidistant points") {
    Tensor2 pts = Tensor2::from_rows({{1.0, 0.0}, {-1.0, 0.0}, {10.0, 10.0}, {-10.0, 10.0}});
    Constellation c;
    c.points = pts;
    const SymbolDistribution u = SymbolDistribution::uniform(4);
    const SymbolDistribution post = exact_posterior_oracle(c, u, {0.0, 0.0}, SnrPoint::from_db(3.0));
    CHECK(post.probs[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(post.probs[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(post.probs[2] < 1e-12);
    CHECK(post.probs[3] < 1e-12);
}

TEST_CASE("exact posterior oracle: noiseless limit is one-hot at the nearest point") {
    const Constellation c = qam(4);
    const SymbolDistribution u = SymbolDistribution::uniform(4);
    const SymbolDistribution post =
        exact_posterior_oracle(c, u, {0.68, 0.73}, SnrPoint::noiseless());
    CHECK(post.probs[0] == 1.0);  // nearest to (+,+)
    for (int i = 1; i < 4; ++i) CHECK(post.probs[i] == 0.0);
}

TEST_CASE("exact posterior oracle weights by the prior") {
    Tensor2 pts = Tensor2::from_rows({{1.0, 0.0}, {-1.0, 0.0}});
    Constellation c;
    c.points = pts;
    SymbolDistribution prior;
    prior.probs = {0.9, 0.1};
    const SymbolDistribution post =
        exact_posterior_oracle(c, prior, {0.0, 0.0}, SnrPoint::from_db(0.0));
    // equidistant, so the posterior equals the prior
    CHECK(post.probs[0] == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(post.probs[1] == doctest::Approx(0.1).epsilon(1e-9));
}
