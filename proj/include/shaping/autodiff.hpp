#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shaping/rng.hpp"
#include "shaping/tensor.hpp"

namespace shaping {

// Trainable tensor with its gradient accumulator and Adam state.
struct Parameter {
    Tensor2 value;
    Tensor2 grad;
    Tensor2 adam_m;
    Tensor2 adam_v;
    std::int64_t step_count = 0;

    Parameter() = default;
    explicit Parameter(Tensor2 v)
        : value(std::move(v)),
          grad(value.rows, value.cols),
          adam_m(value.rows, value.cols),
          adam_v(value.rows, value.cols) {}
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Standard Adam with bias correction. Gradients are left untouched; the
// caller zeroes them between steps.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);
void zero_grads(std::span<Parameter* const> params);

// Reverse-mode tape over Tensor2 values. The graph is rebuilt every step;
// ops append nodes, backward() sweeps them in reverse and accumulates leaf
// gradients into the owning Parameters.
class Tape {
public:
    using NodeId = std::int32_t;

    NodeId constant(Tensor2 v);
    NodeId leaf(Parameter& p);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);             // elementwise
    NodeId matmul(NodeId a, NodeId b);          // (m,k)x(k,n)
    NodeId add_rowvec(NodeId a, NodeId row);    // broadcast 1xn over rows
    NodeId mul_colvec(NodeId a, NodeId col);    // broadcast mx1 over columns
    NodeId scale(NodeId a, double c);
    NodeId relu(NodeId a);
    NodeId softmax_rows(NodeId a);              // max-subtracted, rows sum to 1
    NodeId rsqrt(NodeId a);                     // elementwise 1/sqrt(x)
    NodeId row_sumsq(NodeId a);                 // (m,n) -> (m,1), sum of squares per row
    NodeId sum_all(NodeId a);                   // -> 1x1
    NodeId mean_all(NodeId a);                  // -> 1x1
    NodeId hstack(NodeId a, NodeId b);          // column concat

    // -sum_j p_ij ln p_ij per row, with 0 ln 0 := 0. (m,n) -> (m,1), nats.
    NodeId entropy_rows(NodeId p);

    // -ln(max(p[i, idx[i]], clamp)) per row -> (m,1). Entries at or below the
    // clamp contribute zero gradient; each such event bumps *warn_count.
    NodeId gather_neglog(NodeId p, const std::vector<int>& idx, double clamp = 1e-30,
                         std::int64_t* warn_count = nullptr);

    // Row selection with the straight-through estimator: forward copies row
    // hard[i] of `points` bitwise, backward behaves as soft * points for both
    // arguments.
    NodeId straight_through(const std::vector<int>& hard, NodeId soft, NodeId points);

    // Per-row complex multiply of (m,2) x by constant gains (m,2).
    NodeId complex_scale(NodeId x, const Tensor2& gains);

    const Tensor2& value(NodeId id) const;
    const Tensor2& grad(NodeId id) const;

    // Reverse sweep from a 1x1 loss node. Throws StateError if no forward
    // graph has been recorded or `loss` is not on the tape.
    void backward(NodeId loss);

    void clear();
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor2 value;
        Tensor2 grad;
        Parameter* param = nullptr;
        std::function<void(Tape&, NodeId)> pull;
    };

    NodeId push(Tensor2 value, std::function<void(Tape&, NodeId)> pull = nullptr,
                Parameter* param = nullptr);
    Node& node(NodeId id);
    const Node& node(NodeId id) const;
    Tensor2& grad_mut(NodeId id);

    std::vector<Node> nodes_;
    bool grads_ready_ = false;
};

enum class Activation { relu, linear, softmax };

// One dense layer; weights are (in,out), bias (1,out).
struct DenseLayer {
    Parameter weights;
    Parameter bias;
    Activation activation = Activation::linear;
};

// Glorot-uniform weights scaled by init_scale, zero bias.
DenseLayer make_dense(int in, int out, Activation act, RngStream& rng,
                      double init_scale = 1.0);

// Records the layer on the tape; gradients reach weights and bias.
Tape::NodeId dense_forward(Tape& tape, DenseLayer& layer, Tape::NodeId input);

// Pure forward pass without a tape, for evaluation.
Tensor2 dense_eval(const DenseLayer& layer, const Tensor2& input);

// Plain (non-tape) softmax with per-row max subtraction.
Tensor2 softmax_rows_eval(const Tensor2& logits);

// Parameter checkpoints: one JSON document {name: {rows, cols, values[]}}
// with full 64-bit round-trip precision.
using NamedParameters = std::vector<std::pair<std::string, Parameter*>>;
std::string save_parameters_json(const NamedParameters& params);
void load_parameters_json(const std::string& text, const NamedParameters& params);

}  // namespace shaping
