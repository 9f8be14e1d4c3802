#include "shaping/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "nlohmann/json.hpp"

namespace shaping {

namespace {

using EigenMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using EigenCMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

EigenMap map(Tensor2& t) { return EigenMap(t.data.data(), t.rows, t.cols); }
EigenCMap map(const Tensor2& t) { return EigenCMap(t.data.data(), t.rows, t.cols); }

}  // namespace

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
    for (Parameter* p : params) {
        p->step_count += 1;
        const double t = static_cast<double>(p->step_count);
        const double bc1 = 1.0 - std::pow(cfg.beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.beta2, t);
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad.data[i];
            double& m = p->adam_m.data[i];
            double& v = p->adam_v.data[i];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            p->value.data[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

void zero_grads(std::span<Parameter* const> params) {
    for (Parameter* p : params) p->grad.fill(0.0);
}

Tape::NodeId Tape::push(Tensor2 value, std::function<void(Tape&, NodeId)> pull, Parameter* param) {
    nodes_.push_back(Node{std::move(value), Tensor2{}, param, std::move(pull)});
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::Node& Tape::node(NodeId id) {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
        throw StateError("Tape: node id not on tape");
    return nodes_[static_cast<std::size_t>(id)];
}

const Tape::Node& Tape::node(NodeId id) const {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
        throw StateError("Tape: node id not on tape");
    return nodes_[static_cast<std::size_t>(id)];
}

Tensor2& Tape::grad_mut(NodeId id) { return node(id).grad; }

const Tensor2& Tape::value(NodeId id) const { return node(id).value; }

const Tensor2& Tape::grad(NodeId id) const {
    if (!grads_ready_) throw StateError("Tape: grad read before backward");
    return node(id).grad;
}

Tape::NodeId Tape::constant(Tensor2 v) { return push(std::move(v)); }

Tape::NodeId Tape::leaf(Parameter& p) {
    return push(
        p.value,
        [](Tape& t, NodeId self) {
            Node& n = t.node(self);
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                n.param->grad.data[i] += n.grad.data[i];
        },
        &p);
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor2& va = value(a);
    const Tensor2& vb = value(b);
    if (!va.same_shape(vb)) throw ShapeError("add: shape mismatch");
    Tensor2 out = va;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += vb.data[i];
    return push(std::move(out), [a, b](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        Tensor2& ga = t.grad_mut(a);
        Tensor2& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor2& va = value(a);
    const Tensor2& vb = value(b);
    if (!va.same_shape(vb)) throw ShapeError("sub: shape mismatch");
    Tensor2 out = va;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= vb.data[i];
    return push(std::move(out), [a, b](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        Tensor2& ga = t.grad_mut(a);
        Tensor2& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    });
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
    const Tensor2& va = value(a);
    const Tensor2& vb = value(b);
    if (!va.same_shape(vb)) throw ShapeError("mul: shape mismatch");
    Tensor2 out = va;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= vb.data[i];
    return push(std::move(out), [a, b](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& va = t.value(a);
        const Tensor2& vb = t.value(b);
        Tensor2& ga = t.grad_mut(a);
        Tensor2& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i] * vb.data[i];
            gb.data[i] += g.data[i] * va.data[i];
        }
    });
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor2& va = value(a);
    const Tensor2& vb = value(b);
    if (va.cols != vb.rows) throw ShapeError("matmul: inner dimensions differ");
    Tensor2 out(va.rows, vb.cols);
    map(out).noalias() = map(va) * map(vb);
    return push(std::move(out), [a, b](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& va = t.value(a);
        const Tensor2& vb = t.value(b);
        map(t.grad_mut(a)).noalias() += map(g) * map(vb).transpose();
        map(t.grad_mut(b)).noalias() += map(va).transpose() * map(g);
    });
}

Tape::NodeId Tape::add_rowvec(NodeId a, NodeId row) {
    const Tensor2& va = value(a);
    const Tensor2& vr = value(row);
    if (vr.rows != 1 || vr.cols != va.cols) throw ShapeError("add_rowvec: bad row shape");
    Tensor2 out = va;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += vr.at(0, j);
    return push(std::move(out), [a, row](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        Tensor2& ga = t.grad_mut(a);
        Tensor2& gr = t.grad_mut(row);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) gr.at(0, j) += g.at(i, j);
    });
}

Tape::NodeId Tape::mul_colvec(NodeId a, NodeId col) {
    const Tensor2& va = value(a);
    const Tensor2& vc = value(col);
    if (vc.cols != 1 || vc.rows != va.rows) throw ShapeError("mul_colvec: bad column shape");
    Tensor2 out = va;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) *= vc.at(i, 0);
    return push(std::move(out), [a, col](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& va = t.value(a);
        const Tensor2& vc = t.value(col);
        Tensor2& ga = t.grad_mut(a);
        Tensor2& gc = t.grad_mut(col);
        for (int i = 0; i < g.rows; ++i) {
            double acc = 0.0;
            for (int j = 0; j < g.cols; ++j) {
                ga.at(i, j) += g.at(i, j) * vc.at(i, 0);
                acc += g.at(i, j) * va.at(i, j);
            }
            gc.at(i, 0) += acc;
        }
    });
}

Tape::NodeId Tape::scale(NodeId a, double c) {
    Tensor2 out = value(a);
    for (double& x : out.data) x *= c;
    return push(std::move(out), [a, c](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        Tensor2& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
    });
}

Tape::NodeId Tape::relu(NodeId a) {
    Tensor2 out = value(a);
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
    return push(std::move(out), [a](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& va = t.value(a);
        Tensor2& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (va.data[i] > 0.0) ga.data[i] += g.data[i];
    });
}

Tape::NodeId Tape::softmax_rows(NodeId a) {
    Tensor2 out = softmax_rows_eval(value(a));
    return push(std::move(out), [a](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& p = t.node(self).value;
        Tensor2& ga = t.grad_mut(a);
        for (int i = 0; i < g.rows; ++i) {
            double dot = 0.0;
            for (int j = 0; j < g.cols; ++j) dot += g.at(i, j) * p.at(i, j);
            for (int j = 0; j < g.cols; ++j)
                ga.at(i, j) += p.at(i, j) * (g.at(i, j) - dot);
        }
    });
}

Tape::NodeId Tape::rsqrt(NodeId a) {
    Tensor2 out = value(a);
    for (double& x : out.data) {
        if (x <= 0.0) throw DegenerateInputError("rsqrt: nonpositive input");
        x = 1.0 / std::sqrt(x);
    }
    return push(std::move(out), [a](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& y = t.node(self).value;  // y = x^{-1/2}
        Tensor2& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga.data[i] += -0.5 * y.data[i] * y.data[i] * y.data[i] * g.data[i];
    });
}

Tape::NodeId Tape::row_sumsq(NodeId a) {
    const Tensor2& va = value(a);
    Tensor2 out(va.rows, 1);
    for (int i = 0; i < va.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < va.cols; ++j) acc += va.at(i, j) * va.at(i, j);
        out.at(i, 0) = acc;
    }
    return push(std::move(out), [a](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& va = t.value(a);
        Tensor2& ga = t.grad_mut(a);
        for (int i = 0; i < va.rows; ++i)
            for (int j = 0; j < va.cols; ++j) ga.at(i, j) += 2.0 * va.at(i, j) * g.at(i, 0);
    });
}

Tape::NodeId Tape::sum_all(NodeId a) {
    const Tensor2& va = value(a);
    double acc = 0.0;
    for (double v : va.data) acc += v;
    return push(Tensor2::scalar(acc), [a](Tape& t, NodeId self) {
        const double g = t.node(self).grad.at(0, 0);
        Tensor2& ga = t.grad_mut(a);
        for (double& x : ga.data) x += g;
    });
}

Tape::NodeId Tape::mean_all(NodeId a) {
    const Tensor2& va = value(a);
    if (va.size() == 0) throw DegenerateInputError("mean_all: empty tensor");
    const double inv = 1.0 / static_cast<double>(va.size());
    double acc = 0.0;
    for (double v : va.data) acc += v;
    return push(Tensor2::scalar(acc * inv), [a, inv](Tape& t, NodeId self) {
        const double g = t.node(self).grad.at(0, 0) * inv;
        Tensor2& ga = t.grad_mut(a);
        for (double& x : ga.data) x += g;
    });
}

Tape::NodeId Tape::hstack(NodeId a, NodeId b) {
    const Tensor2& va = value(a);
    const Tensor2& vb = value(b);
    if (va.rows != vb.rows) throw ShapeError("hstack: row count mismatch");
    Tensor2 out(va.rows, va.cols + vb.cols);
    for (int i = 0; i < out.rows; ++i) {
        for (int j = 0; j < va.cols; ++j) out.at(i, j) = va.at(i, j);
        for (int j = 0; j < vb.cols; ++j) out.at(i, va.cols + j) = vb.at(i, j);
    }
    return push(std::move(out), [a, b](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        Tensor2& ga = t.grad_mut(a);
        Tensor2& gb = t.grad_mut(b);
        for (int i = 0; i < g.rows; ++i) {
            for (int j = 0; j < ga.cols; ++j) ga.at(i, j) += g.at(i, j);
            for (int j = 0; j < gb.cols; ++j) gb.at(i, j) += g.at(i, ga.cols + j);
        }
    });
}

Tape::NodeId Tape::entropy_rows(NodeId p) {
    const Tensor2& vp = value(p);
    Tensor2 out(vp.rows, 1);
    for (int i = 0; i < vp.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < vp.cols; ++j) {
            const double q = vp.at(i, j);
            if (q > 0.0) acc -= q * std::log(q);
        }
        out.at(i, 0) = acc;
    }
    return push(std::move(out), [p](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& vp = t.value(p);
        Tensor2& gp = t.grad_mut(p);
        for (int i = 0; i < vp.rows; ++i)
            for (int j = 0; j < vp.cols; ++j) {
                const double q = vp.at(i, j);
                if (q > 0.0) gp.at(i, j) += -(std::log(q) + 1.0) * g.at(i, 0);
            }
    });
}

Tape::NodeId Tape::gather_neglog(NodeId p, const std::vector<int>& idx, double clamp,
                                 std::int64_t* warn_count) {
    const Tensor2& vp = value(p);
    if (static_cast<int>(idx.size()) != vp.rows) throw ShapeError("gather_neglog: index count");
    Tensor2 out(vp.rows, 1);
    for (int i = 0; i < vp.rows; ++i) {
        const int j = idx[i];
        if (j < 0 || j >= vp.cols) throw ShapeError("gather_neglog: index out of range");
        double q = vp.at(i, j);
        if (q <= clamp) {
            q = clamp;
            if (warn_count) ++*warn_count;
        }
        out.at(i, 0) = -std::log(q);
    }
    return push(std::move(out), [p, idx, clamp](Tape& t, NodeId self) {
        const Tensor2& g = t.node(self).grad;
        const Tensor2& vp = t.value(p);
        Tensor2& gp = t.grad_mut(p);
        for (int i = 0; i < vp.rows; ++i) {
            const double q = vp.at(i, idx[i]);
            if (q > clamp) gp.at(i, idx[i]) += -g.at(i, 0) / q;
        }
    });
}

Tape::NodeId Tape::straight_through(const std::vector<int>& hard, NodeId soft, NodeId points) {
    const Tensor2& vs = value(soft);
    const Tensor2& vc = value(points);
    if (static_cast<int>(hard.size()) != vs.rows) throw ShapeError("straight_through: batch size");
    if (vs.cols != vc.rows) throw ShapeError("straight_through: soft width vs point count");
    Tensor2 out(vs.rows, vc.cols);
    for (int i = 0; i < out.rows; ++i) {
        const int k = hard[i];
        if (k < 0 || k >= vc.rows) throw ShapeError("straight_through: index out of range");
        for (int j = 0; j < vc.cols; ++j) out.at(i, j) = vc.at(k, j);
    }
    return push(std::move(out), [soft, points](Tape& t, NodeId self) {
        // backward of out = soft * points
        const Tensor2& g = t.node(self).grad;
        const Tensor2& vs = t.value(soft);
        const Tensor2& vc = t.value(points);
        map(t.grad_mut(soft)).noalias() += map(g) * map(vc).transpose();
        map(t.grad_mut(points)).noalias() += map(vs).transpose() * map(g);
    });
}

Tape::NodeId Tape::complex_scale(NodeId x, const Tensor2& gains) {
    const Tensor2& vx = value(x);
    if (vx.cols != 2 || !gains.same_shape(vx)) throw ShapeError("complex_scale: need (m,2) pair");
    Tensor2 out(vx.rows, 2);
    for (int i = 0; i < vx.rows; ++i) {
        const double gr = gains.at(i, 0), gi = gains.at(i, 1);
        const double xr = vx.at(i, 0), xi = vx.at(i, 1);
        out.at(i, 0) = gr * xr - gi * xi;
        out.at(i, 1) = gr * xi + gi * xr;
    }
    return push(std::move(out), [x, gains](Tape& t, NodeId self) {
        // conjugate multiply
        const Tensor2& g = t.node(self).grad;
        Tensor2& gx = t.grad_mut(x);
        for (int i = 0; i < g.rows; ++i) {
            const double gr = gains.at(i, 0), gi = gains.at(i, 1);
            const double ur = g.at(i, 0), ui = g.at(i, 1);
            gx.at(i, 0) += gr * ur + gi * ui;
            gx.at(i, 1) += gr * ui - gi * ur;
        }
    });
}

void Tape::backward(NodeId loss) {
    if (nodes_.empty()) throw StateError("backward: no forward pass recorded");
    Node& ln = node(loss);
    if (ln.value.rows != 1 || ln.value.cols != 1)
        throw StateError("backward: loss node must be 1x1");
    for (Node& n : nodes_) {
        n.grad = Tensor2(n.value.rows, n.value.cols);
    }
    grads_ready_ = true;
    ln.grad.at(0, 0) = 1.0;
    for (NodeId i = loss; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.pull) n.pull(*this, i);
    }
}

void Tape::clear() {
    nodes_.clear();
    grads_ready_ = false;
}

DenseLayer make_dense(int in, int out, Activation act, RngStream& rng, double init_scale) {
    if (in <= 0 || out <= 0) throw ShapeError("make_dense: nonpositive dimension");
    Tensor2 w(in, out);
    const double limit = init_scale * std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& x : w.data) x = rng.uniform(-limit, limit);
    DenseLayer layer;
    layer.weights = Parameter(std::move(w));
    layer.bias = Parameter(Tensor2(1, out));
    layer.activation = act;
    return layer;
}

Tape::NodeId dense_forward(Tape& tape, DenseLayer& layer, Tape::NodeId input) {
    if (tape.value(input).cols != layer.weights.value.rows)
        throw ShapeError("dense_forward: input width vs weight rows");
    Tape::NodeId z =
        tape.add_rowvec(tape.matmul(input, tape.leaf(layer.weights)), tape.leaf(layer.bias));
    switch (layer.activation) {
        case Activation::relu: return tape.relu(z);
        case Activation::softmax: return tape.softmax_rows(z);
        case Activation::linear: return z;
    }
    return z;
}

Tensor2 dense_eval(const DenseLayer& layer, const Tensor2& input) {
    if (input.cols != layer.weights.value.rows)
        throw ShapeError("dense_eval: input width vs weight rows");
    Tensor2 z(input.rows, layer.weights.value.cols);
    map(z).noalias() = map(input) * map(layer.weights.value);
    for (int i = 0; i < z.rows; ++i)
        for (int j = 0; j < z.cols; ++j) z.at(i, j) += layer.bias.value.at(0, j);
    switch (layer.activation) {
        case Activation::relu:
            for (double& x : z.data) x = x > 0.0 ? x : 0.0;
            return z;
        case Activation::softmax: return softmax_rows_eval(z);
        case Activation::linear: return z;
    }
    return z;
}

Tensor2 softmax_rows_eval(const Tensor2& logits) {
    Tensor2 out = logits;
    for (int i = 0; i < out.rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < out.cols; ++j) mx = std::max(mx, out.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < out.cols; ++j) {
            const double e = std::exp(out.at(i, j) - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (int j = 0; j < out.cols; ++j) out.at(i, j) /= sum;
    }
    return out;
}

std::string save_parameters_json(const NamedParameters& params) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [name, p] : params) {
        doc[name] = {{"rows", p->value.rows},
                     {"cols", p->value.cols},
                     {"values", p->value.data}};
    }
    return doc.dump(2);
}

void load_parameters_json(const std::string& text, const NamedParameters& params) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    for (const auto& [name, p] : params) {
        if (!doc.contains(name)) throw ConfigError("checkpoint: missing parameter " + name);
        const auto& entry = doc.at(name);
        const int rows = entry.at("rows").get<int>();
        const int cols = entry.at("cols").get<int>();
        if (rows != p->value.rows || cols != p->value.cols)
            throw ShapeError("checkpoint: shape mismatch for " + name);
        const auto values = entry.at("values").get<std::vector<double>>();
        if (values.size() != p->value.size())
            throw ShapeError("checkpoint: value count mismatch for " + name);
        p->value.data = values;
    }
}

}  // namespace shaping
