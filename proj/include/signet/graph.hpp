#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "signet/error.hpp"
#include "signet/ops.hpp"
#include "signet/tensor.hpp"

namespace signet {

// A trainable value: tensor plus accumulated gradient of identical shape.
template <typename T>
struct ParameterT {
    std::string name;
    TensorT<T> value;
    TensorT<T> grad;

    ParameterT() = default;
    ParameterT(std::string n, TensorT<T> v) : name(std::move(n)), value(std::move(v)), grad(value.shape) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), T(0)); }
};

using Parameter = ParameterT<float>;

// Per-channel running statistics owned by a batch-norm layer.
template <typename T>
struct RunningStatsT {
    TensorT<T> mean;
    TensorT<T> var;

    RunningStatsT() = default;
    explicit RunningStatsT(int channels) : mean({channels}), var(TensorT<T>::full({channels}, T(1))) {}
};

enum class BnMode { train, eval };

// Recorded forward computation. Every operation appends a node holding the
// produced value, a pure re-execution closure, and a backward rule; reverse
// iteration yields exact gradients of a scalar loss for every parameter leaf.
template <typename T>
class GraphT {
public:
    struct Value {
        int id = -1;
    };

    struct OpInfo {
        std::string kind;
        int stride = 0;
        int pad = 0;
    };

    Value input(TensorT<T> v, std::string name = "input") {
        return add_leaf(std::move(v), std::move(name), nullptr);
    }

    Value param(ParameterT<T>& p) {
        if (!p.value.same_shape(p.grad))
            throw Error::numeric("param '" + p.name + "': gradient shape " + shape_str(p.grad.shape) +
                                 " does not match value shape " + shape_str(p.value.shape));
        return add_leaf(p.value, "param:" + p.name, &p);
    }

    Value conv2d(Value x, Value k, int stride, int pad) {
        auto cols = std::make_shared<TensorT<T>>();
        TensorT<T> out = ops::conv2d(value(x), value(k), stride, pad, cols.get());
        Node node;
        node.info = {"conv2d", stride, pad};
        node.inputs = {x.id, k.id};
        node.value = std::move(out);
        node.recompute = [stride, pad](const std::vector<const TensorT<T>*>& in) {
            return ops::conv2d(*in[0], *in[1], stride, pad);
        };
        node.backprop = [stride, pad, cols](GraphT& g, const Node& self) {
            TensorT<T> gx, gk;
            ops::conv2d_backward(g.node_value(self.inputs[0]), g.node_value(self.inputs[1]), stride, pad, *cols,
                                 self.grad, gx, gk);
            g.accumulate_grad(self.inputs[0], gx);
            g.accumulate_grad(self.inputs[1], gk);
        };
        return push(std::move(node));
    }

    Value conv_transpose2d(Value x, Value k, int stride, int pad) {
        TensorT<T> out = ops::conv_transpose2d(value(x), value(k), stride, pad);
        Node node;
        node.info = {"conv_transpose2d", stride, pad};
        node.inputs = {x.id, k.id};
        node.value = std::move(out);
        node.recompute = [stride, pad](const std::vector<const TensorT<T>*>& in) {
            return ops::conv_transpose2d(*in[0], *in[1], stride, pad);
        };
        node.backprop = [stride, pad](GraphT& g, const Node& self) {
            TensorT<T> gx, gk;
            ops::conv_transpose2d_backward(g.node_value(self.inputs[0]), g.node_value(self.inputs[1]), stride, pad,
                                           self.grad, gx, gk);
            g.accumulate_grad(self.inputs[0], gx);
            g.accumulate_grad(self.inputs[1], gk);
        };
        return push(std::move(node));
    }

    Value batch_norm2d(Value x, Value gamma, Value beta, RunningStatsT<T>* stats, BnMode mode, T momentum, T eps) {
        auto cache = std::make_shared<ops::BnCache<T>>();
        const bool train = mode == BnMode::train;
        TensorT<T> out = ops::batch_norm2d(value(x), value(gamma), value(beta), stats ? &stats->mean : nullptr,
                                           stats ? &stats->var : nullptr, train, momentum, eps, cache.get());
        // The replay closure reuses the statistics captured at record time and
        // never touches the layer's running state.
        TensorT<T> frozen_mean = stats ? stats->mean : TensorT<T>({value(x).dim(3)});
        TensorT<T> frozen_var = stats ? stats->var : TensorT<T>::full({value(x).dim(3)}, T(1));
        Node node;
        node.info = {"batch_norm2d", 0, 0};
        node.inputs = {x.id, gamma.id, beta.id};
        node.value = std::move(out);
        node.recompute = [train, momentum, eps, frozen_mean, frozen_var](const std::vector<const TensorT<T>*>& in) {
            TensorT<T> rm = frozen_mean;
            TensorT<T> rv = frozen_var;
            return ops::batch_norm2d(*in[0], *in[1], *in[2], &rm, &rv, train, momentum, eps,
                                     static_cast<ops::BnCache<T>*>(nullptr));
        };
        node.backprop = [cache](GraphT& g, const Node& self) {
            TensorT<T> gx, ggamma, gbeta;
            ops::batch_norm2d_backward(g.node_value(self.inputs[1]), *cache, self.grad, gx, ggamma, gbeta);
            g.accumulate_grad(self.inputs[0], gx);
            g.accumulate_grad(self.inputs[1], ggamma);
            g.accumulate_grad(self.inputs[2], gbeta);
        };
        return push(std::move(node));
    }

    Value activation(Value x, ops::Act kind, T alpha = T(0.2)) {
        TensorT<T> out = ops::activation(value(x), kind, alpha);
        Node node;
        node.info = {ops::act_name(kind), 0, 0};
        node.inputs = {x.id};
        node.value = std::move(out);
        node.recompute = [kind, alpha](const std::vector<const TensorT<T>*>& in) {
            return ops::activation(*in[0], kind, alpha);
        };
        node.backprop = [kind, alpha](GraphT& g, const Node& self) {
            g.accumulate_grad(self.inputs[0],
                              ops::activation_backward(g.node_value(self.inputs[0]), self.value, kind, alpha, self.grad));
        };
        return push(std::move(node));
    }

    Value dense(Value x, Value w, Value b) {
        TensorT<T> out = ops::dense(value(x), value(w), value(b));
        Node node;
        node.info = {"dense", 0, 0};
        node.inputs = {x.id, w.id, b.id};
        node.value = std::move(out);
        node.recompute = [](const std::vector<const TensorT<T>*>& in) { return ops::dense(*in[0], *in[1], *in[2]); };
        node.backprop = [](GraphT& g, const Node& self) {
            TensorT<T> gx, gw, gb;
            ops::dense_backward(g.node_value(self.inputs[0]), g.node_value(self.inputs[1]), self.grad, gx, gw, gb);
            g.accumulate_grad(self.inputs[0], gx);
            g.accumulate_grad(self.inputs[1], gw);
            g.accumulate_grad(self.inputs[2], gb);
        };
        return push(std::move(node));
    }

    Value bias_channels(Value x, Value b) {
        TensorT<T> out = ops::bias_channels(value(x), value(b));
        Node node;
        node.info = {"bias_channels", 0, 0};
        node.inputs = {x.id, b.id};
        node.value = std::move(out);
        node.recompute = [](const std::vector<const TensorT<T>*>& in) { return ops::bias_channels(*in[0], *in[1]); };
        node.backprop = [](GraphT& g, const Node& self) {
            g.accumulate_grad(self.inputs[0], self.grad);
            g.accumulate_grad(self.inputs[1],
                              ops::bias_channels_backward_bias(self.grad, g.node_value(self.inputs[1]).dim(0)));
        };
        return push(std::move(node));
    }

    Value max_pool2d(Value x, int window) {
        auto argmax = std::make_shared<std::vector<std::int64_t>>();
        TensorT<T> out = ops::max_pool2d(value(x), window, argmax.get());
        Node node;
        node.info = {"max_pool2d", window, 0};
        node.inputs = {x.id};
        node.value = std::move(out);
        node.recompute = [window](const std::vector<const TensorT<T>*>& in) { return ops::max_pool2d(*in[0], window); };
        node.backprop = [argmax](GraphT& g, const Node& self) {
            g.accumulate_grad(self.inputs[0],
                              ops::max_pool2d_backward(g.node_value(self.inputs[0]).shape, *argmax, self.grad));
        };
        return push(std::move(node));
    }

    Value reshape(Value x, std::vector<int> dims) {
        TensorT<T> out = value(x).reshaped(dims);
        Node node;
        node.info = {"reshape", 0, 0};
        node.inputs = {x.id};
        node.value = std::move(out);
        node.recompute = [dims](const std::vector<const TensorT<T>*>& in) { return in[0]->reshaped(dims); };
        node.backprop = [](GraphT& g, const Node& self) {
            g.accumulate_grad(self.inputs[0], self.grad.reshaped(g.node_value(self.inputs[0]).shape));
        };
        return push(std::move(node));
    }

    // Concatenates two row-major (N x F) feature matrices along features.
    Value concat_cols(Value a, Value b) {
        const TensorT<T>& va = value(a);
        const TensorT<T>& vb = value(b);
        if (va.rank() != 2 || vb.rank() != 2 || va.dim(0) != vb.dim(0))
            throw Error::numeric("concat_cols: incompatible shapes " + shape_str(va.shape) + " and " + shape_str(vb.shape));
        const int n = va.dim(0), fa = va.dim(1), fb = vb.dim(1);
        TensorT<T> out({n, fa + fb});
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < fa; ++j) out.at(i, j) = va.at(i, j);
            for (int j = 0; j < fb; ++j) out.at(i, fa + j) = vb.at(i, j);
        }
        Node node;
        node.info = {"concat_cols", 0, 0};
        node.inputs = {a.id, b.id};
        node.value = std::move(out);
        node.recompute = [n, fa, fb](const std::vector<const TensorT<T>*>& in) {
            TensorT<T> o({n, fa + fb});
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < fa; ++j) o.at(i, j) = in[0]->at(i, j);
                for (int j = 0; j < fb; ++j) o.at(i, fa + j) = in[1]->at(i, j);
            }
            return o;
        };
        node.backprop = [n, fa, fb](GraphT& g, const Node& self) {
            TensorT<T> ga({n, fa});
            TensorT<T> gb({n, fb});
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < fa; ++j) ga.at(i, j) = self.grad.at(i, j);
                for (int j = 0; j < fb; ++j) gb.at(i, j) = self.grad.at(i, fa + j);
            }
            g.accumulate_grad(self.inputs[0], ga);
            g.accumulate_grad(self.inputs[1], gb);
        };
        return push(std::move(node));
    }

    Value softmax_cross_entropy(Value logits, std::vector<int> labels) {
        auto probs = std::make_shared<TensorT<T>>();
        const T loss = ops::softmax_cross_entropy(value(logits), labels, probs.get());
        Node node;
        node.info = {"softmax_cross_entropy", 0, 0};
        node.inputs = {logits.id};
        node.value = TensorT<T>::scalar(loss);
        node.recompute = [labels](const std::vector<const TensorT<T>*>& in) {
            return TensorT<T>::scalar(ops::softmax_cross_entropy(*in[0], labels));
        };
        node.backprop = [probs, labels](GraphT& g, const Node& self) {
            g.accumulate_grad(self.inputs[0],
                              ops::softmax_cross_entropy_backward(*probs, labels, self.grad.data[0]));
        };
        return push(std::move(node));
    }

    Value binary_cross_entropy(Value predictions, Value targets) {
        const T loss = ops::binary_cross_entropy(value(predictions), value(targets));
        Node node;
        node.info = {"binary_cross_entropy", 0, 0};
        node.inputs = {predictions.id, targets.id};
        node.value = TensorT<T>::scalar(loss);
        node.recompute = [](const std::vector<const TensorT<T>*>& in) {
            return TensorT<T>::scalar(ops::binary_cross_entropy(*in[0], *in[1]));
        };
        node.backprop = [](GraphT& g, const Node& self) {
            TensorT<T> gp, gt;
            ops::binary_cross_entropy_backward(g.node_value(self.inputs[0]), g.node_value(self.inputs[1]),
                                               self.grad.data[0], gp, gt);
            g.accumulate_grad(self.inputs[0], gp);
            g.accumulate_grad(self.inputs[1], gt);
        };
        return push(std::move(node));
    }

    Value elastic_net(const std::vector<Value>& params, T lambda1, T lambda2) {
        std::vector<const TensorT<T>*> ptrs;
        std::vector<int> ids;
        for (Value v : params) {
            ptrs.push_back(&value(v));
            ids.push_back(v.id);
        }
        const T penalty = ops::elastic_net_penalty(ptrs, lambda1, lambda2);
        Node node;
        node.info = {"elastic_net", 0, 0};
        node.inputs = ids;
        node.value = TensorT<T>::scalar(penalty);
        node.recompute = [lambda1, lambda2](const std::vector<const TensorT<T>*>& in) {
            return TensorT<T>::scalar(ops::elastic_net_penalty(in, lambda1, lambda2));
        };
        node.backprop = [lambda1, lambda2](GraphT& g, const Node& self) {
            for (int id : self.inputs)
                g.accumulate_grad(id, ops::elastic_net_gradient(g.node_value(id), lambda1, lambda2, self.grad.data[0]));
        };
        return push(std::move(node));
    }

    // Scalar projection sum(weights * x); scalarizes any tensor so its
    // gradient can be requested.
    Value weighted_sum(Value x, TensorT<T> weights) {
        const TensorT<T>& vx = value(x);
        if (!vx.same_shape(weights))
            throw Error::numeric("weighted_sum: shape " + shape_str(vx.shape) + " vs " + shape_str(weights.shape));
        auto w = std::make_shared<TensorT<T>>(std::move(weights));
        T s = T(0);
        for (std::int64_t i = 0; i < vx.numel(); ++i) s += vx.data[static_cast<std::size_t>(i)] * w->data[static_cast<std::size_t>(i)];
        Node node;
        node.info = {"weighted_sum", 0, 0};
        node.inputs = {x.id};
        node.value = TensorT<T>::scalar(s);
        node.recompute = [w](const std::vector<const TensorT<T>*>& in) {
            T acc = T(0);
            for (std::int64_t i = 0; i < in[0]->numel(); ++i)
                acc += in[0]->data[static_cast<std::size_t>(i)] * w->data[static_cast<std::size_t>(i)];
            return TensorT<T>::scalar(acc);
        };
        node.backprop = [w](GraphT& g, const Node& self) {
            TensorT<T> gx(w->shape);
            for (std::int64_t i = 0; i < gx.numel(); ++i)
                gx.data[static_cast<std::size_t>(i)] = self.grad.data[0] * w->data[static_cast<std::size_t>(i)];
            g.accumulate_grad(self.inputs[0], gx);
        };
        return push(std::move(node));
    }

    Value add(Value a, Value b) {
        const TensorT<T>& va = value(a);
        const TensorT<T>& vb = value(b);
        if (!va.same_shape(vb))
            throw Error::numeric("add: shape " + shape_str(va.shape) + " vs " + shape_str(vb.shape));
        TensorT<T> out(va.shape);
        for (std::int64_t i = 0; i < va.numel(); ++i)
            out.data[static_cast<std::size_t>(i)] = va.data[static_cast<std::size_t>(i)] + vb.data[static_cast<std::size_t>(i)];
        Node node;
        node.info = {"add", 0, 0};
        node.inputs = {a.id, b.id};
        node.value = std::move(out);
        node.recompute = [](const std::vector<const TensorT<T>*>& in) {
            TensorT<T> o(in[0]->shape);
            for (std::int64_t i = 0; i < o.numel(); ++i)
                o.data[static_cast<std::size_t>(i)] = in[0]->data[static_cast<std::size_t>(i)] + in[1]->data[static_cast<std::size_t>(i)];
            return o;
        };
        node.backprop = [](GraphT& g, const Node& self) {
            g.accumulate_grad(self.inputs[0], self.grad);
            g.accumulate_grad(self.inputs[1], self.grad);
        };
        return push(std::move(node));
    }

    const TensorT<T>& value(Value v) const { return node_at(v.id).value; }

    // Gradient of the loss w.r.t. this node; valid after backward().
    const TensorT<T>& grad(Value v) const { return node_at(v.id).grad; }

    // Reverse-mode sweep from a scalar loss. Gradients accumulate into every
    // bound ParameterT<T>::grad reachable from the loss.
    void backward(Value loss) {
        const Node& loss_node = node_at(loss.id);
        if (!loss_node.value.is_scalar())
            throw Error::numeric("backward: loss must be a scalar, got shape " + shape_str(loss_node.value.shape));
        if (backward_done_)
            throw Error::numeric("backward: graph already differentiated");
        backward_done_ = true;

        std::vector<char> reachable(nodes_.size(), 0);
        std::vector<int> stack = {loss.id};
        reachable[static_cast<std::size_t>(loss.id)] = 1;
        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            for (int in : nodes_[static_cast<std::size_t>(id)].inputs) {
                if (!reachable[static_cast<std::size_t>(in)]) {
                    reachable[static_cast<std::size_t>(in)] = 1;
                    stack.push_back(in);
                }
            }
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (reachable[i]) nodes_[i].grad = TensorT<T>(nodes_[i].value.shape);
        nodes_[static_cast<std::size_t>(loss.id)].grad.data[0] = T(1);

        for (int id = loss.id; id >= 0; --id) {
            Node& node = nodes_[static_cast<std::size_t>(id)];
            if (reachable[static_cast<std::size_t>(id)] && node.backprop) node.backprop(*this, node);
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (reachable[i] && nodes_[i].bound) ops::accumulate(nodes_[i].bound->grad, nodes_[i].grad);
    }

    // Recomputes every non-leaf node from the leaves and bit-compares against
    // the recorded values.
    bool replay_matches() const {
        std::vector<TensorT<T>> fresh(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& node = nodes_[i];
            if (!node.recompute) {
                fresh[i] = node.value;
                continue;
            }
            std::vector<const TensorT<T>*> in;
            in.reserve(node.inputs.size());
            for (int id : node.inputs) in.push_back(&fresh[static_cast<std::size_t>(id)]);
            fresh[i] = node.recompute(in);
            if (!bit_equal(fresh[i], node.value)) return false;
        }
        return true;
    }

    // Op kinds in recording order, leaves excluded; architecture audits walk this.
    std::vector<OpInfo> recorded_ops() const {
        std::vector<OpInfo> ops;
        for (const Node& n : nodes_)
            if (n.recompute) ops.push_back(n.info);
        return ops;
    }

    int size() const { return static_cast<int>(nodes_.size()); }

private:
    struct Node {
        OpInfo info;
        std::vector<int> inputs;
        TensorT<T> value;
        TensorT<T> grad;
        std::function<TensorT<T>(const std::vector<const TensorT<T>*>&)> recompute;
        std::function<void(GraphT&, const Node&)> backprop;
        ParameterT<T>* bound = nullptr;
    };

    Value add_leaf(TensorT<T> v, std::string name, ParameterT<T>* bound) {
        Node node;
        node.info = {std::move(name), 0, 0};
        node.value = std::move(v);
        node.bound = bound;
        return push(std::move(node));
    }

    Value push(Node node) {
        nodes_.push_back(std::move(node));
        return Value{static_cast<int>(nodes_.size()) - 1};
    }

    const Node& node_at(int id) const {
        if (id < 0 || id >= static_cast<int>(nodes_.size()))
            throw Error::numeric("graph: invalid node id " + std::to_string(id));
        return nodes_[static_cast<std::size_t>(id)];
    }

    const TensorT<T>& node_value(int id) const { return node_at(id).value; }

    void accumulate_grad(int id, const TensorT<T>& g) {
        ops::accumulate(nodes_[static_cast<std::size_t>(id)].grad, g);
    }

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

using Graph = GraphT<float>;

}  // namespace signet
