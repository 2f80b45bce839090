#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "egret/rng.hpp"

namespace egret {

// Dense multilayer perceptron with tanh hidden activations and a linear
// output layer. Parameters live in one flat array (per layer: row-major
// weights, then biases) so optimizers, checkpoints, and finite-difference
// probes can address them uniformly.
class Mlp {
public:
    Mlp() = default;

    Mlp(std::vector<int> dims, Rng& rng, double output_gain = 1.0) : dims_(std::move(dims)) {
        if (dims_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
        std::size_t total = 0;
        offsets_.clear();
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            offsets_.push_back(total);
            total += static_cast<std::size_t>(dims_[l + 1]) * static_cast<std::size_t>(dims_[l]) +
                     static_cast<std::size_t>(dims_[l + 1]);
        }
        params_.assign(total, 0.0);
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            const int fan_in = dims_[l], fan_out = dims_[l + 1];
            const bool last = l + 2 == dims_.size();
            // Xavier-uniform hidden layers; the output layer starts small so
            // initial actions stay near the distribution center.
            const double limit = std::sqrt(6.0 / (fan_in + fan_out)) * (last ? output_gain : 1.0);
            double* w = weights(l);
            for (int i = 0; i < fan_out * fan_in; ++i) w[i] = rng.uniform(-limit, limit);
            double* bias = biases(l);
            for (int i = 0; i < fan_out; ++i) bias[i] = 0.0;
        }
    }

    const std::vector<int>& dims() const { return dims_; }
    int input_size() const { return dims_.front(); }
    int output_size() const { return dims_.back(); }
    std::size_t num_layers() const { return dims_.size() - 1; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Activations per layer, kept across forward for the backward pass.
    struct Cache {
        std::vector<std::vector<double>> acts;  // acts[0] = input, acts[L] = output
    };

    void forward(const std::vector<double>& x, std::vector<double>& out) const {
        Cache scratch;
        forward_cached(x, scratch);
        out = scratch.acts.back();
    }

    std::vector<double> forward(const std::vector<double>& x) const {
        std::vector<double> out;
        forward(x, out);
        return out;
    }

    void forward_cached(const std::vector<double>& x, Cache& cache) const {
        if (static_cast<int>(x.size()) != dims_.front())
            throw std::invalid_argument("Mlp::forward: input size mismatch");
        cache.acts.resize(dims_.size());
        cache.acts[0] = x;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            const int fan_in = dims_[l], fan_out = dims_[l + 1];
            const double* w = weights(l);
            const double* bias = biases(l);
            const std::vector<double>& in = cache.acts[l];
            std::vector<double>& out = cache.acts[l + 1];
            out.assign(static_cast<std::size_t>(fan_out), 0.0);
            const bool last = l + 2 == dims_.size();
            for (int r = 0; r < fan_out; ++r) {
                const double* wr = w + static_cast<std::size_t>(r) * fan_in;
                double acc = bias[r];
                for (int c = 0; c < fan_in; ++c) acc += wr[c] * in[static_cast<std::size_t>(c)];
                out[static_cast<std::size_t>(r)] = last ? acc : std::tanh(acc);
            }
        }
    }

    // Accumulates dL/dparams into grad (flat, same layout as params_).
    void backward(const Cache& cache, const std::vector<double>& dout_last,
                  std::vector<double>& grad) const {
        if (grad.size() != params_.size()) throw std::invalid_argument("Mlp::backward: grad size mismatch");
        std::vector<double> dout = dout_last;
        for (std::size_t l = dims_.size() - 1; l-- > 0;) {
            const int fan_in = dims_[l], fan_out = dims_[l + 1];
            const double* w = weights(l);
            double* gw = grad.data() + offsets_[l];
            double* gb = gw + static_cast<std::size_t>(fan_out) * fan_in;
            const std::vector<double>& in = cache.acts[l];
            for (int r = 0; r < fan_out; ++r) {
                const double g = dout[static_cast<std::size_t>(r)];
                double* gwr = gw + static_cast<std::size_t>(r) * fan_in;
                for (int c = 0; c < fan_in; ++c) gwr[c] += g * in[static_cast<std::size_t>(c)];
                gb[r] += g;
            }
            if (l == 0) break;
            std::vector<double> din(static_cast<std::size_t>(fan_in), 0.0);
            for (int r = 0; r < fan_out; ++r) {
                const double g = dout[static_cast<std::size_t>(r)];
                const double* wr = w + static_cast<std::size_t>(r) * fan_in;
                for (int c = 0; c < fan_in; ++c) din[static_cast<std::size_t>(c)] += g * wr[c];
            }
            // tanh' = 1 - tanh^2, using the stored activation
            const std::vector<double>& act = cache.acts[l];
            for (int c = 0; c < fan_in; ++c)
                din[static_cast<std::size_t>(c)] *= 1.0 - act[static_cast<std::size_t>(c)] * act[static_cast<std::size_t>(c)];
            dout = std::move(din);
        }
    }

private:
    double* weights(std::size_t layer) { return params_.data() + offsets_[layer]; }
    const double* weights(std::size_t layer) const { return params_.data() + offsets_[layer]; }
    double* biases(std::size_t layer) {
        return weights(layer) + static_cast<std::size_t>(dims_[layer + 1]) * dims_[layer];
    }
    const double* biases(std::size_t layer) const {
        return weights(layer) + static_cast<std::size_t>(dims_[layer + 1]) * dims_[layer];
    }

    std::vector<int> dims_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

// Adam with bias correction; step() also serves plain gradient descent when
// adaptive moments are disabled.
class GradOptimizer {
public:
    enum class Kind { Adam, Sga };

    GradOptimizer() = default;
    GradOptimizer(Kind kind, std::size_t size) : kind_(kind), m_(size, 0.0), v_(size, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
        if (params.size() != grad.size()) throw std::invalid_argument("GradOptimizer: size mismatch");
        if (kind_ == Kind::Sga) {
            for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
            return;
        }
        ++t_;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
            params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }

private:
    Kind kind_ = Kind::Adam;
    std::vector<double> m_, v_;
    long long t_ = 0;
};

}  // namespace egret
