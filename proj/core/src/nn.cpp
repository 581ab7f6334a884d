#include "latent/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latent::nn {

Vec dense_forward(const DenseLayer& layer, const Vec& x) {
    Vec y = matvec(layer.weights, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += layer.bias[i];
    return y;
}

Vec dense_backward(const DenseLayer& layer, const Vec& x, const Vec& dy, DenseLayer* grad) {
    require(dy.size() == layer.out_dim(), "dense_backward: dy length mismatch");
    require(x.size() == layer.in_dim(), "dense_backward: x length mismatch");
    if (grad != nullptr) {
        add_outer(grad->weights, dy, x);
        for (std::size_t i = 0; i < dy.size(); ++i) grad->bias[i] += dy[i];
    }
    return matvec_t(layer.weights, dy);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double bce_loss(double p, double y) {
    const double q = std::clamp(p, kBceEps, 1.0 - kBceEps);
    return -y * std::log(q) - (1.0 - y) * std::log(1.0 - q);
}

double l2_distance(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "l2_distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

Vec l2_norm_grad(const Vec& v, double eps) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    Vec g(v.size(), 0.0);
    if (norm < eps) return g;
    for (std::size_t i = 0; i < v.size(); ++i) g[i] = v[i] / norm;
    return g;
}

AdamState::AdamState(const std::vector<TensorRef>& params, AdamConfig cfg) : config(cfg) {
    first_moment.reserve(params.size());
    second_moment.reserve(params.size());
    for (const auto& p : params) {
        first_moment.emplace_back(p.values.size(), 0.0);
        second_moment.emplace_back(p.values.size(), 0.0);
    }
}

void adam_update(const std::vector<TensorRef>& params, const std::vector<TensorCRef>& grads,
                 AdamState& state) {
    require(params.size() == grads.size() && params.size() == state.first_moment.size(),
            "adam_update: tensor count mismatch");
    for (std::size_t t = 0; t < params.size(); ++t) {
        require(params[t].values.size() == grads[t].values.size() &&
                    params[t].values.size() == state.first_moment[t].size(),
                "adam_update: shape mismatch for tensor " + params[t].name);
        for (std::size_t i = 0; i < grads[t].values.size(); ++i) {
            if (!std::isfinite(grads[t].values[i])) {
                throw std::runtime_error("adam_update: non-finite gradient in tensor '" +
                                         params[t].name + "' at index " + std::to_string(i));
            }
        }
    }
    state.step += 1;
    const auto& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        Vec& m = state.first_moment[t];
        Vec& v = state.second_moment[t];
        auto p = params[t].values;
        auto g = grads[t].values;
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

double grad_check(const std::vector<TensorRef>& params, const std::vector<Vec>& analytic,
                  const std::function<double()>& loss, double step) {
    require(params.size() == analytic.size(), "grad_check: tensor count mismatch");
    double worst = 0.0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        require(params[t].values.size() == analytic[t].size(),
                "grad_check: shape mismatch for tensor " + params[t].name);
        for (std::size_t i = 0; i < params[t].values.size(); ++i) {
            double& x = params[t].values[i];
            const double saved = x;
            x = saved + step;
            const double up = loss();
            x = saved - step;
            const double down = loss();
            x = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[t][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            worst = std::max(worst, std::fabs(a - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace latent::nn
