#include <doctest.h>

#include <cmath>

#include "latent/nn.hpp"
#include "latent/rng.hpp"

using namespace latent;
using namespace latent::nn;

TEST_CASE("dense_forward zero weights returns bias") {
    DenseLayer layer(3, 4);
    layer.bias = {1.0, -2.0, 0.5};
    const Vec y = dense_forward(layer, {9.0, 8.0, 7.0, 6.0});
    CHECK(y == Vec{1.0, -2.0, 0.5});
}

TEST_CASE("dense_forward identity weights passes input through") {
    DenseLayer layer(3, 3);
    for (std::size_t i = 0; i < 3; ++i) layer.weights(i, i) = 1.0;
    const Vec x{0.25, -1.5, 3.0};
    CHECK(dense_forward(layer, x) == x);
}

TEST_CASE("dense_forward hand-computed 2x2 product") {
    DenseLayer layer(2, 2);
    layer.weights(0, 0) = 1.0;
    layer.weights(0, 1) = 2.0;
    layer.weights(1, 0) = 3.0;
    layer.weights(1, 1) = 4.0;
    const Vec y = dense_forward(layer, {1.0, 1.0});
    CHECK(y[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("dense_forward rejects shape mismatch") {
    DenseLayer layer(2, 3);
    CHECK_THROWS_AS(dense_forward(layer, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("bce_loss worked values") {
    CHECK(bce_loss(1.0 - 1e-7, 1.0) < 1e-6);  // near-perfect prediction
    CHECK(bce_loss(0.5, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.2, 0.0) == doctest::Approx(-std::log(0.8)).epsilon(1e-12));
}

TEST_CASE("bce_loss stays finite and non-negative at the extremes") {
    for (double p : {0.0, 1e-12, 0.3, 0.999999999, 1.0}) {
        for (double y : {0.0, 1.0}) {
            const double loss = bce_loss(p, y);
            CHECK(std::isfinite(loss));
            CHECK(loss >= 0.0);
        }
    }
}

TEST_CASE("l2_distance worked values") {
    CHECK(l2_distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(l2_distance({3.0, 4.0}, {0.0, 0.0}) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(l2_distance({1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 0.0, 0.0}) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(l2_distance({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("l2_distance symmetry and triangle inequality on random vectors") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec a = rng.gaussian_vec(8);
        const Vec b = rng.gaussian_vec(8);
        const Vec c = rng.gaussian_vec(8);
        CHECK(l2_distance(a, b) == doctest::Approx(l2_distance(b, a)).epsilon(1e-12));
        CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12);
    }
}

TEST_CASE("adam_update with zero gradients is the identity on parameters") {
    Vec params{0.5, -0.25, 3.0};
    Vec grads{0.0, 0.0, 0.0};
    std::vector<TensorRef> refs{{"p", params}};
    AdamState state(refs, {});
    for (int step = 0; step < 25; ++step) {
        adam_update(refs, {{"p", grads}}, state);
    }
    CHECK(params == Vec{0.5, -0.25, 3.0});
    CHECK(state.step == 25);
}

TEST_CASE("adam_update first step has bias-corrected magnitude lr") {
    Vec params{0.0};
    Vec grads{1.0};
    std::vector<TensorRef> refs{{"p", params}};
    AdamState state(refs, {0.001, 0.9, 0.999, 1e-8});
    adam_update(refs, {{"p", grads}}, state);
    CHECK(params[0] == doctest::Approx(-0.001).epsilon(1e-6));
    CHECK(state.step == 1);
}

TEST_CASE("adam_update is deterministic for identical state and inputs") {
    const auto run = [] {
        Vec params{0.1, 0.2};
        std::vector<TensorRef> refs{{"p", params}};
        AdamState state(refs, {});
        Vec grads{0.3, -0.7};
        for (int i = 0; i < 10; ++i) adam_update(refs, {{"p", grads}}, state);
        return params;
    };
    CHECK(run() == run());
}

TEST_CASE("adam_update rejects non-finite gradients naming the tensor") {
    Vec params{0.0};
    Vec grads{std::nan("")};
    std::vector<TensorRef> refs{{"weights", params}};
    AdamState state(refs, {});
    CHECK_THROWS_WITH_AS(adam_update(refs, {{"weights", grads}}, state),
                         doctest::Contains("weights"), std::runtime_error);
}

TEST_CASE("grad_check on a linear model with MSE loss") {
    // loss(w, b) = (w x + b - t)^2 summed over a few points
    Vec w{0.7, -0.3};
    Vec b{0.2};
    const std::vector<Vec> xs{{1.0, 2.0}, {-0.5, 0.25}, {2.0, -1.0}};
    const Vec ts{1.0, -2.0, 0.5};
    const auto loss = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double y = w[0] * xs[i][0] + w[1] * xs[i][1] + b[0];
            acc += (y - ts[i]) * (y - ts[i]);
        }
        return acc;
    };
    Vec dw(2, 0.0), db(1, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = w[0] * xs[i][0] + w[1] * xs[i][1] + b[0];
        const double d = 2.0 * (y - ts[i]);
        dw[0] += d * xs[i][0];
        dw[1] += d * xs[i][1];
        db[0] += d;
    }
    std::vector<TensorRef> params{{"w", w}, {"b", b}};
    CHECK(grad_check(params, {dw, db}, loss) < 1e-6);
}

TEST_CASE("grad_check on a BCE-on-sigmoid scalar model") {
    Vec z{0.4};  // logit parameter; analytic gradient is p - y
    const double y = 1.0;
    const auto loss = [&] { return bce_loss(sigmoid(z[0]), y); };
    const Vec analytic{sigmoid(z[0]) - y};
    std::vector<TensorRef> params{{"z", z}};
    CHECK(grad_check(params, {analytic}, loss) < 1e-5);
}

TEST_CASE("grad_check with no parameters returns 0") {
    CHECK(grad_check({}, {}, [] { return 1.0; }) == 0.0);
}

TEST_CASE("l2_norm_grad is zero at the origin") {
    const Vec g = l2_norm_grad({0.0, 0.0, 0.0});
    CHECK(g == Vec{0.0, 0.0, 0.0});
}

TEST_CASE("dense_backward matches central differences") {
    Rng rng(7);
    DenseLayer layer(3, 4);
    for (auto& w : layer.weights.data) w = rng.gaussian();
    for (auto& b : layer.bias) b = rng.gaussian();
    const Vec x = rng.gaussian_vec(4);
    const Vec target = rng.gaussian_vec(3);

    const auto loss = [&] {
        const Vec y = dense_forward(layer, x);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - target[i]) * (y[i] - target[i]);
        return 0.5 * acc;
    };
    DenseLayer grad(3, 4);
    const Vec y = dense_forward(layer, x);
    Vec dy(3);
    for (std::size_t i = 0; i < 3; ++i) dy[i] = y[i] - target[i];
    dense_backward(layer, x, dy, &grad);

    std::vector<TensorRef> params{{"weights", layer.weights.data}, {"bias", layer.bias}};
    CHECK(grad_check(params, {grad.weights.data, grad.bias}, loss) < 1e-6);
}
