#include <doctest.h>

#include <cmath>
#include <random>

#include "awe/mlp.hpp"

using namespace awe::rl;

TEST_CASE("forward shapes and tanh head bounds") {
    std::mt19937_64 rng(1);
    Mlp net(3, {400, 300}, 2, Mlp::Head::Tanh);
    net.init(rng, 0.01f);

    std::vector<float> x = {0.3f, -0.8f, 0.5f};
    MlpCache cache;
    net.forward(x.data(), 1, cache);
    const auto& y = net.output(cache);
    REQUIRE(y.size() == 2);
    for (float v : y) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
        CHECK(std::abs(v) < 0.5f);  // down-scaled final layer -> near-zero start
    }
}

TEST_CASE("batched forward equals per-sample forward") {
    std::mt19937_64 rng(2);
    Mlp net(4, {16, 8}, 3, Mlp::Head::Identity);
    net.init(rng);

    const int batch = 7;
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> xs(size_t(batch) * 4);
    for (float& v : xs) v = u(rng);

    MlpCache big;
    net.forward(xs.data(), batch, big);
    for (int i = 0; i < batch; ++i) {
        MlpCache one;
        net.forward(xs.data() + size_t(i) * 4, 1, one);
        for (int j = 0; j < 3; ++j)
            REQUIRE(net.output(big)[size_t(i) * 3 + j] == net.output(one)[j]);
    }
}

TEST_CASE("gradient check on a random small MLP") {
    std::mt19937_64 rng(3);
    for (auto head : {Mlp::Head::Identity, Mlp::Head::Tanh}) {
        Mlp net(5, {12, 9}, 3, head);
        net.init(rng);
        std::uniform_real_distribution<float> u(-0.9f, 0.9f);
        std::vector<float> x(5);
        for (float& v : x) v = u(rng);
        double err = grad_check(net, x);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("gradient check is near-exact for a linear network") {
    // Single identity-head layer with exactly representable weights: the
    // analytic gradient and the central difference agree to round-off.
    Mlp net(3, {}, 2, Mlp::Head::Identity);
    auto& l = net.layers()[0];
    l.w = {0.5f, -0.25f, 1.0f, 2.0f, 0.125f, -0.5f};
    l.b = {0.25f, -1.0f};
    std::vector<float> x = {0.5f, 0.25f, -1.0f};
    double err = grad_check(net, x);
    CHECK(err < 1e-8);
}

TEST_CASE("gradient check at zero input stays finite") {
    std::mt19937_64 rng(4);
    Mlp net(4, {8}, 2, Mlp::Head::Tanh);
    net.init(rng);
    std::vector<float> x(4, 0.0f);
    double err = grad_check(net, x);
    CHECK(std::isfinite(err));
    CHECK(err < 1e-4);
}

TEST_CASE("backward produces input gradients consistent with finite differences") {
    std::mt19937_64 rng(5);
    Mlp net(3, {10}, 1, Mlp::Head::Identity);
    net.init(rng);
    std::vector<float> x = {0.4f, -0.2f, 0.7f};

    MlpCache cache;
    net.forward(x.data(), 1, cache);
    std::vector<float> dy = {1.0f};
    Grads g = net.zero_grads();
    std::vector<float> dx(3);
    net.backward(cache, dy.data(), g, dx.data());

    const double h = 1e-3;
    for (int i = 0; i < 3; ++i) {
        std::vector<float> xp = x, xm = x;
        xp[i] += float(h);
        xm[i] -= float(h);
        MlpCache cp, cm;
        net.forward(xp.data(), 1, cp);
        net.forward(xm.data(), 1, cm);
        double fd = (net.output(cp)[0] - net.output(cm)[0]) / (2 * h);
        REQUIRE(std::abs(fd - dx[i]) < 1e-2 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    std::mt19937_64 rng(6);
    Mlp net(2, {4}, 1, Mlp::Head::Identity);
    net.init(rng);
    std::vector<float> before = net.layers()[0].w;

    Adam opt(net, 1e-2f);
    Grads g = net.zero_grads();
    opt.step(net, g);
    for (size_t i = 0; i < before.size(); ++i) CHECK(net.layers()[0].w[i] == before[i]);
}

TEST_CASE("adam: first step is -lr*sign(g) per coordinate") {
    std::mt19937_64 rng(7);
    Mlp net(2, {}, 2, Mlp::Head::Identity);
    net.init(rng);
    std::vector<float> before_w = net.layers()[0].w;
    std::vector<float> before_b = net.layers()[0].b;

    const float lr = 1e-3f;
    Adam opt(net, lr);
    Grads g = net.zero_grads();
    g.w[0] = {0.5f, -2.0f, 3.0f, -0.001f};
    g.b[0] = {1.0f, -1.0f};
    opt.step(net, g);

    for (size_t i = 0; i < before_w.size(); ++i) {
        float want = before_w[i] - lr * (g.w[0][i] > 0 ? 1.0f : -1.0f);
        CHECK(net.layers()[0].w[i] == doctest::Approx(want).epsilon(1e-4));
    }
    for (size_t i = 0; i < before_b.size(); ++i) {
        float want = before_b[i] - lr * (g.b[0][i] > 0 ? 1.0f : -1.0f);
        CHECK(net.layers()[0].b[i] == doctest::Approx(want).epsilon(1e-4));
    }
}

TEST_CASE("adam: quadratic bowl converges") {
    // Minimize 0.5*|w - w*|^2 over the weights of a 1-layer net by feeding
    // the residual as the gradient.
    Mlp net(1, {}, 4, Mlp::Head::Identity);
    std::mt19937_64 rng(8);
    net.init(rng);
    std::vector<float> target = {0.3f, -0.7f, 1.2f, 0.05f};

    Adam opt(net, 1e-2f);
    Grads g = net.zero_grads();
    int steps = 0;
    double dist = 1.0;
    for (; steps < 5000; ++steps) {
        dist = 0.0;
        for (size_t i = 0; i < target.size(); ++i) {
            g.w[0][i] = net.layers()[0].w[i] - target[i];
            dist = std::max(dist, double(std::abs(g.w[0][i])));
        }
        std::fill(g.b[0].begin(), g.b[0].end(), 0.0f);
        if (dist < 1e-6) break;
        opt.step(net, g);
    }
    CHECK(dist < 1e-6);
    CHECK(steps <= 5000);
}

TEST_CASE("finite() detects poisoned parameters") {
    std::mt19937_64 rng(9);
    Mlp net(2, {4}, 1, Mlp::Head::Identity);
    net.init(rng);
    CHECK(net.finite());
    net.layers()[0].w[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK(!net.finite());
}
