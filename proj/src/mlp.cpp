#include "awe/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace awe::rl {

Mlp::Mlp(int in_dim, const std::vector<int>& hidden, int out_dim, Head head) : head_(head) {
    int prev = in_dim;
    for (int h : hidden) {
        layers_.push_back({prev, h, std::vector<float>(size_t(h) * prev, 0.0f),
                           std::vector<float>(h, 0.0f)});
        prev = h;
    }
    layers_.push_back({prev, out_dim, std::vector<float>(size_t(out_dim) * prev, 0.0f),
                       std::vector<float>(out_dim, 0.0f)});
}

void Mlp::init(std::mt19937_64& rng, float final_layer_scale) {
    for (size_t li = 0; li < layers_.size(); ++li) {
        Linear& l = layers_[li];
        float bound = 1.0f / std::sqrt(float(l.in));
        if (li + 1 == layers_.size()) bound *= final_layer_scale;
        std::uniform_real_distribution<float> dist(-bound, bound);
        for (float& w : l.w) w = dist(rng);
        for (float& b : l.b) b = dist(rng);
    }
}

void Mlp::forward(const float* x, int batch, MlpCache& cache) const {
    const size_t nl = layers_.size();
    cache.batch = batch;
    cache.pre.resize(nl);
    cache.post.resize(nl + 1);
    cache.post[0].assign(x, x + size_t(batch) * layers_.front().in);

    mat::Exec exec = mat::default_exec();
    for (size_t li = 0; li < nl; ++li) {
        const Linear& l = layers_[li];
        auto& pre = cache.pre[li];
        pre.resize(size_t(batch) * l.out);
        mat::gemm_nt(batch, l.out, l.in, cache.post[li].data(), l.w.data(), pre.data(), exec);
        for (int i = 0; i < batch; ++i)
            for (int j = 0; j < l.out; ++j) pre[size_t(i) * l.out + j] += l.b[j];

        auto& post = cache.post[li + 1];
        post.resize(pre.size());
        if (li + 1 < nl) {
            for (size_t i = 0; i < pre.size(); ++i) post[i] = pre[i] > 0.0f ? pre[i] : 0.0f;
        } else if (head_ == Head::Tanh) {
            for (size_t i = 0; i < pre.size(); ++i) post[i] = std::tanh(pre[i]);
        } else {
            post = pre;
        }
    }
}

Grads Mlp::zero_grads() const {
    Grads g;
    g.w.resize(layers_.size());
    g.b.resize(layers_.size());
    for (size_t li = 0; li < layers_.size(); ++li) {
        g.w[li].assign(layers_[li].w.size(), 0.0f);
        g.b[li].assign(layers_[li].b.size(), 0.0f);
    }
    return g;
}

void Mlp::backward(const MlpCache& cache, const float* dy, Grads& grads, float* dx) const {
    const int batch = cache.batch;
    const size_t nl = layers_.size();
    mat::Exec exec = mat::default_exec();

    std::vector<float> delta(dy, dy + size_t(batch) * layers_.back().out);
    if (head_ == Head::Tanh) {
        const auto& out = cache.post[nl];
        for (size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0f - out[i] * out[i];
    }

    std::vector<float> delta_prev;
    for (size_t li = nl; li-- > 0;) {
        const Linear& l = layers_[li];
        // dW = delta^T * input
        mat::gemm_tn(l.out, l.in, batch, delta.data(), cache.post[li].data(),
                     grads.w[li].data(), exec);
        for (int j = 0; j < l.out; ++j) {
            float acc = 0.0f;
            for (int i = 0; i < batch; ++i) acc += delta[size_t(i) * l.out + j];
            grads.b[li][j] = acc;
        }

        if (li == 0 && dx == nullptr) break;
        delta_prev.resize(size_t(batch) * l.in);
        mat::gemm_nn(batch, l.in, l.out, delta.data(), l.w.data(), delta_prev.data(), exec);
        if (li > 0) {
            const auto& pre = cache.pre[li - 1];
            for (size_t i = 0; i < delta_prev.size(); ++i)
                if (pre[i] <= 0.0f) delta_prev[i] = 0.0f;
        }
        delta.swap(delta_prev);
    }
    if (dx) {
        for (size_t i = 0; i < delta.size(); ++i) dx[i] = delta[i];
    }
}

bool Mlp::finite() const {
    for (const Linear& l : layers_) {
        for (float w : l.w)
            if (!std::isfinite(w)) return false;
        for (float b : l.b)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

Adam::Adam(const Mlp& net, float lr_, float b1, float b2, float e)
    : lr(lr_), beta1(b1), beta2(b2), eps(e) {
    for (const Linear& l : net.layers()) {
        mw.emplace_back(l.w.size(), 0.0f);
        vw.emplace_back(l.w.size(), 0.0f);
        mb.emplace_back(l.b.size(), 0.0f);
        vb.emplace_back(l.b.size(), 0.0f);
    }
}

void Adam::step(Mlp& net, const Grads& grads) {
    ++t;
    float bc1 = 1.0f - std::pow(beta1, float(t));
    float bc2 = 1.0f - std::pow(beta2, float(t));
    auto update = [&](std::vector<float>& p, const std::vector<float>& g, std::vector<float>& m,
                      std::vector<float>& v) {
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
            float mhat = m[i] / bc1;
            float vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    };
    auto& layers = net.layers();
    for (size_t li = 0; li < layers.size(); ++li) {
        update(layers[li].w, grads.w[li], mw[li], vw[li]);
        update(layers[li].b, grads.b[li], mb[li], vb[li]);
    }
}

namespace {

// Double-precision mirror of the forward pass; the independent side of the
// finite-difference check.
double loss_double(const Mlp& net, const std::vector<double>& params_flat,
                   const std::vector<float>& input) {
    const auto& layers = net.layers();
    std::vector<double> act(input.begin(), input.end());
    size_t off = 0;
    for (size_t li = 0; li < layers.size(); ++li) {
        const Linear& l = layers[li];
        std::vector<double> next(l.out, 0.0);
        for (int j = 0; j < l.out; ++j) {
            double acc = params_flat[off + size_t(l.out) * l.in + j];  // bias
            for (int i = 0; i < l.in; ++i)
                acc += params_flat[off + size_t(j) * l.in + i] * act[i];
            next[j] = acc;
        }
        off += size_t(l.out) * l.in + l.out;
        if (li + 1 < layers.size()) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        } else if (net.head() == Mlp::Head::Tanh) {
            for (double& v : next) v = std::tanh(v);
        }
        act.swap(next);
    }
    double loss = 0.0;
    for (double v : act) loss += 0.5 * v * v;
    return loss;
}

}  // namespace

double grad_check(const Mlp& net, const std::vector<float>& input, double h) {
    MlpCache cache;
    net.forward(input.data(), 1, cache);
    const auto& y = net.output(cache);
    std::vector<float> dy(y.begin(), y.end());  // d(0.5*|y|^2)/dy = y
    Grads grads = net.zero_grads();
    net.backward(cache, dy.data(), grads);

    // Flatten parameters and analytic gradients in layer order: W then b.
    std::vector<double> params, analytic;
    for (size_t li = 0; li < net.layers().size(); ++li) {
        const Linear& l = net.layers()[li];
        for (float w : l.w) params.push_back(w);
        for (float b : l.b) params.push_back(b);
        for (float g : grads.w[li]) analytic.push_back(g);
        for (float g : grads.b[li]) analytic.push_back(g);
    }

    double max_rel = 0.0;
    double scale = 0.0;
    for (double g : analytic) scale = std::max(scale, std::abs(g));
    if (scale == 0.0) scale = 1.0;
    for (size_t i = 0; i < params.size(); ++i) {
        std::vector<double> p = params;
        p[i] = params[i] + h;
        double lp = loss_double(net, p, input);
        p[i] = params[i] - h;
        double lm = loss_double(net, p, input);
        double fd = (lp - lm) / (2.0 * h);
        double rel = std::abs(fd - analytic[i]) / std::max(scale, 1e-12);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace awe::rl
