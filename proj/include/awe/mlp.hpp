#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "awe/matops.hpp"

namespace awe::rl {

// Fully-connected network with rectifier hidden units and a tanh (actor) or
// identity (critic) head. Weights are row-major [out x in]; forward/backward
// run batched through the awe::mat kernels.
struct Linear {
    int in = 0, out = 0;
    std::vector<float> w;  // out x in
    std::vector<float> b;  // out
};

struct Grads {
    std::vector<std::vector<float>> w;  // per layer, same shape as Linear::w
    std::vector<std::vector<float>> b;
};

struct MlpCache {
    int batch = 0;
    std::vector<std::vector<float>> pre;   // pre-activation per layer
    std::vector<std::vector<float>> post;  // post-activation; post[0] is the input
};

class Mlp {
  public:
    enum class Head { Tanh, Identity };

    Mlp() = default;
    Mlp(int in_dim, const std::vector<int>& hidden, int out_dim, Head head);

    // Uniform fan-in initialization; actor heads get their final layer
    // scaled down so initial actions are near zero.
    void init(std::mt19937_64& rng, float final_layer_scale = 1.0f);

    void forward(const float* x, int batch, MlpCache& cache) const;
    const std::vector<float>& output(const MlpCache& cache) const { return cache.post.back(); }

    // dy is the loss gradient w.r.t. the network output (batch x out_dim).
    // Fills grads; optionally writes the gradient w.r.t. the input.
    void backward(const MlpCache& cache, const float* dy, Grads& grads,
                  float* dx = nullptr) const;

    Grads zero_grads() const;

    int in_dim() const { return layers_.front().in; }
    int out_dim() const { return layers_.back().out; }
    std::vector<Linear>& layers() { return layers_; }
    const std::vector<Linear>& layers() const { return layers_; }
    Head head() const { return head_; }

    bool finite() const;

  private:
    std::vector<Linear> layers_;
    Head head_ = Head::Identity;
};

// Bias-corrected Adam over one network's parameters.
class Adam {
  public:
    Adam() = default;
    explicit Adam(const Mlp& net, float lr, float beta1 = 0.9f, float beta2 = 0.999f,
                  float eps = 1e-8f);

    void step(Mlp& net, const Grads& grads);

    float lr = 1e-3f;
    float beta1 = 0.9f, beta2 = 0.999f, eps = 1e-8f;
    int64_t t = 0;
    std::vector<std::vector<float>> mw, vw, mb, vb;
};

// Max relative error between analytic and central finite-difference gradients
// of 0.5*|y|^2 at the given input.
double grad_check(const Mlp& net, const std::vector<float>& input, double h = 1e-5);

}  // namespace awe::rl
