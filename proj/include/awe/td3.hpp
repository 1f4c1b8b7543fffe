#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "awe/mlp.hpp"

namespace awe::rl {

struct Transition {
    std::vector<float> obs;
    std::array<float, 2> action;
    float reward = 0.0f;
    std::vector<float> next_obs;
    bool done = false;
};

// Ring buffer with Combined Experience Replay sampling: every batch contains
// the most recent transition.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity = 100000) : capacity_(capacity) {}

    void store(Transition t);
    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& operator[](size_t i) const { return data_[i]; }
    size_t newest_index() const;

    // batch_size - 1 uniform draws plus the newest transition (last slot).
    std::vector<size_t> sample_indices(size_t batch_size, std::mt19937_64& rng) const;

  private:
    size_t capacity_;
    size_t cursor_ = 0;
    std::vector<Transition> data_;
};

struct Td3Config {
    int obs_dim = 3;
    int act_dim = 2;
    std::vector<int> hidden = {400, 300};
    float actor_lr = 1e-4f;
    float critic_lr = 1e-4f;
    float gamma = 1.0f;
    float tau = 0.005f;
    int policy_delay = 2;
    float action_noise = 0.225f;       // exploration sigma, normalized units
    float target_noise = 0.2f;         // target-smoothing sigma
    float target_noise_clip = 0.5f;
    int batch_size = 100;
    int warmup_steps = 5000;
    int episodes = 1600;
    size_t replay_capacity = 100000;
};

struct Losses {
    float critic1 = 0.0f;
    float critic2 = 0.0f;
    float actor = 0.0f;
    bool actor_updated = false;
};

struct NumericalDivergence : std::runtime_error {
    NumericalDivergence() : std::runtime_error("network parameters became non-finite") {}
};

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

class Td3Agent {
  public:
    Td3Agent() = default;
    Td3Agent(const Td3Config& cfg, uint64_t seed);

    // Deterministic actor output, plus clipped Gaussian noise when exploring.
    std::array<float, 2> act(const std::vector<float>& obs, bool explore, std::mt19937_64& rng) const;

    void store(Transition t) { buffer_.store(std::move(t)); }
    ReplayBuffer& buffer() { return buffer_; }
    const ReplayBuffer& buffer() const { return buffer_; }

    // One gradient step on a CER batch drawn from the buffer.
    Losses train_step(std::mt19937_64& rng);
    // One gradient step on an explicit batch (test hook).
    Losses update(const std::vector<const Transition*>& batch, std::mt19937_64& rng);

    const Td3Config& config() const { return cfg_; }
    int64_t update_count() const { return update_count_; }
    int64_t total_env_steps() const { return total_env_steps_; }
    void note_env_step() { ++total_env_steps_; }
    bool warmed_up() const { return total_env_steps_ >= cfg_.warmup_steps; }

    Mlp& actor() { return actor_; }
    const Mlp& actor() const { return actor_; }
    Mlp& critic1() { return critic1_; }
    Mlp& critic2() { return critic2_; }
    const Mlp& target_actor() const { return target_actor_; }
    const Mlp& target_critic1() const { return target_critic1_; }
    const Mlp& target_critic2() const { return target_critic2_; }

    void soft_update_targets(float tau);

    void save(const std::string& path, uint32_t phase_tag) const;
    static Td3Agent load(const std::string& path, uint32_t* phase_tag = nullptr);

  private:
    Td3Config cfg_;
    Mlp actor_, critic1_, critic2_;
    Mlp target_actor_, target_critic1_, target_critic2_;
    Adam opt_actor_, opt_critic1_, opt_critic2_;
    ReplayBuffer buffer_{100000};
    int64_t update_count_ = 0;
    int64_t total_env_steps_ = 0;
};

}  // namespace awe::rl
