#include "awe/td3.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace awe::rl {

void ReplayBuffer::store(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
        cursor_ = data_.size() % capacity_;
    } else {
        data_[cursor_] = std::move(t);
        cursor_ = (cursor_ + 1) % capacity_;
    }
}

size_t ReplayBuffer::newest_index() const {
    return (cursor_ + data_.size() - 1) % data_.size();
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t batch_size, std::mt19937_64& rng) const {
    std::vector<size_t> idx(batch_size);
    std::uniform_int_distribution<size_t> dist(0, data_.size() - 1);
    for (size_t i = 0; i + 1 < batch_size; ++i) idx[i] = dist(rng);
    idx[batch_size - 1] = newest_index();
    return idx;
}

Td3Agent::Td3Agent(const Td3Config& cfg, uint64_t seed)
    : cfg_(cfg), buffer_(cfg.replay_capacity) {
    std::mt19937_64 rng(seed);
    actor_ = Mlp(cfg.obs_dim, cfg.hidden, cfg.act_dim, Mlp::Head::Tanh);
    actor_.init(rng, 0.01f);
    critic1_ = Mlp(cfg.obs_dim + cfg.act_dim, cfg.hidden, 1, Mlp::Head::Identity);
    critic1_.init(rng);
    critic2_ = Mlp(cfg.obs_dim + cfg.act_dim, cfg.hidden, 1, Mlp::Head::Identity);
    critic2_.init(rng);
    target_actor_ = actor_;
    target_critic1_ = critic1_;
    target_critic2_ = critic2_;
    opt_actor_ = Adam(actor_, cfg.actor_lr);
    opt_critic1_ = Adam(critic1_, cfg.critic_lr);
    opt_critic2_ = Adam(critic2_, cfg.critic_lr);
}

std::array<float, 2> Td3Agent::act(const std::vector<float>& obs, bool explore,
                                   std::mt19937_64& rng) const {
    MlpCache cache;
    actor_.forward(obs.data(), 1, cache);
    const auto& y = cache.post.back();
    std::array<float, 2> a{y[0], y[1]};
    if (explore) {
        std::normal_distribution<float> noise(0.0f, cfg_.action_noise);
        for (float& v : a) v = std::clamp(v + noise(rng), -1.0f, 1.0f);
    }
    return a;
}

void Td3Agent::soft_update_targets(float tau) {
    auto blend = [tau](Mlp& target, const Mlp& online) {
        auto& tl = target.layers();
        const auto& ol = online.layers();
        for (size_t li = 0; li < tl.size(); ++li) {
            for (size_t i = 0; i < tl[li].w.size(); ++i)
                tl[li].w[i] = (1.0f - tau) * tl[li].w[i] + tau * ol[li].w[i];
            for (size_t i = 0; i < tl[li].b.size(); ++i)
                tl[li].b[i] = (1.0f - tau) * tl[li].b[i] + tau * ol[li].b[i];
        }
    };
    blend(target_actor_, actor_);
    blend(target_critic1_, critic1_);
    blend(target_critic2_, critic2_);
}

Losses Td3Agent::train_step(std::mt19937_64& rng) {
    auto idx = buffer_.sample_indices(cfg_.batch_size, rng);
    std::vector<const Transition*> batch(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) batch[i] = &buffer_[idx[i]];
    return update(batch, rng);
}

Losses Td3Agent::update(const std::vector<const Transition*>& batch, std::mt19937_64& rng) {
    const int b = static_cast<int>(batch.size());
    const int od = cfg_.obs_dim;
    const int ad = cfg_.act_dim;

    std::vector<float> obs(size_t(b) * od), nobs(size_t(b) * od);
    std::vector<float> oa(size_t(b) * (od + ad));  // critic input [obs | action]
    std::vector<float> rew(b), done(b);
    for (int i = 0; i < b; ++i) {
        const Transition& t = *batch[i];
        std::copy(t.obs.begin(), t.obs.end(), obs.begin() + size_t(i) * od);
        std::copy(t.next_obs.begin(), t.next_obs.end(), nobs.begin() + size_t(i) * od);
        std::copy(t.obs.begin(), t.obs.end(), oa.begin() + size_t(i) * (od + ad));
        for (int j = 0; j < ad; ++j) oa[size_t(i) * (od + ad) + od + j] = t.action[j];
        rew[i] = t.reward;
        done[i] = t.done ? 1.0f : 0.0f;
    }

    // Target action with clipped smoothing noise.
    MlpCache ta_cache;
    target_actor_.forward(nobs.data(), b, ta_cache);
    const auto& ta = ta_cache.post.back();
    std::normal_distribution<float> tnoise(0.0f, cfg_.target_noise);
    std::vector<float> noa(size_t(b) * (od + ad));
    for (int i = 0; i < b; ++i) {
        std::copy(nobs.begin() + size_t(i) * od, nobs.begin() + size_t(i + 1) * od,
                  noa.begin() + size_t(i) * (od + ad));
        for (int j = 0; j < ad; ++j) {
            float n = std::clamp(tnoise(rng), -cfg_.target_noise_clip, cfg_.target_noise_clip);
            noa[size_t(i) * (od + ad) + od + j] =
                std::clamp(ta[size_t(i) * ad + j] + n, -1.0f, 1.0f);
        }
    }

    MlpCache q1t_cache, q2t_cache;
    target_critic1_.forward(noa.data(), b, q1t_cache);
    target_critic2_.forward(noa.data(), b, q2t_cache);
    const auto& q1t = q1t_cache.post.back();
    const auto& q2t = q2t_cache.post.back();

    std::vector<float> y(b);
    for (int i = 0; i < b; ++i)
        y[i] = rew[i] + cfg_.gamma * (1.0f - done[i]) * std::min(q1t[i], q2t[i]);

    Losses losses;
    auto critic_step = [&](Mlp& critic, Adam& opt, float& loss_out) {
        MlpCache cache;
        critic.forward(oa.data(), b, cache);
        const auto& q = cache.post.back();
        std::vector<float> dq(b);
        float loss = 0.0f;
        for (int i = 0; i < b; ++i) {
            float err = q[i] - y[i];
            loss += err * err;
            dq[i] = 2.0f * err / float(b);
        }
        loss_out = loss / float(b);
        Grads g = critic.zero_grads();
        critic.backward(cache, dq.data(), g);
        opt.step(critic, g);
    };
    critic_step(critic1_, opt_critic1_, losses.critic1);
    critic_step(critic2_, opt_critic2_, losses.critic2);

    ++update_count_;
    if (update_count_ % cfg_.policy_delay == 0) {
        // Ascend Q1(s, actor(s)).
        MlpCache a_cache;
        actor_.forward(obs.data(), b, a_cache);
        const auto& a = a_cache.post.back();
        std::vector<float> qa(size_t(b) * (od + ad));
        for (int i = 0; i < b; ++i) {
            std::copy(obs.begin() + size_t(i) * od, obs.begin() + size_t(i + 1) * od,
                      qa.begin() + size_t(i) * (od + ad));
            for (int j = 0; j < ad; ++j)
                qa[size_t(i) * (od + ad) + od + j] = a[size_t(i) * ad + j];
        }
        MlpCache q_cache;
        critic1_.forward(qa.data(), b, q_cache);
        const auto& q = q_cache.post.back();
        float actor_loss = 0.0f;
        for (int i = 0; i < b; ++i) actor_loss -= q[i] / float(b);
        losses.actor = actor_loss;

        std::vector<float> dq(b, -1.0f / float(b));
        Grads cg = critic1_.zero_grads();
        std::vector<float> dinput(size_t(b) * (od + ad));
        critic1_.backward(q_cache, dq.data(), cg, dinput.data());  // cg discarded

        std::vector<float> da(size_t(b) * ad);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < ad; ++j)
                da[size_t(i) * ad + j] = dinput[size_t(i) * (od + ad) + od + j];

        Grads ag = actor_.zero_grads();
        actor_.backward(a_cache, da.data(), ag);
        opt_actor_.step(actor_, ag);
        losses.actor_updated = true;

        soft_update_targets(cfg_.tau);
    }

    if (!std::isfinite(losses.critic1) || !std::isfinite(losses.critic2) ||
        !actor_.finite() || !critic1_.finite() || !critic2_.finite())
        throw NumericalDivergence();
    return losses;
}

// ---- checkpoint I/O --------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'T', 'D', '3', 'C'};
constexpr uint32_t kVersion = 1;

template <typename T>
void wr(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T rd(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CheckpointError("truncated checkpoint");
    return v;
}

void write_floats(std::ofstream& out, const std::vector<float>& v) {
    wr(out, static_cast<uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
}

std::vector<float> read_floats(std::ifstream& in) {
    auto n = rd<uint64_t>(in);
    std::vector<float> v(n);
    in.read(reinterpret_cast<char*>(v.data()), n * sizeof(float));
    if (!in) throw CheckpointError("truncated checkpoint blob");
    return v;
}

void write_mlp(std::ofstream& out, const Mlp& net) {
    wr(out, static_cast<uint32_t>(net.head() == Mlp::Head::Tanh ? 1 : 0));
    wr(out, static_cast<uint32_t>(net.layers().size()));
    for (const Linear& l : net.layers()) {
        wr(out, static_cast<uint32_t>(l.in));
        wr(out, static_cast<uint32_t>(l.out));
        write_floats(out, l.w);
        write_floats(out, l.b);
    }
}

Mlp read_mlp(std::ifstream& in) {
    auto head = rd<uint32_t>(in) ? Mlp::Head::Tanh : Mlp::Head::Identity;
    auto nl = rd<uint32_t>(in);
    if (nl == 0) throw CheckpointError("empty network");
    std::vector<std::pair<int, int>> shapes;
    std::vector<std::vector<float>> ws, bs;
    std::vector<int> hidden;
    for (uint32_t i = 0; i < nl; ++i) {
        int lin = static_cast<int>(rd<uint32_t>(in));
        int lout = static_cast<int>(rd<uint32_t>(in));
        shapes.emplace_back(lin, lout);
        ws.push_back(read_floats(in));
        bs.push_back(read_floats(in));
        if (ws.back().size() != size_t(lin) * lout || bs.back().size() != size_t(lout))
            throw CheckpointError("layer blob size mismatch");
        if (i + 1 < nl) hidden.push_back(lout);
    }
    Mlp net(shapes.front().first, hidden, shapes.back().second, head);
    for (uint32_t li = 0; li < nl; ++li) {
        net.layers()[li].w = std::move(ws[li]);
        net.layers()[li].b = std::move(bs[li]);
    }
    return net;
}

void write_adam(std::ofstream& out, const Adam& opt) {
    wr(out, opt.lr);
    wr(out, opt.beta1);
    wr(out, opt.beta2);
    wr(out, opt.eps);
    wr(out, opt.t);
    wr(out, static_cast<uint32_t>(opt.mw.size()));
    for (size_t i = 0; i < opt.mw.size(); ++i) {
        write_floats(out, opt.mw[i]);
        write_floats(out, opt.vw[i]);
        write_floats(out, opt.mb[i]);
        write_floats(out, opt.vb[i]);
    }
}

Adam read_adam(std::ifstream& in) {
    Adam opt;
    opt.lr = rd<float>(in);
    opt.beta1 = rd<float>(in);
    opt.beta2 = rd<float>(in);
    opt.eps = rd<float>(in);
    opt.t = rd<int64_t>(in);
    auto n = rd<uint32_t>(in);
    for (uint32_t i = 0; i < n; ++i) {
        opt.mw.push_back(read_floats(in));
        opt.vw.push_back(read_floats(in));
        opt.mb.push_back(read_floats(in));
        opt.vb.push_back(read_floats(in));
    }
    return opt;
}

}  // namespace

void Td3Agent::save(const std::string& path, uint32_t phase_tag) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    wr(out, kVersion);
    wr(out, phase_tag);

    // Config echo.
    wr(out, static_cast<uint32_t>(cfg_.obs_dim));
    wr(out, static_cast<uint32_t>(cfg_.act_dim));
    wr(out, static_cast<uint32_t>(cfg_.hidden.size()));
    for (int h : cfg_.hidden) wr(out, static_cast<uint32_t>(h));
    wr(out, cfg_.actor_lr);
    wr(out, cfg_.critic_lr);
    wr(out, cfg_.gamma);
    wr(out, cfg_.tau);
    wr(out, static_cast<uint32_t>(cfg_.policy_delay));
    wr(out, cfg_.action_noise);
    wr(out, cfg_.target_noise);
    wr(out, cfg_.target_noise_clip);
    wr(out, static_cast<uint32_t>(cfg_.batch_size));
    wr(out, static_cast<uint32_t>(cfg_.warmup_steps));
    wr(out, static_cast<uint32_t>(cfg_.episodes));
    wr(out, static_cast<uint64_t>(cfg_.replay_capacity));

    write_mlp(out, actor_);
    write_mlp(out, critic1_);
    write_mlp(out, critic2_);
    write_mlp(out, target_actor_);
    write_mlp(out, target_critic1_);
    write_mlp(out, target_critic2_);
    write_adam(out, opt_actor_);
    write_adam(out, opt_critic1_);
    write_adam(out, opt_critic2_);

    wr(out, update_count_);
    wr(out, total_env_steps_);
    wr(out, static_cast<uint64_t>(buffer_.size()));
}

Td3Agent Td3Agent::load(const std::string& path, uint32_t* phase_tag) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw CheckpointError("bad magic");
    if (rd<uint32_t>(in) != kVersion) throw CheckpointError("unsupported checkpoint version");
    uint32_t tag = rd<uint32_t>(in);
    if (phase_tag) *phase_tag = tag;

    Td3Agent agent;
    Td3Config& c = agent.cfg_;
    c.obs_dim = static_cast<int>(rd<uint32_t>(in));
    c.act_dim = static_cast<int>(rd<uint32_t>(in));
    c.hidden.clear();
    for (uint32_t i = 0, n = rd<uint32_t>(in); i < n; ++i)
        c.hidden.push_back(static_cast<int>(rd<uint32_t>(in)));
    c.actor_lr = rd<float>(in);
    c.critic_lr = rd<float>(in);
    c.gamma = rd<float>(in);
    c.tau = rd<float>(in);
    c.policy_delay = static_cast<int>(rd<uint32_t>(in));
    c.action_noise = rd<float>(in);
    c.target_noise = rd<float>(in);
    c.target_noise_clip = rd<float>(in);
    c.batch_size = static_cast<int>(rd<uint32_t>(in));
    c.warmup_steps = static_cast<int>(rd<uint32_t>(in));
    c.episodes = static_cast<int>(rd<uint32_t>(in));
    c.replay_capacity = rd<uint64_t>(in);

    agent.actor_ = read_mlp(in);
    agent.critic1_ = read_mlp(in);
    agent.critic2_ = read_mlp(in);
    agent.target_actor_ = read_mlp(in);
    agent.target_critic1_ = read_mlp(in);
    agent.target_critic2_ = read_mlp(in);
    agent.opt_actor_ = read_adam(in);
    agent.opt_critic1_ = read_adam(in);
    agent.opt_critic2_ = read_adam(in);

    agent.update_count_ = rd<int64_t>(in);
    agent.total_env_steps_ = rd<int64_t>(in);
    (void)rd<uint64_t>(in);  // buffer size at save time; contents not persisted
    agent.buffer_ = ReplayBuffer(c.replay_capacity);
    return agent;
}

}  // namespace awe::rl
