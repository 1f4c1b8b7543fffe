#include "awe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace awe {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t mix_seed(uint64_t master, uint64_t stream, uint64_t index) {
    // splitmix64 over the combined words
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

rl::Td3Config default_td3_config(Phase p) {
    rl::Td3Config c;
    c.obs_dim = observation_dim(p);
    switch (p) {
        case Phase::Traction:
            c.episodes = 1600;
            c.actor_lr = c.critic_lr = 1e-4f;
            c.action_noise = 0.225f;
            c.warmup_steps = 5000;
            c.gamma = 1.0f;
            break;
        case Phase::T2R:
            c.episodes = 3000;
            c.actor_lr = c.critic_lr = 5e-4f;
            c.action_noise = 0.25f;
            c.warmup_steps = 25000;
            c.gamma = 1.0f;
            break;
        case Phase::Retraction:
            c.episodes = 90000;
            c.actor_lr = c.critic_lr = 8e-5f;
            c.action_noise = 0.25f;
            c.warmup_steps = 25000;
            c.gamma = 0.99f;
            break;
        case Phase::R2T:
            c.episodes = 20000;
            c.actor_lr = c.critic_lr = 9e-5f;
            c.action_noise = 0.25f;
            c.warmup_steps = 25000;
            c.gamma = 0.99f;
            break;
    }
    return c;
}

std::shared_ptr<const WindField> WindSpec::build() const {
    switch (type) {
        case Type::Constant:
            return std::make_shared<ConstantField>(speed);
        case Type::Gridded: {
            auto f = std::make_shared<GriddedField>(GriddedField::load(path));
            f->set_frozen(frozen);
            return f;
        }
        case Type::Synthetic:
            return std::make_shared<SyntheticShearField>(top_speed, height, seed, n_modes);
    }
    throw ConfigError("unknown wind type");
}

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    for (int i = 0; i < 4; ++i) {
        Phase p = static_cast<Phase>(i);
        cfg.td3[i] = default_td3_config(p);
        cfg.phase_cfg[i] = default_phase_config(p);
    }
    return cfg;
}

namespace {

const char* kPhaseKeys[4] = {"traction", "t2r", "retraction", "r2t"};

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_phase(const json& j, rl::Td3Config& td3, PhaseConfig& pc) {
    maybe(j, "episodes", td3.episodes);
    maybe(j, "actor_lr", td3.actor_lr);
    maybe(j, "critic_lr", td3.critic_lr);
    maybe(j, "tau", td3.tau);
    maybe(j, "policy_delay", td3.policy_delay);
    maybe(j, "action_noise", td3.action_noise);
    maybe(j, "target_noise", td3.target_noise);
    maybe(j, "target_noise_clip", td3.target_noise_clip);
    maybe(j, "batch_size", td3.batch_size);
    maybe(j, "warmup_steps", td3.warmup_steps);
    maybe(j, "replay_capacity", td3.replay_capacity);
    if (j.contains("gamma")) {
        td3.gamma = j.at("gamma").get<float>();
        pc.gamma = j.at("gamma").get<double>();
    }
    maybe(j, "horizon", pc.horizon);
    maybe(j, "motor_force", pc.motor_force);
}

json phase_to_json(const rl::Td3Config& td3, const PhaseConfig& pc) {
    return json{{"episodes", td3.episodes},
                {"actor_lr", td3.actor_lr},
                {"critic_lr", td3.critic_lr},
                {"tau", td3.tau},
                {"policy_delay", td3.policy_delay},
                {"action_noise", td3.action_noise},
                {"target_noise", td3.target_noise},
                {"target_noise_clip", td3.target_noise_clip},
                {"batch_size", td3.batch_size},
                {"warmup_steps", td3.warmup_steps},
                {"replay_capacity", td3.replay_capacity},
                {"gamma", td3.gamma},
                {"horizon", pc.horizon},
                {"motor_force", pc.motor_force}};
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    RunConfig cfg = defaults();
    try {
        maybe(j, "seed", cfg.seed);
        maybe(j, "output_dir", cfg.output_dir);
        maybe(j, "polar", cfg.polar_path);
        if (j.contains("wind")) {
            const json& w = j.at("wind");
            std::string type = w.value("type", "constant");
            if (type == "constant") {
                cfg.wind.type = WindSpec::Type::Constant;
                maybe(w, "speed", cfg.wind.speed);
            } else if (type == "gridded") {
                cfg.wind.type = WindSpec::Type::Gridded;
                cfg.wind.path = w.at("path").get<std::string>();
                maybe(w, "frozen", cfg.wind.frozen);
            } else if (type == "synthetic") {
                cfg.wind.type = WindSpec::Type::Synthetic;
                maybe(w, "seed", cfg.wind.seed);
                maybe(w, "n_modes", cfg.wind.n_modes);
                maybe(w, "top_speed", cfg.wind.top_speed);
                maybe(w, "height", cfg.wind.height);
            } else {
                throw ConfigError("unknown wind type: " + type);
            }
        }
        if (j.contains("system")) {
            const json& s = j.at("system");
            maybe(s, "m", cfg.params.m);
            maybe(s, "A", cfg.params.A);
            maybe(s, "rho", cfg.params.rho);
            maybe(s, "M", cfg.params.M);
            maybe(s, "R", cfg.params.R);
            maybe(s, "k_fric", cfg.params.k_fric);
            maybe(s, "g", cfg.params.g);
        }
        if (j.contains("thresholds")) {
            const json& t = j.at("thresholds");
            maybe(t, "r_traction_end", cfg.thresholds.r_traction_end);
            maybe(t, "r_dot_thr", cfg.thresholds.r_dot_thr);
            maybe(t, "r_thr", cfg.thresholds.r_thr);
            maybe(t, "r_r2t_done", cfg.thresholds.r_r2t_done);
            maybe(t, "r_max", cfg.thresholds.r_max);
            maybe(t, "z_max", cfg.thresholds.z_max);
            maybe(t, "theta_goal", cfg.thresholds.theta_goal);
        }
        if (j.contains("phases")) {
            for (int i = 0; i < 4; ++i) {
                if (j.at("phases").contains(kPhaseKeys[i]))
                    parse_phase(j.at("phases").at(kPhaseKeys[i]), cfg.td3[i], cfg.phase_cfg[i]);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config field: ") + e.what());
    }
    if (!cfg.polar_path.empty() && !fs::exists(cfg.polar_path))
        throw ConfigError("polar file does not exist: " + cfg.polar_path);
    if (cfg.wind.type == WindSpec::Type::Gridded && !fs::exists(cfg.wind.path))
        throw ConfigError("wind file does not exist: " + cfg.wind.path);
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
    json w;
    switch (wind.type) {
        case WindSpec::Type::Constant:
            w = {{"type", "constant"}, {"speed", wind.speed}};
            break;
        case WindSpec::Type::Gridded:
            w = {{"type", "gridded"}, {"path", wind.path}, {"frozen", wind.frozen}};
            break;
        case WindSpec::Type::Synthetic:
            w = {{"type", "synthetic"}, {"seed", wind.seed}, {"n_modes", wind.n_modes},
                 {"top_speed", wind.top_speed}, {"height", wind.height}};
            break;
    }
    json phases;
    for (int i = 0; i < 4; ++i) phases[kPhaseKeys[i]] = phase_to_json(td3[i], phase_cfg[i]);
    json j{{"seed", seed},
           {"output_dir", output_dir},
           {"polar", polar_path},
           {"wind", w},
           {"system",
            {{"m", params.m}, {"A", params.A}, {"rho", params.rho}, {"M", params.M},
             {"R", params.R}, {"k_fric", params.k_fric}, {"g", params.g}}},
           {"thresholds",
            {{"r_traction_end", thresholds.r_traction_end}, {"r_dot_thr", thresholds.r_dot_thr},
             {"r_thr", thresholds.r_thr}, {"r_r2t_done", thresholds.r_r2t_done},
             {"r_max", thresholds.r_max}, {"z_max", thresholds.z_max},
             {"theta_goal", thresholds.theta_goal}}},
           {"phases", phases}};
    return j.dump(2);
}

AeroPolar RunConfig::load_polar() const {
    return polar_path.empty() ? AeroPolar::default_polar() : AeroPolar::load(polar_path);
}

CycleSetup RunConfig::cycle_setup() const {
    CycleSetup setup;
    setup.wind = wind.build();
    setup.params = params;
    setup.polar = load_polar();
    setup.thresholds = thresholds;
    setup.phase_configs = phase_cfg;
    return setup;
}

void write_manifest(const RunConfig& cfg, const std::string& dir) {
    json j{{"config", json::parse(cfg.to_json_text())},
           {"seed", cfg.seed},
           {"build",
            {
#if defined(__clang__)
                {"compiler", "clang " __clang_version__},
#elif defined(__GNUC__)
                {"compiler", "gcc " __VERSION__},
#else
                {"compiler", "unknown"},
#endif
#ifdef _OPENMP
                {"openmp", true},
#else
                {"openmp", false},
#endif
            }}};
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << j.dump(2) << '\n';
}

Policy make_policy(const rl::Td3Agent& agent) {
    // Evaluation-mode policy: deterministic, shared rng is never used.
    return [&agent](const Observation& obs) {
        std::vector<float> v(obs.values.begin(), obs.values.end());
        static thread_local std::mt19937_64 dummy(0);
        auto a = agent.act(v, false, dummy);
        return Action{a[0], a[1]};
    };
}

namespace {

std::vector<float> to_float(const std::vector<double>& v) {
    return std::vector<float>(v.begin(), v.end());
}

// Roll the frozen predecessor agents from a fresh traction reset up to the
// entry of `target`. Returns false if the rollout crashed.
bool roll_to_phase(PumpingEnv& env, Phase target, const RunConfig& cfg,
                   const std::array<const rl::Td3Agent*, 3>& frozen, uint64_t seed) {
    Observation obs = env.reset(Phase::Traction, seed);
    env.set_config(cfg.phase_cfg[0]);
    const Phase order[3] = {Phase::Traction, Phase::T2R, Phase::Retraction};
    for (int pi = 0; pi < 3; ++pi) {
        if (order[pi] == target) return true;
        const rl::Td3Agent* agent = frozen[pi];
        if (!agent) return false;
        if (pi > 0) {
            obs = env.reset(order[pi], env.state(), env.controls(), env.time());
            env.set_config(cfg.phase_cfg[pi]);
        }
        Policy pol = make_policy(*agent);
        while (true) {
            StepOutcome so = env.step(pol(obs));
            obs = so.obs;
            if (so.status.kind == Status::Kind::Goal) break;
            if (so.status.kind == Status::Kind::Failed) return false;
        }
    }
    return true;  // target == R2T: retraction goal state is the entry
}

}  // namespace

TrainPhaseResult train_phase(const RunConfig& cfg, Phase phase, rl::Td3Agent& agent,
                             const std::array<const rl::Td3Agent*, 3>& frozen,
                             const StopCheck& stop_check) {
    const int pi = static_cast<int>(phase);
    const rl::Td3Config& tc = cfg.td3[pi];
    fs::create_directories(cfg.output_dir);

    TrainPhaseResult result;
    result.checkpoint_path =
        (fs::path(cfg.output_dir) / (std::string(phase_name(phase)) + ".td3c")).string();

    std::ofstream log(fs::path(cfg.output_dir) /
                      (std::string("train_") + phase_name(phase) + ".csv"));
    log << "episode,steps,return,energy_kwh,crossings,status\n";
    log.precision(17);

    PumpingEnv env(cfg.wind.build(), cfg.params, cfg.load_polar(), cfg.thresholds);
    std::mt19937_64 train_rng(mix_seed(cfg.seed, 1000 + pi, 0));
    std::uniform_real_distribution<float> uact(-1.0f, 1.0f);

    for (int ep = 0; ep < tc.episodes; ++ep) {
        uint64_t ep_seed = mix_seed(cfg.seed, pi, ep);
        Observation obs;
        if (phase == Phase::Traction) {
            obs = env.reset(Phase::Traction, ep_seed);
            env.set_config(cfg.phase_cfg[0]);
        } else {
            // Entry state from the frozen predecessors; skip seeds that crash.
            bool ok = false;
            for (uint64_t attempt = 0; attempt < 64 && !ok; ++attempt)
                ok = roll_to_phase(env, phase, cfg, frozen,
                                   mix_seed(cfg.seed, 100 + pi, ep * 64 + attempt));
            if (!ok) throw ConfigError("predecessor agents cannot reach phase entry");
            obs = env.reset(phase, env.state(), env.controls(), env.time());
            env.set_config(cfg.phase_cfg[pi]);
        }

        EpisodeStats stats;
        stats.episode = ep;
        double prev_y = std::sin(env.state().phi) * env.state().r * std::sin(env.state().theta);
        while (true) {
            std::array<float, 2> a;
            if (!agent.warmed_up()) {
                a = {uact(train_rng), uact(train_rng)};
            } else {
                a = agent.act(to_float(obs.values), true, train_rng);
            }
            StepOutcome so = env.step(Action{a[0], a[1]});
            agent.note_env_step();

            rl::Transition tr;
            tr.obs = to_float(obs.values);
            tr.action = a;
            tr.reward = static_cast<float>(so.reward);
            tr.next_obs = to_float(so.obs.values);
            // Horizon exhaustion bootstraps (done=false); real terminations do not.
            tr.done = so.status.kind == Status::Kind::Goal ||
                      (so.status.kind == Status::Kind::Failed &&
                       so.status.reason != FailReason::HorizonExhausted);
            agent.store(std::move(tr));

            if (agent.warmed_up() &&
                agent.buffer().size() >= static_cast<size_t>(tc.batch_size))
                agent.train_step(train_rng);

            obs = so.obs;
            stats.steps += 1;
            stats.episode_return += so.reward;
            stats.energy_kwh += so.info.energy_j / kJoulesPerKwh;
            double y = so.info.position.y;
            if ((y > 0.0 && prev_y < 0.0) || (y < 0.0 && prev_y > 0.0)) stats.crossings += 1;
            if (y != 0.0) prev_y = y;

            if (so.status.terminal()) {
                stats.status = so.status;
                break;
            }
        }

        const char* status = stats.status.kind == Status::Kind::Goal
                                 ? "goal"
                                 : fail_reason_name(stats.status.reason);
        log << stats.episode << ',' << stats.steps << ',' << stats.episode_return << ','
            << stats.energy_kwh << ',' << stats.crossings << ',' << status << '\n';
        result.episodes.push_back(stats);

        if ((ep + 1) % 100 == 0) agent.save(result.checkpoint_path, uint32_t(pi));
        if (stop_check && stop_check(result.episodes)) break;
    }

    agent.save(result.checkpoint_path, uint32_t(pi));
    return result;
}

void train(const RunConfig& cfg, std::optional<Phase> only_phase, bool resume) {
    fs::create_directories(cfg.output_dir);
    write_manifest(cfg, cfg.output_dir);

    std::array<std::unique_ptr<rl::Td3Agent>, 4> agents;
    auto ckpt_path = [&cfg](Phase p) {
        return (fs::path(cfg.output_dir) / (std::string(phase_name(p)) + ".td3c")).string();
    };

    for (int pi = 0; pi < 4; ++pi) {
        Phase phase = static_cast<Phase>(pi);
        std::string path = ckpt_path(phase);
        bool train_this = !only_phase || *only_phase == phase;
        bool needed_later = !only_phase || pi < static_cast<int>(*only_phase);
        bool have_ckpt = fs::exists(path);

        if (!train_this) {
            if (needed_later) {
                if (!have_ckpt)
                    throw ConfigError("missing predecessor checkpoint: " + path);
                agents[pi] = std::make_unique<rl::Td3Agent>(rl::Td3Agent::load(path));
            }
            continue;
        }
        if (resume && have_ckpt) {
            agents[pi] = std::make_unique<rl::Td3Agent>(rl::Td3Agent::load(path));
            continue;
        }

        agents[pi] = std::make_unique<rl::Td3Agent>(cfg.td3[pi], mix_seed(cfg.seed, 42, pi));
        std::array<const rl::Td3Agent*, 3> frozen = {
            pi > 0 ? agents[0].get() : nullptr,
            pi > 1 ? agents[1].get() : nullptr,
            pi > 2 ? agents[2].get() : nullptr,
        };
        train_phase(cfg, phase, *agents[pi], frozen);
    }
}

CycleReport evaluate(const RunConfig& cfg, const std::string& checkpoint_dir, int n_episodes,
                     std::vector<CycleResult>* cycles_out) {
    std::array<rl::Td3Agent, 4> agents;
    for (int pi = 0; pi < 4; ++pi) {
        fs::path p = fs::path(checkpoint_dir) /
                     (std::string(phase_name(static_cast<Phase>(pi))) + ".td3c");
        agents[pi] = rl::Td3Agent::load(p.string());
        if (agents[pi].config().obs_dim != observation_dim(static_cast<Phase>(pi)))
            throw ConfigError("checkpoint observation dimension mismatch: " + p.string());
    }
    std::array<Policy, 4> policies = {make_policy(agents[0]), make_policy(agents[1]),
                                      make_policy(agents[2]), make_policy(agents[3])};
    CycleSetup setup = cfg.cycle_setup();

    std::vector<CycleResult> cycles(n_episodes);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_episodes; ++i) {
        cycles[i] = run_cycle(policies, setup, mix_seed(cfg.seed, 7, i));
    }

    CycleReport rep;
    rep.n_episodes = n_episodes;
    for (const CycleResult& c : cycles) {
        bool crashed = c.failed;
        if (!crashed) rep.n_completed += 1;
        for (int pi = 0; pi < 4; ++pi) {
            const PhaseLedgerRow& row = c.ledger.rows[pi];
            if (!row.ran) continue;
            auto& r = rep.rows[pi];
            r.entered += 1;
            if (crashed && static_cast<int>(c.fail_phase) == pi) r.crashed += 1;
            r.mean_duration_s += row.duration_s;
            r.mean_energy_kwh += row.energy_kwh;
            if (!crashed) {
                r.mean_duration_ok_s += row.duration_s;
                r.mean_energy_ok_kwh += row.energy_kwh;
            }
        }
        rep.total_energy_kwh += c.ledger.total_energy_kwh();
        rep.total_duration_s += c.ledger.total_duration_s();
        if (!crashed) {
            rep.total_energy_ok_kwh += c.ledger.total_energy_kwh();
            rep.total_duration_ok_s += c.ledger.total_duration_s();
        }
    }
    for (auto& r : rep.rows) {
        if (r.entered > 0) {
            r.mean_duration_s /= r.entered;
            r.mean_energy_kwh /= r.entered;
            r.mean_power_kw =
                r.mean_duration_s > 0 ? r.mean_energy_kwh * 3600.0 / r.mean_duration_s : 0.0;
        }
        int ok = r.entered - r.crashed;
        if (ok > 0) {
            r.mean_duration_ok_s /= ok;
            r.mean_energy_ok_kwh /= ok;
        }
    }
    if (n_episodes > 0) {
        rep.total_energy_kwh /= n_episodes;
        rep.total_duration_s /= n_episodes;
    }
    if (rep.n_completed > 0) {
        rep.total_energy_ok_kwh /= rep.n_completed;
        rep.total_duration_ok_s /= rep.n_completed;
    }
    if (cycles_out) *cycles_out = std::move(cycles);
    return rep;
}

std::string CycleReport::to_json_text() const {
    json rows_j = json::array();
    for (int pi = 0; pi < 4; ++pi) {
        const auto& r = rows[pi];
        rows_j.push_back({{"phase", kPhaseKeys[pi]},
                          {"entered", r.entered},
                          {"crashed", r.crashed},
                          {"crash_rate", r.crash_rate()},
                          {"mean_duration_s", r.mean_duration_s},
                          {"mean_energy_kwh", r.mean_energy_kwh},
                          {"mean_power_kw", r.mean_power_kw},
                          {"mean_duration_completed_s", r.mean_duration_ok_s},
                          {"mean_energy_completed_kwh", r.mean_energy_ok_kwh}});
    }
    json j{{"n_episodes", n_episodes},
           {"n_completed", n_completed},
           {"rows", rows_j},
           {"total_energy_kwh", total_energy_kwh},
           {"total_duration_s", total_duration_s},
           {"total_energy_completed_kwh", total_energy_ok_kwh},
           {"total_duration_completed_s", total_duration_ok_s}};
    return j.dump(2);
}

std::string CycleReport::to_table_text() const {
    std::ostringstream os;
    os << "phase        entered  crash%   dur[s]    E[kWh]     P[kW]\n";
    os.setf(std::ios::fixed);
    for (int pi = 0; pi < 4; ++pi) {
        const auto& r = rows[pi];
        os.precision(2);
        os << std::string(kPhaseKeys[pi]) << std::string(13 - std::string(kPhaseKeys[pi]).size(), ' ')
           << r.entered << "  " << 100.0 * r.crash_rate() << "  " << r.mean_duration_s << "  ";
        os.precision(4);
        os << r.mean_energy_kwh << "  ";
        os.precision(2);
        os << r.mean_power_kw << "\n";
    }
    os.precision(4);
    os << "total  E=" << total_energy_kwh << " kWh over ";
    os.precision(2);
    os << total_duration_s << " s, " << n_completed << "/" << n_episodes
       << " cycles completed\n";
    return os.str();
}

SimulateResult simulate(const RunConfig& cfg, Phase phase, const std::vector<Action>& script,
                        uint64_t seed) {
    SimulateResult res;
    PumpingEnv env(cfg.wind.build(), cfg.params, cfg.load_polar(), cfg.thresholds);
    Observation obs = env.reset(phase, seed);
    env.set_config(cfg.phase_cfg[static_cast<int>(phase)]);

    size_t i = 0;
    while (true) {
        Action a{0.0, 0.0};
        if (!script.empty()) a = script[std::min(i, script.size() - 1)];
        Action clamped{std::clamp(a.d_alpha, -1.0, 1.0), std::clamp(a.d_psi, -1.0, 1.0)};
        if (clamped.d_alpha != a.d_alpha || clamped.d_psi != a.d_psi)
            res.script_clamped = true;
        StepOutcome so = env.step(clamped);
        res.applied_actions.push_back(clamped);
        const KiteState& s = env.state();
        res.trajectory.push_back({env.time(), phase, s, so.info.position,
                                  env.controls().alpha_deg, env.controls().psi_deg,
                                  so.obs.beta_rad, so.info.w_rel_speed, so.info.tension,
                                  so.info.power_kw, so.reward, so.status});
        obs = so.obs;
        ++i;
        if (so.status.terminal()) {
            res.final_status = so.status;
            break;
        }
    }
    return res;
}

std::vector<Action> load_action_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open action script: " + path);
    std::vector<Action> actions;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Action a;
        if (ls >> a.d_alpha >> a.d_psi) actions.push_back(a);
    }
    return actions;
}

void save_action_script(const std::vector<Action>& actions, const std::string& path) {
    std::ofstream out(path);
    out << "# d_alpha d_psi (degrees per decision step)\n";
    out.precision(17);
    for (const Action& a : actions) out << a.d_alpha << ' ' << a.d_psi << '\n';
}

}  // namespace awe
