#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "awe/plot.hpp"
#include "awe/trainer.hpp"

using namespace awe;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Shrunk problem for fast training-pipeline tests.
RunConfig tiny_run_config(const fs::path& out) {
    RunConfig cfg = RunConfig::defaults();
    cfg.seed = 321;
    cfg.output_dir = out.string();
    cfg.wind.speed = 10.0;
    for (int i = 0; i < 4; ++i) {
        cfg.td3[i].hidden = {16, 12};
        cfg.td3[i].episodes = 3;
        cfg.td3[i].warmup_steps = 40;
        cfg.td3[i].batch_size = 16;
        cfg.phase_cfg[i].horizon = 25;
    }
    return cfg;
}

}  // namespace

TEST_CASE("default episode counts follow the hyperparameter table") {
    RunConfig cfg = RunConfig::defaults();
    CHECK(cfg.td3[0].episodes == 1600);
    CHECK(cfg.td3[1].episodes == 3000);
    CHECK(cfg.td3[2].episodes == 90000);
    CHECK(cfg.td3[3].episodes == 20000);
    CHECK(cfg.td3[0].actor_lr == doctest::Approx(1e-4f));
    CHECK(cfg.td3[1].actor_lr == doctest::Approx(5e-4f));
    CHECK(cfg.td3[2].actor_lr == doctest::Approx(8e-5f));
    CHECK(cfg.td3[3].actor_lr == doctest::Approx(9e-5f));
    CHECK(cfg.td3[0].action_noise == doctest::Approx(0.225f));
    CHECK(cfg.td3[0].warmup_steps == 5000);
    CHECK(cfg.td3[1].warmup_steps == 25000);
    CHECK(cfg.td3[0].gamma == 1.0f);
    CHECK(cfg.td3[2].gamma == doctest::Approx(0.99f));
    CHECK(cfg.td3[0].obs_dim == 3);
    CHECK(cfg.td3[3].obs_dim == 4);
}

TEST_CASE("config json round-trip and partial override") {
    RunConfig cfg = RunConfig::defaults();
    cfg.seed = 99;
    cfg.wind.type = WindSpec::Type::Synthetic;
    cfg.wind.top_speed = 25.0;
    RunConfig back = RunConfig::from_json_text(cfg.to_json_text());
    CHECK(back.seed == 99);
    CHECK(back.wind.type == WindSpec::Type::Synthetic);
    CHECK(back.wind.top_speed == 25.0);
    CHECK(back.td3[2].episodes == cfg.td3[2].episodes);

    RunConfig partial = RunConfig::from_json_text(
        R"({"seed": 5, "phases": {"traction": {"episodes": 7, "gamma": 0.5}}})");
    CHECK(partial.seed == 5);
    CHECK(partial.td3[0].episodes == 7);
    CHECK(partial.td3[0].gamma == doctest::Approx(0.5f));
    CHECK(partial.phase_cfg[0].gamma == doctest::Approx(0.5));
    CHECK(partial.td3[1].episodes == 3000);  // untouched default
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(RunConfig::from_json_text("{nope"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"wind": {"type": "tornado"}})"), ConfigError);
    CHECK_THROWS_AS(
        RunConfig::from_json_text(R"({"wind": {"type": "gridded", "path": "/no/such.awew"}})"),
        ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"polar": "/no/such.polar"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_file("/no/such/config.json"), ConfigError);
}

TEST_CASE("simulate: deterministic, replayable, clamp-flagged") {
    RunConfig cfg = tiny_run_config(temp_dir("awe_sim_test"));

    SUBCASE("zero-action script is deterministic") {
        SimulateResult a = simulate(cfg, Phase::Traction, {}, 17);
        SimulateResult b = simulate(cfg, Phase::Traction, {}, 17);
        REQUIRE(a.trajectory.size() == b.trajectory.size());
        for (size_t i = 0; i < a.trajectory.size(); ++i) {
            REQUIRE(a.trajectory[i].state.theta == b.trajectory[i].state.theta);
            REQUIRE(a.trajectory[i].state.r == b.trajectory[i].state.r);
            REQUIRE(a.trajectory[i].power_kw == b.trajectory[i].power_kw);
        }
    }
    SUBCASE("replaying the exported action log reproduces the trajectory bit-exactly") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<Action> script;
        for (int i = 0; i < 40; ++i) script.push_back({u(rng), u(rng)});

        SimulateResult first = simulate(cfg, Phase::Traction, script, 18);
        fs::path log = fs::path(cfg.output_dir) / "actions.csv";
        save_action_script(first.applied_actions, log.string());
        std::vector<Action> replay_script = load_action_script(log.string());
        SimulateResult second = simulate(cfg, Phase::Traction, replay_script, 18);

        REQUIRE(first.trajectory.size() == second.trajectory.size());
        for (size_t i = 0; i < first.trajectory.size(); ++i) {
            REQUIRE(first.trajectory[i].state.theta == second.trajectory[i].state.theta);
            REQUIRE(first.trajectory[i].state.phi == second.trajectory[i].state.phi);
            REQUIRE(first.trajectory[i].state.r == second.trajectory[i].state.r);
            REQUIRE(first.trajectory[i].reward == second.trajectory[i].reward);
        }
    }
    SUBCASE("out-of-bound script actions are clamped and flagged") {
        SimulateResult res = simulate(cfg, Phase::Traction, {{5.0, -7.0}}, 19);
        CHECK(res.script_clamped);
        for (const Action& a : res.applied_actions) {
            REQUIRE(std::abs(a.d_alpha) <= 1.0);
            REQUIRE(std::abs(a.d_psi) <= 1.0);
        }
    }
}

TEST_CASE("train_phase smoke run is deterministic and resumable") {
    fs::path out1 = temp_dir("awe_train_det1");
    fs::path out2 = temp_dir("awe_train_det2");
    RunConfig cfg1 = tiny_run_config(out1);
    RunConfig cfg2 = tiny_run_config(out2);

    rl::Td3Agent agent1(cfg1.td3[0], mix_seed(cfg1.seed, 42, 0));
    rl::Td3Agent agent2(cfg2.td3[0], mix_seed(cfg2.seed, 42, 0));
    TrainPhaseResult r1 = train_phase(cfg1, Phase::Traction, agent1, {});
    TrainPhaseResult r2 = train_phase(cfg2, Phase::Traction, agent2, {});

    CHECK(r1.episodes.size() == 3);
    CHECK(fs::exists(r1.checkpoint_path));
    rl::Td3Agent loaded = rl::Td3Agent::load(r1.checkpoint_path);
    CHECK(loaded.config().obs_dim == 3);

    // identical seeds -> byte-identical metrics logs
    CHECK(slurp(out1 / "train_traction.csv") == slurp(out2 / "train_traction.csv"));

    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("evaluate: report arithmetic holds and checkpoints stay untouched") {
    fs::path out = temp_dir("awe_eval_test");
    RunConfig cfg = tiny_run_config(out);

    // minimal checkpoints: untrained tiny agents with the right dimensions
    for (int pi = 0; pi < 4; ++pi) {
        rl::Td3Config tc = cfg.td3[pi];
        tc.obs_dim = observation_dim(static_cast<Phase>(pi));
        rl::Td3Agent agent(tc, 100 + pi);
        agent.save((out / (std::string(phase_name(static_cast<Phase>(pi))) + ".td3c")).string(),
                   uint32_t(pi));
    }
    std::string before = slurp(out / "traction.td3c");

    std::vector<CycleResult> cycles;
    CycleReport rep = evaluate(cfg, out.string(), 4, &cycles);
    CHECK(rep.n_episodes == 4);
    CHECK(cycles.size() == 4);
    for (const auto& row : rep.rows) {
        if (row.entered > 0 && row.mean_duration_s > 0.0) {
            double identity = row.mean_energy_kwh * 3600.0 / row.mean_duration_s;
            REQUIRE(std::abs(identity - row.mean_power_kw) <=
                    1e-9 * std::max(1.0, std::abs(identity)));
        }
    }
    // single-episode report equals that episode's ledger
    CycleReport one = evaluate(cfg, out.string(), 1, nullptr);
    CHECK(one.rows[0].entered == 1);

    CHECK(slurp(out / "traction.td3c") == before);  // read-only access

    // dimension mismatch rejected: swap in a wrong-size checkpoint
    rl::Td3Config bad = cfg.td3[0];
    bad.obs_dim = 7;
    rl::Td3Agent bad_agent(bad, 1);
    bad_agent.save((out / "traction.td3c").string(), 0);
    CHECK_THROWS_AS(evaluate(cfg, out.string(), 1, nullptr), ConfigError);

    fs::remove_all(out);
}

TEST_CASE("manifest is written and reproducible") {
    fs::path out = temp_dir("awe_manifest_test");
    RunConfig cfg = tiny_run_config(out);
    write_manifest(cfg, out.string());
    std::string a = slurp(out / "manifest.json");
    write_manifest(cfg, out.string());
    std::string b = slurp(out / "manifest.json");
    CHECK(a == b);
    CHECK(a.find("\"seed\"") != std::string::npos);
    CHECK(a.find("\"compiler\"") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("mix_seed decorrelates streams") {
    CHECK(mix_seed(1, 0, 0) != mix_seed(1, 0, 1));
    CHECK(mix_seed(1, 0, 0) != mix_seed(1, 1, 0));
    CHECK(mix_seed(1, 0, 0) != mix_seed(2, 0, 0));
    CHECK(mix_seed(5, 3, 9) == mix_seed(5, 3, 9));
}

TEST_CASE("plot: renders, is deterministic, rejects bad input") {
    fs::path out = temp_dir("awe_plot_test");
    RunConfig cfg = tiny_run_config(out);
    SimulateResult res = simulate(cfg, Phase::Traction, {}, 20);
    fs::path csv = out / "traj.csv";
    write_trajectory_csv(res.trajectory, csv.string());

    SUBCASE("all three images emitted, byte-identical across runs") {
        auto files1 = awe::plot::render_trajectory(csv.string(), (out / "p1").string());
        REQUIRE(files1.size() == 3);
        for (const auto& f : files1) REQUIRE(fs::exists(f));
        auto files2 = awe::plot::render_trajectory(csv.string(), (out / "p2").string());
        for (size_t i = 0; i < files1.size(); ++i)
            REQUIRE(slurp(files1[i]) == slurp(files2[i]));
    }
    SUBCASE("single-row file renders a degenerate but valid plot") {
        fs::path one = out / "one.csv";
        write_trajectory_csv({res.trajectory.front()}, one.string());
        auto files = awe::plot::render_trajectory(one.string(), (out / "p3").string());
        CHECK(files.size() == 3);
        CHECK(slurp(files[0]).find("<svg") != std::string::npos);
    }
    SUBCASE("empty trajectory errors with a message") {
        fs::path empty = out / "empty.csv";
        write_trajectory_csv({}, empty.string());
        CHECK_THROWS_AS(awe::plot::render_trajectory(empty.string(), (out / "p4").string()),
                        awe::plot::PlotError);
        CHECK_THROWS_AS(
            awe::plot::render_trajectory((out / "missing.csv").string(), (out / "p5").string()),
            awe::plot::PlotError);
    }
    fs::remove_all(out);
}
