#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "awe/plot.hpp"
#include "awe/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalFailure = 3;

awe::RunConfig load_config(const std::string& path) {
    awe::RunConfig cfg = awe::RunConfig::from_file(path);
    if (const char* s = std::getenv("AWE_SEED")) cfg.seed = std::stoull(s);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pumping airborne-wind-energy simulator and TD3 trainer"};
    app.require_subcommand(1);

    std::string config_path, phase_str, checkpoint_dir, script_path, wind_override, out_dir;
    int n_episodes = 100;
    bool resume = false;
    std::vector<std::string> traj_files;

    auto* train_cmd = app.add_subcommand("train", "Train the four phase agents sequentially");
    train_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
    train_cmd->add_option("--phase", phase_str, "Train a single phase")
        ->check(CLI::IsMember({"traction", "t2r", "retraction", "r2t"}));
    train_cmd->add_flag("--resume", resume, "Skip phases with existing checkpoints");

    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate full pumping cycles");
    eval_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
    eval_cmd->add_option("--checkpoints", checkpoint_dir, "Directory with <phase>.td3c files")
        ->required();
    eval_cmd->add_option("--episodes", n_episodes, "Number of evaluation cycles");
    eval_cmd->add_option("--wind", wind_override,
                         "Override wind: constant:<speed> | gridded:<path> | synthetic:<seed>");

    auto* sim_cmd = app.add_subcommand("simulate", "Run a scripted (non-learning) rollout");
    sim_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sim_cmd->add_option("--script", script_path, "Action script (d_alpha d_psi per line)");
    sim_cmd->add_option("--phase", phase_str, "Phase to roll out (default traction)")
        ->check(CLI::IsMember({"traction", "t2r", "retraction", "r2t"}));

    auto* plot_cmd = app.add_subcommand("plot", "Render trajectory CSVs to SVG");
    plot_cmd->add_option("trajectories", traj_files, "Trajectory CSV files")->required();
    plot_cmd->add_option("--out", out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            awe::RunConfig cfg = load_config(config_path);
            std::optional<awe::Phase> only;
            if (!phase_str.empty()) only = awe::phase_from_name(phase_str);
            awe::train(cfg, only, resume);
            std::cout << "checkpoints written to " << cfg.output_dir << "\n";
        } else if (*eval_cmd) {
            awe::RunConfig cfg = load_config(config_path);
            if (!wind_override.empty()) {
                auto colon = wind_override.find(':');
                std::string kind = wind_override.substr(0, colon);
                std::string arg =
                    colon == std::string::npos ? "" : wind_override.substr(colon + 1);
                if (kind == "constant") {
                    cfg.wind.type = awe::WindSpec::Type::Constant;
                    cfg.wind.speed = std::stod(arg);
                } else if (kind == "gridded") {
                    cfg.wind.type = awe::WindSpec::Type::Gridded;
                    cfg.wind.path = arg;
                } else if (kind == "synthetic") {
                    cfg.wind.type = awe::WindSpec::Type::Synthetic;
                    cfg.wind.seed = std::stoull(arg);
                } else {
                    throw awe::ConfigError("bad --wind override: " + wind_override);
                }
            }
            std::vector<awe::CycleResult> cycles;
            awe::CycleReport rep = awe::evaluate(cfg, checkpoint_dir, n_episodes, &cycles);
            fs::create_directories(cfg.output_dir);
            awe::write_manifest(cfg, cfg.output_dir);
            std::ofstream rj(fs::path(cfg.output_dir) / "report.json");
            rj << rep.to_json_text() << '\n';
            for (size_t i = 0; i < cycles.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "cycle_%04zu.csv", i);
                awe::write_trajectory_csv(cycles[i].trajectory,
                                          (fs::path(cfg.output_dir) / name).string());
            }
            std::cout << rep.to_table_text();
        } else if (*sim_cmd) {
            awe::RunConfig cfg = load_config(config_path);
            awe::Phase phase = awe::Phase::Traction;
            if (!phase_str.empty()) phase = *awe::phase_from_name(phase_str);
            std::vector<awe::Action> script;
            if (!script_path.empty()) script = awe::load_action_script(script_path);
            awe::SimulateResult res = awe::simulate(cfg, phase, script, cfg.seed);
            fs::create_directories(cfg.output_dir);
            awe::write_manifest(cfg, cfg.output_dir);
            awe::write_trajectory_csv(res.trajectory,
                                      (fs::path(cfg.output_dir) / "trajectory.csv").string());
            awe::save_action_script(res.applied_actions,
                                    (fs::path(cfg.output_dir) / "actions.csv").string());
            if (res.script_clamped)
                std::cerr << "warning: script actions exceeded the +/-1 degree bound and were "
                             "clamped\n";
            std::cout << "simulated " << res.trajectory.size() << " steps, final status: "
                      << (res.final_status.kind == awe::Status::Kind::Goal
                              ? "goal"
                              : awe::fail_reason_name(res.final_status.reason))
                      << "\n";
        } else if (*plot_cmd) {
            for (const std::string& f : traj_files) {
                for (const std::string& out : awe::plot::render_trajectory(f, out_dir))
                    std::cout << out << "\n";
            }
        }
    } catch (const awe::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const awe::plot::PlotError& e) {
        std::cerr << "plot error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const awe::FormatError& e) {
        std::cerr << "file format error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const awe::rl::CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const awe::rl::NumericalDivergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
