#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "awe/env.hpp"
#include "awe/td3.hpp"

namespace awe {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct WindSpec {
    enum class Type { Constant, Gridded, Synthetic } type = Type::Constant;
    double speed = 10.0;       // constant
    std::string path;          // gridded
    bool frozen = false;       // gridded
    uint64_t seed = 0;         // synthetic
    int n_modes = 32;          // synthetic
    double top_speed = 30.0;   // synthetic
    double height = 100.0;     // synthetic

    std::shared_ptr<const WindField> build() const;
};

// One JSON document drives a whole run; omitted fields fall back to the
// published defaults.
struct RunConfig {
    uint64_t seed = 1;
    std::string output_dir = "out";
    WindSpec wind;
    SystemParams params;
    std::string polar_path;  // empty -> built-in placeholder polar
    TransitionThresholds thresholds;
    std::array<rl::Td3Config, 4> td3;       // indexed by Phase
    std::array<PhaseConfig, 4> phase_cfg;   // indexed by Phase

    static RunConfig defaults();
    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;

    AeroPolar load_polar() const;
    CycleSetup cycle_setup() const;
};

// Per-phase defaults from the published hyperparameter table.
rl::Td3Config default_td3_config(Phase p);

struct EpisodeStats {
    int episode = 0;
    int steps = 0;
    double episode_return = 0.0;
    double energy_kwh = 0.0;
    int crossings = 0;  // ground-track crossings of the wind axis (y = 0)
    Status status;
};

struct TrainPhaseResult {
    std::vector<EpisodeStats> episodes;
    std::string checkpoint_path;
};

// Sequential four-phase training; later phases get entry states by rolling
// the earlier frozen agents. Writes checkpoints, per-episode metrics CSVs,
// and a manifest into config.output_dir.
// stop_check, if set, is polled after each episode; returning true ends the
// phase early (used by the bounded acceptance runs).
using StopCheck = std::function<bool(const std::vector<EpisodeStats>&)>;

TrainPhaseResult train_phase(const RunConfig& cfg, Phase phase, rl::Td3Agent& agent,
                             const std::array<const rl::Td3Agent*, 3>& frozen_predecessors,
                             const StopCheck& stop_check = {});

void train(const RunConfig& cfg, std::optional<Phase> only_phase = std::nullopt,
           bool resume = false);

struct CycleReportRow {
    int entered = 0;
    int crashed = 0;
    double mean_duration_s = 0.0;
    double mean_energy_kwh = 0.0;
    double mean_power_kw = 0.0;
    // Means over non-crashed episodes only.
    double mean_duration_ok_s = 0.0;
    double mean_energy_ok_kwh = 0.0;
    double crash_rate() const { return entered > 0 ? double(crashed) / entered : 0.0; }
};

struct CycleReport {
    int n_episodes = 0;
    int n_completed = 0;
    std::array<CycleReportRow, 4> rows;
    double total_energy_kwh = 0.0;    // mean over all episodes
    double total_duration_s = 0.0;
    double total_energy_ok_kwh = 0.0; // mean over completed cycles
    double total_duration_ok_s = 0.0;

    std::string to_json_text() const;
    std::string to_table_text() const;
};

// Frozen-policy evaluation over n full pumping cycles. Episodes fan out
// across OpenMP threads; results merge deterministically by episode index.
CycleReport evaluate(const RunConfig& cfg, const std::string& checkpoint_dir, int n_episodes,
                     std::vector<CycleResult>* cycles_out = nullptr);

Policy make_policy(const rl::Td3Agent& agent);

// Scripted (non-learning) rollout of one phase; used by physics oracles.
struct SimulateResult {
    std::vector<TrajectoryPoint> trajectory;
    std::vector<Action> applied_actions;  // post-clamp
    Status final_status;
    bool script_clamped = false;
};

SimulateResult simulate(const RunConfig& cfg, Phase phase,
                        const std::vector<Action>& script, uint64_t seed);

std::vector<Action> load_action_script(const std::string& path);
void save_action_script(const std::vector<Action>& actions, const std::string& path);

void write_manifest(const RunConfig& cfg, const std::string& dir);

uint64_t mix_seed(uint64_t master, uint64_t stream, uint64_t index);

}  // namespace awe
