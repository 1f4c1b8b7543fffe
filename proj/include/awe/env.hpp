#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "awe/dynamics.hpp"
#include "awe/wind.hpp"

namespace awe {

enum class Phase { Traction, T2R, Retraction, R2T };

const char* phase_name(Phase p);
std::optional<Phase> phase_from_name(const std::string& name);

enum class FailReason {
    GroundContact,
    AlignmentSingularity,
    TetherOverrun,
    AltitudeOverrun,
    HorizonExhausted,
};

const char* fail_reason_name(FailReason r);

struct Status {
    enum class Kind { Running, Goal, Failed } kind = Kind::Running;
    FailReason reason = FailReason::GroundContact;

    bool terminal() const { return kind != Kind::Running; }
    static Status running() { return {Kind::Running, {}}; }
    static Status goal() { return {Kind::Goal, {}}; }
    static Status failed(FailReason r) { return {Kind::Failed, r}; }
};

// Normalized network inputs plus the raw angles they came from.
// phi is populated for the R2T phase only.
struct Observation {
    std::vector<double> values;  // each in [-1, 1]
    double alpha_deg = 0.0;
    double beta_rad = 0.0;
    double psi_deg = 0.0;
    double phi_rad = 0.0;
};

int observation_dim(Phase p);

// Per-step control increments in degrees; clamped to +/-1 degree.
struct Action {
    double d_alpha = 0.0;
    double d_psi = 0.0;
};

struct TransitionThresholds {
    double r_traction_end = 100.0;  // m, traction goal / T2R entry
    double r_dot_thr = 0.2;         // m/s, T2R goal
    double r_thr = 27.0;            // m, retraction goal / R2T entry
    double r_r2t_done = 22.0;       // m, rewind complete before new traction
    double r_max = 130.0;           // m, tether overrun
    double z_max = 100.0;           // m, altitude ceiling
    double theta_goal = M_PI / 4;   // rad, R2T goal
    double phi_goal_half_width = M_PI / 2;  // R2T goal: |phi| <= this
};

struct PhaseConfig {
    int horizon = 3000;          // decision steps
    double gamma = 1.0;
    double motor_force = 1200.0;  // F^m, N (Retraction/R2T)
    double dt_decision = 0.1;     // s
    double dt_sub = 1e-3;         // s
};

PhaseConfig default_phase_config(Phase p);

inline constexpr double kJoulesPerKwh = 3.6e6;

// Appendix-C reward structure. Status with reason HorizonExhausted is treated
// as Running for reward purposes (no failure penalty at horizon).
double penalty_schedule(int k);
double reward_traction(double delta_e_kwh, const Status& st);
double reward_t2r(double theta, double r_dot, const Status& st, int k);
double reward_retraction(double r_dot, double w_rel_speed, double r, int k, const Status& st,
                         const PhaseConfig& cfg);
double reward_r2t(double r_dot, double psi_prev_rad, double psi_now_rad, double phi0, int k,
                  const Status& st);

struct StepInfo {
    double energy_j = 0.0;
    double power_kw = 0.0;
    double tension = 0.0;
    double w_rel_speed = 0.0;
    Vec3 position;  // world
    bool slack = false;
};

struct StepOutcome {
    Observation obs;
    double reward = 0.0;
    Status status;
    StepInfo info;
};

struct EpisodeOver : std::runtime_error {
    EpisodeOver() : std::runtime_error("step() called after episode termination") {}
};

// One pumping-cycle phase as an episodic RL environment. Decision step
// applies clamped control increments, integrates 100 physics substeps,
// evaluates the phase reward and termination rules.
class PumpingEnv {
  public:
    PumpingEnv(std::shared_ptr<const WindField> wind, SystemParams params, AeroPolar polar,
               TransitionThresholds thresholds = {});

    // Fresh traction start: phi ~ U[-pi/2, pi/2], theta ~ U[pi/12, pi/3],
    // r = 20 m, zero velocities, alpha/psi uniform in their ranges. For
    // time-varying wind the episode clock offset is also drawn from the seed.
    Observation reset(Phase phase, uint64_t seed);

    // Later phases inherit the previous phase's end state.
    Observation reset(Phase phase, const KiteState& inherited, const ControlAngles& ctrl,
                      double t0);

    StepOutcome step(const Action& action);

    Phase phase() const { return phase_; }
    const KiteState& state() const { return state_; }
    const ControlAngles& controls() const { return ctrl_; }
    double time() const { return t_; }
    int step_index() const { return k_; }
    bool done() const { return done_; }
    double phi0() const { return phi0_; }
    const PhaseConfig& config() const { return cfg_; }
    void set_config(const PhaseConfig& cfg) { cfg_ = cfg; }
    const TransitionThresholds& thresholds() const { return thresholds_; }
    const SystemParams& params() const { return params_; }

    // Observation for the current state (used by callers at phase entry).
    Observation observe() const;

  private:
    Status check_termination(const StepDiagnostics& diag, bool alignment_failure);
    bool goal_reached() const;

    std::shared_ptr<const WindField> wind_;
    SystemParams params_;
    AeroPolar polar_;
    TransitionThresholds thresholds_;
    PhaseConfig cfg_;

    Phase phase_ = Phase::Traction;
    KiteState state_;
    ControlAngles ctrl_;
    double t_ = 0.0;
    int k_ = 0;
    double phi0_ = 0.0;         // kite azimuth at R2T entry
    double psi_prev_deg_ = 0.0; // bank angle at previous decision step
    bool done_ = true;
};

// ---- Full-cycle execution -------------------------------------------------

using Policy = std::function<Action(const Observation&)>;

struct PhaseLedgerRow {
    bool ran = false;
    double duration_s = 0.0;
    double energy_kwh = 0.0;
    int steps = 0;
    double avg_power_kw() const {
        return duration_s > 0.0 ? energy_kwh * 3600.0 / duration_s : 0.0;
    }
};

struct EnergyLedger {
    std::array<PhaseLedgerRow, 4> rows;  // indexed by Phase
    std::vector<double> power_trace_kw;  // one entry per decision step

    double total_energy_kwh() const;
    double total_duration_s() const;
};

struct TrajectoryPoint {
    double t;
    Phase phase;
    KiteState state;
    Vec3 position;
    double alpha_deg, psi_deg, beta_rad;
    double w_rel_speed, tension, power_kw, reward;
    Status status;
};

struct CycleResult {
    EnergyLedger ledger;
    std::vector<TrajectoryPoint> trajectory;
    bool failed = false;
    Phase fail_phase = Phase::Traction;
    FailReason fail_reason = FailReason::GroundContact;
    bool r2t_skipped = false;
};

struct CycleSetup {
    std::shared_ptr<const WindField> wind;
    SystemParams params;
    AeroPolar polar = AeroPolar::default_polar();
    TransitionThresholds thresholds;
    std::array<PhaseConfig, 4> phase_configs = {
        default_phase_config(Phase::Traction),
        default_phase_config(Phase::T2R),
        default_phase_config(Phase::Retraction),
        default_phase_config(Phase::R2T),
    };
};

// Traction -> T2R -> Retraction -> (R2T, skipped when the kite already
// satisfies the goal configuration) with threshold-driven transitions.
CycleResult run_cycle(const std::array<Policy, 4>& policies, const CycleSetup& setup,
                      uint64_t seed);

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj, const std::string& path);

}  // namespace awe
