#include "awe/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace awe {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double wrap_pi(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double indicator(double x) { return x > 0.0 ? 1.0 : 0.0; }

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Traction: return "traction";
        case Phase::T2R: return "t2r";
        case Phase::Retraction: return "retraction";
        case Phase::R2T: return "r2t";
    }
    return "?";
}

std::optional<Phase> phase_from_name(const std::string& name) {
    if (name == "traction") return Phase::Traction;
    if (name == "t2r") return Phase::T2R;
    if (name == "retraction") return Phase::Retraction;
    if (name == "r2t") return Phase::R2T;
    return std::nullopt;
}

const char* fail_reason_name(FailReason r) {
    switch (r) {
        case FailReason::GroundContact: return "GroundContact";
        case FailReason::AlignmentSingularity: return "AlignmentSingularity";
        case FailReason::TetherOverrun: return "TetherOverrun";
        case FailReason::AltitudeOverrun: return "AltitudeOverrun";
        case FailReason::HorizonExhausted: return "HorizonExhausted";
    }
    return "?";
}

int observation_dim(Phase p) { return p == Phase::R2T ? 4 : 3; }

PhaseConfig default_phase_config(Phase p) {
    PhaseConfig cfg;
    switch (p) {
        case Phase::Traction: cfg.horizon = 3000; cfg.gamma = 1.0; break;
        case Phase::T2R: cfg.horizon = 1500; cfg.gamma = 1.0; break;
        case Phase::Retraction: cfg.horizon = 3000; cfg.gamma = 0.99; break;
        case Phase::R2T: cfg.horizon = 1500; cfg.gamma = 0.99; break;
    }
    return cfg;
}

double penalty_schedule(int k) { return -100.0 / std::pow(double(k), 0.2); }

double reward_traction(double delta_e_kwh, const Status& st) {
    if (st.kind == Status::Kind::Failed && st.reason != FailReason::HorizonExhausted)
        return -0.1;
    return delta_e_kwh;
}

double reward_t2r(double theta, double r_dot, const Status& st, int k) {
    if (st.kind == Status::Kind::Goal) return 100.0;
    if (st.kind == Status::Kind::Failed && st.reason != FailReason::HorizonExhausted)
        return penalty_schedule(k);
    return std::cos(theta) / 2.0 - r_dot / 10.0;
}

double reward_retraction(double r_dot, double w_rel_speed, double r, int k, const Status& st,
                         const PhaseConfig& cfg) {
    if (st.kind == Status::Kind::Goal)
        return (cfg.horizon - k) * cfg.motor_force / 100.0;
    if (st.kind == Status::Kind::Failed && st.reason != FailReason::HorizonExhausted)
        return 20.0 - r;
    return -(w_rel_speed / 100.0) * indicator(r_dot) +
           (-r_dot / 10.0 + (100.0 - w_rel_speed) / 200.0) * indicator(-r_dot);
}

double reward_r2t(double r_dot, double psi_prev_rad, double psi_now_rad, double phi0, int k,
                  const Status& st) {
    if (st.kind == Status::Kind::Goal) return 600.0;
    if (st.kind == Status::Kind::Failed && st.reason != FailReason::HorizonExhausted)
        return penalty_schedule(k);
    if (phi0 * psi_now_rad >= 0.0) {
        return -0.2 * sign_of(r_dot) + 5.0 * (psi_prev_rad - psi_now_rad) * sign_of(psi_now_rad);
    }
    return -indicator(r_dot) / 2.0 - indicator(-r_dot) / 10.0;
}

PumpingEnv::PumpingEnv(std::shared_ptr<const WindField> wind, SystemParams params,
                       AeroPolar polar, TransitionThresholds thresholds)
    : wind_(std::move(wind)), params_(params), polar_(std::move(polar)),
      thresholds_(thresholds) {}

Observation PumpingEnv::reset(Phase phase, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    KiteState s;
    s.phi = -M_PI / 2 + M_PI * u01(rng);
    s.theta = M_PI / 12 + (M_PI / 3 - M_PI / 12) * u01(rng);
    s.r = 20.0;

    ControlAngles ctrl;
    ctrl.alpha_deg = kAlphaMinDeg + (kAlphaMaxDeg - kAlphaMinDeg) * u01(rng);
    ctrl.psi_deg = kPsiMinDeg + (kPsiMaxDeg - kPsiMinDeg) * u01(rng);

    double t0 = 1000.0 * u01(rng);
    return reset(phase, s, ctrl, t0);
}

Observation PumpingEnv::reset(Phase phase, const KiteState& inherited,
                              const ControlAngles& ctrl, double t0) {
    phase_ = phase;
    state_ = inherited;
    ctrl_ = ctrl;
    ctrl_.alpha_deg = clamp(ctrl_.alpha_deg, kAlphaMinDeg, kAlphaMaxDeg);
    ctrl_.psi_deg = clamp(ctrl_.psi_deg, kPsiMinDeg, kPsiMaxDeg);
    t_ = t0;
    k_ = 0;
    done_ = false;
    cfg_ = default_phase_config(phase);
    phi0_ = wrap_pi(state_.phi);
    psi_prev_deg_ = ctrl_.psi_deg;
    return observe();
}

Observation PumpingEnv::observe() const {
    Observation obs;
    obs.alpha_deg = ctrl_.alpha_deg;
    obs.psi_deg = ctrl_.psi_deg;
    obs.phi_rad = wrap_pi(state_.phi);
    try {
        Vec3 pos = spherical_to_world(state_);
        Vec3 w = wind_->sample(pos.x, pos.y, pos.z, t_).vec();
        LocalFrame frame = local_frame(state_.theta, state_.phi);
        obs.beta_rad = beta_angle(relative_wind(state_, w, frame));
    } catch (const std::runtime_error&) {
        obs.beta_rad = 0.0;  // degenerate wind or out-of-domain query
    }

    obs.values = {
        2.0 * (obs.alpha_deg - kAlphaMinDeg) / (kAlphaMaxDeg - kAlphaMinDeg) - 1.0,
        obs.beta_rad / (M_PI / 2),
        obs.psi_deg / kPsiMaxDeg,
    };
    if (phase_ == Phase::R2T) obs.values.push_back(obs.phi_rad / M_PI);
    for (double& v : obs.values) v = clamp(v, -1.0, 1.0);
    return obs;
}

bool PumpingEnv::goal_reached() const {
    switch (phase_) {
        case Phase::Traction:
            return state_.r >= thresholds_.r_traction_end;
        case Phase::T2R:
            return state_.r_dot < thresholds_.r_dot_thr;
        case Phase::Retraction:
            return state_.r <= thresholds_.r_thr;
        case Phase::R2T:
            return std::abs(wrap_pi(state_.phi)) <= thresholds_.phi_goal_half_width &&
                   state_.theta < thresholds_.theta_goal && state_.r <= thresholds_.r_r2t_done;
    }
    return false;
}

Status PumpingEnv::check_termination(const StepDiagnostics& diag, bool alignment_failure) {
    if (alignment_failure) return Status::failed(FailReason::AlignmentSingularity);
    if (diag.ground_contact || diag.min_z <= 0.0)
        return Status::failed(FailReason::GroundContact);
    if (diag.max_r > thresholds_.r_max) return Status::failed(FailReason::TetherOverrun);
    if (diag.max_z > thresholds_.z_max) return Status::failed(FailReason::AltitudeOverrun);
    if (goal_reached()) return Status::goal();
    if (k_ >= cfg_.horizon) return Status::failed(FailReason::HorizonExhausted);
    return Status::running();
}

StepOutcome PumpingEnv::step(const Action& action) {
    if (done_) throw EpisodeOver();
    ++k_;

    psi_prev_deg_ = ctrl_.psi_deg;
    ctrl_.alpha_deg = clamp(ctrl_.alpha_deg + clamp(action.d_alpha, -1.0, 1.0),
                            kAlphaMinDeg, kAlphaMaxDeg);
    ctrl_.psi_deg = clamp(ctrl_.psi_deg + clamp(action.d_psi, -1.0, 1.0),
                          kPsiMinDeg, kPsiMaxDeg);

    TetherMode mode = (phase_ == Phase::Retraction || phase_ == Phase::R2T)
                          ? TetherMode::retraction(cfg_.motor_force)
                          : TetherMode::traction();

    const WindField* wf = wind_.get();
    WindSampler sampler = [wf](double x, double y, double z, double t) {
        return wf->sample(x, y, z, t).vec();
    };

    int n_sub = static_cast<int>(std::lround(cfg_.dt_decision / cfg_.dt_sub));
    bool alignment_failure = false;
    IntegrateResult ir;
    ir.state = state_;
    try {
        ir = integrate_step(state_, ctrl_, sampler, mode, polar_, params_, t_, cfg_.dt_sub,
                            n_sub);
    } catch (const AlignmentSingularity&) {
        alignment_failure = true;
    } catch (const PolarSingularity&) {
        alignment_failure = true;  // same failure class at the env level
    } catch (const AboveDomain&) {
        ir.diag.max_z = thresholds_.z_max + 1.0;  // kite left the wind data
    } catch (const BelowGround&) {
        ir.diag.ground_contact = true;
    }

    state_ = ir.state;
    t_ += ir.diag.substeps_done * cfg_.dt_sub;

    Status st = check_termination(ir.diag, alignment_failure);

    StepOutcome out;
    out.status = st;
    out.info.energy_j = ir.energy_j;
    out.info.power_kw = ir.energy_j / cfg_.dt_decision / 1000.0;
    out.info.tension = ir.diag.last_tension;
    out.info.w_rel_speed = ir.diag.last_wr;
    out.info.position = spherical_to_world(state_);
    out.info.slack = ir.diag.slack;

    double psi_prev_rad = psi_prev_deg_ * M_PI / 180.0;
    double psi_now_rad = ctrl_.psi_deg * M_PI / 180.0;
    switch (phase_) {
        case Phase::Traction:
            out.reward = reward_traction(ir.energy_j / kJoulesPerKwh, st);
            break;
        case Phase::T2R:
            out.reward = reward_t2r(state_.theta, state_.r_dot, st, k_);
            break;
        case Phase::Retraction:
            out.reward = reward_retraction(state_.r_dot, out.info.w_rel_speed, state_.r, k_,
                                           st, cfg_);
            break;
        case Phase::R2T:
            out.reward = reward_r2t(state_.r_dot, psi_prev_rad, psi_now_rad, phi0_, k_, st);
            break;
    }

    done_ = st.terminal();
    out.obs = observe();
    return out;
}

double EnergyLedger::total_energy_kwh() const {
    double e = 0.0;
    for (const auto& r : rows) e += r.energy_kwh;
    return e;
}

double EnergyLedger::total_duration_s() const {
    double d = 0.0;
    for (const auto& r : rows) d += r.duration_s;
    return d;
}

CycleResult run_cycle(const std::array<Policy, 4>& policies, const CycleSetup& setup,
                      uint64_t seed) {
    CycleResult res;
    PumpingEnv env(setup.wind, setup.params, setup.polar, setup.thresholds);

    Observation obs = env.reset(Phase::Traction, seed);
    env.set_config(setup.phase_configs[0]);

    const Phase order[4] = {Phase::Traction, Phase::T2R, Phase::Retraction, Phase::R2T};
    for (int pi = 0; pi < 4; ++pi) {
        Phase phase = order[pi];
        if (pi > 0) {
            obs = env.reset(phase, env.state(), env.controls(), env.time());
            env.set_config(setup.phase_configs[pi]);
        }

        if (phase == Phase::R2T) {
            const KiteState& s = env.state();
            double phi = std::atan2(std::sin(s.phi), std::cos(s.phi));
            bool positioned = std::abs(phi) <= setup.thresholds.phi_goal_half_width &&
                              s.theta < setup.thresholds.theta_goal &&
                              s.r <= setup.thresholds.r_r2t_done;
            if (positioned) {
                res.r2t_skipped = true;
                break;
            }
        }

        auto& row = res.ledger.rows[pi];
        row.ran = true;
        while (true) {
            Action a = policies[pi](obs);
            StepOutcome so = env.step(a);
            obs = so.obs;

            row.steps += 1;
            row.duration_s += env.config().dt_decision;
            row.energy_kwh += so.info.energy_j / kJoulesPerKwh;
            res.ledger.power_trace_kw.push_back(so.info.power_kw);

            const KiteState& s = env.state();
            res.trajectory.push_back({env.time(), phase, s, so.info.position,
                                      env.controls().alpha_deg, env.controls().psi_deg,
                                      obs.beta_rad, so.info.w_rel_speed, so.info.tension,
                                      so.info.power_kw, so.reward, so.status});

            if (so.status.kind == Status::Kind::Goal) break;
            if (so.status.kind == Status::Kind::Failed) {
                res.failed = true;
                res.fail_phase = phase;
                res.fail_reason = so.status.reason;
                return res;
            }
        }
    }
    return res;
}

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj, const std::string& path) {
    std::ofstream out(path);
    out << "t,phase,theta,phi,r,theta_dot,phi_dot,r_dot,x,y,z,alpha_deg,psi_deg,beta_rad,"
           "Wr,Ft,power_kW,reward,status\n";
    out.precision(17);
    for (const auto& p : traj) {
        const char* status = p.status.kind == Status::Kind::Running ? "running"
                             : p.status.kind == Status::Kind::Goal ? "goal"
                                                                   : fail_reason_name(p.status.reason);
        out << p.t << ',' << phase_name(p.phase) << ',' << p.state.theta << ',' << p.state.phi
            << ',' << p.state.r << ',' << p.state.theta_dot << ',' << p.state.phi_dot << ','
            << p.state.r_dot << ',' << p.position.x << ',' << p.position.y << ','
            << p.position.z << ',' << p.alpha_deg << ',' << p.psi_deg << ',' << p.beta_rad
            << ',' << p.w_rel_speed << ',' << p.tension << ',' << p.power_kw << ','
            << p.reward << ',' << status << '\n';
    }
}

}  // namespace awe
