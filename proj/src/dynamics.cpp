#include "awe/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace awe {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

AeroPolar::AeroPolar(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw OutOfRange("aero polar needs at least two knots");
    for (size_t i = 1; i < knots_.size(); ++i) {
        if (knots_[i].alpha_deg <= knots_[i - 1].alpha_deg)
            throw OutOfRange("aero polar knots must be strictly increasing in alpha");
    }
    for (const Knot& k : knots_) {
        if (!(k.cd > 0.0)) throw OutOfRange("aero polar requires C_D > 0");
    }
}

AeroPolar AeroPolar::default_polar() {
    // Clark-Y-shaped placeholder over the control range [-5, 18] degrees.
    // C_L crosses zero near -4 deg so low-lift flight (reel-in, transitions)
    // is reachable; mild stall flattening above 15 deg.
    return AeroPolar({
        {-5.0, -0.10, 0.032},
        {-3.0, 0.05, 0.030},
        {0.0, 0.35, 0.036},
        {3.0, 0.63, 0.052},
        {6.0, 0.85, 0.075},
        {9.0, 1.00, 0.100},
        {12.0, 1.10, 0.125},
        {15.0, 1.15, 0.150},
        {18.0, 1.08, 0.190},
    });
}

AeroPolar AeroPolar::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw OutOfRange("cannot open aero polar file: " + path);
    std::vector<Knot> knots;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Knot k;
        if (ls >> k.alpha_deg >> k.cl >> k.cd) knots.push_back(k);
    }
    return AeroPolar(std::move(knots));
}

void AeroPolar::save(const std::string& path) const {
    std::ofstream out(path);
    out << "# alpha_deg C_L C_D\n";
    out.precision(17);
    for (const Knot& k : knots_) out << k.alpha_deg << ' ' << k.cl << ' ' << k.cd << '\n';
}

std::pair<double, double> AeroPolar::coefficients(double alpha_deg) const {
    if (alpha_deg < knots_.front().alpha_deg || alpha_deg > knots_.back().alpha_deg)
        throw OutOfRange("attack angle outside polar table span");
    auto hi = std::lower_bound(knots_.begin(), knots_.end(), alpha_deg,
                               [](const Knot& k, double a) { return k.alpha_deg < a; });
    if (hi == knots_.begin() ||
        (hi != knots_.end() && hi->alpha_deg == alpha_deg))
        return {hi->cl, hi->cd};
    auto lo = hi - 1;
    if (hi == knots_.end()) return {lo->cl, lo->cd};
    double f = (alpha_deg - lo->alpha_deg) / (hi->alpha_deg - lo->alpha_deg);
    return {lo->cl + f * (hi->cl - lo->cl), lo->cd + f * (hi->cd - lo->cd)};
}

LocalFrame local_frame(double theta, double phi) {
    double st = std::sin(theta), ct = std::cos(theta);
    double sp = std::sin(phi), cp = std::cos(phi);
    LocalFrame f;
    f.e_theta = {ct * cp, ct * sp, -st};
    f.e_phi = {-sp, cp, 0.0};
    f.e_r = {st * cp, st * sp, ct};
    return f;
}

Vec3 gravity_force(const KiteState& s, const SystemParams& p) {
    // Radial component is -mg*cos(theta): gravity must oppose e_r at the
    // zenith (e_r = +z at theta = 0).
    return {p.m * p.g * std::sin(s.theta), 0.0, -p.m * p.g * std::cos(s.theta)};
}

Vec3 centrifugal_force(const KiteState& s, const SystemParams& p) {
    double st = std::sin(s.theta), ct = std::cos(s.theta);
    return {
        p.m * (s.phi_dot * s.phi_dot * s.r * st * ct - 2.0 * s.r_dot * s.theta_dot),
        p.m * (-2.0 * s.r_dot * s.phi_dot * st - 2.0 * s.phi_dot * s.theta_dot * s.r * ct),
        p.m * (s.r * s.theta_dot * s.theta_dot + s.r * s.phi_dot * s.phi_dot * st * st),
    };
}

Vec3 relative_wind(const KiteState& s, const Vec3& wind_world, const LocalFrame& frame) {
    Vec3 kite_local{s.theta_dot * s.r, s.phi_dot * s.r * std::sin(s.theta), s.r_dot};
    Vec3 wind_local{wind_world.dot(frame.e_theta), wind_world.dot(frame.e_phi),
                    wind_world.dot(frame.e_r)};
    return wind_local - kite_local;
}

WindFrame wind_frame(const Vec3& w_rel_local, const LocalFrame& frame, double psi_deg) {
    double wr = w_rel_local.norm();
    if (wr <= kEpsWind) throw AlignmentSingularity();

    // Tangential part of W^r: the local theta/phi components.
    double tang = std::hypot(w_rel_local.x, w_rel_local.y);
    if (tang < kEpsWind) throw AlignmentSingularity();

    double psi = psi_deg * kDegToRad;
    double arg = w_rel_local.z / tang * std::tan(psi);
    if (std::abs(arg) > 1.0) throw AlignmentSingularity();
    double eta = std::asin(arg);

    Vec3 w_world = frame.e_theta * w_rel_local.x + frame.e_phi * w_rel_local.y +
                   frame.e_r * w_rel_local.z;

    WindFrame wf;
    wf.eta = eta;
    wf.x_w = -w_world / wr;
    wf.e_w = (frame.e_theta * w_rel_local.x + frame.e_phi * w_rel_local.y) / tang;
    Vec3 er_x_ew = frame.e_r.cross(wf.e_w);
    double cps = std::cos(psi), sps = std::sin(psi);
    wf.y_w = wf.e_w * (-cps * std::sin(eta)) + er_x_ew * (cps * std::cos(eta)) +
             frame.e_r * sps;
    wf.z_w = wf.x_w.cross(wf.y_w);
    return wf;
}

Vec3 aero_force(const Vec3& w_rel_local, const LocalFrame& frame, const WindFrame& wf,
                double cl, double cd, const SystemParams& p, Vec3* lift_out, Vec3* drag_out) {
    double wr2 = w_rel_local.dot(w_rel_local);
    double q = 0.5 * p.A * p.rho * wr2;
    Vec3 drag_w = wf.x_w * (-cd * q);
    Vec3 lift_w = wf.z_w * (-cl * q);
    auto to_local = [&frame](const Vec3& v) {
        return Vec3{v.dot(frame.e_theta), v.dot(frame.e_phi), v.dot(frame.e_r)};
    };
    Vec3 drag = to_local(drag_w);
    Vec3 lift = to_local(lift_w);
    if (lift_out) *lift_out = lift;
    if (drag_out) *drag_out = drag;
    return drag + lift;
}

double tether_tension(double f_sum_r, double r_dot, const TetherMode& mode,
                      const SystemParams& p, bool* slack) {
    if (slack) *slack = false;
    if (mode.kind == TetherMode::Kind::Locked) return f_sum_r;

    double num = p.M * f_sum_r * p.R + 2.0 * p.m * (r_dot / p.R) * p.k_fric;
    if (mode.kind == TetherMode::Kind::Retraction) num += 2.0 * p.m * mode.motor_force * p.R;
    double ft = num / (2.0 * p.m * p.R + p.M * p.R);
    if (ft < 0.0) {
        if (slack) *slack = true;
        ft = 0.0;
    }
    return ft;
}

double beta_angle(const Vec3& w_rel_local) {
    double wr = w_rel_local.norm();
    if (wr <= kEpsWind) throw DegenerateWind();
    return std::asin(std::clamp(w_rel_local.z / wr, -1.0, 1.0));
}

StateDeriv derivatives(const KiteState& s, const Vec3& f, const SystemParams& p) {
    double st = std::sin(s.theta);
    if (st <= kEpsTheta) throw PolarSingularity();
    return {s.theta_dot, s.phi_dot, s.r_dot,
            f.x / (p.m * s.r), f.y / (p.m * s.r * st), f.z / p.m};
}

ForceBreakdown compute_forces(const KiteState& s, const ControlAngles& ctrl,
                              const Vec3& wind_world, const TetherMode& mode,
                              const AeroPolar& polar, const SystemParams& p) {
    LocalFrame frame = local_frame(s.theta, s.phi);
    Vec3 w_rel = relative_wind(s, wind_world, frame);

    ForceBreakdown fb;
    fb.gravity = gravity_force(s, p);
    fb.centrifugal = centrifugal_force(s, p);
    // Aero forces scale with |W^r|^2; below the wind threshold (or with no
    // surface) they vanish and the wind frame is left undefined.
    if (p.A > 0.0 && w_rel.norm() > kEpsWind) {
        WindFrame wf = wind_frame(w_rel, frame, ctrl.psi_deg);
        auto [cl, cd] = polar.coefficients(ctrl.alpha_deg);
        aero_force(w_rel, frame, wf, cl, cd, p, &fb.lift, &fb.drag);
    }
    double f_sum_r = fb.gravity.z + fb.centrifugal.z + fb.lift.z + fb.drag.z;
    fb.tension = tether_tension(f_sum_r, s.r_dot, mode, p, &fb.slack);
    return fb;
}

Vec3 spherical_to_world(const KiteState& s) {
    double st = std::sin(s.theta);
    return {s.r * st * std::cos(s.phi), s.r * st * std::sin(s.phi), s.r * std::cos(s.theta)};
}

namespace {

StateDeriv eval_stage(const KiteState& s, const ControlAngles& ctrl, const WindSampler& wind,
                      const TetherMode& mode, const AeroPolar& polar, const SystemParams& p,
                      double t, double* tension_out, double* wr_out, bool* slack_out) {
    Vec3 pos = spherical_to_world(s);
    Vec3 w = wind(pos.x, pos.y, pos.z, t);
    LocalFrame frame = local_frame(s.theta, s.phi);
    Vec3 w_rel = relative_wind(s, w, frame);
    Vec3 aero{0.0, 0.0, 0.0};
    if (p.A > 0.0 && w_rel.norm() > kEpsWind) {
        WindFrame wf = wind_frame(w_rel, frame, ctrl.psi_deg);
        auto [cl, cd] = polar.coefficients(ctrl.alpha_deg);
        aero = aero_force(w_rel, frame, wf, cl, cd, p);
    }
    Vec3 grav = gravity_force(s, p);
    Vec3 cent = centrifugal_force(s, p);
    Vec3 f_sum = grav + cent + aero;
    bool slack = false;
    double ft = tether_tension(f_sum.z, s.r_dot, mode, p, &slack);
    if (tension_out) *tension_out = ft;
    if (wr_out) *wr_out = w_rel.norm();
    if (slack_out) *slack_out = slack;
    Vec3 total = f_sum;
    total.z -= ft;
    return derivatives(s, total, p);
}

KiteState advance(const KiteState& s, const StateDeriv& d, double h) {
    return {s.theta + h * d.theta_dot, s.phi + h * d.phi_dot,     s.r + h * d.r_dot,
            s.theta_dot + h * d.theta_ddot, s.phi_dot + h * d.phi_ddot, s.r_dot + h * d.r_ddot};
}

}  // namespace

IntegrateResult integrate_step(const KiteState& start, const ControlAngles& ctrl,
                               const WindSampler& wind, const TetherMode& mode,
                               const AeroPolar& polar, const SystemParams& p, double t0,
                               double dt_sub, int n_sub) {
    IntegrateResult res;
    res.state = start;
    double z0 = start.r * std::cos(start.theta);
    res.diag.min_z = z0;
    res.diag.max_z = z0;
    res.diag.max_r = start.r;

    for (int i = 0; i < n_sub; ++i) {
        double t = t0 + i * dt_sub;
        const KiteState& s = res.state;
        double ft = 0.0, wr = 0.0;
        bool slack = false;
        StateDeriv k1, k2, k3, k4;
        try {
            k1 = eval_stage(s, ctrl, wind, mode, polar, p, t, &ft, &wr, &slack);
            k2 = eval_stage(advance(s, k1, dt_sub / 2), ctrl, wind, mode, polar, p,
                            t + dt_sub / 2, nullptr, nullptr, nullptr);
            k3 = eval_stage(advance(s, k2, dt_sub / 2), ctrl, wind, mode, polar, p,
                            t + dt_sub / 2, nullptr, nullptr, nullptr);
            k4 = eval_stage(advance(s, k3, dt_sub), ctrl, wind, mode, polar, p, t + dt_sub,
                            nullptr, nullptr, nullptr);
        } catch (AlignmentSingularity&) {
            throw AlignmentSingularity(i);
        } catch (PolarSingularity&) {
            throw PolarSingularity(i);
        }

        // Energy convention: tether tension while generating, motor force
        // while rewinding (negative contribution as the tether shortens).
        double f = (mode.kind == TetherMode::Kind::Retraction) ? mode.motor_force : ft;
        res.energy_j += f * s.r_dot * dt_sub;
        res.diag.slack = res.diag.slack || slack;
        res.diag.last_tension = ft;
        res.diag.last_wr = wr;

        KiteState next = res.state;
        double h = dt_sub / 6.0;
        next.theta += h * (k1.theta_dot + 2 * k2.theta_dot + 2 * k3.theta_dot + k4.theta_dot);
        next.phi += h * (k1.phi_dot + 2 * k2.phi_dot + 2 * k3.phi_dot + k4.phi_dot);
        next.r += h * (k1.r_dot + 2 * k2.r_dot + 2 * k3.r_dot + k4.r_dot);
        next.theta_dot +=
            h * (k1.theta_ddot + 2 * k2.theta_ddot + 2 * k3.theta_ddot + k4.theta_ddot);
        next.phi_dot += h * (k1.phi_ddot + 2 * k2.phi_ddot + 2 * k3.phi_ddot + k4.phi_ddot);
        next.r_dot += h * (k1.r_ddot + 2 * k2.r_ddot + 2 * k3.r_ddot + k4.r_ddot);
        res.state = next;
        res.diag.substeps_done = i + 1;

        double z = next.r * std::cos(next.theta);
        res.diag.min_z = std::min(res.diag.min_z, z);
        res.diag.max_z = std::max(res.diag.max_z, z);
        res.diag.max_r = std::max(res.diag.max_r, next.r);
        if (z <= 0.0) {
            res.diag.ground_contact = true;
            break;
        }
    }
    return res;
}

}  // namespace awe
