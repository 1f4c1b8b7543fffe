#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "awe/vec3.hpp"

namespace awe {

// Position/velocity of the kite in spherical coordinates. theta is the polar
// angle measured from the vertical (z = r*cos(theta)), phi the azimuth from
// the streamwise x axis, r the unwound tether length.
struct KiteState {
    double theta = 0.0;
    double phi = 0.0;
    double r = 0.0;
    double theta_dot = 0.0;
    double phi_dot = 0.0;
    double r_dot = 0.0;
};

struct SystemParams {
    double m = 1.0;       // kite mass, kg
    double A = 10.0;      // characteristic area, m^2
    double rho = 1.2;     // air density, kg/m^3
    double M = 10.0;      // drum mass, kg
    double R = 0.2;       // drum radius, m
    // Drum viscous friction. Sets the steady reel-out speed r_dot = F*R^2/k;
    // 10 N*m*s puts the traction operating point near 2.5 kN at 10 m/s.
    double k_fric = 10.0;
    double g = 9.81;      // m/s^2
};

// Control boundary is in degrees; everything internal is radians.
struct ControlAngles {
    double alpha_deg = 0.0;  // attack angle, [-5, 18]
    double psi_deg = 0.0;    // bank angle, [-3, 3]
};

inline constexpr double kAlphaMinDeg = -5.0;
inline constexpr double kAlphaMaxDeg = 18.0;
inline constexpr double kPsiMinDeg = -3.0;
inline constexpr double kPsiMaxDeg = 3.0;

inline constexpr double kEpsWind = 1e-6;   // m/s, degenerate relative wind
inline constexpr double kEpsTheta = 1e-6;  // rad, polar singularity guard

// Unit vectors of the kite-local spherical basis, in world Cartesian axes.
struct LocalFrame {
    Vec3 e_theta, e_phi, e_r;
};

// Kite wind basis: x_w antiparallel to the relative wind, z_w top-to-bottom
// through the kite plane, y_w completing the right-handed triple. e_w and eta
// are the intermediates of the bank-angle construction.
struct WindFrame {
    Vec3 x_w, y_w, z_w;
    Vec3 e_w;
    double eta = 0.0;
};

struct ForceBreakdown {
    Vec3 gravity;      // local (e_theta, e_phi, e_r) components, N
    Vec3 centrifugal;
    Vec3 lift;
    Vec3 drag;
    double tension = 0.0;  // scalar F^t, acts along -e_r
    bool slack = false;    // tension hit the >= 0 clamp

    Vec3 total() const {
        Vec3 t = gravity + centrifugal + lift + drag;
        t.z -= tension;
        return t;
    }
};

// Piecewise-linear lift/drag polar, indexed by attack angle in degrees.
class AeroPolar {
  public:
    struct Knot {
        double alpha_deg;
        double cl;
        double cd;
    };

    explicit AeroPolar(std::vector<Knot> knots);

    // Placeholder polar: linear C_L ramp 0.2 -> 1.0 over [-5, 18] deg,
    // C_D = 0.05 + 0.06*C_L^2. Real polars are loaded from file.
    static AeroPolar default_polar();

    // One "alpha_deg C_L C_D" triple per line, '#' comments.
    static AeroPolar load(const std::string& path);
    void save(const std::string& path) const;

    // (C_L, C_D) at alpha_deg; throws OutOfRange outside the table span.
    std::pair<double, double> coefficients(double alpha_deg) const;

    const std::vector<Knot>& knots() const { return knots_; }

  private:
    std::vector<Knot> knots_;
};

struct AlignmentSingularity : std::runtime_error {
    explicit AlignmentSingularity(int substep = -1)
        : std::runtime_error("relative wind aligned with tether axis"), substep_index(substep) {}
    int substep_index;
};

struct PolarSingularity : std::runtime_error {
    explicit PolarSingularity(int substep = -1)
        : std::runtime_error("sin(theta) below polar-singularity guard"), substep_index(substep) {}
    int substep_index;
};

struct DegenerateWind : std::runtime_error {
    DegenerateWind() : std::runtime_error("relative wind speed below threshold") {}
};

struct OutOfRange : std::runtime_error {
    explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

// Drum coupling. Traction: the unwinding tether drives the generator shaft.
// Retraction: the machine acts as a motor with constant force motor_force,
// i.e. an anti-clockwise torque C = motor_force * R on the drum. Locked:
// tension balances the radial force sum exactly (rigid constraint, no clamp);
// used for pendulum-style oracle runs.
struct TetherMode {
    enum class Kind { Traction, Retraction, Locked };
    Kind kind = Kind::Traction;
    double motor_force = 0.0;  // F^m, N (Retraction only)

    static TetherMode traction() { return {Kind::Traction, 0.0}; }
    static TetherMode retraction(double f_m) { return {Kind::Retraction, f_m}; }
    static TetherMode locked() { return {Kind::Locked, 0.0}; }
};

LocalFrame local_frame(double theta, double phi);

// Local components of gravity on the kite (massless tether).
Vec3 gravity_force(const KiteState& s, const SystemParams& p);

Vec3 centrifugal_force(const KiteState& s, const SystemParams& p);

// Relative wind W^r = W^w - W^k in local components.
Vec3 relative_wind(const KiteState& s, const Vec3& wind_world, const LocalFrame& frame);

// Throws AlignmentSingularity when the relative wind has no tangential
// component (eta undefined) or the arcsin argument leaves [-1, 1].
WindFrame wind_frame(const Vec3& w_rel_local, const LocalFrame& frame, double psi_deg);

// Drag + lift in local components. Optionally reports the two parts.
Vec3 aero_force(const Vec3& w_rel_local, const LocalFrame& frame, const WindFrame& wf,
                double cl, double cd, const SystemParams& p, Vec3* lift_out = nullptr,
                Vec3* drag_out = nullptr);

// Scalar tension from the drum equation, clamped to >= 0 except in Locked
// mode. f_sum_r is the radial sum of gravity + centrifugal + aero.
double tether_tension(double f_sum_r, double r_dot, const TetherMode& mode,
                      const SystemParams& p, bool* slack = nullptr);

// Elevation of the relative wind out of the kite tangent plane.
double beta_angle(const Vec3& w_rel_local);

struct StateDeriv {
    double theta_dot, phi_dot, r_dot;
    double theta_ddot, phi_ddot, r_ddot;
};

// Eq. of motion; throws PolarSingularity when sin(theta) <= kEpsTheta.
StateDeriv derivatives(const KiteState& s, const Vec3& total_force_local, const SystemParams& p);

// World wind velocity at (x, y, z, t).
using WindSampler = std::function<Vec3(double x, double y, double z, double t)>;

// All forces at one instant; the building block of each RK stage.
ForceBreakdown compute_forces(const KiteState& s, const ControlAngles& ctrl,
                              const Vec3& wind_world, const TetherMode& mode,
                              const AeroPolar& polar, const SystemParams& p);

Vec3 spherical_to_world(const KiteState& s);

struct StepDiagnostics {
    double min_z = 0.0;
    double max_z = 0.0;
    double max_r = 0.0;
    bool slack = false;           // tension clamp engaged at any stage
    bool ground_contact = false;  // z went through 0; integration stopped there
    int substeps_done = 0;
    double last_tension = 0.0;
    double last_wr = 0.0;  // |W^r| at the end of the step
};

struct IntegrateResult {
    KiteState state;
    double energy_j = 0.0;  // per the phase force convention (see mode)
    StepDiagnostics diag;
};

// Advances the state by n_sub classical RK4 substeps of dt_sub seconds,
// recomputing all forces (tension included) at every stage. Accumulates
// energy as F*r_dot*dt_sub with F = F^t in Traction/Locked mode and
// F = F^m in Retraction mode. Stops early on ground contact.
// AlignmentSingularity / PolarSingularity propagate with the substep index.
IntegrateResult integrate_step(const KiteState& start, const ControlAngles& ctrl,
                               const WindSampler& wind, const TetherMode& mode,
                               const AeroPolar& polar, const SystemParams& p, double t0,
                               double dt_sub = 1e-3, int n_sub = 100);

}  // namespace awe
