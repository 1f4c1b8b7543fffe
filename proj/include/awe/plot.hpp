#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace awe::plot {

struct PlotError : std::runtime_error {
    explicit PlotError(const std::string& what) : std::runtime_error(what) {}
};

// Parsed trajectory CSV (the format written by write_trajectory_csv).
struct Trajectory {
    std::vector<double> t, x, y, z, alpha_deg, psi_deg, beta_rad, power_kw;
    std::vector<std::string> phase;
};

Trajectory load_trajectory_csv(const std::string& path);

// Emits <stem>_path.svg, <stem>_controls.svg, <stem>_power.svg into out_dir.
// Output is a pure function of the input file.
std::vector<std::string> render_trajectory(const std::string& csv_path,
                                           const std::string& out_dir);

}  // namespace awe::plot
