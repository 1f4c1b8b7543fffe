#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "awe/vec3.hpp"

namespace awe {

struct WindSample {
    double u = 0.0, v = 0.0, w = 0.0;  // m/s, world Cartesian, x streamwise
    Vec3 vec() const { return {u, v, w}; }
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};
struct AboveDomain : std::runtime_error {
    AboveDomain() : std::runtime_error("wind query above domain ceiling") {}
};
struct BelowGround : std::runtime_error {
    BelowGround() : std::runtime_error("wind query below ground") {}
};

class WindField {
  public:
    virtual ~WindField() = default;
    virtual WindSample sample(double x, double y, double z, double t) const = 0;
    // Height above which the field is undefined, if any.
    virtual std::optional<double> ceiling() const { return std::nullopt; }
};

class ConstantField final : public WindField {
  public:
    explicit ConstantField(double speed = 10.0);
    WindSample sample(double, double, double, double) const override;
    double speed() const { return speed_; }

  private:
    double speed_;
};

// Gridded turbulent snapshots. Trilinear in space (periodic wrap in x and y,
// z nodes span [0, Lz]), linear in time cycling through the snapshots, or
// pinned to snapshot 0 when frozen.
class GriddedField final : public WindField {
  public:
    GriddedField(int nx, int ny, int nz, int nt, double lx, double ly, double lz,
                 double dt_snap, bool periodic_xy, std::vector<float> data);

    static GriddedField load(const std::string& path);
    void save(const std::string& path) const;

    WindSample sample(double x, double y, double z, double t) const override;
    std::optional<double> ceiling() const override { return lz_; }

    void set_frozen(bool f) { frozen_ = f; }
    bool frozen() const { return frozen_; }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    int nt() const { return nt_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    double lz() const { return lz_; }
    double dt_snap() const { return dt_snap_; }
    const std::vector<float>& data() const { return data_; }

    // Value stored at a node, no interpolation.
    WindSample at(int it, int iz, int iy, int ix) const;

  private:
    size_t index(int it, int iz, int iy, int ix) const;

    int nx_, ny_, nz_, nt_;
    double lx_, ly_, lz_, dt_snap_;
    bool periodic_xy_;
    bool frozen_ = false;
    std::vector<float> data_;  // [t][z][y][x][u,v,w]
};

// Test stand-in for turbulent data: linear shear profile U(z) = top_speed*z/h
// plus divergence-free traveling-wave perturbations (amplitude orthogonal to
// the wavevector).
class SyntheticShearField final : public WindField {
  public:
    struct Mode {
        Vec3 wavevector;  // rad/m
        Vec3 amplitude;   // m/s, orthogonal to wavevector
        double phase;     // rad
        double frequency; // rad/s
    };

    SyntheticShearField(double top_speed, double height, uint64_t seed, int n_modes);

    WindSample sample(double x, double y, double z, double t) const override;
    std::optional<double> ceiling() const override { return height_; }

    double top_speed() const { return top_speed_; }
    double height() const { return height_; }
    const std::vector<Mode>& modes() const { return modes_; }

  private:
    double top_speed_;
    double height_;
    std::vector<Mode> modes_;
};

}  // namespace awe
