#include "awe/wind.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace awe {

namespace {

constexpr char kMagic[4] = {'A', 'W', 'E', 'W'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw FormatError("truncated wind file");
    return v;
}

// Split coordinate into cell index and fraction with periodic wrap.
void periodic_locate(double x, double extent, int n, int& i0, int& i1, double& f) {
    double dx = extent / n;
    double u = x / dx;
    double base = std::floor(u);
    f = u - base;
    long long b = static_cast<long long>(base) % n;
    if (b < 0) b += n;
    i0 = static_cast<int>(b);
    i1 = (i0 + 1) % n;
}

void clamped_locate(double z, double extent, int n, int& i0, int& i1, double& f) {
    double dz = extent / (n - 1);
    double u = z / dz;
    double base = std::floor(u);
    i0 = static_cast<int>(base);
    if (i0 < 0) i0 = 0;
    if (i0 > n - 2) i0 = n - 2;
    i1 = i0 + 1;
    f = u - i0;
    if (f < 0.0) f = 0.0;
    if (f > 1.0) f = 1.0;
}

}  // namespace

ConstantField::ConstantField(double speed) : speed_(speed) {
    if (speed < 0.0) throw DataError("constant wind speed must be >= 0");
}

WindSample ConstantField::sample(double, double, double, double) const {
    return {speed_, 0.0, 0.0};
}

GriddedField::GriddedField(int nx, int ny, int nz, int nt, double lx, double ly, double lz,
                           double dt_snap, bool periodic_xy, std::vector<float> data)
    : nx_(nx), ny_(ny), nz_(nz), nt_(nt), lx_(lx), ly_(ly), lz_(lz), dt_snap_(dt_snap),
      periodic_xy_(periodic_xy), data_(std::move(data)) {
    if (nx_ < 2 || ny_ < 2 || nz_ < 2 || nt_ < 1) throw FormatError("grid counts too small");
    if (!(lx_ > 0 && ly_ > 0 && lz_ > 0 && dt_snap_ > 0))
        throw FormatError("grid extents must be positive");
    size_t expected = static_cast<size_t>(nt_) * nz_ * ny_ * nx_ * 3;
    if (data_.size() != expected) throw FormatError("payload length does not match header");
    for (float v : data_) {
        if (!std::isfinite(v)) throw DataError("non-finite value in wind data");
    }
}

size_t GriddedField::index(int it, int iz, int iy, int ix) const {
    return (((static_cast<size_t>(it) * nz_ + iz) * ny_ + iy) * nx_ + ix) * 3;
}

WindSample GriddedField::at(int it, int iz, int iy, int ix) const {
    size_t i = index(it, iz, iy, ix);
    return {data_[i], data_[i + 1], data_[i + 2]};
}

WindSample GriddedField::sample(double x, double y, double z, double t) const {
    if (z < 0.0) throw BelowGround();
    if (z > lz_) throw AboveDomain();

    int ix0, ix1, iy0, iy1, iz0, iz1;
    double fx, fy, fz;
    periodic_locate(x, lx_, nx_, ix0, ix1, fx);
    periodic_locate(y, ly_, ny_, iy0, iy1, fy);
    clamped_locate(z, lz_, nz_, iz0, iz1, fz);

    int it0 = 0, it1 = 0;
    double ft = 0.0;
    if (!frozen_ && nt_ > 1) {
        double cycle = nt_ * dt_snap_;
        double s = std::fmod(t, cycle);
        if (s < 0.0) s += cycle;
        double u = s / dt_snap_;
        it0 = static_cast<int>(std::floor(u)) % nt_;
        it1 = (it0 + 1) % nt_;
        ft = u - std::floor(u);
    }

    WindSample out;
    double* acc = &out.u;
    for (int c = 0; c < 3; ++c) acc[c] = 0.0;

    const int tis[2] = {it0, it1};
    const double tws[2] = {1.0 - ft, ft};
    for (int ti = 0; ti < 2; ++ti) {
        double tw = tws[ti];
        if (tw == 0.0) continue;
        const int zs[2] = {iz0, iz1};
        const double zws[2] = {1.0 - fz, fz};
        for (int zi = 0; zi < 2; ++zi) {
            const int ys[2] = {iy0, iy1};
            const double yws[2] = {1.0 - fy, fy};
            for (int yi = 0; yi < 2; ++yi) {
                const int xs[2] = {ix0, ix1};
                const double xws[2] = {1.0 - fx, fx};
                for (int xi = 0; xi < 2; ++xi) {
                    double w = tw * zws[zi] * yws[yi] * xws[xi];
                    if (w == 0.0) continue;
                    size_t i = index(tis[ti], zs[zi], ys[yi], xs[xi]);
                    acc[0] += w * data_[i];
                    acc[1] += w * data_[i + 1];
                    acc[2] += w * data_[i + 2];
                }
            }
        }
    }
    return out;
}

GriddedField GriddedField::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open wind file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic");
    uint32_t version = read_pod<uint32_t>(in);
    if (version != kVersion) throw FormatError("unsupported wind file version");
    uint32_t nx = read_pod<uint32_t>(in);
    uint32_t ny = read_pod<uint32_t>(in);
    uint32_t nz = read_pod<uint32_t>(in);
    uint32_t nt = read_pod<uint32_t>(in);
    double lx = read_pod<double>(in);
    double ly = read_pod<double>(in);
    double lz = read_pod<double>(in);
    double dt_snap = read_pod<double>(in);
    uint8_t periodic = read_pod<uint8_t>(in);

    size_t count = static_cast<size_t>(nt) * nz * ny * nx * 3;
    std::vector<float> data(count);
    in.read(reinterpret_cast<char*>(data.data()), count * sizeof(float));
    if (static_cast<size_t>(in.gcount()) != count * sizeof(float))
        throw FormatError("truncated wind payload");
    return GriddedField(nx, ny, nz, nt, lx, ly, lz, dt_snap, periodic != 0, std::move(data));
}

void GriddedField::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write wind file: " + path);
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    write_pod(out, static_cast<uint32_t>(nx_));
    write_pod(out, static_cast<uint32_t>(ny_));
    write_pod(out, static_cast<uint32_t>(nz_));
    write_pod(out, static_cast<uint32_t>(nt_));
    write_pod(out, lx_);
    write_pod(out, ly_);
    write_pod(out, lz_);
    write_pod(out, dt_snap_);
    write_pod(out, static_cast<uint8_t>(periodic_xy_ ? 1 : 0));
    out.write(reinterpret_cast<const char*>(data_.data()), data_.size() * sizeof(float));
}

SyntheticShearField::SyntheticShearField(double top_speed, double height, uint64_t seed,
                                         int n_modes)
    : top_speed_(top_speed), height_(height) {
    if (n_modes < 0) throw DataError("n_modes must be >= 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Total perturbation RMS targeted at 10% of top_speed (<= 20% required).
    double per_mode_rms = n_modes > 0 ? 0.1 * top_speed / std::sqrt(double(n_modes)) : 0.0;
    modes_.reserve(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        // Wavelengths between height/8 and height; always some horizontal
        // component so horizontal averages recover the mean profile.
        double wavelength = height / (1.0 + 7.0 * unit(rng));
        double k = 2.0 * M_PI / wavelength;
        Vec3 dir{gauss(rng), gauss(rng), 0.3 * gauss(rng)};
        if (dir.norm() < 1e-9) dir = {1.0, 0.0, 0.0};
        Vec3 kv = dir.normalized() * k;

        Vec3 raw{gauss(rng), gauss(rng), gauss(rng)};
        Vec3 amp = raw - kv * (raw.dot(kv) / kv.dot(kv));
        if (amp.norm() < 1e-9) amp = kv.cross(Vec3{0, 0, 1});
        amp = amp.normalized() * (per_mode_rms * std::sqrt(2.0));

        double phase = 2.0 * M_PI * unit(rng);
        // Advect roughly with the mid-height mean speed.
        double freq = kv.x * 0.5 * top_speed;
        modes_.push_back({kv, amp, phase, freq});
    }
}

WindSample SyntheticShearField::sample(double x, double y, double z, double t) const {
    if (z < 0.0) throw BelowGround();
    if (z > height_) throw AboveDomain();
    Vec3 v{top_speed_ * z / height_, 0.0, 0.0};
    for (const Mode& m : modes_) {
        double arg = m.wavevector.x * x + m.wavevector.y * y + m.wavevector.z * z -
                     m.frequency * t + m.phase;
        v += m.amplitude * std::cos(arg);
    }
    return {v.x, v.y, v.z};
}

}  // namespace awe
