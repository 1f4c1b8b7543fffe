#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "awe/wind.hpp"

using namespace awe;
namespace fs = std::filesystem;

namespace {

GriddedField make_field(uint64_t seed, int nx = 4, int ny = 3, int nz = 3, int nt = 2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-5.0f, 15.0f);
    std::vector<float> data(size_t(nt) * nz * ny * nx * 3);
    for (float& v : data) v = u(rng);
    return GriddedField(nx, ny, nz, nt, 80.0, 60.0, 100.0, 1.0, true, std::move(data));
}

}  // namespace

TEST_CASE("constant field is uniform") {
    ConstantField f(10.0);
    WindSample a = f.sample(0, 0, 0, 0);
    WindSample b = f.sample(123.4, -50.0, 99.0, 1e6);
    CHECK(a.u == 10.0);
    CHECK(a.v == 0.0);
    CHECK(a.w == 0.0);
    CHECK(b.u == a.u);
    CHECK(b.v == a.v);
    CHECK(b.w == a.w);
}

TEST_CASE("gridded sampling is exact at nodes") {
    GriddedField f = make_field(1);
    double dx = f.lx() / f.nx(), dy = f.ly() / f.ny(), dz = f.lz() / (f.nz() - 1);
    for (int iz = 0; iz < f.nz(); ++iz)
        for (int iy = 0; iy < f.ny(); ++iy)
            for (int ix = 0; ix < f.nx(); ++ix) {
                WindSample got = f.sample(ix * dx, iy * dy, iz * dz, 0.0);
                WindSample want = f.at(0, iz, iy, ix);
                REQUIRE(got.u == want.u);  // bit-exact
                REQUIRE(got.v == want.v);
                REQUIRE(got.w == want.w);
            }
}

TEST_CASE("periodic wrap in x and y") {
    GriddedField f = make_field(2);
    double dx = f.lx() / f.nx();
    for (int n = 1; n <= 3; ++n) {
        WindSample a = f.sample(dx, 0.0, 50.0, 0.3);
        WindSample b = f.sample(dx + n * f.lx(), 0.0, 50.0, 0.3);
        CHECK(a.u == b.u);
        CHECK(a.v == b.v);
        CHECK(a.w == b.w);
    }
    WindSample c = f.sample(5.0, 10.0, 50.0, 0.3);
    WindSample d = f.sample(5.0, 10.0 + 2 * f.ly(), 50.0, 0.3);
    CHECK(c.u == d.u);
}

TEST_CASE("midpoint along x is the mean of node values") {
    GriddedField f = make_field(3);
    double dx = f.lx() / f.nx(), dz = f.lz() / (f.nz() - 1);
    WindSample n0 = f.at(0, 1, 1, 1);
    WindSample n1 = f.at(0, 1, 1, 2);
    WindSample mid = f.sample(1.5 * dx, 1 * (f.ly() / f.ny()), 1 * dz, 0.0);
    CHECK(mid.u == doctest::Approx(0.5 * (n0.u + n1.u)).epsilon(1e-12));
    CHECK(mid.v == doctest::Approx(0.5 * (n0.v + n1.v)).epsilon(1e-12));
    CHECK(mid.w == doctest::Approx(0.5 * (n0.w + n1.w)).epsilon(1e-12));
}

TEST_CASE("time interpolation cycles snapshots; frozen pins the first") {
    GriddedField f = make_field(4);
    WindSample at0 = f.sample(10, 10, 40, 0.0);
    WindSample cycled = f.sample(10, 10, 40, double(f.nt()) * f.dt_snap());
    CHECK(at0.u == cycled.u);  // t = nt*dt wraps to t = 0
    WindSample mid = f.sample(10, 10, 40, 0.5);
    WindSample at1 = f.sample(10, 10, 40, 1.0);
    CHECK(mid.u == doctest::Approx(0.5 * (at0.u + at1.u)).epsilon(1e-12));

    f.set_frozen(true);
    WindSample froz = f.sample(10, 10, 40, 123.45);
    CHECK(froz.u == at0.u);
    CHECK(froz.v == at0.v);
}

TEST_CASE("domain bounds in z") {
    GriddedField f = make_field(5);
    CHECK_THROWS_AS(f.sample(0, 0, f.lz() + 0.1, 0), AboveDomain);
    CHECK_THROWS_AS(f.sample(0, 0, -0.1, 0), BelowGround);
    CHECK(f.ceiling().value() == f.lz());
}

TEST_CASE("file round-trip is bit-exact") {
    GriddedField f = make_field(6);
    fs::path p = fs::temp_directory_path() / "awe_wind_roundtrip.awew";
    f.save(p.string());
    GriddedField g = GriddedField::load(p.string());
    REQUIRE(g.data().size() == f.data().size());
    for (size_t i = 0; i < f.data().size(); ++i) REQUIRE(g.data()[i] == f.data()[i]);
    CHECK(g.nx() == f.nx());
    CHECK(g.lz() == f.lz());
    CHECK(g.dt_snap() == f.dt_snap());
    fs::remove(p);
}

TEST_CASE("corrupt files are rejected") {
    GriddedField f = make_field(7);
    fs::path p = fs::temp_directory_path() / "awe_wind_corrupt.awew";
    f.save(p.string());

    SUBCASE("truncation") {
        auto sz = fs::file_size(p);
        fs::resize_file(p, sz - 17);
        CHECK_THROWS_AS(GriddedField::load(p.string()), FormatError);
    }
    SUBCASE("bad magic") {
        std::fstream io(p, std::ios::in | std::ios::out | std::ios::binary);
        io.write("NOPE", 4);
        io.close();
        CHECK_THROWS_AS(GriddedField::load(p.string()), FormatError);
    }
    SUBCASE("non-finite payload") {
        std::fstream io(p, std::ios::in | std::ios::out | std::ios::binary);
        float nan = std::numeric_limits<float>::quiet_NaN();
        io.seekp(-4, std::ios::end);
        io.write(reinterpret_cast<const char*>(&nan), 4);
        io.close();
        CHECK_THROWS_AS(GriddedField::load(p.string()), DataError);
    }
    fs::remove(p);
}

TEST_CASE("synthetic shear: pure profile with no modes") {
    SyntheticShearField f(30.0, 100.0, 42, 0);
    WindSample top = f.sample(13.0, -7.0, 100.0, 5.0);
    CHECK(top.u == doctest::Approx(30.0));
    CHECK(top.v == 0.0);
    CHECK(top.w == 0.0);
    WindSample mid = f.sample(0, 0, 50.0, 0.0);
    CHECK(mid.u == doctest::Approx(15.0));
}

TEST_CASE("synthetic shear: same seed, same samples") {
    SyntheticShearField a(30.0, 100.0, 9, 16);
    SyntheticShearField b(30.0, 100.0, 9, 16);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        double x = u(rng), y = u(rng), z = u(rng), t = u(rng);
        WindSample sa = a.sample(x, y, z, t);
        WindSample sb = b.sample(x, y, z, t);
        REQUIRE(sa.u == sb.u);
        REQUIRE(sa.v == sb.v);
        REQUIRE(sa.w == sb.w);
    }
}

TEST_CASE("synthetic shear: horizontal mean of u tracks the profile") {
    SyntheticShearField f(30.0, 100.0, 77, 32);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    for (double z : {25.0, 50.0, 75.0}) {
        double sum = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) sum += f.sample(u(rng), u(rng), z, 0.0).u;
        double want = 30.0 * z / 100.0;
        CHECK(std::abs(sum / n - want) < 0.02 * 30.0);
    }
}

TEST_CASE("synthetic shear: modes orthogonal to their wavevector") {
    SyntheticShearField f(30.0, 100.0, 5, 24);
    for (const auto& m : f.modes())
        REQUIRE(std::abs(m.amplitude.dot(m.wavevector)) <
                1e-10 * m.amplitude.norm() * m.wavevector.norm());
}

TEST_CASE("interpolation continuity across cell faces") {
    GriddedField f = make_field(8);
    double dx = f.lx() / f.nx();
    double eps = 1e-12 * f.lx();
    for (int ix = 1; ix < f.nx(); ++ix) {
        WindSample lo = f.sample(ix * dx - eps, 7.0, 33.0, 0.4);
        WindSample hi = f.sample(ix * dx + eps, 7.0, 33.0, 0.4);
        REQUIRE(std::abs(lo.u - hi.u) < 1e-9);
        REQUIRE(std::abs(lo.v - hi.v) < 1e-9);
        REQUIRE(std::abs(lo.w - hi.w) < 1e-9);
    }
}
