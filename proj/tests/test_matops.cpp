#include <doctest.h>

#include <random>
#include <vector>

#include "awe/matops.hpp"

using awe::mat::Exec;

namespace {

std::vector<float> random_vec(size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (float& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("parallel kernels match the serial references bit-exactly") {
    std::mt19937_64 rng(123);
    const int shapes[][3] = {{1, 1, 1}, {7, 5, 3}, {100, 400, 7}, {100, 300, 400}, {33, 65, 129}};
    for (const auto& s : shapes) {
        int m = s[0], n = s[1], k = s[2];
        std::vector<float> a = random_vec(size_t(m) * k, rng);
        std::vector<float> b_nt = random_vec(size_t(n) * k, rng);
        std::vector<float> b_nn = random_vec(size_t(k) * n, rng);
        std::vector<float> a_tn = random_vec(size_t(k) * m, rng);
        std::vector<float> c1(size_t(m) * n), c2(size_t(m) * n);

        awe::mat::gemm_nt(m, n, k, a.data(), b_nt.data(), c1.data(), Exec::Serial);
        awe::mat::gemm_nt(m, n, k, a.data(), b_nt.data(), c2.data(), Exec::Parallel);
        for (size_t i = 0; i < c1.size(); ++i) REQUIRE(c1[i] == c2[i]);

        awe::mat::gemm_nn(m, n, k, a.data(), b_nn.data(), c1.data(), Exec::Serial);
        awe::mat::gemm_nn(m, n, k, a.data(), b_nn.data(), c2.data(), Exec::Parallel);
        for (size_t i = 0; i < c1.size(); ++i) REQUIRE(c1[i] == c2[i]);

        awe::mat::gemm_tn(m, n, k, a_tn.data(), b_nn.data(), c1.data(), Exec::Serial);
        awe::mat::gemm_tn(m, n, k, a_tn.data(), b_nn.data(), c2.data(), Exec::Parallel);
        for (size_t i = 0; i < c1.size(); ++i) REQUIRE(c1[i] == c2[i]);
    }
}

TEST_CASE("gemm_nt against a hand-computed case") {
    // A = [1 2; 3 4] (2x2), B = [5 6; 7 8] (rows of B are the 'columns' used)
    std::vector<float> a = {1, 2, 3, 4};
    std::vector<float> b = {5, 6, 7, 8};
    std::vector<float> c(4);
    awe::mat::gemm_nt(2, 2, 2, a.data(), b.data(), c.data(), Exec::Serial);
    // C[i][j] = sum_k A[i][k]*B[j][k]
    CHECK(c[0] == 17.0f);   // 1*5+2*6
    CHECK(c[1] == 23.0f);   // 1*7+2*8
    CHECK(c[2] == 39.0f);   // 3*5+4*6
    CHECK(c[3] == 53.0f);   // 3*7+4*8
}

TEST_CASE("gemm_nn against a hand-computed case") {
    std::vector<float> a = {1, 2, 3, 4};   // 2x2
    std::vector<float> b = {5, 6, 7, 8};   // 2x2 row-major
    std::vector<float> c(4);
    awe::mat::gemm_nn(2, 2, 2, a.data(), b.data(), c.data(), Exec::Serial);
    CHECK(c[0] == 19.0f);   // 1*5+2*7
    CHECK(c[1] == 22.0f);   // 1*6+2*8
    CHECK(c[2] == 43.0f);
    CHECK(c[3] == 50.0f);
}

TEST_CASE("gemm_tn against a hand-computed case") {
    // A is k x m (here 2x2); C = A^T * B
    std::vector<float> a = {1, 2, 3, 4};
    std::vector<float> b = {5, 6, 7, 8};
    std::vector<float> c(4);
    awe::mat::gemm_tn(2, 2, 2, a.data(), b.data(), c.data(), Exec::Serial);
    // C[i][j] = sum_k A[k][i]*B[k][j]
    CHECK(c[0] == 26.0f);   // 1*5+3*7
    CHECK(c[1] == 30.0f);
    CHECK(c[2] == 38.0f);
    CHECK(c[3] == 44.0f);
}

TEST_CASE("default exec policy is settable") {
    Exec before = awe::mat::default_exec();
    awe::mat::set_default_exec(Exec::Serial);
    CHECK(awe::mat::default_exec() == Exec::Serial);
    awe::mat::set_default_exec(before);
    CHECK(awe::mat::default_exec() == before);
}
