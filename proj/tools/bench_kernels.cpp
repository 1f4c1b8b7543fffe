// Timing comparison of the serial reference kernels against the OpenMP
// versions, at the shapes used by the batched MLP forward/backward passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "awe/matops.hpp"

using awe::mat::Exec;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);

    struct Shape {
        int m, n, k;
        const char* label;
    };
    // batch=100 hidden layers plus a larger stress shape
    const Shape shapes[] = {
        {100, 400, 7, "input -> h1"},
        {100, 300, 400, "h1 -> h2"},
        {100, 400, 300, "h2^T backprop"},
        {512, 512, 512, "512^3 stress"},
    };

    std::printf("%-16s %10s %10s %8s\n", "shape", "serial ms", "openmp ms", "speedup");
    for (const Shape& s : shapes) {
        std::vector<float> a(size_t(s.m) * s.k), b(size_t(s.n) * s.k);
        std::vector<float> c1(size_t(s.m) * s.n), c2(size_t(s.m) * s.n);
        for (float& v : a) v = u(rng);
        for (float& v : b) v = u(rng);

        int reps = s.m * s.n * s.k > (1 << 24) ? 10 : 200;
        double ts = time_ms(reps, [&] {
            awe::mat::gemm_nt(s.m, s.n, s.k, a.data(), b.data(), c1.data(), Exec::Serial);
        });
        double tp = time_ms(reps, [&] {
            awe::mat::gemm_nt(s.m, s.n, s.k, a.data(), b.data(), c2.data(), Exec::Parallel);
        });

        float max_diff = 0.0f;
        for (size_t i = 0; i < c1.size(); ++i)
            max_diff = std::max(max_diff, std::abs(c1[i] - c2[i]));
        std::printf("%-16s %10.3f %10.3f %7.2fx   (max diff %g)\n", s.label, ts, tp, ts / tp,
                    max_diff);
    }
    return 0;
}
