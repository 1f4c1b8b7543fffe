#include "awe/matops.hpp"

#include <atomic>
#include <cstring>

namespace awe::mat {

namespace {
std::atomic<Exec> g_default{
#ifdef _OPENMP
    Exec::Parallel
#else
    Exec::Serial
#endif
};
}

Exec default_exec() { return g_default.load(std::memory_order_relaxed); }
void set_default_exec(Exec e) { g_default.store(e, std::memory_order_relaxed); }

namespace {

// Blocked dot product with 32 independent accumulator lanes (several FMA
// chains in flight). The accumulation order is fixed, so the serial and
// OpenMP paths produce bit-identical results for any thread count.
inline float dot8(const float* x, const float* y, int k) {
    constexpr int L = 32;
    if (k < L) {
        float acc = 0.0f;
        for (int t = 0; t < k; ++t) acc += x[t] * y[t];
        return acc;
    }
    float lane[L] = {};
    int t = 0;
    for (; t + L <= k; t += L)
        for (int l = 0; l < L; ++l) lane[l] += x[t + l] * y[t + l];
    float tail = 0.0f;
    for (; t < k; ++t) tail += x[t] * y[t];
    // fixed pairwise combine
    for (int width = L / 2; width >= 1; width /= 2)
        for (int l = 0; l < width; ++l) lane[l] += lane[l + width];
    return lane[0] + tail;
}

}  // namespace

void gemm_nt_serial(int m, int n, int k, const float* a, const float* b, float* c) {
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            c[i * n + j] = dot8(a + static_cast<size_t>(i) * k,
                                b + static_cast<size_t>(j) * k, k);
}

void gemm_nn_serial(int m, int n, int k, const float* a, const float* b, float* c) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            float acc = 0.0f;
            for (int t = 0; t < k; ++t) acc += a[i * k + t] * b[t * n + j];
            c[i * n + j] = acc;
        }
    }
}

void gemm_tn_serial(int m, int n, int k, const float* a, const float* b, float* c) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            float acc = 0.0f;
            for (int t = 0; t < k; ++t) acc += a[t * m + i] * b[t * n + j];
            c[i * n + j] = acc;
        }
    }
}

void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c, Exec exec) {
    if (exec == Exec::Serial) {
        gemm_nt_serial(m, n, k, a, b, c);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const float* ai = a + static_cast<size_t>(i) * k;
        for (int j = 0; j < n; ++j)
            c[i * n + j] = dot8(ai, b + static_cast<size_t>(j) * k, k);
    }
}

void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c, Exec exec) {
    if (exec == Exec::Serial) {
        gemm_nn_serial(m, n, k, a, b, c);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        float* ci = c + static_cast<size_t>(i) * n;
        std::memset(ci, 0, sizeof(float) * n);
        const float* ai = a + static_cast<size_t>(i) * k;
        for (int t = 0; t < k; ++t) {
            float av = ai[t];
            const float* bt = b + static_cast<size_t>(t) * n;
#pragma omp simd
            for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
        }
    }
}

void gemm_tn(int m, int n, int k, const float* a, const float* b, float* c, Exec exec) {
    if (exec == Exec::Serial) {
        gemm_tn_serial(m, n, k, a, b, c);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        float* ci = c + static_cast<size_t>(i) * n;
        std::memset(ci, 0, sizeof(float) * n);
        for (int t = 0; t < k; ++t) {
            float av = a[static_cast<size_t>(t) * m + i];
            const float* bt = b + static_cast<size_t>(t) * n;
#pragma omp simd
            for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
        }
    }
}

}  // namespace awe::mat
