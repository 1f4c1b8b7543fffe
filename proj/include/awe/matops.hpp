#pragma once

#include <cstddef>

// Batched dense kernels backing the actor/critic networks. Each kernel has a
// naive serial reference (the oracle for tests and the benchmark baseline)
// and an OpenMP version parallelized over output rows. Row sums keep a fixed
// accumulation order, so results are identical across thread counts.

namespace awe::mat {

enum class Exec { Serial, Parallel };

// C[m x n] = A[m x k] * B[n x k]^T   (forward pass: X * W^T)
void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c, Exec exec);

// C[m x n] = A[m x k] * B[k x n]     (input gradient: dY * W)
void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c, Exec exec);

// C[m x n] = A[k x m]^T * B[k x n]   (weight gradient: dY^T * X)
void gemm_tn(int m, int n, int k, const float* a, const float* b, float* c, Exec exec);

// Naive triple-loop references.
void gemm_nt_serial(int m, int n, int k, const float* a, const float* b, float* c);
void gemm_nn_serial(int m, int n, int k, const float* a, const float* b, float* c);
void gemm_tn_serial(int m, int n, int k, const float* a, const float* b, float* c);

// Default execution policy for the networks (Parallel when built with OpenMP).
Exec default_exec();
void set_default_exec(Exec e);

}  // namespace awe::mat
