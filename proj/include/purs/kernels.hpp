#pragma once

#include <cstdint>

// Dense inner loops shared by the tensor ops and the clustering code.
//
// Every kernel comes in two builds: the OpenMP one under purs::kernels and a
// plain serial reference under purs::kernels::serial. Parallel kernels split
// work across independent output elements only, and each element keeps the
// serial summation order, so both builds produce bitwise-identical results
// for any thread count. Tests compare them directly; tools/bench_kernels
// reports their relative throughput.

namespace purs::kernels {

// C[m,n] = A[m,k] * B[k,n], row-major.
void gemm(const double* a, const double* b, double* c, int m, int k, int n);

// C[m,k] += A[m,n] * B[k,n]^T
void gemm_acc_nt(const double* a, const double* b, double* c, int m, int n, int k);

// C[k,n] += A[m,k]^T * B[m,n]
void gemm_acc_tn(const double* a, const double* b, double* c, int m, int k, int n);

// Mean-shift mode seeking: moves every point to the mode of the Gaussian
// kernel density (exponent coefficient c) of the full point set. modes must
// hold n*dim doubles. Each point iterates x <- m(x) until the shift norm
// drops below tol or max_iters is reached.
void seek_modes(const double* points, int n, int dim, double c, double tol,
                int max_iters, double* modes);

namespace serial {

void gemm(const double* a, const double* b, double* c, int m, int k, int n);
void gemm_acc_nt(const double* a, const double* b, double* c, int m, int n, int k);
void gemm_acc_tn(const double* a, const double* b, double* c, int m, int k, int n);
void seek_modes(const double* points, int n, int dim, double c, double tol,
                int max_iters, double* modes);

}  // namespace serial

}  // namespace purs::kernels
