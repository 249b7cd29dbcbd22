#include "purs/kernels.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace purs::kernels {

namespace {

// Work below this many multiply-adds is not worth a parallel region.
constexpr long long kGrain = 1 << 16;

inline void gemm_row(const double* a, const double* b, double* c, int i, int k, int n) {
  double* ci = c + static_cast<std::size_t>(i) * n;
  const double* ai = a + static_cast<std::size_t>(i) * k;
  for (int j = 0; j < n; ++j) ci[j] = 0.0;
  for (int p = 0; p < k; ++p) {
    const double aip = ai[p];
    const double* bp = b + static_cast<std::size_t>(p) * n;
    for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

inline void gemm_acc_nt_row(const double* a, const double* b, double* c, int i, int n, int k) {
  const double* ai = a + static_cast<std::size_t>(i) * n;
  double* ci = c + static_cast<std::size_t>(i) * k;
  for (int j = 0; j < k; ++j) {
    const double* bj = b + static_cast<std::size_t>(j) * n;
    double acc = 0.0;
    for (int p = 0; p < n; ++p) acc += ai[p] * bj[p];
    ci[j] += acc;
  }
}

inline void gemm_acc_tn_row(const double* a, const double* b, double* c, int i, int m, int k, int n) {
  // output row i of C[k,n]: C[i,:] += sum_r A[r,i] * B[r,:]
  double* ci = c + static_cast<std::size_t>(i) * n;
  for (int r = 0; r < m; ++r) {
    const double ari = a[static_cast<std::size_t>(r) * k + i];
    const double* br = b + static_cast<std::size_t>(r) * n;
    for (int j = 0; j < n; ++j) ci[j] += ari * br[j];
  }
}

// One mean-shift trajectory. Uses every point as kernel support (no hard
// neighborhood cutoff); identical code backs the serial and parallel builds.
inline void seek_one_mode(const double* points, int n, int dim, double c, double tol,
                          int max_iters, const double* start, double* out,
                          double* scratch) {
  for (int d = 0; d < dim; ++d) out[d] = start[d];
  const double tol2 = tol * tol;
  for (int it = 0; it < max_iters; ++it) {
    double wsum = 0.0;
    for (int d = 0; d < dim; ++d) scratch[d] = 0.0;
    for (int j = 0; j < n; ++j) {
      const double* pj = points + static_cast<std::size_t>(j) * dim;
      double dist2 = 0.0;
      for (int d = 0; d < dim; ++d) {
        const double diff = pj[d] - out[d];
        dist2 += diff * diff;
      }
      const double w = std::exp(-c * dist2);
      wsum += w;
      for (int d = 0; d < dim; ++d) scratch[d] += w * pj[d];
    }
    double shift2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double next = scratch[d] / wsum;
      const double diff = next - out[d];
      shift2 += diff * diff;
      out[d] = next;
    }
    if (shift2 < tol2) break;
  }
}

}  // namespace

namespace serial {

void gemm(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) gemm_row(a, b, c, i, k, n);
}

void gemm_acc_nt(const double* a, const double* b, double* c, int m, int n, int k) {
  for (int i = 0; i < m; ++i) gemm_acc_nt_row(a, b, c, i, n, k);
}

void gemm_acc_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < k; ++i) gemm_acc_tn_row(a, b, c, i, m, k, n);
}

void seek_modes(const double* points, int n, int dim, double c, double tol,
                int max_iters, double* modes) {
  std::vector<double> scratch(dim);
  for (int i = 0; i < n; ++i) {
    seek_one_mode(points, n, dim, c, tol, max_iters,
                  points + static_cast<std::size_t>(i) * dim,
                  modes + static_cast<std::size_t>(i) * dim, scratch.data());
  }
}

}  // namespace serial

void gemm(const double* a, const double* b, double* c, int m, int k, int n) {
  const long long work = static_cast<long long>(m) * k * n;
  if (work < kGrain || m < 2) {
    serial::gemm(a, b, c, m, k, n);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) gemm_row(a, b, c, i, k, n);
}

void gemm_acc_nt(const double* a, const double* b, double* c, int m, int n, int k) {
  const long long work = static_cast<long long>(m) * n * k;
  if (work < kGrain || m < 2) {
    serial::gemm_acc_nt(a, b, c, m, n, k);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) gemm_acc_nt_row(a, b, c, i, n, k);
}

void gemm_acc_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  const long long work = static_cast<long long>(m) * k * n;
  if (work < kGrain || k < 2) {
    serial::gemm_acc_tn(a, b, c, m, k, n);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < k; ++i) gemm_acc_tn_row(a, b, c, i, m, k, n);
}

void seek_modes(const double* points, int n, int dim, double c, double tol,
                int max_iters, double* modes) {
  if (n < 4) {
    serial::seek_modes(points, n, dim, c, tol, max_iters, modes);
    return;
  }
#pragma omp parallel
  {
    std::vector<double> scratch(dim);
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      seek_one_mode(points, n, dim, c, tol, max_iters,
                    points + static_cast<std::size_t>(i) * dim,
                    modes + static_cast<std::size_t>(i) * dim, scratch.data());
    }
  }
}

}  // namespace purs::kernels
