#pragma once

#include <vector>

#include "blochwave/kernels.hpp"
#include "blochwave/parallel.hpp"

namespace blochwave::reduce {

// Reductions over fields, parallelized over fixed-size blocks with the
// per-block partials combined in block order. The result is bitwise
// independent of the thread count.

inline double sum_abs2(const kernels::cdouble* u, std::size_t n) {
  std::vector<double> partial(parallel::block_count(n), 0.0);
  parallel::for_blocks(n, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    partial[b] = kernels::sum_abs2(u + lo, hi - lo);
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

inline double weighted_sum_abs2(const kernels::cdouble* u, const double* w,
                                std::size_t n) {
  std::vector<double> partial(parallel::block_count(n), 0.0);
  parallel::for_blocks(n, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    partial[b] = kernels::weighted_sum_abs2(u + lo, w + lo, hi - lo);
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

inline double sum_im_conj_dot(const kernels::cdouble* a,
                              const kernels::cdouble* b, std::size_t n) {
  std::vector<double> partial(parallel::block_count(n), 0.0);
  parallel::for_blocks(n, [&](std::size_t b_, std::size_t lo, std::size_t hi) {
    partial[b_] = kernels::sum_im_conj_dot(a + lo, b + lo, hi - lo);
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace blochwave::reduce
