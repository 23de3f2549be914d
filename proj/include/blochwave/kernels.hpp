#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace blochwave::kernels {

using cdouble = std::complex<double>;

// Data-parallel inner loops of the integrators: pointwise complex products
// for the spectral phase steps and the four-wave right-hand side, plus the
// reductions behind norms and conserved quantities.
//
// Every kernel has a scalar reference implementation and (on x86-64) an
// AVX2 variant selected at runtime. The two paths are bitwise identical:
// no FMA contraction, and reductions follow a fixed lane-accumulator
// contract (8 real accumulators striding the flattened array, combined as
// ((r0+r1)+(r2+r3)) + ((r4+r5)+(r6+r7))), so results do not depend on the
// selected backend, build flags, or thread count.

enum class Backend { Auto, Scalar, Avx2 };

/// Select the kernel backend. Auto probes CPU support once. Returns the
/// backend actually in effect.
Backend set_backend(Backend b);
Backend active_backend();
std::string backend_name();

/// u[i] *= t[i]
void cmul(cdouble* u, const cdouble* t, std::size_t n);

/// dst[i] = |u[i]|^2
void abs2(double* dst, const cdouble* u, std::size_t n);

/// y[i] += alpha * x[i]
void caxpy(cdouble* y, cdouble alpha, const cdouble* x, std::size_t n);

/// u[i] *= alpha
void cscale(cdouble* u, cdouble alpha, std::size_t n);

/// acc[i] += alpha * a[i] * conj(b[i]) * c[i]   (four-wave triple product)
void triple_mul_acc(cdouble* acc, cdouble alpha, const cdouble* a,
                    const cdouble* b, const cdouble* c, std::size_t n);

/// sum_i |u[i]|^2
double sum_abs2(const cdouble* u, std::size_t n);

/// sum_i w[i] * |u[i]|^2
double weighted_sum_abs2(const cdouble* u, const double* w, std::size_t n);

/// sum_i Im(conj(a[i]) * b[i])
double sum_im_conj_dot(const cdouble* a, const cdouble* b, std::size_t n);

namespace detail {

struct Ops {
  void (*cmul)(cdouble*, const cdouble*, std::size_t);
  void (*abs2)(double*, const cdouble*, std::size_t);
  void (*caxpy)(cdouble*, cdouble, const cdouble*, std::size_t);
  void (*cscale)(cdouble*, cdouble, std::size_t);
  void (*triple_mul_acc)(cdouble*, cdouble, const cdouble*, const cdouble*,
                         const cdouble*, std::size_t);
  double (*sum_abs2)(const cdouble*, std::size_t);
  double (*weighted_sum_abs2)(const cdouble*, const double*, std::size_t);
  double (*sum_im_conj_dot)(const cdouble*, const cdouble*, std::size_t);
};

extern const Ops scalar_ops;
#if defined(__x86_64__)
extern const Ops avx2_ops;
bool cpu_has_avx2();
#endif

}  // namespace detail

}  // namespace blochwave::kernels
