#include "blochwave/kernels.hpp"

namespace blochwave::kernels {

namespace detail {

namespace {

// Scalar reference kernels. Complex arithmetic is spelled out so the
// operation order matches the AVX2 lane arithmetic exactly.

void s_cmul(cdouble* u, const cdouble* t, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = u[i].real(), ai = u[i].imag();
    const double br = t[i].real(), bi = t[i].imag();
    u[i] = cdouble(ar * br - ai * bi, ai * br + ar * bi);
  }
}

void s_abs2(double* dst, const cdouble* u, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = u[i].real(), im = u[i].imag();
    dst[i] = re * re + im * im;
  }
}

void s_caxpy(cdouble* y, cdouble alpha, const cdouble* x, std::size_t n) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = cdouble(y[i].real() + (ar * xr - ai * xi),
                   y[i].imag() + (ai * xr + ar * xi));
  }
}

void s_cscale(cdouble* u, cdouble alpha, std::size_t n) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double ur = u[i].real(), ui = u[i].imag();
    u[i] = cdouble(ar * ur - ai * ui, ai * ur + ar * ui);
  }
}

void s_triple_mul_acc(cdouble* acc, cdouble alpha, const cdouble* a,
                      const cdouble* b, const cdouble* c, std::size_t n) {
  const double sr = alpha.real(), si = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    // t = a * conj(b)
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    const double tr = ar * br + ai * bi;
    const double ti = ai * br - ar * bi;
    // p = t * c
    const double cr = c[i].real(), ci = c[i].imag();
    const double pr = tr * cr - ti * ci;
    const double pi = ti * cr + tr * ci;
    // acc += alpha * p
    acc[i] = cdouble(acc[i].real() + (sr * pr - si * pi),
                     acc[i].imag() + (si * pr + sr * pi));
  }
}

// Reductions: 8 real accumulators over the flattened double view, fixed
// combine order. The AVX2 path keeps the same assignment of flat index to
// accumulator, so the float operations agree bit for bit.

double combine8(const double r[8]) {
  return ((r[0] + r[1]) + (r[2] + r[3])) + ((r[4] + r[5]) + (r[6] + r[7]));
}

double s_sum_abs2(const cdouble* u, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(u);
  const std::size_t m = 2 * n;
  double r[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  const std::size_t m8 = m - (m % 8);
  for (std::size_t i = 0; i < m8; i += 8) {
    for (int c = 0; c < 8; ++c) r[c] += x[i + c] * x[i + c];
  }
  for (std::size_t i = m8; i < m; ++i) r[i - m8] += x[i] * x[i];
  return combine8(r);
}

double s_weighted_sum_abs2(const cdouble* u, const double* w, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(u);
  const std::size_t m = 2 * n;
  double r[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  const std::size_t m8 = m - (m % 8);
  for (std::size_t i = 0; i < m8; i += 8) {
    for (int c = 0; c < 8; ++c) r[c] += w[(i + c) / 2] * (x[i + c] * x[i + c]);
  }
  for (std::size_t i = m8; i < m; ++i) r[i - m8] += w[i / 2] * (x[i] * x[i]);
  return combine8(r);
}

double s_sum_im_conj_dot(const cdouble* a, const cdouble* b, std::size_t n) {
  // Im(conj(a) b) = re_a * im_b - im_a * re_b, accumulated over 4 item lanes.
  double r[4] = {0, 0, 0, 0};
  const std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    for (int c = 0; c < 4; ++c) {
      r[c] += a[i + c].real() * b[i + c].imag() -
              a[i + c].imag() * b[i + c].real();
    }
  }
  for (std::size_t i = n4; i < n; ++i) {
    r[i - n4] += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return (r[0] + r[1]) + (r[2] + r[3]);
}

}  // namespace

const Ops scalar_ops = {s_cmul,   s_abs2,     s_caxpy,
                        s_cscale, s_triple_mul_acc, s_sum_abs2,
                        s_weighted_sum_abs2, s_sum_im_conj_dot};

#if defined(__x86_64__)
bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }
#endif

}  // namespace detail

namespace {

const detail::Ops* g_ops = nullptr;
Backend g_backend = Backend::Auto;

const detail::Ops* resolve(Backend b, Backend* effective) {
#if defined(__x86_64__)
  if (b == Backend::Avx2 || (b == Backend::Auto && detail::cpu_has_avx2())) {
    *effective = Backend::Avx2;
    return &detail::avx2_ops;
  }
#endif
  *effective = Backend::Scalar;
  return &detail::scalar_ops;
}

const detail::Ops* ops() {
  if (!g_ops) g_ops = resolve(Backend::Auto, &g_backend);
  return g_ops;
}

}  // namespace

Backend set_backend(Backend b) {
  g_ops = resolve(b, &g_backend);
  return g_backend;
}

Backend active_backend() {
  ops();
  return g_backend;
}

std::string backend_name() {
  return active_backend() == Backend::Avx2 ? "avx2" : "scalar";
}

void cmul(cdouble* u, const cdouble* t, std::size_t n) { ops()->cmul(u, t, n); }
void abs2(double* dst, const cdouble* u, std::size_t n) {
  ops()->abs2(dst, u, n);
}
void caxpy(cdouble* y, cdouble alpha, const cdouble* x, std::size_t n) {
  ops()->caxpy(y, alpha, x, n);
}
void cscale(cdouble* u, cdouble alpha, std::size_t n) {
  ops()->cscale(u, alpha, n);
}
void triple_mul_acc(cdouble* acc, cdouble alpha, const cdouble* a,
                    const cdouble* b, const cdouble* c, std::size_t n) {
  ops()->triple_mul_acc(acc, alpha, a, b, c, n);
}
double sum_abs2(const cdouble* u, std::size_t n) { return ops()->sum_abs2(u, n); }
double weighted_sum_abs2(const cdouble* u, const double* w, std::size_t n) {
  return ops()->weighted_sum_abs2(u, w, n);
}
double sum_im_conj_dot(const cdouble* a, const cdouble* b, std::size_t n) {
  return ops()->sum_im_conj_dot(a, b, n);
}

}  // namespace blochwave::kernels
