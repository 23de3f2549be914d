// AVX2 kernel variants. Compiled with -mavx2 in this translation unit only;
// callers dispatch through kernels.cpp after a cpuid probe. Arithmetic
// mirrors the scalar reference op for op (addsub/hsub lane math), so both
// backends produce bitwise identical results.

#if defined(__x86_64__)

#include <immintrin.h>

#include "blochwave/kernels.hpp"

namespace blochwave::kernels::detail {

namespace {

inline __m256d dup_even(__m256d x) { return _mm256_movedup_pd(x); }
inline __m256d dup_odd(__m256d x) { return _mm256_permute_pd(x, 0xF); }
inline __m256d swap_re_im(__m256d x) { return _mm256_permute_pd(x, 0x5); }
inline __m256d negate(__m256d x) {
  return _mm256_xor_pd(x, _mm256_set1_pd(-0.0));
}

// (ar*br - ai*bi, ai*br + ar*bi) for two packed complex doubles.
inline __m256d cmul2(__m256d a, __m256d b) {
  const __m256d p1 = _mm256_mul_pd(a, dup_even(b));
  const __m256d p2 = _mm256_mul_pd(swap_re_im(a), dup_odd(b));
  return _mm256_addsub_pd(p1, p2);
}

// a * conj(b): (ar*br + ai*bi, ai*br - ar*bi).
inline __m256d cmul_conj2(__m256d a, __m256d b) {
  const __m256d p1 = _mm256_mul_pd(a, dup_even(b));
  const __m256d p2 = _mm256_mul_pd(swap_re_im(a), dup_odd(b));
  return _mm256_addsub_pd(p1, negate(p2));
}

void v_cmul(cdouble* u, const cdouble* t, std::size_t n) {
  double* ud = reinterpret_cast<double*>(u);
  const double* td = reinterpret_cast<const double*>(t);
  const std::size_t n2 = n - (n % 2);
  for (std::size_t i = 0; i < n2; i += 2) {
    const __m256d a = _mm256_loadu_pd(ud + 2 * i);
    const __m256d b = _mm256_loadu_pd(td + 2 * i);
    _mm256_storeu_pd(ud + 2 * i, cmul2(a, b));
  }
  for (std::size_t i = n2; i < n; ++i) {
    const double ar = u[i].real(), ai = u[i].imag();
    const double br = t[i].real(), bi = t[i].imag();
    u[i] = cdouble(ar * br - ai * bi, ai * br + ar * bi);
  }
}

void v_abs2(double* dst, const cdouble* u, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(u);
  const std::size_t n2 = n - (n % 2);
  for (std::size_t i = 0; i < n2; i += 2) {
    const __m256d a = _mm256_loadu_pd(x + 2 * i);
    const __m256d sq = _mm256_mul_pd(a, a);
    const __m256d h = _mm256_hadd_pd(sq, sq);  // [s0, s0, s1, s1]
    dst[i] = _mm256_cvtsd_f64(h);
    dst[i + 1] = _mm_cvtsd_f64(_mm256_extractf128_pd(h, 1));
  }
  for (std::size_t i = n2; i < n; ++i) {
    const double re = u[i].real(), im = u[i].imag();
    dst[i] = re * re + im * im;
  }
}

void v_caxpy(cdouble* y, cdouble alpha, const cdouble* x, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  double* yd = reinterpret_cast<double*>(y);
  const double* xd = reinterpret_cast<const double*>(x);
  const std::size_t n2 = n - (n % 2);
  for (std::size_t i = 0; i < n2; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d p =
        _mm256_addsub_pd(_mm256_mul_pd(xv, ar),
                         _mm256_mul_pd(swap_re_im(xv), ai));
    _mm256_storeu_pd(yd + 2 * i,
                     _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), p));
  }
  const double sr = alpha.real(), si = alpha.imag();
  for (std::size_t i = n2; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = cdouble(y[i].real() + (sr * xr - si * xi),
                   y[i].imag() + (si * xr + sr * xi));
  }
}

void v_cscale(cdouble* u, cdouble alpha, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  double* ud = reinterpret_cast<double*>(u);
  const std::size_t n2 = n - (n % 2);
  for (std::size_t i = 0; i < n2; i += 2) {
    const __m256d uv = _mm256_loadu_pd(ud + 2 * i);
    _mm256_storeu_pd(ud + 2 * i,
                     _mm256_addsub_pd(_mm256_mul_pd(uv, ar),
                                      _mm256_mul_pd(swap_re_im(uv), ai)));
  }
  const double sr = alpha.real(), si = alpha.imag();
  for (std::size_t i = n2; i < n; ++i) {
    const double ur = u[i].real(), ui = u[i].imag();
    u[i] = cdouble(sr * ur - si * ui, si * ur + sr * ui);
  }
}

void v_triple_mul_acc(cdouble* acc, cdouble alpha, const cdouble* a,
                      const cdouble* b, const cdouble* c, std::size_t n) {
  const __m256d sr = _mm256_set1_pd(alpha.real());
  const __m256d si = _mm256_set1_pd(alpha.imag());
  double* accd = reinterpret_cast<double*>(acc);
  const double* ad = reinterpret_cast<const double*>(a);
  const double* bd = reinterpret_cast<const double*>(b);
  const double* cd = reinterpret_cast<const double*>(c);
  const std::size_t n2 = n - (n % 2);
  for (std::size_t i = 0; i < n2; i += 2) {
    const __m256d av = _mm256_loadu_pd(ad + 2 * i);
    const __m256d bv = _mm256_loadu_pd(bd + 2 * i);
    const __m256d cv = _mm256_loadu_pd(cd + 2 * i);
    const __m256d t = cmul_conj2(av, bv);
    const __m256d p = cmul2(t, cv);
    const __m256d scaled =
        _mm256_addsub_pd(_mm256_mul_pd(p, sr),
                         _mm256_mul_pd(swap_re_im(p), si));
    _mm256_storeu_pd(accd + 2 * i,
                     _mm256_add_pd(_mm256_loadu_pd(accd + 2 * i), scaled));
  }
  const double xr = alpha.real(), xi = alpha.imag();
  for (std::size_t i = n2; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    const double tr = ar * br + ai * bi;
    const double ti = ai * br - ar * bi;
    const double cr = c[i].real(), ci = c[i].imag();
    const double pr = tr * cr - ti * ci;
    const double pi = ti * cr + tr * ci;
    acc[i] = cdouble(acc[i].real() + (xr * pr - xi * pi),
                     acc[i].imag() + (xi * pr + xr * pi));
  }
}

double combine8(const double r[8]) {
  return ((r[0] + r[1]) + (r[2] + r[3])) + ((r[4] + r[5]) + (r[6] + r[7]));
}

double v_sum_abs2(const cdouble* u, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(u);
  const std::size_t m = 2 * n;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  const std::size_t m8 = m - (m % 8);
  for (std::size_t i = 0; i < m8; i += 8) {
    const __m256d a = _mm256_loadu_pd(x + i);
    const __m256d b = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a, a));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(b, b));
  }
  double r[8];
  _mm256_storeu_pd(r, acc0);
  _mm256_storeu_pd(r + 4, acc1);
  for (std::size_t i = m8; i < m; ++i) r[i - m8] += x[i] * x[i];
  return combine8(r);
}

double v_weighted_sum_abs2(const cdouble* u, const double* w, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(u);
  const std::size_t m = 2 * n;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  const std::size_t m8 = m - (m % 8);
  for (std::size_t i = 0; i < m8; i += 8) {
    const std::size_t item = i / 2;
    const __m128d w01 = _mm_loadu_pd(w + item);
    const __m128d w23 = _mm_loadu_pd(w + item + 2);
    const __m256d wa = _mm256_set_m128d(_mm_unpackhi_pd(w01, w01),
                                        _mm_unpacklo_pd(w01, w01));
    const __m256d wb = _mm256_set_m128d(_mm_unpackhi_pd(w23, w23),
                                        _mm_unpacklo_pd(w23, w23));
    const __m256d a = _mm256_loadu_pd(x + i);
    const __m256d b = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(wa, _mm256_mul_pd(a, a)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(wb, _mm256_mul_pd(b, b)));
  }
  double r[8];
  _mm256_storeu_pd(r, acc0);
  _mm256_storeu_pd(r + 4, acc1);
  for (std::size_t i = m8; i < m; ++i) r[i - m8] += w[i / 2] * (x[i] * x[i]);
  return combine8(r);
}

double v_sum_im_conj_dot(const cdouble* a, const cdouble* b, std::size_t n) {
  const double* ad = reinterpret_cast<const double*>(a);
  const double* bd = reinterpret_cast<const double*>(b);
  __m256d acc = _mm256_setzero_pd();  // lanes: item0, item2, item1, item3
  const std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d a01 = _mm256_loadu_pd(ad + 2 * i);
    const __m256d a23 = _mm256_loadu_pd(ad + 2 * i + 4);
    const __m256d b01 = swap_re_im(_mm256_loadu_pd(bd + 2 * i));
    const __m256d b23 = swap_re_im(_mm256_loadu_pd(bd + 2 * i + 4));
    const __m256d pA = _mm256_mul_pd(a01, b01);  // [r*bi, i*br, ...]
    const __m256d pB = _mm256_mul_pd(a23, b23);
    acc = _mm256_add_pd(acc, _mm256_hsub_pd(pA, pB));
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, acc);
  double r[4] = {lanes[0], lanes[2], lanes[1], lanes[3]};
  for (std::size_t i = n4; i < n; ++i) {
    r[i - n4] += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return (r[0] + r[1]) + (r[2] + r[3]);
}

}  // namespace

const Ops avx2_ops = {v_cmul,   v_abs2,     v_caxpy,
                      v_cscale, v_triple_mul_acc, v_sum_abs2,
                      v_weighted_sum_abs2, v_sum_im_conj_dot};

}  // namespace blochwave::kernels::detail

#endif  // __x86_64__
