// AVX2/FMA variants of the complex kernels. std::complex<double> is stored
// interleaved (re, im), so one 256-bit register holds two complex values.
#include "jtcomp/kernels.hpp"

#if defined(JTCOMP_BUILD_AVX2)

#include <immintrin.h>

namespace jtcomp::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// lanes 0+2 minus lanes 1+3
inline double heven_minus_odd(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);  // [e0+e2, o1+o3]
  return _mm_cvtsd_f64(_mm_sub_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double heven_plus_odd(__m256d v) { return hsum(v); }

cplx cdot_avx2(const cplx* a, const cplx* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    acc_re = _mm256_fmadd_pd(va, vb, acc_re);                       // ar*br, ai*bi
    const __m256d vbs = _mm256_permute_pd(vb, 0x5);                 // bi, br
    acc_im = _mm256_fmadd_pd(va, vbs, acc_im);                      // ar*bi, ai*br
  }
  double re = hsum(acc_re);
  double im = heven_minus_odd(acc_im);
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double norm2_avx2(const cplx* a, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    acc = _mm256_fmadd_pd(va, va, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    out += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  }
  return out;
}

void axpy_avx2(cplx* y, cplx s, const cplx* x, std::size_t n) {
  double* py = reinterpret_cast<double*>(y);
  const double* px = reinterpret_cast<const double*>(x);
  const __m256d vsr = _mm256_set1_pd(s.real());
  const __m256d vsi = _mm256_set1_pd(s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vxs = _mm256_permute_pd(vx, 0x5);                 // xi, xr
    const __m256d t = _mm256_mul_pd(vsi, vxs);                      // si*xi, si*xr
    const __m256d prod = _mm256_fmaddsub_pd(vsr, vx, t);            // sr*xr-si*xi, sr*xi+si*xr
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
  }
  const double sr = s.real(), si = s.imag();
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx(sr * xr - si * xi, sr * xi + si * xr);
  }
}

// s*conj(x) = conj(conj(s)*x); compute conj(s)*x then flip the imaginary lanes
void axpy_conj_avx2(cplx* y, cplx s, const cplx* x, std::size_t n) {
  double* py = reinterpret_cast<double*>(y);
  const double* px = reinterpret_cast<const double*>(x);
  const __m256d vsr = _mm256_set1_pd(s.real());
  const __m256d vsi = _mm256_set1_pd(s.imag());
  const __m256d flip_odd = _mm256_castsi256_pd(
      _mm256_set_epi64x(0x8000000000000000LL, 0, 0x8000000000000000LL, 0));
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vxs = _mm256_permute_pd(vx, 0x5);
    const __m256d t = _mm256_mul_pd(vsi, vxs);                      // si*xi, si*xr
    const __m256d z = _mm256_fmsubadd_pd(vsr, vx, t);               // sr*xr+si*xi, sr*xi-si*xr
    const __m256d prod = _mm256_xor_pd(z, flip_odd);
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
  }
  const double sr = s.real(), si = s.imag();
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx(sr * xr + si * xi, si * xr - sr * xi);
  }
}

void rank1_avx2(cplx* a, const cplx* h, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    axpy_conj_avx2(a + i * n, alpha * h[i], h, n);
  }
}

void matvec_avx2(const cplx* a, const cplx* x, cplx* y, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = reinterpret_cast<const double*>(a + i * n);
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
      const __m256d va = _mm256_loadu_pd(row + 2 * j);
      const __m256d vx = _mm256_loadu_pd(px + 2 * j);
      acc1 = _mm256_fmadd_pd(va, vx, acc1);                         // ar*xr, ai*xi
      const __m256d vxs = _mm256_permute_pd(vx, 0x5);
      acc2 = _mm256_fmadd_pd(va, vxs, acc2);                        // ar*xi, ai*xr
    }
    double re = heven_minus_odd(acc1);
    double im = heven_plus_odd(acc2);
    const cplx* arow = a + i * n;
    for (; j < n; ++j) {
      const double ar = arow[j].real(), ai = arow[j].imag();
      const double xr = x[j].real(), xi = x[j].imag();
      re += ar * xr - ai * xi;
      im += ar * xi + ai * xr;
    }
    y[i] = {re, im};
  }
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table = {
      "avx2",     cdot_avx2,  norm2_avx2,  axpy_avx2,
      axpy_conj_avx2, rank1_avx2, matvec_avx2,
  };
  return table;
}

}  // namespace jtcomp::kernels

#endif  // JTCOMP_BUILD_AVX2
