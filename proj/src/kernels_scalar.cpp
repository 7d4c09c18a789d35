#include "jtcomp/kernels.hpp"

namespace jtcomp::kernels {
namespace {

cplx cdot_scalar(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double norm2_scalar(const cplx* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  }
  return acc;
}

void axpy_scalar(cplx* y, cplx s, const cplx* x, std::size_t n) {
  const double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx(sr * xr - si * xi, sr * xi + si * xr);
  }
}

void axpy_conj_scalar(cplx* y, cplx s, const cplx* x, std::size_t n) {
  const double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx(sr * xr + si * xi, si * xr - sr * xi);
  }
}

void rank1_scalar(cplx* a, const cplx* h, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const cplx s = alpha * h[i];
    axpy_conj_scalar(a + i * n, s, h, n);
  }
}

void matvec_scalar(const cplx* a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* row = a + i * n;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ar = row[j].real(), ai = row[j].imag();
      const double xr = x[j].real(), xi = x[j].imag();
      re += ar * xr - ai * xi;
      im += ar * xi + ai * xr;
    }
    y[i] = {re, im};
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table = {
      "scalar",     cdot_scalar,  norm2_scalar,  axpy_scalar,
      axpy_conj_scalar, rank1_scalar, matvec_scalar,
  };
  return table;
}

}  // namespace jtcomp::kernels
