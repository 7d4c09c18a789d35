#pragma once
// Complex vector/matrix micro-kernels used by the SINR evaluators and the
// beamformer solver. A scalar reference implementation and an AVX2 variant
// are selected at runtime; JTCOMP_KERNELS=scalar|avx2 forces a choice.

#include <complex>
#include <cstddef>

namespace jtcomp::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  const char* name;
  // sum_i conj(a[i]) * b[i]
  cplx (*cdot)(const cplx* a, const cplx* b, std::size_t n);
  // sum_i |a[i]|^2
  double (*norm2)(const cplx* a, std::size_t n);
  // y[i] += s * x[i]
  void (*axpy)(cplx* y, cplx s, const cplx* x, std::size_t n);
  // y[i] += s * conj(x[i])
  void (*axpy_conj)(cplx* y, cplx s, const cplx* x, std::size_t n);
  // A += alpha * h * h^H, A row-major n x n, alpha real
  void (*rank1_herm_update)(cplx* a, const cplx* h, double alpha, std::size_t n);
  // y = A * x, A row-major n x n
  void (*matvec)(const cplx* a, const cplx* x, cplx* y, std::size_t n);
};

const KernelTable& scalar_kernels();
bool avx2_available();
const KernelTable& avx2_kernels();  // valid only if avx2_available()

// Dispatched table, resolved once on first use.
const KernelTable& active_kernels();

inline cplx cdot(const cplx* a, const cplx* b, std::size_t n) {
  return active_kernels().cdot(a, b, n);
}
inline double norm2(const cplx* a, std::size_t n) {
  return active_kernels().norm2(a, n);
}
inline void axpy(cplx* y, cplx s, const cplx* x, std::size_t n) {
  active_kernels().axpy(y, s, x, n);
}
inline void axpy_conj(cplx* y, cplx s, const cplx* x, std::size_t n) {
  active_kernels().axpy_conj(y, s, x, n);
}
inline void rank1_herm_update(cplx* a, const cplx* h, double alpha, std::size_t n) {
  active_kernels().rank1_herm_update(a, h, alpha, n);
}
inline void matvec(const cplx* a, const cplx* x, cplx* y, std::size_t n) {
  active_kernels().matvec(a, x, y, n);
}

}  // namespace jtcomp::kernels
