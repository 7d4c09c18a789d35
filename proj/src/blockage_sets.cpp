#include "jtcomp/blockage_sets.hpp"

#include <algorithm>
#include <stdexcept>

#include "jtcomp/kernels.hpp"

namespace jtcomp {

std::int64_t subset_count(int n, int L) {
  if (n < 1 || L < 1 || L > n) {
    throw std::invalid_argument("subset_count: require 1 <= L <= n, got n=" +
                                std::to_string(n) + " L=" + std::to_string(L));
  }
  std::int64_t total = 0;
  // binom(n, l) built incrementally from binom(n, L)
  std::int64_t binom = 1;
  for (int i = 0; i < L; ++i) binom = binom * (n - i) / (i + 1);
  for (int l = L; l <= n; ++l) {
    total += binom;
    binom = binom * (n - l) / (l + 1);
  }
  return total;
}

SubsetFamily enumerate_subsets(const std::vector<int>& base, int L) {
  const int n = static_cast<int>(base.size());
  if (L < 1 || L > n) {
    throw std::invalid_argument("enumerate_subsets: require 1 <= L <= |base|");
  }
  const std::int64_t total = subset_count(n, L);
  if (total > kMaxSubsets) {
    throw std::invalid_argument("enumerate_subsets: " + std::to_string(total) +
                                " subset combinations exceed the cap of " +
                                std::to_string(kMaxSubsets));
  }

  SubsetFamily fam;
  fam.base = base;
  std::sort(fam.base.begin(), fam.base.end());
  fam.min_size = L;

  std::uint64_t base_mask = 0;
  for (int b : fam.base) base_mask |= (1ULL << b);

  std::vector<int> idx;
  for (int size = L; size <= n; ++size) {
    // lexicographic combinations of `size` positions out of n
    idx.resize(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      std::vector<int> subset(size);
      std::uint64_t mask = 0;
      for (int i = 0; i < size; ++i) {
        subset[i] = fam.base[idx[i]];
        mask |= (1ULL << subset[i]);
      }
      fam.subsets.push_back(std::move(subset));
      fam.subset_mask.push_back(mask);
      fam.excluded_mask.push_back(base_mask & ~mask);

      int i = size - 1;
      while (i >= 0 && idx[i] == n - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return fam;
}

StackedVector build_stacked_channel(const ChannelState& H, int k,
                                    std::uint64_t excluded_mask) {
  StackedVector out(static_cast<std::size_t>(H.num_rrus) * H.antennas, cplx(0.0, 0.0));
  for (int b = 0; b < H.num_rrus; ++b) {
    if (excluded_mask & (1ULL << b)) continue;
    const cplx* src = H.vec(b, k);
    std::copy(src, src + H.antennas, out.begin() + static_cast<std::size_t>(b) * H.antennas);
  }
  return out;
}

namespace {
double sinr_from_stacked(const std::vector<StackedVector>& F, const StackedVector& hk,
                         int k, double sigma2) {
  const std::size_t n = hk.size();
  const cplx num = kernels::cdot(hk.data(), F[k].data(), n);
  double den = sigma2;
  for (std::size_t u = 0; u < F.size(); ++u) {
    if (static_cast<int>(u) == k) continue;
    const cplx s = kernels::cdot(hk.data(), F[u].data(), n);
    den += std::norm(s);
  }
  return std::norm(num) / den;
}
}  // namespace

double sinr_subset(const std::vector<StackedVector>& F, const ChannelState& H, int k,
                   int c, const SubsetFamily& family, double sigma2) {
  const StackedVector hk = build_stacked_channel(H, k, family.excluded_mask[c]);
  return sinr_from_stacked(F, hk, k, sigma2);
}

std::pair<double, int> pessimistic_sinr(const std::vector<StackedVector>& F,
                                        const ChannelState& H, int k,
                                        const SubsetFamily& family, double sigma2) {
  if (family.count() == 0) {
    throw std::invalid_argument("pessimistic_sinr: empty subset family");
  }
  double best = 0.0;
  int arg = 0;
  for (int c = 0; c < family.count(); ++c) {
    const double v = sinr_subset(F, H, k, c, family, sigma2);
    if (c == 0 || v < best) {
      best = v;
      arg = c;
    }
  }
  return {best, arg};
}

double sinr_actual(const std::vector<StackedVector>& F, const ChannelState& realized,
                   int k, double sigma2) {
  const StackedVector hk = build_stacked_channel(realized, k);
  return sinr_from_stacked(F, hk, k, sigma2);
}

}  // namespace jtcomp
