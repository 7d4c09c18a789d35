#pragma once
// Unblocked-subset combinations of a serving set and the exact/pessimistic
// SINR evaluators in their masked stacked-vector form.

#include <cstdint>
#include <utility>
#include <vector>

#include "jtcomp/channel.hpp"

namespace jtcomp {

// Stacked vectors have length B*N; block b of a stacked beamformer is zero
// unless RRU b serves the user, block b of a masked stacked channel is zero
// for RRUs excluded by the subset hypothesis.
using StackedVector = std::vector<cplx>;

struct SubsetFamily {
  int user = -1;
  std::vector<int> base;     // serving set, sorted RRU indices
  int min_size = 1;          // L
  // subsets ordered by size ascending then lexicographically
  std::vector<std::vector<int>> subsets;
  std::vector<std::uint64_t> subset_mask;    // members of B_k^c
  std::vector<std::uint64_t> excluded_mask;  // D_k^c = base \ subset

  int count() const { return static_cast<int>(subsets.size()); }
};

// Subsets may not exceed this count; combinatorial growth beyond it is a
// configuration error.
inline constexpr int kMaxSubsets = 64;

// Sum_{l=L..n} binom(n,l). Throws std::invalid_argument if L is out of range.
std::int64_t subset_count(int n, int L);

// All subsets of `base` with size >= L in deterministic (size, lex) order.
SubsetFamily enumerate_subsets(const std::vector<int>& base, int L);

// Stacked masked channel h_k^c: blocks of RRUs in `excluded_mask` are zero,
// all other blocks carry the per-RRU channel toward user k.
StackedVector build_stacked_channel(const ChannelState& H, int k,
                                    std::uint64_t excluded_mask = 0);

// SINR of user k under subset hypothesis c, Eq.-(4)-style masking: the
// excluded RRUs drop out of both the desired sum and the interference toward
// user k. F holds one stacked beamformer per user.
double sinr_subset(const std::vector<StackedVector>& F, const ChannelState& H, int k,
                   int c, const SubsetFamily& family, double sigma2);

// Minimum subset SINR and its argmin index (ties broken by lowest c).
std::pair<double, int> pessimistic_sinr(const std::vector<StackedVector>& F,
                                        const ChannelState& H, int k,
                                        const SubsetFamily& family, double sigma2);

// SINR under the realized channel (blocked pairs already zeroed).
double sinr_actual(const std::vector<StackedVector>& F, const ChannelState& realized,
                   int k, double sigma2);

}  // namespace jtcomp
