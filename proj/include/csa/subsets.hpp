#pragma once

#include <cstdint>
#include <vector>

namespace csa {

/// The set of instrument-index subsets averaged over for one candidate k.
/// Holds either the full lexicographic enumeration of all C(K,k) subsets
/// or r distinct subsets sampled uniformly without replacement.
struct SubsetPlan {
  int k = 0;
  std::vector<std::vector<int>> subsets;  // each sorted ascending, distinct
  std::uint64_t M_exact_capped = 0;       // C(K,k) saturated at the r cap
  bool sampled = false;
  std::uint64_t seed = 0;  // stream seed actually used when sampled

  std::uint64_t M() const { return subsets.size(); }
};

/// min(C(K,k), cap) without intermediate overflow. Exact saturating
/// arithmetic: exits as soon as the running binomial exceeds cap.
std::uint64_t binomial_capped(int K, int k, std::uint64_t cap);

/// All C(K,k) subsets of {0..K-1} in lexicographic order. k must satisfy
/// 1 <= k <= K and the count is assumed to fit in memory (callers gate
/// this through the r cap).
std::vector<std::vector<int>> enumerate_k_subsets(int K, int k);

/// Full enumeration when C(K,k) <= r, otherwise r distinct subsets drawn
/// uniformly at random without replacement. Deterministic in (K,k,r,seed);
/// the draw stream is derived from (seed, k) so each candidate k owns an
/// independent stream.
SubsetPlan build_subset_plan(int K, int k, std::uint64_t r, std::uint64_t seed);

}  // namespace csa
