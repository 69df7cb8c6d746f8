#include "csa/subsets.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "csa/error.hpp"
#include "csa/rng.hpp"

namespace csa {

std::uint64_t binomial_capped(int K, int k, std::uint64_t cap) {
  if (k < 0 || K < 0 || k > K) {
    throw Error("binomial_capped: need 0 <= k <= K, got K=" + std::to_string(K) +
                " k=" + std::to_string(k));
  }
  if (k > K - k) k = K - k;
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    // r stays the exact binomial C(K-k+i, i), which is increasing in i
    r = r * static_cast<unsigned>(K - k + i) / static_cast<unsigned>(i);
    if (r > cap) return cap;
  }
  return static_cast<std::uint64_t>(r);
}

std::vector<std::vector<int>> enumerate_k_subsets(int K, int k) {
  if (k < 1 || k > K) {
    throw Error("enumerate_k_subsets: need 1 <= k <= K, got K=" +
                std::to_string(K) + " k=" + std::to_string(k));
  }
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    // advance to the next combination in lexicographic order
    int i = k - 1;
    while (i >= 0 && c[i] == K - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[i] + j - i;
  }
  return out;
}

namespace {

// One uniform k-subset of {0..K-1}, sorted. Robert Floyd's algorithm.
std::vector<int> draw_subset(int K, int k, std::mt19937_64& rng) {
  std::set<int> picked;
  for (int j = K - k; j < K; ++j) {
    int t = static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(j) + 1));
    if (!picked.insert(t).second) picked.insert(j);
  }
  return {picked.begin(), picked.end()};
}

}  // namespace

SubsetPlan build_subset_plan(int K, int k, std::uint64_t r, std::uint64_t seed) {
  if (k < 1 || k > K) {
    throw Error("build_subset_plan: need 1 <= k <= K, got K=" +
                std::to_string(K) + " k=" + std::to_string(k));
  }
  if (r < 1) throw Error("build_subset_plan: r must be >= 1");

  SubsetPlan plan;
  plan.k = k;
  plan.M_exact_capped = binomial_capped(K, k, r);

  // binomial_capped(K,k,r+1) <= r exactly when C(K,k) <= r
  if (binomial_capped(K, k, r + 1) <= r) {
    plan.sampled = false;
    plan.subsets = enumerate_k_subsets(K, k);
    return plan;
  }

  // C(K,k) > r: rejection-sample r distinct subsets. Each accepted subset
  // is uniform over the subsets not yet chosen, so the final collection is
  // a uniform draw without replacement.
  plan.sampled = true;
  plan.seed = derive_seed(seed, {static_cast<std::uint64_t>(k)});
  auto rng = make_engine(plan.seed);
  std::set<std::vector<int>> seen;
  plan.subsets.reserve(r);
  while (plan.subsets.size() < r) {
    auto s = draw_subset(K, k, rng);
    if (seen.insert(s).second) plan.subsets.push_back(std::move(s));
  }
  return plan;
}

}  // namespace csa
