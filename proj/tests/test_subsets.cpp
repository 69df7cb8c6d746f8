#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>

#include "csa/error.hpp"
#include "csa/rng.hpp"
#include "csa/subsets.hpp"
#include "oracle.hpp"

namespace {

constexpr std::uint64_t kNoCap = ~std::uint64_t{0};

bool strictly_ascending(const std::vector<int>& s) {
  return std::is_sorted(s.begin(), s.end()) &&
         std::adjacent_find(s.begin(), s.end()) == s.end();
}

}  // namespace

TEST_CASE("binomial_capped agrees with Pascal's triangle up to K = 30") {
  for (int K = 0; K <= 30; ++K) {
    for (int k = 0; k <= K; ++k) {
      CHECK(csa::binomial_capped(K, k, kNoCap) ==
            oracle::binomial_capped(K, k, kNoCap));
    }
  }
}

TEST_CASE("binomial_capped saturates at the cap without overflowing") {
  CHECK(csa::binomial_capped(20, 10, 100) == 100);
  CHECK(csa::binomial_capped(20, 10, kNoCap) == 184756);
  CHECK(csa::binomial_capped(6, 3, 20) == 20);   // exactly at the cap
  CHECK(csa::binomial_capped(6, 3, 19) == 19);
  // C(200, 100) overflows any u64 by far; the cap must still come back
  CHECK(csa::binomial_capped(200, 100, 100) == 100);
  CHECK(csa::binomial_capped(5, 0, kNoCap) == 1);
  CHECK(csa::binomial_capped(5, 5, kNoCap) == 1);
  CHECK_THROWS_AS(csa::binomial_capped(5, 6, kNoCap), csa::Error);
}

TEST_CASE("enumerate_k_subsets is the full lexicographic enumeration") {
  for (int K = 1; K <= 8; ++K) {
    for (int k = 1; k <= K; ++k) {
      const auto got = csa::enumerate_k_subsets(K, k);
      const auto want = oracle::k_subsets(K, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    }
  }
}

TEST_CASE("build_subset_plan enumerates fully when C(K,k) fits in r") {
  const csa::SubsetPlan plan = csa::build_subset_plan(6, 3, 100, 42);
  CHECK(plan.k == 3);
  CHECK(plan.M() == 20);
  CHECK(plan.M_exact_capped == 20);
  CHECK_FALSE(plan.sampled);
  CHECK(plan.subsets == oracle::k_subsets(6, 3));

  // full enumeration cannot depend on the seed
  const csa::SubsetPlan other = csa::build_subset_plan(6, 3, 100, 43);
  CHECK(other.subsets == plan.subsets);
  CHECK(other.seed == plan.seed);
}

TEST_CASE("sampled plans hold r distinct in-range sorted subsets") {
  const csa::SubsetPlan plan = csa::build_subset_plan(20, 8, 100, 7);
  CHECK(plan.sampled);
  CHECK(plan.M() == 100);
  CHECK(plan.M_exact_capped == 100);  // saturated at r

  std::set<std::vector<int>> seen;
  for (const auto& s : plan.subsets) {
    REQUIRE(s.size() == 8);
    CHECK(strictly_ascending(s));
    CHECK(s.front() >= 0);
    CHECK(s.back() < 20);
    CHECK(seen.insert(s).second);  // no duplicates
  }
}

TEST_CASE("sampled plans are deterministic in (K, k, r, seed)") {
  const csa::SubsetPlan a = csa::build_subset_plan(15, 6, 50, 2022);
  const csa::SubsetPlan b = csa::build_subset_plan(15, 6, 50, 2022);
  CHECK(a.subsets == b.subsets);
  CHECK(a.seed == b.seed);
  CHECK(a.seed == csa::derive_seed(2022, {6}));

  const csa::SubsetPlan c = csa::build_subset_plan(15, 6, 50, 2023);
  CHECK(c.subsets != a.subsets);  // astronomically unlikely to collide
}

TEST_CASE("boundary sizes: k = K and k = 1") {
  const csa::SubsetPlan full = csa::build_subset_plan(9, 9, 100, 1);
  REQUIRE(full.M() == 1);
  CHECK(full.subsets[0] == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});

  const csa::SubsetPlan singles = csa::build_subset_plan(9, 1, 100, 1);
  REQUIRE(singles.M() == 9);
  for (int j = 0; j < 9; ++j) CHECK(singles.subsets[j] == std::vector<int>{j});
}

TEST_CASE("build_subset_plan rejects out-of-range arguments") {
  CHECK_THROWS_AS(csa::build_subset_plan(5, 0, 100, 1), csa::Error);
  CHECK_THROWS_AS(csa::build_subset_plan(5, 6, 100, 1), csa::Error);
  CHECK_THROWS_AS(csa::build_subset_plan(0, 1, 100, 1), csa::Error);
  CHECK_THROWS_AS(csa::build_subset_plan(5, 3, 0, 1), csa::Error);
}

TEST_CASE("single-subset draws are close to uniform over C(6,3)") {
  // 20000 plans at r=1: each of the 20 subsets should land near 1/20.
  std::map<std::vector<int>, int> freq;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const csa::SubsetPlan plan =
        csa::build_subset_plan(6, 3, 1, csa::derive_seed(99, {(std::uint64_t)i}));
    REQUIRE(plan.M() == 1);
    ++freq[plan.subsets[0]];
  }
  REQUIRE(freq.size() == 20);
  for (const auto& [subset, count] : freq) {
    const double p = double(count) / draws;
    CHECK(p == doctest::Approx(0.05).epsilon(0.2));  // 0.05 +- 0.01
  }
}
