#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "semsum/hmm.hpp"
#include "semsum/rng.hpp"
#include "oracles.hpp"

using namespace semsum;

namespace {

CompatibilityMatrix scores(std::size_t F, std::size_t N,
                           std::vector<double> v) {
  return CompatibilityMatrix{F, N, std::move(v)};
}

}  // namespace

TEST_CASE("transition probabilities") {
  REQUIRE(transition_prob(0, 1, 4) == Catch::Approx(1.0 / 3.0));
  REQUIRE(transition_prob(2, 3, 4) == 1.0);
  REQUIRE(transition_prob(2, 1, 4) == 0.0);
  REQUIRE(transition_prob(1, 1, 4) == 0.0);
  REQUIRE(transition_prob(3, 0, 4) == 0.0);  // last state has no successors
  REQUIRE_THROWS_AS(transition_prob(0, 4, 4), Error);
}

TEST_CASE("transition rows sum to one") {
  for (std::size_t F : {2u, 3u, 5u, 17u}) {
    for (std::size_t i = 0; i + 1 < F; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < F; ++j) sum += transition_prob(i, j, F);
      REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("build_emission keeps column top-k and row-normalizes") {
  // S[frame][sentence]
  auto S = scores(3, 2, {0.9, 0.1, 0.5, 0.8, -0.2, 0.6});
  auto B = build_emission(S, 1);
  REQUIRE(B.columns[0].size() == 1);
  REQUIRE(B.columns[0][0].frame == 0);
  REQUIRE(B.columns[0][0].prob == 1.0);
  REQUIRE(B.columns[1].size() == 1);
  REQUIRE(B.columns[1][0].frame == 1);
  REQUIRE(B.columns[1][0].prob == 1.0);
  auto dense = B.dense();
  REQUIRE(dense[2 * 2 + 0] == 0.0);  // frame 2 row all-zero
  REQUIRE(dense[2 * 2 + 1] == 0.0);
}

TEST_CASE("build_emission with k = F densifies and rows sum to 1") {
  Rng rng(3);
  auto S = oracle::random_scores(5, 3, rng);
  auto B = build_emission(S, 5);
  for (const auto& col : B.columns) REQUIRE(col.size() == 5);
  auto dense = B.dense();
  for (std::size_t i = 0; i < 5; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 3; ++j) row += dense[i * 3 + j];
    REQUIRE(row == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("build_emission tie-break keeps the smaller frame index") {
  auto S = scores(3, 1, {0.5, 0.5, 0.1});
  auto B = build_emission(S, 1);
  REQUIRE(B.columns[0][0].frame == 0);
  REQUIRE_THROWS_AS(build_emission(S, 0), Error);
  REQUIRE_THROWS_AS(build_emission(S, 4), Error);
}

TEST_CASE("topk_sets") {
  auto S = scores(3, 2, {0.9, 0.1, 0.5, 0.8, -0.2, 0.6});
  REQUIRE(topk_sets(S, 1) ==
          std::vector<std::vector<std::size_t>>{{0}, {1}});
  REQUIRE(topk_sets(S, 2) ==
          std::vector<std::vector<std::size_t>>{{0, 1}, {1, 2}});
  REQUIRE(topk_sets(S, 3) ==
          std::vector<std::vector<std::size_t>>{{0, 1, 2}, {0, 1, 2}});
}

TEST_CASE("is_feasible greedy earliest-choice") {
  REQUIRE(is_feasible({{2}, {1, 3}}));
  REQUIRE_FALSE(is_feasible({{3}, {1, 2}}));
  REQUIRE(is_feasible({{0}, {1}, {2}}));
  REQUIRE(is_feasible({}));
  REQUIRE_FALSE(is_feasible({{0}, {}}));
}

TEST_CASE("minimal_k worked instance") {
  // column 0 argmax frame 2, column 1 argmax frame 0: top-1 infeasible,
  // top-2 sets {0,2}, {0,1} admit 0 < 1.
  auto S = scores(3, 2, {0.5, 0.8, 0.1, 0.6, 0.9, 0.2});
  REQUIRE_FALSE(is_feasible(topk_sets(S, 1)));
  REQUIRE(is_feasible(topk_sets(S, 2)));
  REQUIRE(minimal_k(S) == 2);
}

TEST_CASE("minimal_k trivial cases") {
  Rng rng(5);
  auto single = oracle::random_scores(6, 1, rng);
  REQUIRE(minimal_k(single) == 1);
  REQUIRE(minimal_k(single, 3) == 3);

  // N = F with column argmaxes on the diagonal.
  auto diag = scores(3, 3, {0.9, 0.0, 0.0, 0.0, 0.9, 0.0, 0.0, 0.0, 0.9});
  REQUIRE(minimal_k(diag) == 1);

  auto tall = oracle::random_scores(2, 3, rng);
  REQUIRE_THROWS_AS(minimal_k(tall), Error);
}

TEST_CASE("minimal_k agrees with exhaustive DFS feasibility") {
  Rng rng(42);
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t N = 1 + rng.below(6);
    std::size_t F = N + rng.below(10 - N + 1);
    auto S = oracle::random_scores(F, N, rng);
    std::size_t k = minimal_k(S);
    REQUIRE(oracle::dfs_feasible(topk_sets(S, k)));
    if (k > 1) {
      REQUIRE_FALSE(oracle::dfs_feasible(topk_sets(S, k - 1)));
    }
  }
}

TEST_CASE("feasibility is monotone in k") {
  Rng rng(77);
  for (int iter = 0; iter < 50; ++iter) {
    std::size_t N = 1 + rng.below(5);
    std::size_t F = N + rng.below(8);
    auto S = oracle::random_scores(F, N, rng);
    bool seen_feasible = false;
    for (std::size_t k = 1; k <= F; ++k) {
      bool f = is_feasible(topk_sets(S, k));
      if (seen_feasible) REQUIRE(f);
      seen_feasible |= f;
    }
    REQUIRE(seen_feasible);  // k = F is always feasible for N <= F
  }
}

TEST_CASE("emission-weighted initial distribution") {
  auto S = scores(3, 2, {0.9, 0.1, 0.5, 0.8, -0.2, 0.6});
  auto B = build_emission(S, 2);
  auto pi = InitialDistribution::emission_weighted(B);
  REQUIRE(pi.p.size() == 3);
  double sum = 0.0;
  for (double v : pi.p) {
    REQUIRE(v >= 0.0);
    sum += v;
  }
  REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));

  auto uni = InitialDistribution::uniform(4);
  for (double v : uni.p) REQUIRE(v == 0.25);
}
