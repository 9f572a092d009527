#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "semsum/metrics.hpp"
#include "semsum/rng.hpp"
#include "oracles.hpp"

using namespace semsum;

TEST_CASE("mAP hand cases") {
  SegmentList pred{100, {3, 10, 20}};
  SECTION("perfect prediction scores 100") {
    REQUIRE(mean_average_precision(pred, {pred}) == 100.0);
  }
  SECTION("hits at positions 1 and 3 against a two-segment reference") {
    SegmentList ref{100, {3, 20}};
    REQUIRE(mean_average_precision(pred, {ref}) ==
            Catch::Approx(100.0 * (1.0 / 1 + 2.0 / 3) / 2));
  }
  SECTION("disjoint prediction scores 0") {
    SegmentList ref{100, {50, 60}};
    REQUIRE(mean_average_precision(pred, {ref}) == 0.0);
  }
  SECTION("grid mismatch is an error") {
    SegmentList ref{99, {3}};
    REQUIRE_THROWS_AS(mean_average_precision(pred, {ref}), Error);
  }
  SECTION("averages over references") {
    SegmentList ref1{100, {3, 10, 20}};       // AP = 1
    SegmentList ref2{100, {50, 60}};          // AP = 0
    REQUIRE(mean_average_precision(pred, {ref1, ref2}) == 50.0);
  }
}

TEST_CASE("mAD hand cases") {
  SECTION("identical lists") {
    SegmentList pred{100, {10, 50}};
    REQUIRE(mean_average_distance(pred, {pred}) == 0.0);
  }
  SECTION("two-cell offset on one of two segments") {
    SegmentList pred{100, {12, 50}};
    SegmentList ref{100, {10, 50}};
    REQUIRE(mean_average_distance(pred, {ref}) == Catch::Approx(1.0));
  }
  SECTION("maximal distance") {
    std::size_t L = 40;
    SegmentList pred{L, {L - 1}};
    SegmentList ref{L, {0}};
    REQUIRE(mean_average_distance(pred, {ref}) ==
            Catch::Approx(100.0 * (L - 1.0) / L));
  }
  SECTION("empty prediction is an error") {
    SegmentList pred{100, {}};
    SegmentList ref{100, {1}};
    REQUIRE_THROWS_AS(mean_average_distance(pred, {ref}), Error);
  }
}

TEST_CASE("mAD ignores predicted-segment order") {
  Rng rng(17);
  for (int iter = 0; iter < 20; ++iter) {
    std::size_t L = 50;
    SegmentList pred{L, {}};
    for (int i = 0; i < 6; ++i) pred.segments.push_back(rng.below(L));
    SegmentList ref{L, {}};
    for (int i = 0; i < 4; ++i) ref.segments.push_back(rng.below(L));
    double base = mean_average_distance(pred, {ref});
    auto shuffled = pred;
    rng.shuffle(shuffled.segments);
    REQUIRE(mean_average_distance(shuffled, {ref}) == base);
  }
}

TEST_CASE("mAD is shift invariant") {
  SegmentList pred{200, {10, 40, 90}};
  SegmentList ref{200, {12, 50, 80}};
  double base = mean_average_distance(pred, {ref});
  for (std::size_t shift : {5u, 50u, 100u}) {
    SegmentList ps{200, {}}, rs{200, {}};
    for (auto v : pred.segments) ps.segments.push_back(v + shift);
    for (auto v : ref.segments) rs.segments.push_back(v + shift);
    REQUIRE(mean_average_distance(ps, {rs}) == Catch::Approx(base));
  }
}

TEST_CASE("recall at K") {
  RankList ranks{{1, 5, 20}, 100};
  REQUIRE(recall_at_k(ranks, 8) == Catch::Approx(2.0 / 3));
  REQUIRE(recall_at_k(ranks, 100) == 1.0);
  REQUIRE(recall_at_k(RankList{{2, 3, 4}, 10}, 1) == 0.0);
  REQUIRE_THROWS_AS(recall_at_k(ranks, 0), Error);

  // Nondecreasing in K.
  Rng rng(23);
  RankList rl{{}, 64};
  for (int i = 0; i < 17; ++i) rl.ranks.push_back(1 + rng.below(64));
  double prev = 0.0;
  for (std::size_t K = 1; K <= 64; ++K) {
    double r = recall_at_k(rl, K);
    REQUIRE(r >= prev);
    prev = r;
  }
  REQUIRE(prev == 1.0);
}

TEST_CASE("median rank percent") {
  REQUIRE(median_rank_percent(RankList{{1, 5, 20}, 100}) == 5.0);
  REQUIRE(median_rank_percent(RankList{{1, 1, 1, 1}, 25}) ==
          Catch::Approx(4.0));
  REQUIRE(median_rank_percent(RankList{{2, 4}, 100}) == 3.0);
  REQUIRE_THROWS_AS(median_rank_percent(RankList{{}, 10}), Error);
}

TEST_CASE("rank_items") {
  SECTION("unique argmax ranks first") {
    auto cands = make_embeddings(3, 2, {1, 0, 0, 1, -1, 0},
                                 EmbeddingKind::frame);
    std::vector<double> q = {1, 0.1};
    REQUIRE(rank_items(q, cands, 0) == 1);
  }
  SECTION("orthogonal correct item behind one parallel distractor") {
    auto cands = make_embeddings(2, 2, {0, 1, 1, 0}, EmbeddingKind::frame);
    std::vector<double> q = {1, 0};
    REQUIRE(rank_items(q, cands, 0) == 2);
  }
  SECTION("ties count smaller indices ahead") {
    auto cands = make_embeddings(3, 2, {2, 0, 1, 0, 3, 0},
                                 EmbeddingKind::frame);
    std::vector<double> q = {1, 0};
    REQUIRE(rank_items(q, cands, 1) == 2);  // all cosines are exactly 1
    REQUIRE(rank_items(q, cands, 0) == 1);
    REQUIRE(rank_items(q, cands, 2) == 3);
  }
  SECTION("out of range") {
    auto cands = make_embeddings(2, 2, {1, 0, 0, 1}, EmbeddingKind::frame);
    std::vector<double> q = {1, 0};
    REQUIRE_THROWS_AS(rank_items(q, cands, 2), Error);
  }
}

TEST_CASE("rank_items matches a full-sort reference on random pools") {
  Rng rng(404);
  for (int iter = 0; iter < 20; ++iter) {
    std::size_t pool = 50;
    std::size_t dim = 6;
    std::vector<double> cd(pool * dim);
    for (double& v : cd) v = rng.uniform(-1, 1);
    auto cands = make_embeddings(pool, dim, cd, EmbeddingKind::frame);
    std::vector<double> q(dim);
    for (double& v : q) v = rng.uniform(-1, 1);
    std::size_t correct = rng.below(pool);
    REQUIRE(rank_items(q, cands, correct) ==
            oracle::full_sort_rank(q, cands, correct));
  }
}
