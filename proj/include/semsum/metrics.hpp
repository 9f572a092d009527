#pragma once

#include <algorithm>
#include <cstdlib>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "semsum/embedding.hpp"
#include "semsum/error.hpp"

namespace semsum {

// Summary segments on a shared uniform temporal grid of L cells (one cell per
// fixed-length subshot).
struct SegmentList {
  std::size_t grid = 0;
  std::vector<std::size_t> segments;
};

namespace detail {

inline void check_grid(const SegmentList& pred,
                       const std::vector<SegmentList>& refs) {
  for (const auto& r : refs) {
    if (r.grid != pred.grid) {
      throw Error(errc::dim_mismatch,
                  "prediction and reference use different grids");
    }
  }
}

}  // namespace detail

// mAP as percentage. Predictions are walked in their given order; a hit is an
// exact grid-cell match against the reference set. AP is the mean precision
// at hit positions divided by the reference size.
inline double mean_average_precision(const SegmentList& pred,
                                     const std::vector<SegmentList>& refs) {
  detail::check_grid(pred, refs);
  if (refs.empty()) throw Error(errc::empty_input, "no reference summaries");
  double map = 0.0;
  for (const auto& ref : refs) {
    std::unordered_set<std::size_t> cells(ref.segments.begin(),
                                          ref.segments.end());
    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t p = 0; p < pred.segments.size(); ++p) {
      if (cells.count(pred.segments[p])) {
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(p + 1);
      }
    }
    if (!ref.segments.empty()) ap /= static_cast<double>(ref.segments.size());
    map += ap;
  }
  return 100.0 * map / static_cast<double>(refs.size());
}

// mAD as percentage of the grid length; lower is better. Each reference
// segment contributes its distance to the closest predicted segment.
inline double mean_average_distance(const SegmentList& pred,
                                    const std::vector<SegmentList>& refs) {
  detail::check_grid(pred, refs);
  if (refs.empty()) throw Error(errc::empty_input, "no reference summaries");
  if (pred.segments.empty()) {
    throw Error(errc::empty_input, "empty prediction");
  }
  double mad = 0.0;
  for (const auto& ref : refs) {
    double ad = 0.0;
    for (std::size_t g : ref.segments) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t p : pred.segments) {
        double diff = std::abs(static_cast<double>(g) - static_cast<double>(p));
        d = std::min(d, diff);
      }
      ad += d;
    }
    if (!ref.segments.empty()) ad /= static_cast<double>(ref.segments.size());
    mad += 100.0 * ad / static_cast<double>(pred.grid);
  }
  return mad / static_cast<double>(refs.size());
}

// 1-based rank of the correct item per retrieval query and the shared
// candidate pool size.
struct RankList {
  std::vector<std::size_t> ranks;
  std::size_t pool = 0;
};

inline double recall_at_k(const RankList& ranks, std::size_t K) {
  if (K < 1) throw Error(errc::out_of_range, "K must be >= 1");
  if (ranks.ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r : ranks.ranks) hits += r <= K;
  return static_cast<double>(hits) / static_cast<double>(ranks.ranks.size());
}

// Median rank as a percentile of the candidate pool; even counts use the mean
// of the two middle ranks.
inline double median_rank_percent(const RankList& ranks) {
  if (ranks.ranks.empty()) throw Error(errc::empty_input, "no ranks");
  std::vector<std::size_t> sorted = ranks.ranks;
  std::sort(sorted.begin(), sorted.end());
  std::size_t n = sorted.size();
  double med = (n % 2) ? static_cast<double>(sorted[n / 2])
                       : (static_cast<double>(sorted[n / 2 - 1]) +
                          static_cast<double>(sorted[n / 2])) /
                             2.0;
  return 100.0 * med / static_cast<double>(ranks.pool);
}

// Rank of `correct` when candidates are sorted by descending cosine to the
// query: one plus the strictly better items plus tied items of smaller index.
inline std::size_t rank_items(std::span<const double> query,
                              const EmbeddingMatrix& candidates,
                              std::size_t correct) {
  if (correct >= candidates.rows) {
    throw Error(errc::out_of_range, "correct index out of range");
  }
  double target = cosine_similarity(query, candidates.row(correct));
  std::size_t rank = 1;
  for (std::size_t i = 0; i < candidates.rows; ++i) {
    if (i == correct) continue;
    double s = cosine_similarity(query, candidates.row(i));
    if (s > target || (s == target && i < correct)) ++rank;
  }
  return rank;
}

}  // namespace semsum
