#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semsum/embedding.hpp"
#include "semsum/error.hpp"

namespace semsum {

// Forward-only transition structure over F temporally ordered states:
// prob(i -> j) = 1/(F-1-i) for j > i, else 0. The last state has no
// successors.
struct TransitionModel {
  std::size_t F = 0;

  double prob(std::size_t i, std::size_t j) const {
    if (i >= F || j >= F) {
      throw Error(errc::out_of_range, "transition index out of range");
    }
    if (j <= i || i + 1 == F) return 0.0;
    return 1.0 / static_cast<double>(F - 1 - i);
  }
};

inline double transition_prob(std::size_t i, std::size_t j, std::size_t F) {
  return TransitionModel{F}.prob(i, j);
}

// Sparse top-k emission matrix. Each sentence column holds its candidate
// frames with row-normalized probabilities, sorted by frame index.
struct SparseEmission {
  struct Entry {
    std::size_t frame;
    double prob;
  };

  std::size_t F = 0;
  std::size_t N = 0;
  std::size_t k = 0;
  std::vector<std::vector<Entry>> columns;  // per sentence

  std::vector<double> dense() const {
    std::vector<double> out(F * N, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      for (const Entry& e : columns[j]) out[e.frame * N + j] = e.prob;
    }
    return out;
  }

  // Wraps an externally supplied dense F x N matrix, keeping nonzeros as-is
  // (no remapping or normalization). Used where the emission table is given
  // directly rather than derived from compatibility scores.
  static SparseEmission from_dense(std::size_t F, std::size_t N,
                                   const std::vector<double>& values) {
    if (values.size() != F * N) {
      throw Error(errc::dim_mismatch, "dense emission size mismatch");
    }
    SparseEmission B{F, N, 0, std::vector<std::vector<Entry>>(N)};
    for (std::size_t i = 0; i < F; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        double v = values[i * N + j];
        if (v != 0.0) B.columns[j].push_back({i, v});
      }
    }
    for (const auto& col : B.columns) B.k = std::max(B.k, col.size());
    return B;
  }
};

struct InitialDistribution {
  std::vector<double> p;

  static InitialDistribution uniform(std::size_t F) {
    return {std::vector<double>(F, 1.0 / static_cast<double>(F))};
  }

  // Start mass proportional to each frame's total emission mass; falls back
  // to uniform when the table is entirely empty.
  static InitialDistribution emission_weighted(const SparseEmission& B) {
    std::vector<double> w(B.F, 0.0);
    double total = 0.0;
    for (const auto& col : B.columns) {
      for (const auto& e : col) {
        w[e.frame] += e.prob;
        total += e.prob;
      }
    }
    if (total == 0.0) return uniform(B.F);
    for (double& v : w) v /= total;
    return {std::move(w)};
  }
};

namespace detail {

// (score desc, index asc): the smaller frame index wins ties everywhere.
inline bool score_before(const std::pair<double, std::size_t>& a,
                         const std::pair<double, std::size_t>& b) {
  return a.first > b.first || (a.first == b.first && a.second < b.second);
}

// Contiguous copy of one column; sorting these pairs instead of indirect
// indices keeps top-k selection linear in F.
inline std::vector<std::pair<double, std::size_t>> column_pairs(
    const CompatibilityMatrix& S, std::size_t j) {
  std::vector<std::pair<double, std::size_t>> v(S.frames);
  for (std::size_t i = 0; i < S.frames; ++i) v[i] = {S.at(i, j), i};
  return v;
}

// The k best frames of column j, sorted ascending by frame index.
inline std::vector<std::size_t> topk_column(const CompatibilityMatrix& S,
                                            std::size_t j, std::size_t k) {
  auto v = column_pairs(S, j);
  if (k < v.size()) {
    std::nth_element(v.begin(), v.begin() + k, v.end(), score_before);
    v.resize(k);
  }
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = v[i].second;
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Full per-column orders for nested top-k prefixes (minimal_k probing).
inline std::vector<std::vector<std::size_t>> column_orders(
    const CompatibilityMatrix& S) {
  std::vector<std::vector<std::size_t>> orders(S.sentences);
  for (std::size_t j = 0; j < S.sentences; ++j) {
    auto v = column_pairs(S, j);
    std::sort(v.begin(), v.end(), score_before);
    orders[j].resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) orders[j][i] = v[i].second;
  }
  return orders;
}

inline void check_k(std::size_t k, std::size_t F) {
  if (k < 1 || k > F) {
    throw Error(errc::out_of_range,
                "k = " + std::to_string(k) + " outside [1, F = " +
                    std::to_string(F) + "]");
  }
}

inline std::vector<std::vector<std::size_t>> topk_from_orders(
    const std::vector<std::vector<std::size_t>>& orders, std::size_t k) {
  std::vector<std::vector<std::size_t>> sets(orders.size());
  for (std::size_t j = 0; j < orders.size(); ++j) {
    sets[j].assign(orders[j].begin(),
                   orders[j].begin() + std::min(k, orders[j].size()));
    std::sort(sets[j].begin(), sets[j].end());
  }
  return sets;
}

}  // namespace detail

// Indices of the k highest-scoring frames per sentence column, sorted
// ascending. Ties break toward the smaller frame index.
inline std::vector<std::vector<std::size_t>> topk_sets(
    const CompatibilityMatrix& S, std::size_t k) {
  detail::check_k(k, S.frames);
  std::vector<std::vector<std::size_t>> sets(S.sentences);
  for (std::size_t j = 0; j < S.sentences; ++j) {
    sets[j] = detail::topk_column(S, j, k);
  }
  return sets;
}

// Scores are mapped to nonnegative via t = (s+1)/2 (rank order preserved),
// each column keeps its top-k frames, and the resulting dense matrix is
// row-normalized. Frame rows appearing in no top-k set stay all-zero.
inline SparseEmission build_emission(const CompatibilityMatrix& S,
                                     std::size_t k) {
  detail::check_k(k, S.frames);
  auto sets = topk_sets(S, k);
  std::vector<double> row_sum(S.frames, 0.0);
  SparseEmission B{S.frames, S.sentences, k,
                   std::vector<std::vector<SparseEmission::Entry>>(S.sentences)};
  for (std::size_t j = 0; j < S.sentences; ++j) {
    B.columns[j].reserve(sets[j].size());
    for (std::size_t i : sets[j]) {
      double mapped = (S.at(i, j) + 1.0) / 2.0;
      B.columns[j].push_back({i, mapped});
      row_sum[i] += mapped;
    }
  }
  for (auto& col : B.columns) {
    for (auto& e : col) {
      if (row_sum[e.frame] > 0.0) e.prob /= row_sum[e.frame];
    }
  }
  return B;
}

// True iff a strictly increasing choice q_1 < ... < q_N with q_t in sets[t]
// exists. Greedy earliest choice: always pick the smallest member strictly
// greater than the previous pick. Sets must be sorted ascending.
inline bool is_feasible(const std::vector<std::vector<std::size_t>>& sets) {
  std::size_t prev = 0;
  bool have_prev = false;
  for (const auto& set : sets) {
    auto it = have_prev ? std::upper_bound(set.begin(), set.end(), prev)
                        : set.begin();
    if (it == set.end()) return false;
    prev = *it;
    have_prev = true;
  }
  return true;
}

// Smallest k >= k_init whose top-k candidate sets admit a strictly increasing
// frame selection. Feasibility is monotone in k (top-k sets are nested), so
// the minimum is located by exponential probing plus bisection.
inline std::size_t minimal_k(const CompatibilityMatrix& S,
                             std::size_t k_init = 1) {
  detail::check_k(k_init, S.frames);
  if (S.sentences > S.frames) {
    throw Error(errc::infeasible,
                "no strictly increasing selection exists: N = " +
                    std::to_string(S.sentences) + " > F = " +
                    std::to_string(S.frames));
  }
  auto orders = detail::column_orders(S);
  auto feasible_at = [&](std::size_t k) {
    return is_feasible(detail::topk_from_orders(orders, k));
  };
  if (feasible_at(k_init)) return k_init;
  // Invariant: lo infeasible, hi feasible (k = F is always feasible for
  // N <= F since every column then contains all frames).
  std::size_t lo = k_init, hi = k_init;
  while (true) {
    hi = std::min(S.frames, hi * 2);
    if (feasible_at(hi)) break;
    lo = hi;
  }
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    (feasible_at(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace semsum
