#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "semsum/embedding.hpp"
#include "semsum/error.hpp"
#include "semsum/hmm.hpp"

namespace semsum {

enum class DecoderKind { fb_marginal, viterbi, dtw, brute_marginal, brute_map };

inline const char* decoder_name(DecoderKind d) {
  switch (d) {
    case DecoderKind::fb_marginal: return "fb";
    case DecoderKind::viterbi: return "viterbi";
    case DecoderKind::dtw: return "dtw";
    case DecoderKind::brute_marginal: return "brute_marginal";
    case DecoderKind::brute_map: return "brute_map";
  }
  return "?";
}

// Scaled forward/backward tables. Each alpha row is normalized to sum 1 with
// the normalizer recorded in scale, so the unscaled quantities are
//   alpha_t(i) = alpha[t][i] * prod_{u<=t} scale[u]
//   beta_t(i)  = beta[t][i]  * prod_{u>t}  scale[u]
// and alpha[t][i]*beta[t][i] is the normalized posterior p(q_t = i | O).
struct ForwardBackwardTables {
  std::size_t T = 0;
  std::size_t F = 0;
  std::vector<double> alpha;  // T x F row-major
  std::vector<double> beta;   // T x F row-major
  std::vector<double> scale;  // length T

  double alpha_at(std::size_t t, std::size_t i) const { return alpha[t * F + i]; }
  double beta_at(std::size_t t, std::size_t i) const { return beta[t * F + i]; }
};

struct SummaryPath {
  std::vector<std::size_t> path;  // length N, frame index per sentence
  std::size_t k_used = 0;         // 0 when the decoder has no k (dtw)
  DecoderKind decoder = DecoderKind::fb_marginal;
  std::vector<double> posteriors;  // per-step p(q_t = path[t] | O); may be empty
  double joint_probability =
      std::numeric_limits<double>::quiet_NaN();  // viterbi / brute_map only
};

namespace detail {

[[noreturn]] inline void throw_total_probability_zero(std::size_t t) {
  throw Error(errc::total_probability_zero,
              "total probability is zero at step " + std::to_string(t) +
                  "; the top-k candidate sets admit no forward path — "
                  "raise k (use minimal_k)");
}

inline void check_pi(const InitialDistribution& pi, std::size_t F) {
  if (pi.p.size() != F) {
    throw Error(errc::dim_mismatch, "initial distribution size != F");
  }
}

// Scatters column t of B into `col` (dense, zero elsewhere).
inline void fill_column(const SparseEmission& B, std::size_t t,
                        std::vector<double>& col) {
  std::fill(col.begin(), col.end(), 0.0);
  for (const auto& e : B.columns[t]) col[e.frame] = e.prob;
}

}  // namespace detail

// alpha_1(j) = pi_j B[j,1];  alpha_t(j) = B[j,t] sum_{i<j} alpha_{t-1}(i)/(F-1-i).
// The inner sum is a running prefix sum, O(F) per step.
inline ForwardBackwardTables forward(const SparseEmission& B,
                                     const InitialDistribution& pi) {
  detail::check_pi(pi, B.F);
  const std::size_t F = B.F, T = B.N;
  ForwardBackwardTables tb{T, F};
  tb.alpha.assign(T * F, 0.0);
  tb.scale.assign(T, 0.0);
  std::vector<double> col(F);
  for (std::size_t t = 0; t < T; ++t) {
    detail::fill_column(B, t, col);
    double* row = tb.alpha.data() + t * F;
    double sum = 0.0;
    if (t == 0) {
      for (std::size_t j = 0; j < F; ++j) sum += row[j] = pi.p[j] * col[j];
    } else {
      const double* prev = tb.alpha.data() + (t - 1) * F;
      double prefix = 0.0;
      for (std::size_t j = 0; j < F; ++j) {
        sum += row[j] = col[j] * prefix;
        if (j + 1 < F) prefix += prev[j] / static_cast<double>(F - 1 - j);
      }
    }
    if (sum == 0.0) detail::throw_total_probability_zero(t);
    tb.scale[t] = sum;
    for (std::size_t j = 0; j < F; ++j) row[j] /= sum;
  }
  return tb;
}

namespace detail {

// beta_T(i) = 1;  beta_t(i) = (1/(F-1-i)) sum_{j>i} B[j,t+1] beta_{t+1}(j),
// via a suffix sum, O(F) per step, scaled by the forward constants.
inline void fill_beta(const SparseEmission& B, ForwardBackwardTables& tb) {
  const std::size_t F = B.F, T = B.N;
  tb.beta.assign(T * F, 0.0);
  std::fill(tb.beta.begin() + (T - 1) * F, tb.beta.end(), 1.0);
  std::vector<double> col(F);
  for (std::size_t t = T - 1; t-- > 0;) {
    detail::fill_column(B, t + 1, col);
    const double* next = tb.beta.data() + (t + 1) * F;
    double* row = tb.beta.data() + t * F;
    double suffix = 0.0;
    double sum = 0.0;
    for (std::size_t i = F; i-- > 0;) {
      if (i + 1 < F) {
        suffix += col[i + 1] * next[i + 1];
        sum += row[i] =
            suffix / (static_cast<double>(F - 1 - i) * tb.scale[t + 1]);
      }
      // i == F-1 has no successors: beta stays 0 before the last step.
    }
    if (sum == 0.0) detail::throw_total_probability_zero(t);
  }
}

}  // namespace detail

inline ForwardBackwardTables forward_backward(const SparseEmission& B,
                                              const InitialDistribution& pi) {
  ForwardBackwardTables tb = forward(B, pi);
  detail::fill_beta(B, tb);
  return tb;
}

inline ForwardBackwardTables backward(const SparseEmission& B,
                                      const InitialDistribution& pi) {
  return forward_backward(B, pi);
}

// Marginal-posterior decoding: path[t] = argmax_i alpha[t][i]*beta[t][i]
// (ties toward the smaller index). The product of scaled tables is the
// normalized posterior, so it is also recorded per step.
inline SummaryPath decode_marginal(const SparseEmission& B,
                                   const InitialDistribution& pi) {
  ForwardBackwardTables tb = forward_backward(B, pi);
  SummaryPath out;
  out.decoder = DecoderKind::fb_marginal;
  out.k_used = B.k;
  out.path.resize(tb.T);
  out.posteriors.resize(tb.T);
  for (std::size_t t = 0; t < tb.T; ++t) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < tb.F; ++i) {
      double g = tb.alpha_at(t, i) * tb.beta_at(t, i);
      if (g > best) {
        best = g;
        arg = i;
      }
    }
    out.path[t] = arg;
    out.posteriors[t] = best;
  }
  return out;
}

// MAP decoding. Tail values W[t][j] = B[j,t] * max over completions are
// computed back to front; the path is then rebuilt front to back, taking the
// smallest state that attains the optimum at every step, which yields the
// lexicographically smallest MAP path. Rows are max-scaled for stability;
// the reported joint probability is re-multiplied along the chosen path.
inline SummaryPath decode_viterbi(const SparseEmission& B,
                                  const InitialDistribution& pi) {
  detail::check_pi(pi, B.F);
  const std::size_t F = B.F, T = B.N;
  std::vector<double> W(T * F, 0.0);
  std::vector<double> col(F);
  for (std::size_t t = T; t-- > 0;) {
    detail::fill_column(B, t, col);
    double* row = W.data() + t * F;
    double rowmax = 0.0;
    if (t + 1 == T) {
      for (std::size_t j = 0; j < F; ++j) rowmax = std::max(rowmax, row[j] = col[j]);
    } else {
      const double* next = W.data() + (t + 1) * F;
      double sufmax = 0.0;
      for (std::size_t j = F; j-- > 0;) {
        if (j + 1 < F) {
          sufmax = std::max(sufmax, next[j + 1]);
          row[j] = col[j] * sufmax / static_cast<double>(F - 1 - j);
        }
        rowmax = std::max(rowmax, row[j]);
      }
    }
    if (rowmax == 0.0) detail::throw_total_probability_zero(t);
    for (std::size_t j = 0; j < F; ++j) row[j] /= rowmax;
  }

  SummaryPath out;
  out.decoder = DecoderKind::viterbi;
  out.k_used = B.k;
  out.path.resize(T);
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < F; ++j) {
    double v = pi.p[j] * W[j];
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  if (best == 0.0) detail::throw_total_probability_zero(0);
  out.path[0] = arg;
  for (std::size_t t = 1; t < T; ++t) {
    const double* row = W.data() + t * F;
    double mx = 0.0;
    for (std::size_t j = out.path[t - 1] + 1; j < F; ++j) mx = std::max(mx, row[j]);
    if (mx == 0.0) detail::throw_total_probability_zero(t);
    for (std::size_t j = out.path[t - 1] + 1; j < F; ++j) {
      if (row[j] == mx) {
        out.path[t] = j;
        break;
      }
    }
  }

  detail::fill_column(B, 0, col);
  double joint = pi.p[out.path[0]] * col[out.path[0]];
  for (std::size_t t = 1; t < T; ++t) {
    detail::fill_column(B, t, col);
    joint *= col[out.path[t]] / static_cast<double>(F - 1 - out.path[t - 1]);
  }
  out.joint_probability = joint;
  return out;
}

// DTW baseline: cost 1 - S, steps {(1,0),(0,1),(1,1)}, full alignment of the
// frame axis to the sentence axis. Each sentence keeps the best-scoring frame
// it was aligned to. Tie preference when backtracking: diagonal, then frame
// advance, then sentence advance.
inline SummaryPath decode_dtw(const CompatibilityMatrix& S) {
  const std::size_t F = S.frames, N = S.sentences;
  if (F < N) {
    throw Error(errc::infeasible, "dtw requires F >= N");
  }
  auto cost = [&](std::size_t i, std::size_t j) { return 1.0 - S.at(i, j); };
  std::vector<double> D(F * N);
  D[0] = cost(0, 0);
  for (std::size_t i = 1; i < F; ++i) D[i * N] = cost(i, 0) + D[(i - 1) * N];
  for (std::size_t j = 1; j < N; ++j) D[j] = cost(0, j) + D[j - 1];
  for (std::size_t i = 1; i < F; ++i) {
    for (std::size_t j = 1; j < N; ++j) {
      double m = std::min({D[(i - 1) * N + (j - 1)], D[(i - 1) * N + j],
                           D[i * N + (j - 1)]});
      D[i * N + j] = cost(i, j) + m;
    }
  }

  SummaryPath out;
  out.decoder = DecoderKind::dtw;
  out.path.assign(N, 0);
  std::vector<double> best_score(N, -std::numeric_limits<double>::infinity());
  std::size_t i = F - 1, j = N - 1;
  while (true) {
    if (S.at(i, j) > best_score[j]) {
      best_score[j] = S.at(i, j);
      out.path[j] = i;
    } else if (S.at(i, j) == best_score[j] && i < out.path[j]) {
      out.path[j] = i;
    }
    if (i == 0 && j == 0) break;
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      double diag = D[(i - 1) * N + (j - 1)];
      double up = D[(i - 1) * N + j];
      double left = D[i * N + (j - 1)];
      double m = std::min({diag, up, left});
      if (diag == m) {
        --i;
        --j;
      } else if (up == m) {
        --i;
      } else {
        --j;
      }
    }
  }
  return out;
}

// Exact enumeration over all F^N state sequences. Oracle-grade reference for
// the fast decoders; complexity O(F^N * N).
struct BruteForceResult {
  SummaryPath marginal;
  SummaryPath map;
  std::vector<double> marginals;  // T x F, p(q_t = i, O)
  double total = 0.0;             // p(O)
};

inline BruteForceResult decode_bruteforce(const SparseEmission& B,
                                          const InitialDistribution& pi) {
  detail::check_pi(pi, B.F);
  const std::size_t F = B.F, T = B.N;
  if (static_cast<double>(T) * std::log(static_cast<double>(F)) >
      std::log(1e7)) {
    throw Error(errc::too_large, "brute force limited to F^N <= 1e7");
  }
  std::vector<double> dense = B.dense();  // F x N
  auto emit = [&](std::size_t frame, std::size_t t) {
    return dense[frame * T + t];
  };

  std::vector<double> marg(T * F, 0.0);
  std::vector<std::size_t> q(T, 0);
  std::vector<std::size_t> best_q;
  double best_p = 0.0, total = 0.0;
  while (true) {
    double p = pi.p[q[0]] * emit(q[0], 0);
    for (std::size_t t = 1; t < T && p != 0.0; ++t) {
      p *= transition_prob(q[t - 1], q[t], F) * emit(q[t], t);
    }
    if (p != 0.0) {
      total += p;
      for (std::size_t t = 0; t < T; ++t) marg[t * F + q[t]] += p;
      if (p > best_p) {
        best_p = p;
        best_q = q;
      }
    }
    // Odometer in lexicographic order.
    std::size_t t = T;
    while (t-- > 0) {
      if (++q[t] < F) break;
      q[t] = 0;
      if (t == 0) goto done;
    }
  }
done:
  if (best_p == 0.0) detail::throw_total_probability_zero(0);

  BruteForceResult res;
  res.total = total;
  res.marginals = std::move(marg);
  res.map.path = std::move(best_q);
  res.map.decoder = DecoderKind::brute_map;
  res.map.k_used = B.k;
  res.map.joint_probability = best_p;
  res.marginal.decoder = DecoderKind::brute_marginal;
  res.marginal.k_used = B.k;
  res.marginal.path.resize(T);
  res.marginal.posteriors.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < F; ++i) {
      double v = res.marginals[t * F + i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    res.marginal.path[t] = arg;
    res.marginal.posteriors[t] = best / total;
  }
  return res;
}

namespace detail {

inline InitialDistribution pi_or_uniform(std::optional<InitialDistribution> pi,
                                         std::size_t F) {
  return pi ? std::move(*pi) : InitialDistribution::uniform(F);
}

inline std::size_t resolve_k(const CompatibilityMatrix& S,
                             std::optional<std::size_t> k) {
  return k ? *k : minimal_k(S);
}

}  // namespace detail

inline SummaryPath decode_marginal(const CompatibilityMatrix& S,
                                   std::optional<std::size_t> k = {},
                                   std::optional<InitialDistribution> pi = {}) {
  std::size_t kk = detail::resolve_k(S, k);
  return decode_marginal(build_emission(S, kk),
                         detail::pi_or_uniform(std::move(pi), S.frames));
}

inline SummaryPath decode_viterbi(const CompatibilityMatrix& S,
                                  std::optional<std::size_t> k = {},
                                  std::optional<InitialDistribution> pi = {}) {
  std::size_t kk = detail::resolve_k(S, k);
  return decode_viterbi(build_emission(S, kk),
                        detail::pi_or_uniform(std::move(pi), S.frames));
}

inline BruteForceResult decode_bruteforce(const CompatibilityMatrix& S,
                                          std::size_t k,
                                          std::optional<InitialDistribution> pi = {}) {
  return decode_bruteforce(build_emission(S, k),
                           detail::pi_or_uniform(std::move(pi), S.frames));
}

}  // namespace semsum
