#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "semsum/embedding.hpp"
#include "semsum/error.hpp"

namespace semsum {

// Per-reference-sentence choice of ground-truth annotation index.
struct Assignment {
  std::vector<std::size_t> indices;
  double score = 0.0;
};

// Independent per-row argmax matching; duplicates are permitted, ties break
// toward the smaller ground-truth index.
inline Assignment greedy_select(const EmbeddingMatrix& ref_sents,
                                const EmbeddingMatrix& gt_sents) {
  CompatibilityMatrix sim = compatibility_matrix(ref_sents, gt_sents);
  Assignment out;
  out.indices.resize(sim.frames);
  for (std::size_t r = 0; r < sim.frames; ++r) {
    std::size_t arg = 0;
    for (std::size_t g = 1; g < sim.sentences; ++g) {
      if (sim.at(r, g) > sim.at(r, arg)) arg = g;
    }
    out.indices[r] = arg;
    out.score += sim.at(r, arg);
  }
  return out;
}

// Strictly increasing assignment maximizing total cosine similarity.
// V[r][g] is the best total for references r.. using ground-truth indices
// >= g; the path is rebuilt front to back taking the earliest index that
// attains the optimum, i.e. the lexicographically smallest maximizer.
inline Assignment ordered_subshot_dp(const EmbeddingMatrix& ref_sents,
                                     const EmbeddingMatrix& gt_sents) {
  CompatibilityMatrix sim = compatibility_matrix(ref_sents, gt_sents);
  const std::size_t R = sim.frames, G = sim.sentences;
  if (G < R) {
    throw Error(errc::infeasible,
                "ordered assignment needs at least as many ground-truth "
                "sentences as references");
  }
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> V((R + 1) * (G + 1), kNegInf);
  auto at = [&](std::size_t r, std::size_t g) -> double& {
    return V[r * (G + 1) + g];
  };
  for (std::size_t g = 0; g <= G; ++g) at(R, g) = 0.0;
  for (std::size_t r = R; r-- > 0;) {
    for (std::size_t g = G; g-- > 0;) {
      double take = sim.at(r, g) + at(r + 1, g + 1);
      at(r, g) = std::max(take, at(r, g + 1));
    }
  }
  Assignment out;
  out.indices.resize(R);
  std::size_t g = 0;
  for (std::size_t r = 0; r < R; ++r) {
    while (sim.at(r, g) + at(r + 1, g + 1) < at(r, g)) ++g;
    out.indices[r] = g;
    out.score += sim.at(r, g);
    ++g;
  }
  return out;
}

// Ordered keyframe selection.
struct KeyframeSet {
  std::vector<std::size_t> frames;
  double lambda = 0.0;  // meaningful for video_mmr only
};

// Iterative MMR selection: the first keyframe is the most representative
// frame overall; every later pick balances representativeness of the still
// unselected frames against redundancy with already selected ones.
inline KeyframeSet video_mmr(const EmbeddingMatrix& frames, std::size_t count,
                             double lambda) {
  const std::size_t F = frames.rows;
  if (count < 1 || count > F) {
    throw Error(errc::out_of_range, "count must be in [1, F]");
  }
  std::vector<double> sim(F * F, 1.0);
  for (std::size_t i = 0; i < F; ++i) {
    for (std::size_t j = i + 1; j < F; ++j) {
      sim[i * F + j] = sim[j * F + i] =
          cosine_similarity(frames.row(i), frames.row(j));
    }
  }
  auto mean_sim = [&](std::size_t f, const std::vector<bool>& in_pool) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t g = 0; g < F; ++g) {
      if (g != f && in_pool[g]) {
        s += sim[f * F + g];
        ++n;
      }
    }
    return n ? s / static_cast<double>(n) : 0.0;
  };

  KeyframeSet out;
  out.lambda = lambda;
  const std::vector<bool> all(F, true);
  std::vector<bool> unselected(F, true);
  std::vector<std::size_t> selected;
  while (selected.size() < count) {
    std::size_t arg = F;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < F; ++f) {
      if (!unselected[f]) continue;
      double score;
      if (selected.empty()) {
        score = mean_sim(f, all);
      } else {
        double redundancy = -std::numeric_limits<double>::infinity();
        for (std::size_t g : selected) {
          redundancy = std::max(redundancy, sim[f * F + g]);
        }
        score = lambda * mean_sim(f, unselected) - (1.0 - lambda) * redundancy;
      }
      if (score > best) {
        best = score;
        arg = f;
      }
    }
    selected.push_back(arg);
    unselected[arg] = false;
  }
  out.frames = std::move(selected);
  return out;
}

// Evenly spaced keyframes: floor(i*F/count).
inline KeyframeSet uniform_sample(std::size_t F, std::size_t count) {
  if (count < 1 || count > F) {
    throw Error(errc::out_of_range, "count must be in [1, F]");
  }
  KeyframeSet out;
  out.frames.resize(count);
  for (std::size_t i = 0; i < count; ++i) out.frames[i] = i * F / count;
  return out;
}

inline EmbeddingMatrix duplicate_sentence(std::span<const double> sentence,
                                          std::size_t n) {
  if (n < 1) throw Error(errc::out_of_range, "n must be >= 1");
  std::vector<double> data;
  data.reserve(n * sentence.size());
  for (std::size_t i = 0; i < n; ++i) {
    data.insert(data.end(), sentence.begin(), sentence.end());
  }
  return make_embeddings(n, sentence.size(), std::move(data),
                         EmbeddingKind::sentence);
}

}  // namespace semsum
