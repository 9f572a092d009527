#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "semsum/embedding.hpp"
#include "semsum/error.hpp"
#include "semsum/rng.hpp"

namespace semsum {

// Synthetic video with N planted sentence-matching frames at strictly
// increasing positions among F background frames. Planted frames are the
// sentence embedding plus per-component Gaussian noise of scale sigma;
// background frames are random unit directions plus the same noise.
struct PlantedConfig {
  std::size_t frames = 500;
  std::size_t sentences = 12;
  std::size_t dim = 16;
  double sigma = 0.05;
  std::uint64_t seed = 0;
};

struct PlantedInstance {
  EmbeddingMatrix frames;
  EmbeddingMatrix sentences;
  std::vector<std::size_t> planted;  // one frame position per sentence
};

inline PlantedInstance make_planted(const PlantedConfig& cfg) {
  if (cfg.sentences > cfg.frames || cfg.sentences == 0 || cfg.dim == 0) {
    throw Error(errc::out_of_range,
                "planted instance needs 1 <= sentences <= frames, dim >= 1");
  }
  Rng rng(cfg.seed);

  auto unit_vector = [&]() {
    std::vector<double> v(cfg.dim);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (double& x : v) {
        x = rng.normal();
        n2 += x * x;
      }
    } while (n2 == 0.0);
    double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
    return v;
  };

  PlantedInstance inst;
  std::vector<std::vector<double>> sents(cfg.sentences);
  for (auto& s : sents) s = unit_vector();

  // Evenly spread planted positions with jitter, kept strictly increasing.
  inst.planted.resize(cfg.sentences);
  const double span = static_cast<double>(cfg.frames) /
                      static_cast<double>(cfg.sentences);
  for (std::size_t t = 0; t < cfg.sentences; ++t) {
    double center = (static_cast<double>(t) + 0.5) * span;
    double jitter = rng.uniform(-span / 4.0, span / 4.0);
    long pos = static_cast<long>(center + jitter);
    long lo = (t == 0) ? 0 : static_cast<long>(inst.planted[t - 1]) + 1;
    long hi = static_cast<long>(cfg.frames - cfg.sentences + t);
    inst.planted[t] = static_cast<std::size_t>(std::clamp(pos, lo, hi));
  }

  std::vector<double> frame_data(cfg.frames * cfg.dim);
  std::size_t next = 0;
  for (std::size_t i = 0; i < cfg.frames; ++i) {
    std::vector<double> base;
    if (next < cfg.sentences && inst.planted[next] == i) {
      base = sents[next++];
    } else {
      base = unit_vector();
    }
    for (std::size_t d = 0; d < cfg.dim; ++d) {
      frame_data[i * cfg.dim + d] = base[d] + cfg.sigma * rng.normal();
    }
  }
  std::vector<double> sent_data(cfg.sentences * cfg.dim);
  for (std::size_t t = 0; t < cfg.sentences; ++t) {
    std::copy(sents[t].begin(), sents[t].end(), sent_data.begin() + t * cfg.dim);
  }

  inst.frames = make_embeddings(cfg.frames, cfg.dim, std::move(frame_data),
                                EmbeddingKind::frame);
  inst.sentences = make_embeddings(cfg.sentences, cfg.dim, std::move(sent_data),
                                   EmbeddingKind::sentence);
  return inst;
}

}  // namespace semsum
