#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semsum/embedding.hpp"
#include "semsum/error.hpp"
#include "semsum/metrics.hpp"
#include "semsum/rng.hpp"

namespace semsum {

// One modality branch of the residual head: a single hidden tanh layer plus a
// linear output, added to the scaled frozen source embedding,
//   v = W2 tanh(W1 h + b1) + b2 + alpha * v_s.
// The output dim must equal the source-embedding dim.
struct ResidualBranch {
  std::size_t in_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> W1;  // hidden x in, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> W2;  // out x hidden, row-major
  std::vector<double> b2;  // out
  double alpha = 0.0;
};

struct ResidualHead {
  ResidualBranch frame;
  ResidualBranch sentence;
};

inline ResidualBranch zeros_like(const ResidualBranch& b) {
  ResidualBranch z = b;
  std::fill(z.W1.begin(), z.W1.end(), 0.0);
  std::fill(z.b1.begin(), z.b1.end(), 0.0);
  std::fill(z.W2.begin(), z.W2.end(), 0.0);
  std::fill(z.b2.begin(), z.b2.end(), 0.0);
  z.alpha = 0.0;
  return z;
}

inline ResidualHead zeros_like(const ResidualHead& h) {
  return {zeros_like(h.frame), zeros_like(h.sentence)};
}

namespace detail {

struct BranchCache {
  std::vector<double> hidden;  // tanh(W1 h + b1)
  std::vector<double> out;     // v
};

inline BranchCache branch_forward(const ResidualBranch& br,
                                  std::span<const double> h,
                                  std::span<const double> vs) {
  if (h.size() != br.in_dim || vs.size() != br.out_dim) {
    throw Error(errc::dim_mismatch, "feature dims do not match branch dims");
  }
  BranchCache c;
  c.hidden.resize(br.hidden_dim);
  for (std::size_t r = 0; r < br.hidden_dim; ++r) {
    double z = br.b1[r];
    const double* w = br.W1.data() + r * br.in_dim;
    for (std::size_t i = 0; i < br.in_dim; ++i) z += w[i] * h[i];
    c.hidden[r] = std::tanh(z);
  }
  c.out.resize(br.out_dim);
  for (std::size_t o = 0; o < br.out_dim; ++o) {
    double v = br.b2[o] + br.alpha * vs[o];
    const double* w = br.W2.data() + o * br.hidden_dim;
    for (std::size_t r = 0; r < br.hidden_dim; ++r) v += w[r] * c.hidden[r];
    c.out[o] = v;
  }
  return c;
}

// Accumulates parameter gradients for one item given dL/dv. The source
// embedding vs is a frozen input: it feeds d(alpha) but receives nothing.
inline void branch_backward(const ResidualBranch& br, std::span<const double> h,
                            std::span<const double> vs, const BranchCache& c,
                            std::span<const double> dv, ResidualBranch& grad) {
  std::vector<double> dhidden(br.hidden_dim, 0.0);
  for (std::size_t o = 0; o < br.out_dim; ++o) {
    grad.b2[o] += dv[o];
    grad.alpha += dv[o] * vs[o];
    double* gw = grad.W2.data() + o * br.hidden_dim;
    const double* w = br.W2.data() + o * br.hidden_dim;
    for (std::size_t r = 0; r < br.hidden_dim; ++r) {
      gw[r] += dv[o] * c.hidden[r];
      dhidden[r] += w[r] * dv[o];
    }
  }
  for (std::size_t r = 0; r < br.hidden_dim; ++r) {
    double dz = dhidden[r] * (1.0 - c.hidden[r] * c.hidden[r]);
    grad.b1[r] += dz;
    double* gw = grad.W1.data() + r * br.in_dim;
    for (std::size_t i = 0; i < br.in_dim; ++i) gw[i] += dz * h[i];
  }
}

// d cos(u,w) / du given both vectors and their cosine.
inline std::vector<double> cosine_grad_u(std::span<const double> u,
                                         std::span<const double> w, double s) {
  double nu = norm(u), nw = norm(w);
  std::vector<double> g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    g[i] = w[i] / (nu * nw) - s * u[i] / (nu * nu);
  }
  return g;
}

}  // namespace detail

inline std::vector<double> forward_embed(const ResidualBranch& branch,
                                         std::span<const double> h,
                                         std::span<const double> v_s) {
  return detail::branch_forward(branch, h, v_s).out;
}

inline double triplet_loss(double s_pos, double s_neg, double m) {
  return std::max(0.0, m - s_pos + s_neg);
}

// Target-domain input features h plus the frozen source embedding v_s.
struct ItemFeatures {
  std::vector<double> h;
  std::vector<double> vs;
};

struct Triplet {
  ItemFeatures anchor;                  // sentence
  ItemFeatures positive;                // frame
  std::vector<ItemFeatures> negatives;  // frames
};

struct TripletBatch {
  std::vector<Triplet> triplets;

  std::size_t term_count() const {
    std::size_t n = 0;
    for (const auto& t : triplets) n += t.negatives.size();
    return n;
  }
};

// Mean hinge loss over all (anchor, positive, negative) terms; scores are
// cosines of the embedded vectors.
inline double batch_loss(const ResidualHead& head, const TripletBatch& batch,
                         double m) {
  std::size_t terms = batch.term_count();
  if (terms == 0) throw Error(errc::empty_input, "batch has no triplet terms");
  double total = 0.0;
  for (const auto& t : batch.triplets) {
    auto av = forward_embed(head.sentence, t.anchor.h, t.anchor.vs);
    auto pv = forward_embed(head.frame, t.positive.h, t.positive.vs);
    double s_pos = cosine_similarity(pv, av);
    for (const auto& neg : t.negatives) {
      auto nv = forward_embed(head.frame, neg.h, neg.vs);
      total += triplet_loss(s_pos, cosine_similarity(nv, av), m);
    }
  }
  return total / static_cast<double>(terms);
}

struct BatchGradients {
  ResidualHead grad;
  double loss = 0.0;
  std::size_t active_terms = 0;
};

// Exact subgradients of batch_loss. A hinge term contributes gradient iff its
// value is strictly positive.
inline BatchGradients gradients(const ResidualHead& head,
                                const TripletBatch& batch, double m) {
  std::size_t terms = batch.term_count();
  if (terms == 0) throw Error(errc::empty_input, "batch has no triplet terms");
  BatchGradients out;
  out.grad = zeros_like(head);
  const double inv_terms = 1.0 / static_cast<double>(terms);

  for (const auto& t : batch.triplets) {
    auto ac = detail::branch_forward(head.sentence, t.anchor.h, t.anchor.vs);
    auto pc = detail::branch_forward(head.frame, t.positive.h, t.positive.vs);
    double s_pos = cosine_similarity(pc.out, ac.out);

    std::vector<double> d_anchor(ac.out.size(), 0.0);
    std::vector<double> d_pos(pc.out.size(), 0.0);
    double pos_coeff = 0.0;  // accumulated dL/ds_pos for this triplet

    for (const auto& neg : t.negatives) {
      auto nc = detail::branch_forward(head.frame, neg.h, neg.vs);
      double s_neg = cosine_similarity(nc.out, ac.out);
      double hinge = triplet_loss(s_pos, s_neg, m);
      out.loss += hinge;
      if (hinge <= 0.0) continue;
      ++out.active_terms;
      pos_coeff -= inv_terms;
      // dL/ds_neg = +1/terms
      auto dn = detail::cosine_grad_u(nc.out, ac.out, s_neg);
      auto da = detail::cosine_grad_u(ac.out, nc.out, s_neg);
      for (std::size_t i = 0; i < dn.size(); ++i) dn[i] *= inv_terms;
      for (std::size_t i = 0; i < da.size(); ++i) d_anchor[i] += inv_terms * da[i];
      detail::branch_backward(head.frame, neg.h, neg.vs, nc, dn, out.grad.frame);
    }
    if (pos_coeff != 0.0) {
      auto dp = detail::cosine_grad_u(pc.out, ac.out, s_pos);
      auto da = detail::cosine_grad_u(ac.out, pc.out, s_pos);
      for (std::size_t i = 0; i < dp.size(); ++i) d_pos[i] = pos_coeff * dp[i];
      for (std::size_t i = 0; i < da.size(); ++i) d_anchor[i] += pos_coeff * da[i];
      detail::branch_backward(head.frame, t.positive.h, t.positive.vs, pc,
                              d_pos, out.grad.frame);
    }
    bool anchor_touched = false;
    for (double v : d_anchor) anchor_touched |= v != 0.0;
    if (anchor_touched) {
      detail::branch_backward(head.sentence, t.anchor.h, t.anchor.vs, ac,
                              d_anchor, out.grad.sentence);
    }
  }
  out.loss *= inv_terms;
  return out;
}

// Flat parameter order: frame {W1,b1,W2,b2,alpha}, then sentence likewise.
inline std::vector<double> flatten(const ResidualHead& h) {
  std::vector<double> out;
  for (const ResidualBranch* br : {&h.frame, &h.sentence}) {
    out.insert(out.end(), br->W1.begin(), br->W1.end());
    out.insert(out.end(), br->b1.begin(), br->b1.end());
    out.insert(out.end(), br->W2.begin(), br->W2.end());
    out.insert(out.end(), br->b2.begin(), br->b2.end());
    out.push_back(br->alpha);
  }
  return out;
}

inline void unflatten(std::span<const double> flat, ResidualHead& h) {
  std::size_t pos = 0;
  auto take = [&](std::vector<double>& dst) {
    std::copy(flat.begin() + pos, flat.begin() + pos + dst.size(), dst.begin());
    pos += dst.size();
  };
  for (ResidualBranch* br : {&h.frame, &h.sentence}) {
    take(br->W1);
    take(br->b1);
    take(br->W2);
    take(br->b2);
    br->alpha = flat[pos++];
  }
  if (pos != flat.size()) {
    throw Error(errc::dim_mismatch, "flat parameter size mismatch");
  }
}

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

// Standard Adam with bias correction.
inline void adam_step(std::vector<double>& params,
                      const std::vector<double>& grads, AdamState& state,
                      double lr, double beta1, double beta2, double eps) {
  if (grads.size() != params.size()) {
    throw Error(errc::dim_mismatch, "gradient/parameter size mismatch");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
    double mhat = state.m[i] / bc1;
    double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

struct TrainConfig {
  double margin = 0.2;
  std::size_t negatives = 50;  // contrastive terms per positive pair
  std::size_t epochs = 10;
  std::size_t batch_size = 100;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t embed_dim = 0;   // 0: taken from the dataset source embeddings
  std::size_t hidden_dim = 32;

  void validate() const {
    if (margin <= 0.0) throw Error(errc::out_of_range, "margin must be > 0");
    if (negatives < 1 || epochs < 1 || batch_size < 1 || hidden_dim < 1 ||
        learning_rate < 0.0 || adam_epsilon <= 0.0) {
      throw Error(errc::out_of_range, "hyperparameters must be positive");
    }
  }
};

// Aligned positive pairs: row i of the frame matrices corresponds to row i of
// the sentence matrices.
struct PairDataset {
  EmbeddingMatrix frame_h;
  EmbeddingMatrix frame_vs;
  EmbeddingMatrix sent_h;
  EmbeddingMatrix sent_vs;

  std::size_t size() const { return frame_h.rows; }

  void validate() const {
    if (frame_h.rows == 0) throw Error(errc::empty_input, "empty dataset");
    if (frame_vs.rows != frame_h.rows || sent_h.rows != frame_h.rows ||
        sent_vs.rows != frame_h.rows) {
      throw Error(errc::dim_mismatch, "dataset matrices disagree on rows");
    }
    if (frame_vs.dim != sent_vs.dim) {
      throw Error(errc::dim_mismatch,
                  "frame and sentence source embeddings must share a dim");
    }
  }
};

struct DevMetrics {
  double median_rank_percent = 0.0;
  double recall_at_1 = 0.0;
};

// Text-to-frame retrieval over the dev pairs: sentence i queries all embedded
// dev frames, the correct item being frame i.
inline DevMetrics evaluate_dev(const ResidualHead& head,
                               const PairDataset& dev) {
  const std::size_t P = dev.size();
  const std::size_t d = dev.frame_vs.dim;
  EmbeddingMatrix frames{P, d, std::vector<double>(P * d), EmbeddingKind::frame};
  for (std::size_t i = 0; i < P; ++i) {
    auto v = forward_embed(head.frame, dev.frame_h.row(i), dev.frame_vs.row(i));
    std::copy(v.begin(), v.end(), frames.data.begin() + i * d);
  }
  RankList ranks;
  ranks.pool = P;
  ranks.ranks.resize(P);
  for (std::size_t i = 0; i < P; ++i) {
    auto q = forward_embed(head.sentence, dev.sent_h.row(i), dev.sent_vs.row(i));
    ranks.ranks[i] = rank_items(q, frames, i);
  }
  return {median_rank_percent(ranks), recall_at_k(ranks, 1)};
}

struct EpochLog {
  std::size_t epoch = 0;  // 0 is the initialization snapshot
  double train_loss = 0.0;
  double dev_median_rank_percent = 0.0;
  double dev_recall_at_1 = 0.0;
  bool improved = false;
};

struct TrainResult {
  ResidualHead best;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;  // entry 0 is the initialization
};

inline ResidualBranch init_branch(std::size_t in, std::size_t hidden,
                                  std::size_t out, Rng& rng) {
  ResidualBranch br;
  br.in_dim = in;
  br.hidden_dim = hidden;
  br.out_dim = out;
  br.W1.resize(hidden * in);
  br.b1.assign(hidden, 0.0);
  br.W2.resize(out * hidden);
  br.b2.assign(out, 0.0);
  double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : br.W1) w = rng.uniform(-s1, s1);
  double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : br.W2) w = rng.uniform(-s2, s2);
  br.alpha = 0.1 * (1.0 - rng.uniform());  // (0, 0.1]
  return br;
}

// Shuffled mini-batch epochs with per-positive negative sampling, Adam
// updates, and a dev checkpoint after every epoch. The best checkpoint by dev
// median-rank-percent (text-to-frame) is returned together with the full log.
inline TrainResult train(const PairDataset& data, const PairDataset& dev,
                         const TrainConfig& config) {
  config.validate();
  data.validate();
  dev.validate();
  const std::size_t P = data.size();
  if (P < 2) {
    throw Error(errc::empty_input, "need at least two positive pairs");
  }

  Rng rng(config.seed);
  std::size_t out_dim = config.embed_dim ? config.embed_dim : data.frame_vs.dim;
  if (out_dim != data.frame_vs.dim) {
    throw Error(errc::dim_mismatch,
                "embed_dim must match the source embedding dim");
  }
  ResidualHead head{
      init_branch(data.frame_h.dim, config.hidden_dim, out_dim, rng),
      init_branch(data.sent_h.dim, config.hidden_dim, out_dim, rng)};

  TrainResult result;
  DevMetrics dm = evaluate_dev(head, dev);
  result.log.push_back({0, 0.0, dm.median_rank_percent, dm.recall_at_1, false});
  result.best = head;
  result.best_epoch = 0;
  double best_med = dm.median_rank_percent;

  std::vector<double> params = flatten(head);
  AdamState adam;
  std::vector<std::size_t> order(P);
  for (std::size_t i = 0; i < P; ++i) order[i] = i;

  auto item = [&](const EmbeddingMatrix& h, const EmbeddingMatrix& vs,
                  std::size_t i) {
    auto hr = h.row(i);
    auto vr = vs.row(i);
    return ItemFeatures{{hr.begin(), hr.end()}, {vr.begin(), vr.end()}};
  };

  const std::size_t negs = std::min(config.negatives, P - 1);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t term_sum = 0;
    for (std::size_t start = 0; start < P; start += config.batch_size) {
      std::size_t stop = std::min(P, start + config.batch_size);
      TripletBatch batch;
      batch.triplets.reserve(stop - start);
      for (std::size_t b = start; b < stop; ++b) {
        std::size_t i = order[b];
        Triplet t;
        t.anchor = item(data.sent_h, data.sent_vs, i);
        t.positive = item(data.frame_h, data.frame_vs, i);
        for (std::size_t n : rng.sample_excluding(P, negs, i)) {
          t.negatives.push_back(item(data.frame_h, data.frame_vs, n));
        }
        batch.triplets.push_back(std::move(t));
      }
      BatchGradients bg = gradients(head, batch, config.margin);
      std::size_t terms = batch.term_count();
      loss_sum += bg.loss * static_cast<double>(terms);
      term_sum += terms;
      adam_step(params, flatten(bg.grad), adam, config.learning_rate,
                config.adam_beta1, config.adam_beta2, config.adam_epsilon);
      unflatten(params, head);
    }
    dm = evaluate_dev(head, dev);
    bool improved = dm.median_rank_percent < best_med;
    if (improved) {
      best_med = dm.median_rank_percent;
      result.best = head;
      result.best_epoch = epoch;
    }
    result.log.push_back({epoch, loss_sum / static_cast<double>(term_sum),
                          dm.median_rank_percent, dm.recall_at_1, improved});
  }
  return result;
}

}  // namespace semsum
