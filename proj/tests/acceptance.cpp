// Acceptance suite: ten oracle- and property-based criteria, one line each.
// Exit code is the number of failed blocking criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "semsum/semsum.hpp"
#include "oracles.hpp"

using namespace semsum;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& name,
            const std::string& detail) {
  std::printf("[%2d] %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    double t0 = now_seconds();
    fn();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

// ------------------------------------------------------------- criterion 1

void criterion_decoder_oracle() {
  Rng rng(20240001);
  double t0 = now_seconds();
  int compared = 0, mismatches = 0, attempts = 0;
  while (compared < 500 && attempts < 5000) {
    ++attempts;
    std::size_t F = 2 + rng.below(6);
    std::size_t N = 1 + rng.below(std::min<std::size_t>(4, F));
    std::size_t k = 1 + rng.below(F);
    auto S = oracle::random_scores(F, N, rng);
    auto B = build_emission(S, k);
    auto pi = InitialDistribution::uniform(F);
    SummaryPath marg, vit;
    try {
      marg = decode_marginal(B, pi);
      vit = decode_viterbi(B, pi);
    } catch (const Error&) {
      bool brute_threw = false;
      try {
        decode_bruteforce(B, pi);
      } catch (const Error&) {
        brute_threw = true;
      }
      if (!brute_threw) ++mismatches;
      continue;
    }
    auto brute = decode_bruteforce(B, pi);
    if (marg.path != brute.marginal.path) ++mismatches;
    if (vit.path != brute.map.path) ++mismatches;
    ++compared;
  }
  double dt = now_seconds() - t0;
  report(1, compared >= 500 && mismatches == 0 && dt < 30.0,
         "decoder-oracle equivalence",
         std::to_string(compared) + " instances, " +
             std::to_string(mismatches) + " mismatches, " +
             std::to_string(dt) + " s");
}

// ------------------------------------------------------------- criterion 2

void criterion_worked_example() {
  auto B = SparseEmission::from_dense(3, 2, {1, 0, 0, 1, 0.5, 0.5});
  auto pi = InitialDistribution::uniform(3);
  auto tb = forward_backward(B, pi);
  auto ua = [&](std::size_t t, std::size_t i) {
    double p = 1.0;
    for (std::size_t u = 0; u <= t; ++u) p *= tb.scale[u];
    return tb.alpha_at(t, i) * p;
  };
  auto ub = [&](std::size_t t, std::size_t i) {
    double p = 1.0;
    for (std::size_t u = t + 1; u < tb.T; ++u) p *= tb.scale[u];
    return tb.beta_at(t, i) * p;
  };
  const double tol = 1e-12;
  bool ok = std::abs(ua(0, 0) - 1.0 / 3) < tol && std::abs(ua(0, 1)) < tol &&
            std::abs(ua(0, 2) - 1.0 / 6) < tol && std::abs(ua(1, 0)) < tol &&
            std::abs(ua(1, 1) - 1.0 / 6) < tol &&
            std::abs(ua(1, 2) - 1.0 / 12) < tol;
  ok = ok && std::abs(ub(0, 0) - 0.75) < tol && std::abs(ub(0, 1) - 0.5) < tol &&
       std::abs(ub(0, 2)) < tol;
  auto marg = decode_marginal(B, pi);
  auto vit = decode_viterbi(B, pi);
  ok = ok && marg.path == std::vector<std::size_t>{0, 1};
  ok = ok && vit.path == std::vector<std::size_t>{0, 1} &&
       std::abs(vit.joint_probability - 1.0 / 6) < tol;
  report(2, ok, "worked-example regression",
         "alpha/beta/marginal/MAP at 1e-12");
}

// ------------------------------------------------------------- criterion 3

void criterion_prefix_sum_vs_naive() {
  Rng rng(20240003);
  int bad = 0;
  for (int iter = 0; iter < 100; ++iter) {
    std::size_t F = 2 + rng.below(49);
    std::size_t N = 1 + rng.below(std::min<std::size_t>(6, F));
    auto S = oracle::random_scores(F, N, rng);
    auto B = build_emission(S, minimal_k(S));
    auto pi = InitialDistribution::uniform(F);
    auto tb = forward_backward(B, pi);
    auto naive = oracle::naive_forward_backward(F, N, B.dense(), pi.p);
    for (std::size_t t = 0; t < N; ++t) {
      double ap = 1.0, bp = 1.0;
      for (std::size_t u = 0; u <= t; ++u) ap *= tb.scale[u];
      for (std::size_t u = t + 1; u < N; ++u) bp *= tb.scale[u];
      for (std::size_t i = 0; i < F; ++i) {
        double fa = tb.alpha_at(t, i) * ap;
        double na = naive.alpha[t * F + i];
        double fb = tb.beta_at(t, i) * bp;
        double nb = naive.beta[t * F + i];
        double sa = std::max({std::abs(fa), std::abs(na), 1e-300});
        double sb = std::max({std::abs(fb), std::abs(nb), 1e-300});
        if (std::abs(fa - na) > 1e-10 * sa) ++bad;
        if (std::abs(fb - nb) > 1e-10 * sb) ++bad;
      }
    }
  }
  report(3, bad == 0, "prefix-sum forward/backward vs naive O(F^2 N)",
         "100 instances, " + std::to_string(bad) + " cells out of tolerance");
}

// ------------------------------------------------------------- criterion 4

void criterion_complexity() {
  PlantedConfig big;
  big.frames = 20000;
  big.sentences = 24;
  big.sigma = 0.3;
  big.seed = 44;
  auto inst = make_planted(big);
  auto S = compatibility_matrix(inst.frames, inst.sentences);
  double t_big = best_of(3, [&] {
    auto res = decode_marginal(S);
    if (res.path.size() != 24) std::abort();
  });

  PlantedConfig half = big;
  half.frames = 10000;
  half.seed = 45;
  auto inst_half = make_planted(half);
  auto S_half = compatibility_matrix(inst_half.frames, inst_half.sentences);
  std::size_t k = std::max({minimal_k(S), minimal_k(S_half), std::size_t{8}});
  double t10 = best_of(3, [&] { decode_marginal(S_half, k); });
  double t20 = best_of(3, [&] { decode_marginal(S, k); });
  double ratio = t20 / t10;
  bool ok = t_big < 1.0 && ratio <= 2.5;
  report(4, ok, "O(kFN) scaling",
         "F=20000 decode " + std::to_string(t_big) + " s; 10k->20k ratio " +
             std::to_string(ratio));
}

// ------------------------------------------------------------- criterion 5

void criterion_minimal_k() {
  Rng rng(20240005);
  int bad = 0;
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t N = 1 + rng.below(6);
    std::size_t F = N + rng.below(10 - N + 1);
    auto S = oracle::random_scores(F, N, rng);
    std::size_t k = minimal_k(S);
    if (!oracle::dfs_feasible(topk_sets(S, k))) ++bad;
    if (k > 1 && oracle::dfs_feasible(topk_sets(S, k - 1))) ++bad;
  }
  report(5, bad == 0, "minimal_k vs exhaustive DFS",
         "200 instances, " + std::to_string(bad) + " violations");
}

// ------------------------------------------------------------- criterion 6

struct PlantedScore {
  double map = 0.0;
  double mad = 0.0;
  std::size_t exact = 0;
};

PlantedScore score_planted(const PlantedInstance& inst,
                           const std::vector<std::size_t>& path) {
  std::size_t F = inst.frames.rows;
  SegmentList pred{F, path};
  SegmentList ref{F, inst.planted};
  PlantedScore ps;
  ps.map = mean_average_precision(pred, {ref});
  ps.mad = mean_average_distance(pred, {ref});
  for (std::size_t t = 0; t < path.size(); ++t) {
    ps.exact += path[t] == inst.planted[t];
  }
  return ps;
}

void criterion_planted_recovery() {
  double map_sum = 0.0, mad_sum = 0.0;
  std::size_t exact = 0, total = 0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    PlantedConfig cfg;
    cfg.frames = 500;
    cfg.sentences = 12;
    cfg.sigma = 0.05;
    cfg.seed = 600 + s;
    auto inst = make_planted(cfg);
    auto S = compatibility_matrix(inst.frames, inst.sentences);
    auto res = decode_marginal(S);
    auto ps = score_planted(inst, res.path);
    map_sum += ps.map;
    mad_sum += ps.mad;
    exact += ps.exact;
    total += cfg.sentences;
  }
  double frac = static_cast<double>(exact) / static_cast<double>(total);
  double map = map_sum / seeds, mad = mad_sum / seeds;
  bool ok = frac >= 0.95 && map >= 95.0 && mad <= 0.5;
  report(6, ok, "planted-signal recovery at sigma=0.05",
         "exact " + std::to_string(100 * frac) + "%, mAP " +
             std::to_string(map) + ", mAD " + std::to_string(mad));
}

// ------------------------------------------------------------- criterion 7

void criterion_decoder_ordering() {
  double mad_fb = 0.0, mad_vit = 0.0, mad_dtw = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    PlantedConfig cfg;
    cfg.frames = 500;
    cfg.sentences = 12;
    cfg.sigma = 0.3;
    cfg.seed = 7000 + s;
    auto inst = make_planted(cfg);
    auto S = compatibility_matrix(inst.frames, inst.sentences);
    std::size_t k = minimal_k(S);
    mad_fb += score_planted(inst, decode_marginal(S, k).path).mad;
    mad_vit += score_planted(inst, decode_viterbi(S, k).path).mad;
    mad_dtw += score_planted(inst, decode_dtw(S).path).mad;
  }
  mad_fb /= seeds;
  mad_vit /= seeds;
  mad_dtw /= seeds;
  bool fb_beats_dtw = mad_fb <= mad_dtw;
  report(7, fb_beats_dtw, "decoding-order reproduction at sigma=0.3",
         "mean mAD fb " + std::to_string(mad_fb) + " vs dtw " +
             std::to_string(mad_dtw));
  // The fb-vs-viterbi margin is small by nature; log it without blocking.
  std::printf("     note: mean mAD fb %.4f vs viterbi %.4f (%s, non-blocking)\n",
              mad_fb, mad_vit,
              mad_fb <= mad_vit ? "fb ahead or equal" : "viterbi ahead");
}

// ------------------------------------------------------------- criterion 8

void criterion_metrics_suite() {
  bool ok = true;
  SegmentList pred{100, {3, 10, 20}};
  ok = ok && mean_average_precision(pred, {pred}) == 100.0;
  SegmentList ref2{100, {3, 20}};
  ok = ok && std::abs(mean_average_precision(pred, {ref2}) -
                      100.0 * (1.0 + 2.0 / 3) / 2) < 1e-12;
  SegmentList disjoint{100, {40, 60}};
  ok = ok && mean_average_precision(pred, {disjoint}) == 0.0;

  SegmentList mp{100, {12, 50}};
  SegmentList mr{100, {10, 50}};
  ok = ok && mean_average_distance(mp, {mp}) == 0.0;
  ok = ok && std::abs(mean_average_distance(mp, {mr}) - 1.0) < 1e-12;
  SegmentList p0{40, {39}};
  SegmentList r0{40, {0}};
  ok = ok && std::abs(mean_average_distance(p0, {r0}) - 100.0 * 39 / 40) < 1e-12;

  RankList ranks{{1, 5, 20}, 100};
  ok = ok && std::abs(recall_at_k(ranks, 8) - 2.0 / 3) < 1e-15;
  ok = ok && recall_at_k(ranks, 100) == 1.0;
  ok = ok && median_rank_percent(ranks) == 5.0;
  ok = ok && median_rank_percent(RankList{{2, 4}, 100}) == 3.0;

  // Reordering invariance and monotonicity.
  Rng rng(20240008);
  for (int iter = 0; iter < 10 && ok; ++iter) {
    SegmentList p{60, {}};
    for (int i = 0; i < 5; ++i) p.segments.push_back(rng.below(60));
    SegmentList r{60, {}};
    for (int i = 0; i < 4; ++i) r.segments.push_back(rng.below(60));
    double base = mean_average_distance(p, {r});
    auto q = p;
    rng.shuffle(q.segments);
    ok = ok && mean_average_distance(q, {r}) == base;
  }
  RankList rl{{}, 32};
  for (int i = 0; i < 9; ++i) rl.ranks.push_back(1 + rng.below(32));
  double prev = 0.0;
  for (std::size_t K = 1; K <= 32 && ok; ++K) {
    double r = recall_at_k(rl, K);
    ok = ok && r >= prev;
    prev = r;
  }
  report(8, ok, "metrics unit suite", "hand cases and properties");
}

// ------------------------------------------------------------- criterion 9

PairDataset trainer_planted(std::size_t P, std::uint64_t seed) {
  const std::size_t dh = 8, d = 8;
  Rng rng(seed);
  auto unit = [&](std::size_t dim) {
    std::vector<double> v(dim);
    double n2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
    for (double& x : v) x /= std::sqrt(n2);
    return v;
  };
  PairDataset ds;
  ds.frame_h = EmbeddingMatrix{P, dh, std::vector<double>(P * dh),
                               EmbeddingKind::frame};
  ds.sent_h = EmbeddingMatrix{P, dh, std::vector<double>(P * dh),
                              EmbeddingKind::sentence};
  ds.frame_vs = EmbeddingMatrix{P, d, std::vector<double>(P * d),
                                EmbeddingKind::frame};
  ds.sent_vs = EmbeddingMatrix{P, d, std::vector<double>(P * d),
                               EmbeddingKind::sentence};
  for (std::size_t i = 0; i < P; ++i) {
    auto z = unit(dh);
    for (std::size_t j = 0; j < dh; ++j) {
      ds.frame_h.data[i * dh + j] = z[j] + 0.1 * rng.normal();
      ds.sent_h.data[i * dh + j] = z[j] + 0.1 * rng.normal();
    }
    auto fv = unit(d);
    auto sv = unit(d);
    for (std::size_t j = 0; j < d; ++j) {
      ds.frame_vs.data[i * d + j] = fv[j];
      ds.sent_vs.data[i * d + j] = sv[j];
    }
  }
  return ds;
}

ResidualBranch accept_branch(std::size_t in, std::size_t hidden,
                             std::size_t out, Rng& rng) {
  ResidualBranch b;
  b.in_dim = in;
  b.hidden_dim = hidden;
  b.out_dim = out;
  b.W1.resize(hidden * in);
  b.b1.resize(hidden);
  b.W2.resize(out * hidden);
  b.b2.resize(out);
  for (double& v : b.W1) v = rng.uniform(-0.5, 0.5);
  for (double& v : b.b1) v = rng.uniform(-0.5, 0.5);
  for (double& v : b.W2) v = rng.uniform(-0.5, 0.5);
  for (double& v : b.b2) v = rng.uniform(-0.5, 0.5);
  b.alpha = rng.uniform(0.01, 0.3);
  return b;
}

void criterion_trainer() {
  // (a) finite differences on 20 kink-free random batches
  const double m = 0.2, eps = 1e-5;
  double worst = 0.0;
  int checked = 0;
  std::uint64_t seed = 90000;
  while (checked < 20) {
    Rng rng(seed++);
    ResidualHead head{accept_branch(4, 6, 5, rng), accept_branch(3, 6, 5, rng)};
    TripletBatch batch;
    for (int ti = 0; ti < 3; ++ti) {
      Triplet t;
      auto item = [&](std::size_t in) {
        ItemFeatures f;
        f.h.resize(in);
        f.vs.resize(5);
        for (double& v : f.h) v = rng.uniform(-1, 1);
        for (double& v : f.vs) v = rng.uniform(-1, 1);
        return f;
      };
      t.anchor = item(3);
      t.positive = item(4);
      for (int n = 0; n < 4; ++n) t.negatives.push_back(item(4));
      batch.triplets.push_back(std::move(t));
    }
    // keep clear of the hinge kink
    double kink = std::numeric_limits<double>::infinity();
    for (const auto& t : batch.triplets) {
      auto av = forward_embed(head.sentence, t.anchor.h, t.anchor.vs);
      auto pv = forward_embed(head.frame, t.positive.h, t.positive.vs);
      double sp = cosine_similarity(pv, av);
      for (const auto& n : t.negatives) {
        auto nv = forward_embed(head.frame, n.h, n.vs);
        kink = std::min(kink, std::abs(m - sp + cosine_similarity(nv, av)));
      }
    }
    if (kink < 1e-3) continue;
    ++checked;
    auto analytic = flatten(gradients(head, batch, m).grad);
    auto params = flatten(head);
    for (std::size_t i = 0; i < params.size(); ++i) {
      double save = params[i];
      params[i] = save + eps;
      unflatten(params, head);
      double lp = batch_loss(head, batch, m);
      params[i] = save - eps;
      unflatten(params, head);
      double lm = batch_loss(head, batch, m);
      params[i] = save;
      unflatten(params, head);
      double fd = (lp - lm) / (2 * eps);
      double denom = std::max(std::abs(fd), std::abs(analytic[i]));
      if (denom < 1e-10) continue;
      worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
  }
  bool fd_ok = worst < 1e-4;

  // (b) learning on planted separable pairs with the pinned constants
  TrainConfig cfg;
  cfg.margin = 0.2;
  cfg.negatives = 50;
  cfg.batch_size = 100;
  cfg.epochs = 10;
  cfg.learning_rate = 0.02;
  cfg.hidden_dim = 16;
  int improved_seeds = 0;
  const int train_seeds = 5;
  double init_r1 = 0.0, final_r1 = 0.0;
  for (int s = 0; s < train_seeds; ++s) {
    auto data = trainer_planted(200, 910 + s);
    auto dev = trainer_planted(30, 990 + s);
    cfg.seed = 300 + s;
    auto res = train(data, dev, cfg);
    init_r1 += res.log.front().dev_recall_at_1;
    final_r1 += res.log.back().dev_recall_at_1;
    improved_seeds +=
        res.log.back().dev_recall_at_1 > res.log.front().dev_recall_at_1;
  }
  bool learn_ok = improved_seeds == train_seeds;

  // (c) bit-identical rerun
  auto data = trainer_planted(60, 2024);
  auto dev = trainer_planted(12, 2025);
  TrainConfig small = cfg;
  small.negatives = 10;
  small.epochs = 3;
  small.batch_size = 20;
  small.seed = 5;
  auto r1 = train(data, dev, small);
  auto r2 = train(data, dev, small);
  bool det_ok = flatten(r1.best) == flatten(r2.best);
  for (std::size_t i = 0; i < r1.log.size() && det_ok; ++i) {
    det_ok = r1.log[i].train_loss == r2.log[i].train_loss &&
             r1.log[i].dev_median_rank_percent ==
                 r2.log[i].dev_median_rank_percent;
  }

  report(9, fd_ok && learn_ok && det_ok, "trainer gradients and learning",
         "fd max rel " + std::to_string(worst) + "; improved " +
             std::to_string(improved_seeds) + "/5 seeds (mean R@1 " +
             std::to_string(init_r1 / train_seeds) + " -> " +
             std::to_string(final_r1 / train_seeds) + "); deterministic " +
             (det_ok ? "yes" : "no"));
}

// ------------------------------------------------------------ criterion 10

void criterion_baselines() {
  Rng rng(20240010);
  int bad = 0;
  for (int iter = 0; iter < 100; ++iter) {
    std::size_t R = 1 + rng.below(4);
    std::size_t G = R + rng.below(10 - R + 1);
    std::size_t dim = 3 + rng.below(3);
    std::vector<double> rd(R * dim), gd(G * dim);
    for (double& v : rd) v = rng.uniform(-1, 1);
    for (double& v : gd) v = rng.uniform(-1, 1);
    auto refs = make_embeddings(R, dim, rd, EmbeddingKind::sentence);
    auto gts = make_embeddings(G, dim, gd, EmbeddingKind::sentence);
    auto got = ordered_subshot_dp(refs, gts);
    auto want = oracle::enumerate_ordered_assignment(
        compatibility_matrix(refs, gts));
    if (got.indices != want.indices ||
        std::abs(got.score - want.score) > 1e-12) {
      ++bad;
    }
  }

  auto frames = make_embeddings(3, 2, {1, 0, 1, 0, 0, 1}, EmbeddingKind::frame);
  bool mmr_ok = video_mmr(frames, 2, 0.5).frames ==
                std::vector<std::size_t>{0, 2};
  bool uni_ok =
      uniform_sample(10, 5).frames == std::vector<std::size_t>{0, 2, 4, 6, 8} &&
      uniform_sample(7, 2).frames == std::vector<std::size_t>{0, 3} &&
      uniform_sample(5, 5).frames == std::vector<std::size_t>{0, 1, 2, 3, 4};
  report(10, bad == 0 && mmr_ok && uni_ok, "baselines",
         std::to_string(bad) + " dp/enumeration mismatches; mmr " +
             (mmr_ok ? "ok" : "bad") + "; uniform " + (uni_ok ? "ok" : "bad"));
}

}  // namespace

int main() {
  criterion_decoder_oracle();
  criterion_worked_example();
  criterion_prefix_sum_vs_naive();
  criterion_complexity();
  criterion_minimal_k();
  criterion_planted_recovery();
  criterion_decoder_ordering();
  criterion_metrics_suite();
  criterion_trainer();
  criterion_baselines();
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures;
}
