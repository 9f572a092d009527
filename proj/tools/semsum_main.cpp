// semsum command line: summarize, compare-decoders, evaluate, retrieval-eval,
// mmr, baseline, train, synth. Reports are JSON (default) or CSV and embed
// the full effective configuration so any run can be reproduced from its
// report alone.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semsum/semsum.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int log_level() {
  const char* env = std::getenv("SEMSUM_LOG");
  if (!env) return 0;
  std::string v = env;
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "semsum: " << msg << "\n";
}

struct Output {
  std::string path;    // empty: stdout
  std::string format;  // json | csv
};

void emit(const Output& out, const json& report,
          const std::string& csv_body) {
  std::string body =
      out.format == "csv" ? csv_body : report.dump(2) + "\n";
  if (out.path.empty()) {
    std::cout << body;
  } else {
    std::ofstream f(out.path);
    if (!f) throw semsum::Error(semsum::errc::io, "cannot write " + out.path);
    f << body;
    log_info("wrote " + out.path);
  }
}

semsum::EmbeddingMatrix load_auto(const std::string& path,
                                  semsum::EmbeddingKind kind) {
  log_info("loading " + path);
  return semsum::load_embeddings_auto(path, kind);
}

semsum::InitialDistribution resolve_pi(const std::string& name,
                                       const semsum::SparseEmission& B) {
  if (name == "emission-weighted") {
    return semsum::InitialDistribution::emission_weighted(B);
  }
  return semsum::InitialDistribution::uniform(B.F);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

json decode_to_json(const semsum::SummaryPath& res, double sample_interval,
                    double wall) {
  json j;
  j["decoder"] = semsum::decoder_name(res.decoder);
  j["k_used"] = res.k_used;
  j["path"] = res.path;
  std::vector<double> ts;
  for (std::size_t f : res.path) ts.push_back(f * sample_interval);
  j["timestamps"] = ts;
  if (!res.posteriors.empty()) j["posteriors"] = res.posteriors;
  if (res.decoder == semsum::DecoderKind::viterbi) {
    j["joint_probability"] = res.joint_probability;
  }
  j["wall_time_seconds"] = wall;
  return j;
}

semsum::SummaryPath run_decoder(const std::string& name,
                                const semsum::CompatibilityMatrix& S,
                                std::optional<std::size_t> k,
                                const std::string& pi_name) {
  if (name == "dtw") return semsum::decode_dtw(S);
  std::size_t kk = k ? *k : semsum::minimal_k(S);
  auto B = semsum::build_emission(S, kk);
  auto pi = resolve_pi(pi_name, B);
  return name == "viterbi" ? semsum::decode_viterbi(B, pi)
                           : semsum::decode_marginal(B, pi);
}

// ---------------------------------------------------------------- summarize

struct SummarizeArgs {
  std::string frames, sentences, decoder = "fb", pi = "uniform";
  std::optional<std::size_t> k;
  std::size_t single_sentence = 0;
  double sample_interval = 5.0;
  Output out{"", "json"};
};

int cmd_summarize(const SummarizeArgs& a) {
  auto start = std::chrono::steady_clock::now();
  auto frames = load_auto(a.frames, semsum::EmbeddingKind::frame);
  auto sentences = load_auto(a.sentences, semsum::EmbeddingKind::sentence);
  if (a.single_sentence > 0) {
    if (sentences.rows != 1) {
      throw semsum::Error(semsum::errc::bad_format,
                          "--single-sentence expects a one-row sentence file");
    }
    sentences = semsum::duplicate_sentence(sentences.row(0), a.single_sentence);
  }
  auto S = semsum::compatibility_matrix(frames, sentences);
  auto res = run_decoder(a.decoder, S, a.k, a.pi);

  json report = decode_to_json(res, a.sample_interval, seconds_since(start));
  report["config"] = {{"frames", a.frames},
                      {"sentences", a.sentences},
                      {"decoder", a.decoder},
                      {"k", a.k ? json(*a.k) : json(nullptr)},
                      {"pi", a.pi},
                      {"single_sentence", a.single_sentence},
                      {"sample_interval", a.sample_interval},
                      {"format", a.out.format}};
  std::ostringstream csv;
  csv << "step,frame,timestamp\n";
  for (std::size_t t = 0; t < res.path.size(); ++t) {
    csv << t << ',' << res.path[t] << ',' << res.path[t] * a.sample_interval
        << '\n';
  }
  emit(a.out, report, csv.str());
  return 0;
}

// --------------------------------------------------------- compare-decoders

struct CompareArgs {
  std::string frames, sentences, gt, pi = "uniform";
  std::optional<std::size_t> k;
  std::optional<double> sample_interval;
  Output out{"", "json"};
};

int cmd_compare_decoders(const CompareArgs& a) {
  auto frames = load_auto(a.frames, semsum::EmbeddingKind::frame);
  auto sentences = load_auto(a.sentences, semsum::EmbeddingKind::sentence);
  auto gt = semsum::load_ground_truth(a.gt);
  if (frames.rows != gt.grid) {
    throw semsum::Error(semsum::errc::dim_mismatch,
                        "frame count must equal the ground-truth grid");
  }
  double interval = a.sample_interval.value_or(gt.sample_interval);
  auto S = semsum::compatibility_matrix(frames, sentences);

  json rows = json::array();
  std::ostringstream csv;
  csv << "decoder,k_used,map,mad,wall_time_seconds\n";
  for (const std::string& name : {"fb", "viterbi", "dtw"}) {
    auto start = std::chrono::steady_clock::now();
    auto res = run_decoder(name, S, a.k, a.pi);
    double wall = seconds_since(start);
    semsum::SegmentList pred{gt.grid, res.path};
    double map = semsum::mean_average_precision(pred, gt.references);
    double mad = semsum::mean_average_distance(pred, gt.references);
    json row = {{"decoder", name}, {"k_used", res.k_used},
                {"map", map},      {"mad", mad},
                {"path", res.path}, {"wall_time_seconds", wall}};
    rows.push_back(row);
    csv << name << ',' << res.k_used << ',' << map << ',' << mad << ','
        << wall << '\n';
    log_info(std::string(name) + ": mAP=" + std::to_string(map) +
             " mAD=" + std::to_string(mad));
  }
  json report;
  report["decoders"] = rows;
  report["config"] = {{"frames", a.frames},
                      {"sentences", a.sentences},
                      {"gt", a.gt},
                      {"k", a.k ? json(*a.k) : json(nullptr)},
                      {"pi", a.pi},
                      {"sample_interval", interval},
                      {"format", a.out.format}};
  emit(a.out, report, csv.str());
  return 0;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string pred, gt, metrics = "map,mad";
  Output out{"", "json"};
};

int cmd_evaluate(const EvaluateArgs& a) {
  auto gt = semsum::load_ground_truth(a.gt);
  auto pred = semsum::load_predicted_segments(a.pred, gt.grid);

  json report;
  std::ostringstream csv;
  csv << "metric,value\n";
  std::stringstream names(a.metrics);
  std::string name;
  bool any = false;
  while (std::getline(names, name, ',')) {
    double value;
    if (name == "map") {
      value = semsum::mean_average_precision(pred, gt.references);
    } else if (name == "mad") {
      value = semsum::mean_average_distance(pred, gt.references);
    } else {
      throw semsum::Error(semsum::errc::bad_format,
                          "unknown metric '" + name + "' (use map,mad)");
    }
    report[name] = value;
    csv << name << ',' << value << '\n';
    any = true;
  }
  if (!any) {
    throw semsum::Error(semsum::errc::bad_format, "--metrics is empty");
  }
  report["config"] = {{"pred", a.pred},
                      {"gt", a.gt},
                      {"metrics", a.metrics},
                      {"format", a.out.format}};
  emit(a.out, report, csv.str());
  return 0;
}

// ----------------------------------------------------------- retrieval-eval

struct RetrievalArgs {
  std::string frames, sentences, ks = "1,5,10";
  Output out{"", "json"};
};

int cmd_retrieval_eval(const RetrievalArgs& a) {
  auto frames = load_auto(a.frames, semsum::EmbeddingKind::frame);
  auto sentences = load_auto(a.sentences, semsum::EmbeddingKind::sentence);
  if (frames.rows != sentences.rows) {
    throw semsum::Error(
        semsum::errc::dim_mismatch,
        "retrieval-eval expects aligned frame/sentence files (query i's "
        "correct candidate is frame i)");
  }
  semsum::RankList ranks;
  ranks.pool = frames.rows;
  for (std::size_t i = 0; i < sentences.rows; ++i) {
    ranks.ranks.push_back(semsum::rank_items(sentences.row(i), frames, i));
  }

  json report;
  std::ostringstream csv;
  csv << "metric,value\n";
  std::stringstream klist(a.ks);
  std::string tok;
  json recalls;
  while (std::getline(klist, tok, ',')) {
    std::size_t K = std::stoul(tok);
    double r = semsum::recall_at_k(ranks, K);
    recalls["R@" + tok] = r;
    csv << "R@" << tok << ',' << r << '\n';
  }
  double med = semsum::median_rank_percent(ranks);
  report["recall"] = recalls;
  report["median_rank_percent"] = med;
  csv << "median_rank_percent," << med << '\n';
  report["config"] = {{"frames", a.frames},
                      {"sentences", a.sentences},
                      {"ks", a.ks},
                      {"format", a.out.format}};
  emit(a.out, report, csv.str());
  return 0;
}

// ---------------------------------------------------------------------- mmr

struct MmrArgs {
  std::string frames;
  std::size_t count = 0;
  double lambda = 0.5;
  Output out{"", "json"};
};

int cmd_mmr(const MmrArgs& a) {
  auto frames = load_auto(a.frames, semsum::EmbeddingKind::frame);
  auto ks = semsum::video_mmr(frames, a.count, a.lambda);
  json report;
  report["keyframes"] = ks.frames;
  report["config"] = {{"frames", a.frames},
                      {"count", a.count},
                      {"lambda", a.lambda},
                      {"relevance", "mean cosine to unselected frames"},
                      {"redundancy", "max cosine to selected keyframes"},
                      {"format", a.out.format}};
  std::ostringstream csv;
  csv << "order,frame\n";
  for (std::size_t i = 0; i < ks.frames.size(); ++i) {
    csv << i << ',' << ks.frames[i] << '\n';
  }
  emit(a.out, report, csv.str());
  return 0;
}

// ----------------------------------------------------------------- baseline

struct BaselineArgs {
  std::string method, ref_sentences, gt_sentences;
  std::size_t f = 0, count = 0;
  Output out{"", "json"};
};

int cmd_baseline(const BaselineArgs& a) {
  json report;
  std::ostringstream csv;
  if (a.method == "uniform") {
    auto ks = semsum::uniform_sample(a.f, a.count);
    report["keyframes"] = ks.frames;
    csv << "order,frame\n";
    for (std::size_t i = 0; i < ks.frames.size(); ++i) {
      csv << i << ',' << ks.frames[i] << '\n';
    }
  } else {
    auto refs =
        load_auto(a.ref_sentences, semsum::EmbeddingKind::sentence);
    auto gts = load_auto(a.gt_sentences, semsum::EmbeddingKind::sentence);
    semsum::Assignment assign = a.method == "greedy"
                                    ? semsum::greedy_select(refs, gts)
                                    : semsum::ordered_subshot_dp(refs, gts);
    report["assignment"] = assign.indices;
    report["score"] = assign.score;
    csv << "reference,gt_index\n";
    for (std::size_t i = 0; i < assign.indices.size(); ++i) {
      csv << i << ',' << assign.indices[i] << '\n';
    }
  }
  report["config"] = {{"method", a.method},
                      {"ref_sentences", a.ref_sentences},
                      {"gt_sentences", a.gt_sentences},
                      {"f", a.f},
                      {"count", a.count},
                      {"format", a.out.format}};
  emit(a.out, report, csv.str());
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  semsum::TrainConfig config;
  std::string checkpoint = "checkpoint.json";
  Output out{"", "json"};
};

semsum::EmbeddingMatrix load_dataset_file(const fs::path& dir,
                                          const std::string& base,
                                          semsum::EmbeddingKind kind) {
  for (const char* ext : {".emb", ".csv"}) {
    fs::path p = dir / (base + ext);
    if (fs::exists(p)) return load_auto(p.string(), kind);
  }
  throw semsum::Error(semsum::errc::io,
                      "missing " + (dir / base).string() + ".{emb,csv}");
}

semsum::PairDataset load_pair_dataset(const fs::path& dir,
                                      const std::string& prefix) {
  semsum::PairDataset ds;
  ds.frame_h = load_dataset_file(dir, prefix + "_frames_h",
                                 semsum::EmbeddingKind::frame);
  ds.frame_vs = load_dataset_file(dir, prefix + "_frames_vs",
                                  semsum::EmbeddingKind::frame);
  ds.sent_h = load_dataset_file(dir, prefix + "_sents_h",
                                semsum::EmbeddingKind::sentence);
  ds.sent_vs = load_dataset_file(dir, prefix + "_sents_vs",
                                 semsum::EmbeddingKind::sentence);
  return ds;
}

int cmd_train(const TrainArgs& a) {
  auto start = std::chrono::steady_clock::now();
  auto data = load_pair_dataset(a.data, "train");
  auto dev = load_pair_dataset(a.data, "dev");
  auto result = semsum::train(data, dev, a.config);
  semsum::save_checkpoint(result.best, a.config, a.checkpoint);

  json log = json::array();
  std::ostringstream csv;
  csv << "epoch,train_loss,dev_median_rank_percent,dev_recall_at_1,improved\n";
  for (const auto& e : result.log) {
    log.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"dev_median_rank_percent", e.dev_median_rank_percent},
                   {"dev_recall_at_1", e.dev_recall_at_1},
                   {"improved", e.improved}});
    csv << e.epoch << ',' << e.train_loss << ',' << e.dev_median_rank_percent
        << ',' << e.dev_recall_at_1 << ',' << e.improved << '\n';
  }
  json report;
  report["log"] = log;
  report["best_epoch"] = result.best_epoch;
  report["checkpoint"] = a.checkpoint;
  report["wall_time_seconds"] = seconds_since(start);
  report["config"] = semsum::config_to_json(a.config);
  report["config"]["data"] = a.data;
  report["config"]["format"] = a.out.format;
  emit(a.out, report, csv.str());
  return 0;
}

// -------------------------------------------------------------------- synth

struct SynthArgs {
  semsum::PlantedConfig config;
  double sample_interval = 5.0;
  std::string frames_out, sentences_out, gt_out;
  std::string format = "binary";  // embedding file format
};

int cmd_synth(const SynthArgs& a) {
  auto inst = semsum::make_planted(a.config);
  auto fmt = a.format == "csv" ? semsum::EmbeddingFormat::csv
                               : semsum::EmbeddingFormat::binary;
  semsum::save_embeddings(inst.frames, a.frames_out, fmt);
  semsum::save_embeddings(inst.sentences, a.sentences_out, fmt);
  if (!a.gt_out.empty()) {
    semsum::GroundTruth gt;
    gt.grid = a.config.frames;
    gt.sample_interval = a.sample_interval;
    gt.references.push_back({a.config.frames, inst.planted});
    semsum::save_json_file(semsum::to_json(gt), a.gt_out);
  }
  json report = {{"frames_out", a.frames_out},
                 {"sentences_out", a.sentences_out},
                 {"gt_out", a.gt_out},
                 {"planted", inst.planted},
                 {"config",
                  {{"f", a.config.frames},
                   {"n", a.config.sentences},
                   {"dim", a.config.dim},
                   {"sigma", a.config.sigma},
                   {"seed", a.config.seed},
                   {"sample_interval", a.sample_interval},
                   {"format", a.format}}}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic text-conditioned video summary toolkit"};
  app.require_subcommand(1);

  SummarizeArgs sa;
  auto* sum = app.add_subcommand(
      "summarize", "decode a summary path from embedding files");
  sum->add_option("--frames", sa.frames, "frame embeddings (EMB1 or CSV)")
      ->required();
  sum->add_option("--sentences", sa.sentences, "sentence embeddings")
      ->required();
  sum->add_option("--decoder", sa.decoder, "fb | viterbi | dtw")
      ->check(CLI::IsMember({"fb", "viterbi", "dtw"}));
  std::size_t k_value = 0;
  auto* k_opt = sum->add_option("--k", k_value,
                                "top-k candidates per sentence (default: "
                                "minimal feasible k)");
  sum->add_option("--pi", sa.pi, "uniform | emission-weighted")
      ->check(CLI::IsMember({"uniform", "emission-weighted"}));
  sum->add_option("--single-sentence", sa.single_sentence,
                  "duplicate a one-row sentence file N times");
  sum->add_option("--sample-interval", sa.sample_interval,
                  "seconds per sampled frame");
  sum->add_option("--out", sa.out.path, "write the report to a file");
  sum->add_option("--format", sa.out.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare-decoders",
                                 "run fb, viterbi and dtw on one input and "
                                 "score each against ground truth");
  cmp->add_option("--frames", ca.frames)->required();
  cmp->add_option("--sentences", ca.sentences)->required();
  cmp->add_option("--gt", ca.gt, "ground-truth segments JSON")->required();
  std::size_t ck_value = 0;
  auto* ck_opt = cmp->add_option("--k", ck_value);
  cmp->add_option("--pi", ca.pi)
      ->check(CLI::IsMember({"uniform", "emission-weighted"}));
  double ci_value = 0.0;
  auto* ci_opt = cmp->add_option("--sample-interval", ci_value);
  cmp->add_option("--out", ca.out.path);
  cmp->add_option("--format", ca.out.format)
      ->check(CLI::IsMember({"json", "csv"}));

  EvaluateArgs ea;
  auto* eva = app.add_subcommand("evaluate",
                                 "score predicted segments against ground "
                                 "truth");
  eva->add_option("--pred", ea.pred, "prediction JSON (segments or report)")
      ->required();
  eva->add_option("--gt", ea.gt)->required();
  eva->add_option("--metrics", ea.metrics, "comma list of map,mad");
  eva->add_option("--out", ea.out.path);
  eva->add_option("--format", ea.out.format)
      ->check(CLI::IsMember({"json", "csv"}));

  RetrievalArgs ra;
  auto* ret = app.add_subcommand("retrieval-eval",
                                 "recall-at-K and median rank over aligned "
                                 "embedding files");
  ret->add_option("--frames", ra.frames, "candidate embeddings")->required();
  ret->add_option("--sentences", ra.sentences, "query embeddings")->required();
  ret->add_option("--ks", ra.ks, "comma list of K values");
  ret->add_option("--out", ra.out.path);
  ret->add_option("--format", ra.out.format)
      ->check(CLI::IsMember({"json", "csv"}));

  MmrArgs ma;
  auto* mmr = app.add_subcommand("mmr", "diverse keyframes without text");
  mmr->add_option("--frames", ma.frames)->required();
  mmr->add_option("--count", ma.count, "number of keyframes")->required();
  mmr->add_option("--lambda", ma.lambda, "relevance/redundancy tradeoff");
  mmr->add_option("--out", ma.out.path);
  mmr->add_option("--format", ma.out.format)
      ->check(CLI::IsMember({"json", "csv"}));

  BaselineArgs ba;
  auto* base = app.add_subcommand("baseline",
                                  "text-matching and sampling baselines");
  base->add_option("--method", ba.method, "greedy | ordered | uniform")
      ->required()
      ->check(CLI::IsMember({"greedy", "ordered", "uniform"}));
  base->add_option("--ref-sentences", ba.ref_sentences,
                   "reference text embeddings (greedy/ordered)");
  base->add_option("--gt-sentences", ba.gt_sentences,
                   "ground-truth text embeddings (greedy/ordered)");
  base->add_option("--f", ba.f, "frame count (uniform)");
  base->add_option("--count", ba.count, "sample count (uniform)");
  base->add_option("--out", ba.out.path);
  base->add_option("--format", ba.out.format)
      ->check(CLI::IsMember({"json", "csv"}));

  TrainArgs ta;
  auto* tr = app.add_subcommand("train",
                                "train the residual embedding head on a "
                                "pair dataset directory");
  tr->add_option("--data", ta.data,
                 "directory with {train,dev}_{frames,sents}_{h,vs}.{emb,csv}")
      ->required();
  tr->add_option("--seed", ta.config.seed);
  tr->add_option("--margin", ta.config.margin);
  tr->add_option("--negatives", ta.config.negatives);
  tr->add_option("--epochs", ta.config.epochs);
  tr->add_option("--batch-size", ta.config.batch_size);
  tr->add_option("--lr", ta.config.learning_rate);
  tr->add_option("--hidden", ta.config.hidden_dim);
  tr->add_option("--checkpoint", ta.checkpoint, "checkpoint output path");
  tr->add_option("--out", ta.out.path);
  tr->add_option("--format", ta.out.format)
      ->check(CLI::IsMember({"json", "csv"}));

  SynthArgs ya;
  auto* syn = app.add_subcommand("synth",
                                 "generate a planted synthetic instance");
  syn->add_option("--frames-out", ya.frames_out)->required();
  syn->add_option("--sentences-out", ya.sentences_out)->required();
  syn->add_option("--gt-out", ya.gt_out);
  syn->add_option("--f", ya.config.frames);
  syn->add_option("--n", ya.config.sentences);
  syn->add_option("--dim", ya.config.dim);
  syn->add_option("--sigma", ya.config.sigma);
  syn->add_option("--seed", ya.config.seed);
  syn->add_option("--sample-interval", ya.sample_interval);
  syn->add_option("--emb-format", ya.format, "binary | csv")
      ->check(CLI::IsMember({"binary", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*k_opt) sa.k = k_value;
    if (*ck_opt) ca.k = ck_value;
    if (*ci_opt) ca.sample_interval = ci_value;
    if (sum->parsed()) return cmd_summarize(sa);
    if (cmp->parsed()) return cmd_compare_decoders(ca);
    if (eva->parsed()) return cmd_evaluate(ea);
    if (ret->parsed()) return cmd_retrieval_eval(ra);
    if (mmr->parsed()) return cmd_mmr(ma);
    if (base->parsed()) return cmd_baseline(ba);
    if (tr->parsed()) return cmd_train(ta);
    if (syn->parsed()) return cmd_synth(ya);
  } catch (const semsum::Error& e) {
    json err = {{"error", {{"code", e.code()}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err = {{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 1;
}
