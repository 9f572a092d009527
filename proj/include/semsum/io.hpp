#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semsum/error.hpp"
#include "semsum/metrics.hpp"
#include "semsum/trainer.hpp"

namespace semsum {

// Ground-truth summaries: a shared segment grid plus one segment list per
// reference annotator.
struct GroundTruth {
  std::size_t grid = 0;
  double sample_interval = 5.0;  // seconds per grid cell
  std::vector<SegmentList> references;
};

inline nlohmann::json to_json(const GroundTruth& gt) {
  nlohmann::json j;
  j["grid"] = gt.grid;
  j["sample_interval"] = gt.sample_interval;
  auto& refs = j["references"] = nlohmann::json::array();
  for (const auto& r : gt.references) refs.push_back(r.segments);
  return j;
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  try {
    gt.grid = j.at("grid").get<std::size_t>();
    if (j.contains("sample_interval")) {
      gt.sample_interval = j.at("sample_interval").get<double>();
    }
    for (const auto& r : j.at("references")) {
      SegmentList s;
      s.grid = gt.grid;
      s.segments = r.get<std::vector<std::size_t>>();
      for (std::size_t idx : s.segments) {
        if (idx >= gt.grid) {
          throw Error(errc::out_of_range, "segment index outside grid");
        }
      }
      gt.references.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::bad_format, std::string("ground truth json: ") + e.what());
  }
  if (gt.grid == 0 || gt.references.empty()) {
    throw Error(errc::bad_format, "ground truth needs grid > 0 and references");
  }
  return gt;
}

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::bad_format, path.string() + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const nlohmann::json& j,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline GroundTruth load_ground_truth(const std::filesystem::path& path) {
  return ground_truth_from_json(load_json_file(path));
}

// Predicted segments: either {"segments": [...]} or a summary report whose
// "path" holds the selected frame indices (frames live on the segment grid).
inline SegmentList load_predicted_segments(const std::filesystem::path& path,
                                           std::size_t grid) {
  nlohmann::json j = load_json_file(path);
  SegmentList s;
  s.grid = grid;
  try {
    if (j.contains("segments")) {
      s.segments = j.at("segments").get<std::vector<std::size_t>>();
    } else if (j.contains("path")) {
      s.segments = j.at("path").get<std::vector<std::size_t>>();
    } else {
      throw Error(errc::bad_format,
                  path.string() + ": expected 'segments' or 'path'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::bad_format, path.string() + ": " + e.what());
  }
  return s;
}

namespace detail {

inline nlohmann::json branch_to_json(const ResidualBranch& b) {
  return {{"in_dim", b.in_dim},   {"hidden_dim", b.hidden_dim},
          {"out_dim", b.out_dim}, {"W1", b.W1},
          {"b1", b.b1},           {"W2", b.W2},
          {"b2", b.b2},           {"alpha", b.alpha}};
}

inline ResidualBranch branch_from_json(const nlohmann::json& j) {
  ResidualBranch b;
  b.in_dim = j.at("in_dim").get<std::size_t>();
  b.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  b.out_dim = j.at("out_dim").get<std::size_t>();
  b.W1 = j.at("W1").get<std::vector<double>>();
  b.b1 = j.at("b1").get<std::vector<double>>();
  b.W2 = j.at("W2").get<std::vector<double>>();
  b.b2 = j.at("b2").get<std::vector<double>>();
  b.alpha = j.at("alpha").get<double>();
  if (b.W1.size() != b.hidden_dim * b.in_dim || b.b1.size() != b.hidden_dim ||
      b.W2.size() != b.out_dim * b.hidden_dim || b.b2.size() != b.out_dim) {
    throw Error(errc::bad_format, "checkpoint parameter shapes inconsistent");
  }
  return b;
}

}  // namespace detail

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"margin", c.margin},
          {"negatives", c.negatives},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"seed", c.seed},
          {"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim}};
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.margin = j.at("margin").get<double>();
  c.negatives = j.at("negatives").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  return c;
}

// Human-diffable checkpoint: dims, flattened parameters in decimal, alpha,
// the training config, and the RNG seed.
inline void save_checkpoint(const ResidualHead& head, const TrainConfig& config,
                            const std::filesystem::path& path) {
  nlohmann::json j;
  j["frame"] = detail::branch_to_json(head.frame);
  j["sentence"] = detail::branch_to_json(head.sentence);
  j["config"] = config_to_json(config);
  j["seed"] = config.seed;
  save_json_file(j, path);
}

struct Checkpoint {
  ResidualHead head;
  TrainConfig config;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j = load_json_file(path);
  Checkpoint c;
  try {
    c.head.frame = detail::branch_from_json(j.at("frame"));
    c.head.sentence = detail::branch_from_json(j.at("sentence"));
    c.config = config_from_json(j.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::bad_format, path.string() + ": " + e.what());
  }
  return c;
}

}  // namespace semsum
