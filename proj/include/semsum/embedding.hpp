#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "semsum/error.hpp"

namespace semsum {

enum class EmbeddingKind { frame, sentence };
enum class EmbeddingFormat { binary, csv };

// Dense row-major matrix of item embeddings. Values are widened to double on
// load; the binary file format stores float32.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> data;  // rows * dim, row-major
  EmbeddingKind kind = EmbeddingKind::frame;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
};

namespace detail {

inline void validate_row(std::span<const double> r, std::size_t index) {
  bool all_zero = true;
  for (double v : r) {
    if (!std::isfinite(v)) {
      throw Error(errc::non_finite,
                  "non-finite value in row " + std::to_string(index));
    }
    if (v != 0.0) all_zero = false;
  }
  if (all_zero) {
    throw Error(errc::zero_row,
                "all-zero row " + std::to_string(index) +
                    " (cosine similarity undefined)");
  }
}

inline std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float read_f32_le(const unsigned char* p) {
  return std::bit_cast<float>(read_u32_le(p));
}

inline void write_u32_le(std::uint32_t v, std::ostream& os) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

// Validates invariants shared by loads and in-memory construction.
inline EmbeddingMatrix make_embeddings(std::size_t rows, std::size_t dim,
                                       std::vector<double> data,
                                       EmbeddingKind kind) {
  if (rows < 1 || dim < 1) {
    throw Error(errc::bad_format, "embedding matrix must have rows >= 1 and dim >= 1");
  }
  if (data.size() != rows * dim) {
    throw Error(errc::dim_mismatch,
                "data length " + std::to_string(data.size()) +
                    " does not match rows*dim = " + std::to_string(rows * dim));
  }
  EmbeddingMatrix m{rows, dim, std::move(data), kind};
  for (std::size_t i = 0; i < rows; ++i) detail::validate_row(m.row(i), i);
  return m;
}

// Binary format "EMB1": magic `EMB1`, u32 LE rows, u32 LE dim, then rows*dim
// float32 LE values, row-major.
inline EmbeddingMatrix load_embeddings_binary(const std::filesystem::path& path,
                                              EmbeddingKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "EMB1", 4) != 0) {
    throw Error(errc::bad_format, "malformed EMB1 header in " + path.string());
  }
  std::size_t rows = detail::read_u32_le(bytes.data() + 4);
  std::size_t dim = detail::read_u32_le(bytes.data() + 8);
  if (rows < 1 || dim < 1 || bytes.size() != 12 + 4 * rows * dim) {
    throw Error(errc::bad_format,
                "EMB1 payload size does not match header in " + path.string());
  }
  std::vector<double> data(rows * dim);
  for (std::size_t i = 0; i < rows * dim; ++i) {
    data[i] = static_cast<double>(detail::read_f32_le(bytes.data() + 12 + 4 * i));
  }
  return make_embeddings(rows, dim, std::move(data), kind);
}

// CSV: one row per line, comma-separated decimal floats, no header.
inline EmbeddingMatrix load_embeddings_csv(const std::filesystem::path& path,
                                           EmbeddingKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io, "cannot open " + path.string());
  std::vector<double> data;
  std::size_t rows = 0, dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t cols = 0, pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() &&
               std::isspace(static_cast<unsigned char>(cell[used]))) {
          ++used;
        }
        if (used != cell.size()) throw std::invalid_argument(cell);
        data.push_back(v);
      } catch (const std::exception&) {
        throw Error(errc::bad_format, "row " + std::to_string(rows) +
                                          ": cannot parse '" + cell + "'");
      }
      ++cols;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) {
      dim = cols;
    } else if (cols != dim) {
      throw Error(errc::dim_mismatch,
                  "row " + std::to_string(rows) + " has " +
                      std::to_string(cols) + " values, expected " +
                      std::to_string(dim));
    }
    ++rows;
  }
  if (rows == 0) throw Error(errc::bad_format, "empty CSV " + path.string());
  return make_embeddings(rows, dim, std::move(data), kind);
}

inline EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                       EmbeddingFormat format,
                                       EmbeddingKind kind = EmbeddingKind::frame) {
  return format == EmbeddingFormat::binary ? load_embeddings_binary(path, kind)
                                           : load_embeddings_csv(path, kind);
}

// Sniffs the EMB1 magic; anything else is treated as CSV.
inline EmbeddingMatrix load_embeddings_auto(const std::filesystem::path& path,
                                            EmbeddingKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  bool binary = in.gcount() == 4 && std::memcmp(magic, "EMB1", 4) == 0;
  return load_embeddings(
      path, binary ? EmbeddingFormat::binary : EmbeddingFormat::csv, kind);
}

inline void save_embeddings(const EmbeddingMatrix& m,
                            const std::filesystem::path& path,
                            EmbeddingFormat format = EmbeddingFormat::binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(errc::io, "cannot write " + path.string());
  if (format == EmbeddingFormat::binary) {
    out.write("EMB1", 4);
    detail::write_u32_le(static_cast<std::uint32_t>(m.rows), out);
    detail::write_u32_le(static_cast<std::uint32_t>(m.dim), out);
    for (double v : m.data) {
      detail::write_u32_le(std::bit_cast<std::uint32_t>(static_cast<float>(v)),
                           out);
    }
  } else {
    out.precision(17);
    for (std::size_t i = 0; i < m.rows; ++i) {
      for (std::size_t j = 0; j < m.dim; ++j) {
        if (j) out << ',';
        out << m.data[i * m.dim + j];
      }
      out << '\n';
    }
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double cosine_similarity(std::span<const double> a,
                                std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(errc::dim_mismatch, "cosine of vectors with different dims");
  }
  double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw Error(errc::zero_norm, "cosine of a zero-norm vector is undefined");
  }
  return dot(a, b) / (na * nb);
}

// F x N matrix of frame-sentence cosine scores.
struct CompatibilityMatrix {
  std::size_t frames = 0;
  std::size_t sentences = 0;
  std::vector<double> scores;  // frames * sentences, row-major (frame-major)

  double at(std::size_t frame, std::size_t sentence) const {
    return scores[frame * sentences + sentence];
  }
  double& at(std::size_t frame, std::size_t sentence) {
    return scores[frame * sentences + sentence];
  }
};

inline CompatibilityMatrix compatibility_matrix(const EmbeddingMatrix& frames,
                                                const EmbeddingMatrix& sentences) {
  if (frames.dim != sentences.dim) {
    throw Error(errc::dim_mismatch,
                "frame dim " + std::to_string(frames.dim) +
                    " != sentence dim " + std::to_string(sentences.dim));
  }
  CompatibilityMatrix S{frames.rows, sentences.rows, {}};
  S.scores.resize(frames.rows * sentences.rows);
  // Norms are hoisted; each is the same summation cosine_similarity performs,
  // so entries stay bitwise equal to per-pair cosine_similarity calls.
  std::vector<double> fn(frames.rows), sn(sentences.rows);
  for (std::size_t i = 0; i < frames.rows; ++i) fn[i] = norm(frames.row(i));
  for (std::size_t j = 0; j < sentences.rows; ++j) sn[j] = norm(sentences.row(j));
  for (std::size_t i = 0; i < frames.rows; ++i) {
    for (std::size_t j = 0; j < sentences.rows; ++j) {
      S.at(i, j) = dot(frames.row(i), sentences.row(j)) / (fn[i] * sn[j]);
    }
  }
  return S;
}

}  // namespace semsum
