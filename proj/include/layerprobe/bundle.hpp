#pragma once

// Portable per-layer embedding container.
//
// On disk a bundle is a directory:
//   meta.json              model id, shapes, sample metadata
//   layers/layer_NN.f32    raw little-endian float32, row-major
//                          [num_samples x hidden_dim], no header
//
// NN starts at 00 when the token-embedding output is stored as layer 0,
// otherwise at 01 (first transformer block).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "layerprobe/errors.hpp"

namespace layerprobe::bundle {

inline constexpr int kFormatVersion = 1;

using LayerMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SubwordSpan {
  std::int64_t start = 0;
  std::int64_t end = 0;  // exclusive
  friend bool operator==(const SubwordSpan&, const SubwordSpan&) = default;
};

struct BundleSample {
  std::string id;
  std::string clean_text;
  std::string construction;
  std::string verb_category;
  SubwordSpan subword_span;
  friend bool operator==(const BundleSample&, const BundleSample&) = default;
};

struct EmbeddingBundle {
  std::string model_id;
  std::int64_t hidden_dim = 0;
  bool includes_embedding_layer = false;
  std::vector<BundleSample> samples;
  std::vector<LayerMatrix> layers;

  std::int64_t num_layers() const {
    return static_cast<std::int64_t>(layers.size());
  }
  std::int64_t num_samples() const {
    return static_cast<std::int64_t>(samples.size());
  }
  int first_layer_index() const { return includes_embedding_layer ? 0 : 1; }
  int last_layer_index() const {
    return first_layer_index() + static_cast<int>(layers.size()) - 1;
  }
  std::vector<int> layer_indices() const;

  /// Matrix for a layer index as numbered on disk. Throws ValidationError
  /// when the index is out of range.
  const LayerMatrix& layer(int index) const;
};

enum class Fault {
  missing_file,
  invalid_metadata,
  missing_layer,
  shape_mismatch,
  non_finite,
  duplicate_id,
  invalid_construction,
  invalid_span,
  io,
};

std::string_view to_string(Fault fault);

struct Violation {
  Fault fault;
  std::string message;
  std::optional<int> layer;
  std::optional<std::int64_t> row;
  std::optional<std::int64_t> col;
  std::optional<std::string> sample_id;
};

using ValidationReport = std::vector<Violation>;

/// Every violated invariant, with coordinates. Empty iff the bundle is valid.
ValidationReport validate_bundle(const EmbeddingBundle& bundle);

std::string format_report(const ValidationReport& report);

class BundleError : public Error {
 public:
  BundleError(Fault fault, const std::string& what);
  BundleError(ValidationReport report);

  Fault fault() const noexcept { return fault_; }
  const ValidationReport& report() const noexcept { return report_; }

 private:
  Fault fault_;
  ValidationReport report_;
};

/// Validates, writes into a sibling temporary directory and renames it into
/// place. `dir` must not exist or be an empty directory.
void write_bundle(const EmbeddingBundle& bundle,
                  const std::filesystem::path& dir);

EmbeddingBundle read_bundle(const std::filesystem::path& dir);

std::string layer_file_name(int index);

/// Copy holding only the given sample rows (in the given order) of every
/// layer.
EmbeddingBundle select_rows(const EmbeddingBundle& bundle,
                            const std::vector<std::int64_t>& rows);

/// FNV-1a 64 over meta.json and the layer files in index order, as hex.
std::string checksum(const std::filesystem::path& dir);

}  // namespace layerprobe::bundle
