#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "layerprobe/mds.hpp"

namespace layerprobe::cli {

struct CorpusConfig {
  std::filesystem::path input_dir;
  std::filesystem::path queries_file;
  std::filesystem::path output_dir;
  std::size_t window = 10;
};

struct AnalyzeConfig {
  std::filesystem::path bundle_dir;
  std::filesystem::path output_dir;
  std::vector<std::string> groupings;  // raw --grouping values; empty = defaults
  mds::Method mds_method = mds::Method::classical;
  bool mds_rescaled = false;
  mds::SmacofOptions smacof;
  double outlier_k = 3.5;
  std::optional<std::string> expect_model;
};

/// Writes samples.json and summary.csv. Throws layerprobe::Error subclasses.
void cmd_corpus(const CorpusConfig& config, std::ostream& out);

/// Writes gdv_curves.csv, gdv_curves_<model>.svg, mds_layer_NN.{csv,svg},
/// outliers.csv and run_manifest.json.
void cmd_analyze(const AnalyzeConfig& config, std::ostream& out);

/// Returns true iff all built-in checks pass.
bool cmd_selftest(std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace layerprobe::cli
