#include "layerprobe/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "layerprobe/analysis.hpp"
#include "layerprobe/bundle.hpp"
#include "layerprobe/corpus.hpp"
#include "layerprobe/errors.hpp"
#include "layerprobe/report.hpp"
#include "layerprobe/selftest.hpp"

namespace layerprobe::cli {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

// Single-writer commit: write a sibling temp file, then rename over the
// target.
void commit_file(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_directory(dir, ec)) {
    throw IoError("output path exists and is not a directory: " + dir.string());
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string two_digit(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", index);
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<analysis::Grouping> resolve_groupings(const AnalyzeConfig& config,
                                                  const bundle::EmbeddingBundle& b) {
  std::vector<analysis::Grouping> out;
  auto add = [&](const analysis::Grouping& g) {
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  };
  if (config.groupings.empty()) {
    // Defaults skip groupings that cannot have two classes; explicit ones
    // are checked by the analysis and fail loudly.
    std::map<std::string, std::set<std::string>> constructions_of;
    for (const auto& s : b.samples) constructions_of[s.verb_category].insert(s.construction);
    add({analysis::Grouping::Kind::by_construction_all, {}});
    for (const auto& [cat, names] : constructions_of) {
      if (names.size() >= 2) add({analysis::Grouping::Kind::within_category, cat});
    }
    if (constructions_of.size() >= 2) add({analysis::Grouping::Kind::by_category, {}});
  } else {
    for (const auto& text : config.groupings) {
      for (const auto& g : analysis::parse_groupings(text)) add(g);
    }
  }
  return out;
}

}  // namespace

void cmd_corpus(const CorpusConfig& config, std::ostream& out) {
  if (!fs::is_directory(config.input_dir)) {
    throw IoError("input directory not found: " + config.input_dir.string());
  }
  const auto queries = corpus::parse_queries(read_text(config.queries_file));
  if (queries.empty()) throw InvalidQueryError("query file has no queries");
  prepare_output_dir(config.output_dir);

  std::set<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(config.input_dir, ec)) {
    if (entry.is_regular_file()) files.insert(entry.path());
  }
  if (ec) throw IoError("cannot list " + config.input_dir.string() + ": " + ec.message());

  std::vector<corpus::Sample> samples;
  for (const auto& path : files) {
    const auto stream = corpus::tokenize(read_text(path));
    auto found = corpus::extract_concordance(stream, queries, config.window,
                                             path.filename().string());
    samples.insert(samples.end(), std::make_move_iterator(found.begin()),
                   std::make_move_iterator(found.end()));
  }
  const auto summary = corpus::dataset_summary(samples);
  commit_file(config.output_dir / "samples.json", corpus::samples_to_json(samples));
  commit_file(config.output_dir / "summary.csv", corpus::summary_to_csv(summary));
  out << "corpus: " << files.size() << " file(s), " << summary.total << " sample(s) -> "
      << config.output_dir.string() << '\n';
}

void cmd_analyze(const AnalyzeConfig& config, std::ostream& out) {
  if (!fs::is_directory(config.bundle_dir)) {
    throw IoError("bundle directory not found: " + config.bundle_dir.string());
  }
  if (!(config.outlier_k >= 0.0)) throw ValidationError("--outlier-k must be >= 0");
  prepare_output_dir(config.output_dir);

  const auto b = bundle::read_bundle(config.bundle_dir);
  if (config.expect_model && *config.expect_model != b.model_id) {
    throw ValidationError("bundle model_id '" + b.model_id + "' does not match expected '" +
                          *config.expect_model + "'");
  }
  const auto groupings = resolve_groupings(config, b);

  std::vector<analysis::GdvCurve> curves;
  for (const auto& g : groupings) curves.push_back(analysis::per_layer_gdv(b, g));

  std::vector<analysis::OutlierFlags> flags;
  std::map<int, std::vector<bool>> flagged_rows;
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < b.samples.size(); ++i) row_of[b.samples[i].id] = i;
  for (int layer : b.layer_indices()) {
    auto& rows = flagged_rows[layer];
    rows.assign(b.samples.size(), false);
    for (const auto& g : groupings) {
      flags.push_back(analysis::flag_outliers(b, layer, g, config.outlier_k));
      for (const auto& r : flags.back().records) {
        if (r.flagged) rows[row_of.at(r.sample_id)] = true;
      }
    }
  }

  analysis::ProjectionOptions projection;
  projection.method = config.mds_method;
  projection.rescale_first = config.mds_rescaled;
  projection.smacof = config.smacof;

  std::vector<std::string> written;
  auto emit = [&](const std::string& name, std::string_view content) {
    commit_file(config.output_dir / name, content);
    written.push_back(name);
  };

  emit("gdv_curves.csv", analysis::gdv_curves_csv(curves));
  report::PlotSpec curve_spec{"GDV across layers (" + b.model_id + ")", "layer", "GDV"};
  emit("gdv_curves_" + report::file_safe(b.model_id) + ".svg",
       report::emit_curve_svg(curves, curve_spec));

  for (int layer : b.layer_indices()) {
    const auto p = analysis::per_layer_mds(b, layer, projection);
    const std::string stem = "mds_layer_" + two_digit(layer);
    emit(stem + ".csv", analysis::mds_csv(p));
    report::PlotSpec spec{b.model_id + " layer " + std::to_string(layer) + " (" +
                              std::string(mds::to_string(config.mds_method)) + " MDS)",
                          "MDS 1", "MDS 2"};
    emit(stem + ".svg",
         report::emit_scatter_svg(report::scatter_points(p, flagged_rows[layer]), spec));
  }
  emit("outliers.csv", analysis::outliers_csv(flags));

  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : groupings) groups.push_back(g.name());
  nlohmann::json manifest = {
      {"tool", "layerprobe"},
      {"version", LAYERPROBE_VERSION},
      {"command", "analyze"},
      {"created_utc", utc_timestamp()},
      {"config",
       {{"bundle", config.bundle_dir.string()},
        {"out", config.output_dir.string()},
        {"groupings", groups},
        {"mds", std::string(mds::to_string(config.mds_method))},
        {"mds_rescaled", config.mds_rescaled},
        {"smacof_max_iter", config.smacof.max_iter},
        {"smacof_tol", config.smacof.tol},
        {"outlier_k", config.outlier_k},
        {"expect_model", config.expect_model ? nlohmann::json(*config.expect_model)
                                             : nlohmann::json(nullptr)}}},
      {"bundle",
       {{"checksum_fnv1a64", bundle::checksum(config.bundle_dir)},
        {"model_id", b.model_id},
        {"num_layers", b.num_layers()},
        {"num_samples", b.num_samples()},
        {"hidden_dim", b.hidden_dim},
        {"includes_embedding_layer", b.includes_embedding_layer}}},
      {"outputs", written},
  };
  commit_file(config.output_dir / "run_manifest.json", manifest.dump(2) + "\n");

  out << "analyze: " << b.num_samples() << " samples x " << b.num_layers() << " layers, "
      << groupings.size() << " grouping(s) -> " << config.output_dir.string() << '\n';
  for (const auto& c : curves) {
    out << "  " << c.grouping.name() << ": strongest separation at layer "
        << c.argmin_layer() << '\n';
  }
}

bool cmd_selftest(std::ostream& out) {
  return selftest::run_checks(selftest::builtin_checks(), out);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layer-wise separability analysis of verb-particle construction embeddings",
               "layerprobe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LAYERPROBE_VERSION);

  CorpusConfig corpus_config;
  auto* corpus_cmd = app.add_subcommand("corpus", "Extract construction samples from text");
  corpus_cmd->add_option("--in", corpus_config.input_dir, "Directory of UTF-8 text files")
      ->required();
  corpus_cmd->add_option("--queries", corpus_config.queries_file,
                         "Query file: verb<TAB>particle[<TAB>forms]")
      ->required();
  corpus_cmd->add_option("--window", corpus_config.window, "Context tokens on each side")
      ->capture_default_str();
  corpus_cmd->add_option("--out", corpus_config.output_dir, "Output directory")->required();

  AnalyzeConfig analyze_config;
  std::string method = "classical";
  std::string expect_model;
  auto* analyze_cmd = app.add_subcommand("analyze", "GDV curves, MDS plots and outliers");
  analyze_cmd->add_option("--bundle", analyze_config.bundle_dir, "Embedding bundle directory")
      ->required();
  analyze_cmd->add_option("--grouping", analyze_config.groupings,
                          "all | by_category | within_category:<c>[,<c>] (repeatable)");
  analyze_cmd->add_option("--mds", method, "classical | smacof")
      ->check(CLI::IsMember({"classical", "smacof"}))
      ->capture_default_str();
  analyze_cmd->add_flag("--mds-rescaled", analyze_config.mds_rescaled,
                        "Project half-z-scored vectors instead of raw ones");
  analyze_cmd->add_option("--smacof-max-iter", analyze_config.smacof.max_iter)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze_cmd->add_option("--smacof-tol", analyze_config.smacof.tol)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze_cmd->add_option("--outlier-k", analyze_config.outlier_k, "MAD multiplier")
      ->capture_default_str();
  analyze_cmd->add_option("--expect-model", expect_model,
                          "Fail unless the bundle's model_id matches");
  analyze_cmd->add_option("--out", analyze_config.output_dir, "Report directory")->required();

  auto* selftest_cmd = app.add_subcommand("selftest", "Run built-in known-answer checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << LAYERPROBE_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::validation);
  }

  try {
    if (*corpus_cmd) {
      cmd_corpus(corpus_config, out);
    } else if (*analyze_cmd) {
      analyze_config.mds_method = method == "smacof" ? mds::Method::smacof : mds::Method::classical;
      if (!expect_model.empty()) analyze_config.expect_model = expect_model;
      cmd_analyze(analyze_config, out);
    } else if (*selftest_cmd) {
      return cmd_selftest(out) ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::io);
  }
  return 0;
}

}  // namespace layerprobe::cli
