#include "layerprobe/bundle.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <span>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "layerprobe/corpus.hpp"

namespace layerprobe::bundle {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ExitCode exit_code_for(Fault fault) {
  return (fault == Fault::missing_file || fault == Fault::io) ? ExitCode::io
                                                              : ExitCode::validation;
}

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0x000000ffu) << 24) | ((v & 0x0000ff00u) << 8) |
         ((v & 0x00ff0000u) >> 8) | ((v & 0xff000000u) >> 24);
}

// Converts between host floats and the little-endian file representation in
// place. A no-op on little-endian hosts.
void to_from_little_endian(std::span<char> bytes) {
  if constexpr (std::endian::native == std::endian::little) {
    (void)bytes;
  } else {
    for (std::size_t i = 0; i + 4 <= bytes.size(); i += 4) {
      std::uint32_t v;
      std::memcpy(&v, bytes.data() + i, 4);
      v = byteswap32(v);
      std::memcpy(bytes.data() + i, &v, 4);
    }
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError(Fault::missing_file, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw BundleError(Fault::io, "failed writing " + path.string());
}

json meta_json(const EmbeddingBundle& b) {
  json samples = json::array();
  for (const auto& s : b.samples) {
    samples.push_back({{"id", s.id},
                       {"clean_text", s.clean_text},
                       {"construction", s.construction},
                       {"verb_category", s.verb_category},
                       {"subword_span", {s.subword_span.start, s.subword_span.end}}});
  }
  return {{"format_version", kFormatVersion},
          {"model_id", b.model_id},
          {"num_layers", b.num_layers()},
          {"hidden_dim", b.hidden_dim},
          {"includes_embedding_layer", b.includes_embedding_layer},
          {"samples", std::move(samples)}};
}

fs::path temp_sibling(const fs::path& dir) {
  static std::atomic<unsigned> counter{0};
  auto name = dir.filename().string() + ".tmp-" + std::to_string(::getpid()) +
              "-" + std::to_string(counter++);
  return dir.parent_path() / name;
}

}  // namespace

std::vector<int> EmbeddingBundle::layer_indices() const {
  std::vector<int> out;
  for (int i = first_layer_index(); i <= last_layer_index(); ++i) out.push_back(i);
  return out;
}

const LayerMatrix& EmbeddingBundle::layer(int index) const {
  if (index < first_layer_index() || index > last_layer_index()) {
    throw ValidationError("layer " + std::to_string(index) +
                          " not in bundle (layers " +
                          std::to_string(first_layer_index()) + ".." +
                          std::to_string(last_layer_index()) + ")");
  }
  return layers[static_cast<std::size_t>(index - first_layer_index())];
}

std::string_view to_string(Fault fault) {
  switch (fault) {
    case Fault::missing_file: return "missing_file";
    case Fault::invalid_metadata: return "invalid_metadata";
    case Fault::missing_layer: return "missing_layer";
    case Fault::shape_mismatch: return "shape_mismatch";
    case Fault::non_finite: return "non_finite";
    case Fault::duplicate_id: return "duplicate_id";
    case Fault::invalid_construction: return "invalid_construction";
    case Fault::invalid_span: return "invalid_span";
    case Fault::io: return "io";
  }
  return "?";
}

BundleError::BundleError(Fault fault, const std::string& what)
    : Error(exit_code_for(fault), what), fault_(fault) {
  report_.push_back({fault, what, {}, {}, {}, {}});
}

BundleError::BundleError(ValidationReport report)
    : Error(report.empty() ? ExitCode::validation : exit_code_for(report.front().fault),
            "invalid bundle:\n" + format_report(report)),
      fault_(report.empty() ? Fault::invalid_metadata : report.front().fault),
      report_(std::move(report)) {}

ValidationReport validate_bundle(const EmbeddingBundle& b) {
  ValidationReport report;
  if (b.model_id.empty()) {
    report.push_back({Fault::invalid_metadata, "model_id is empty", {}, {}, {}, {}});
  }
  if (b.hidden_dim < 1) {
    report.push_back({Fault::invalid_metadata, "hidden_dim must be >= 1", {}, {}, {}, {}});
  }
  if (b.layers.empty()) {
    report.push_back({Fault::invalid_metadata, "num_layers must be >= 1", {}, {}, {}, {}});
  }

  std::set<std::string> seen;
  for (const auto& s : b.samples) {
    if (!seen.insert(s.id).second) {
      report.push_back({Fault::duplicate_id, "duplicate sample id '" + s.id + "'",
                        {}, {}, {}, s.id});
    }
    auto label = corpus::ConstructionLabel::parse(s.construction);
    if (!label) {
      report.push_back({Fault::invalid_construction,
                        "sample '" + s.id + "': unknown construction '" +
                            s.construction + "'",
                        {}, {}, {}, s.id});
    } else if (corpus::to_string(label->verb_category()) != s.verb_category) {
      report.push_back({Fault::invalid_construction,
                        "sample '" + s.id + "': verb_category '" +
                            s.verb_category + "' does not match construction '" +
                            s.construction + "'",
                        {}, {}, {}, s.id});
    }
    if (s.subword_span.start < 0 || s.subword_span.end <= s.subword_span.start) {
      report.push_back({Fault::invalid_span,
                        "sample '" + s.id + "': subword_span must satisfy 0 <= start < end",
                        {}, {}, {}, s.id});
    }
  }

  for (std::size_t li = 0; li < b.layers.size(); ++li) {
    const int index = b.first_layer_index() + static_cast<int>(li);
    const auto& m = b.layers[li];
    if (m.rows() != b.num_samples() || m.cols() != b.hidden_dim) {
      report.push_back({Fault::shape_mismatch,
                        "layer " + std::to_string(index) + ": shape " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(b.num_samples()) + "x" +
                            std::to_string(b.hidden_dim),
                        index, {}, {}, {}});
      continue;
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (!std::isfinite(m(r, c))) {
          report.push_back({Fault::non_finite,
                            "layer " + std::to_string(index) + ", row " +
                                std::to_string(r) + ", col " + std::to_string(c) +
                                ": non-finite value",
                            index, r, c, b.samples[static_cast<std::size_t>(r)].id});
        }
      }
    }
  }
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::string out;
  for (const auto& v : report) {
    out += "  [";
    out += to_string(v.fault);
    out += "] ";
    out += v.message;
    out += '\n';
  }
  return out;
}

std::string layer_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "layer_%02d.f32", index);
  return buf;
}

void write_bundle(const EmbeddingBundle& b, const fs::path& dir) {
  if (auto report = validate_bundle(b); !report.empty()) {
    throw BundleError(std::move(report));
  }
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir) || !fs::is_empty(dir)) {
      throw BundleError(Fault::io, "refusing to overwrite non-empty " + dir.string());
    }
  }
  if (!dir.parent_path().empty()) fs::create_directories(dir.parent_path(), ec);

  const fs::path tmp = temp_sibling(dir);
  try {
    fs::create_directories(tmp / "layers");
    write_file(tmp / "meta.json", meta_json(b).dump(2) + "\n");
    for (int index : b.layer_indices()) {
      const auto& m = b.layer(index);
      std::string bytes(static_cast<std::size_t>(m.size()) * sizeof(float), '\0');
      std::memcpy(bytes.data(), m.data(), bytes.size());
      to_from_little_endian(bytes);
      write_file(tmp / "layers" / layer_file_name(index), bytes);
    }
    if (fs::exists(dir)) fs::remove(dir);
    fs::rename(tmp, dir);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw BundleError(Fault::io, e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
}

EmbeddingBundle read_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw BundleError(Fault::missing_file, "bundle directory not found: " + dir.string());
  }
  const fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path)) {
    throw BundleError(Fault::missing_file, "missing " + meta_path.string());
  }

  EmbeddingBundle b;
  std::int64_t num_layers = 0;
  try {
    json meta = json::parse(read_file(meta_path));
    const auto version = meta.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw BundleError(Fault::invalid_metadata,
                        "unsupported format_version " + std::to_string(version));
    }
    b.model_id = meta.at("model_id").get<std::string>();
    num_layers = meta.at("num_layers").get<std::int64_t>();
    b.hidden_dim = meta.at("hidden_dim").get<std::int64_t>();
    b.includes_embedding_layer = meta.at("includes_embedding_layer").get<bool>();
    for (const auto& s : meta.at("samples")) {
      const auto& span = s.at("subword_span");
      if (!span.is_array() || span.size() != 2) {
        throw BundleError(Fault::invalid_metadata,
                          "subword_span must be a [start, end) pair");
      }
      b.samples.push_back({s.at("id").get<std::string>(),
                           s.at("clean_text").get<std::string>(),
                           s.at("construction").get<std::string>(),
                           s.at("verb_category").get<std::string>(),
                           {span[0].get<std::int64_t>(), span[1].get<std::int64_t>()}});
    }
  } catch (const json::exception& e) {
    throw BundleError(Fault::invalid_metadata,
                      "malformed " + meta_path.string() + ": " + e.what());
  }
  if (num_layers < 1 || b.hidden_dim < 1) {
    throw BundleError(Fault::invalid_metadata,
                      "num_layers and hidden_dim must be >= 1");
  }

  const std::size_t expected_bytes =
      static_cast<std::size_t>(b.num_samples()) *
      static_cast<std::size_t>(b.hidden_dim) * sizeof(float);
  const int first = b.first_layer_index();
  for (int index = first; index < first + num_layers; ++index) {
    const fs::path path = dir / "layers" / layer_file_name(index);
    if (!fs::exists(path)) {
      throw BundleError(Fault::missing_layer,
                        "layer " + std::to_string(index) + ": missing " + path.string());
    }
    std::string bytes = read_file(path);
    if (bytes.size() != expected_bytes) {
      throw BundleError(Fault::shape_mismatch,
                        "layer " + std::to_string(index) + ": " + path.string() +
                            " has " + std::to_string(bytes.size()) + " bytes, expected " +
                            std::to_string(expected_bytes));
    }
    to_from_little_endian(bytes);
    LayerMatrix m(b.num_samples(), b.hidden_dim);
    std::memcpy(m.data(), bytes.data(), bytes.size());
    b.layers.push_back(std::move(m));
  }

  if (auto report = validate_bundle(b); !report.empty()) {
    throw BundleError(std::move(report));
  }
  return b;
}

EmbeddingBundle select_rows(const EmbeddingBundle& b,
                            const std::vector<std::int64_t>& rows) {
  EmbeddingBundle out;
  out.model_id = b.model_id;
  out.hidden_dim = b.hidden_dim;
  out.includes_embedding_layer = b.includes_embedding_layer;
  for (auto r : rows) out.samples.push_back(b.samples.at(static_cast<std::size_t>(r)));
  for (const auto& m : b.layers) {
    LayerMatrix sub(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sub.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    out.layers.push_back(std::move(sub));
  }
  return out;
}

std::string checksum(const fs::path& dir) {
  std::uint64_t hash = 1469598103934665603ull;
  auto feed = [&](const fs::path& path) {
    for (unsigned char c : read_file(path)) {
      hash ^= c;
      hash *= 1099511628211ull;
    }
  };
  feed(dir / "meta.json");
  std::set<fs::path> layer_files;
  for (const auto& entry : fs::directory_iterator(dir / "layers")) {
    layer_files.insert(entry.path());
  }
  for (const auto& path : layer_files) feed(path);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace layerprobe::bundle
