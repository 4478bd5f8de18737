#pragma once

// Construction-sample extraction from plain text: cleaning, keyword-in-context
// windows around "verb particle" pairs, and per-construction summaries.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace layerprobe::corpus {

enum class VerbCategory { agree, come, give };

std::string_view to_string(VerbCategory category);
std::optional<VerbCategory> parse_verb_category(std::string_view text);

/// One of the eleven verb + particle constructions under study.
class ConstructionLabel {
 public:
  /// Throws ValidationError unless (category, particle) is a known pair.
  ConstructionLabel(VerbCategory category, std::string_view particle);

  /// Parses a canonical name such as "give_up".
  static std::optional<ConstructionLabel> parse(std::string_view canonical);
  static ConstructionLabel from_strings(std::string_view category,
                                        std::string_view particle);

  VerbCategory verb_category() const noexcept { return category_; }
  const std::string& particle() const noexcept { return particle_; }
  std::string name() const;

  friend bool operator==(const ConstructionLabel&,
                         const ConstructionLabel&) = default;

 private:
  VerbCategory category_;
  std::string particle_;
};

/// Canonical construction names in lexicographic order. This order drives
/// summary rows and the plot palette.
const std::array<std::string_view, 11>& known_constructions();
bool is_known_construction(std::string_view canonical);

struct Sample {
  std::string id;
  std::string raw_text;
  std::string clean_text;
  ConstructionLabel label;
  std::size_t target_token_index = 0;
  std::size_t particle_token_index = 0;
  std::size_t context_before = 0;
  std::size_t context_after = 0;
};

struct Query {
  ConstructionLabel label;
  // Surface forms of the verb that count as a match (already lowercase).
  std::vector<std::string> verb_forms;
};

struct DatasetSummary {
  // One entry per known construction, in known_constructions() order.
  std::array<std::size_t, 11> counts{};
  std::size_t total = 0;

  std::size_t count(std::string_view construction) const;
};

/// Removes ASCII punctuation, trims, collapses whitespace runs to one space
/// and lowercases ASCII letters. Idempotent. Non-ASCII bytes pass through.
std::string clean_sentence(std::string_view raw);

/// Whitespace tokenization of a document. Tokens whose cleaned form is empty
/// (pure punctuation) are dropped so that positions refer to the cleaned
/// token sequence.
struct TokenStream {
  std::vector<std::string> raw;
  std::vector<std::string> clean;
};
TokenStream tokenize(std::string_view text);

/// One Sample per adjacent (verb form, particle) occurrence, in stream order.
/// `source` prefixes the sample ids ("<source>:<verb position>").
std::vector<Sample> extract_concordance(const TokenStream& stream,
                                        std::span<const Query> queries,
                                        std::size_t window = 10,
                                        std::string_view source = "stream");

/// Convenience overload over raw whitespace tokens.
std::vector<Sample> extract_concordance(std::span<const std::string> tokens,
                                        const Query& query,
                                        std::size_t window = 10,
                                        std::string_view source = "stream");

DatasetSummary dataset_summary(std::span<const Sample> samples);

/// Per-construction counts of the reference dataset; its total is their sum.
DatasetSummary reference_profile();

/// Parses "verb<TAB>particle[<TAB>form,form,...]" lines. Blank lines and
/// lines starting with '#' are ignored.
std::vector<Query> parse_queries(std::string_view text);

nlohmann::json to_json(const Sample& sample);
Sample sample_from_json(const nlohmann::json& j);
std::string samples_to_json(std::span<const Sample> samples);
std::vector<Sample> samples_from_json(std::string_view text);

/// "construction,count" rows for all known constructions plus "total".
std::string summary_to_csv(const DatasetSummary& summary);

}  // namespace layerprobe::corpus
