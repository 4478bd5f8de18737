#include "layerprobe/corpus.hpp"

#include <algorithm>
#include <sstream>

#include "layerprobe/errors.hpp"

namespace layerprobe::corpus {

namespace {

constexpr std::array<std::string_view, 11> kConstructions = {
    "agree_on",  "agree_that", "agree_to", "agree_with",
    "come_back", "come_in",    "come_out", "give_away",
    "give_in",   "give_out",   "give_up",
};

// Python's string.punctuation, i.e. every printable ASCII symbol.
constexpr std::string_view kPunctuation =
    "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

bool is_punct(char c) { return kPunctuation.find(c) != std::string_view::npos; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

char to_lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string_view to_string(VerbCategory category) {
  switch (category) {
    case VerbCategory::agree: return "agree";
    case VerbCategory::come: return "come";
    case VerbCategory::give: return "give";
  }
  return "?";
}

std::optional<VerbCategory> parse_verb_category(std::string_view text) {
  if (text == "agree") return VerbCategory::agree;
  if (text == "come") return VerbCategory::come;
  if (text == "give") return VerbCategory::give;
  return std::nullopt;
}

ConstructionLabel::ConstructionLabel(VerbCategory category,
                                     std::string_view particle)
    : category_(category), particle_(particle) {
  if (!is_known_construction(name())) {
    throw ValidationError("unknown construction '" + name() + "'");
  }
}

std::optional<ConstructionLabel> ConstructionLabel::parse(
    std::string_view canonical) {
  if (!is_known_construction(canonical)) return std::nullopt;
  auto sep = canonical.find('_');
  return ConstructionLabel(*parse_verb_category(canonical.substr(0, sep)),
                           canonical.substr(sep + 1));
}

ConstructionLabel ConstructionLabel::from_strings(std::string_view category,
                                                  std::string_view particle) {
  auto cat = parse_verb_category(category);
  if (!cat) {
    throw ValidationError("unknown verb category '" + std::string(category) +
                          "'");
  }
  return ConstructionLabel(*cat, particle);
}

std::string ConstructionLabel::name() const {
  return std::string(to_string(category_)) + "_" + particle_;
}

const std::array<std::string_view, 11>& known_constructions() {
  return kConstructions;
}

bool is_known_construction(std::string_view canonical) {
  return std::find(kConstructions.begin(), kConstructions.end(), canonical) !=
         kConstructions.end();
}

std::size_t DatasetSummary::count(std::string_view construction) const {
  auto it = std::find(kConstructions.begin(), kConstructions.end(),
                      construction);
  return it == kConstructions.end() ? 0 : counts[it - kConstructions.begin()];
}

std::string clean_sentence(std::string_view raw) {
  // punctuation -> trim -> collapse -> lowercase; the last three fuse into a
  // single pass over the punctuation-free text.
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_punct(c)) continue;
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(to_lower_ascii(c));
  }
  return out;
}

TokenStream tokenize(std::string_view text) {
  TokenStream stream;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i == start) break;
    std::string_view token = text.substr(start, i - start);
    std::string clean = clean_sentence(token);
    if (clean.empty()) continue;
    stream.raw.emplace_back(token);
    stream.clean.push_back(std::move(clean));
  }
  return stream;
}

std::vector<Sample> extract_concordance(const TokenStream& stream,
                                        std::span<const Query> queries,
                                        std::size_t window,
                                        std::string_view source) {
  for (const auto& q : queries) {
    if (q.verb_forms.empty()) {
      throw InvalidQueryError("query for '" + q.label.name() +
                              "' has no verb forms");
    }
  }
  const auto& clean = stream.clean;
  const std::size_t n = clean.size();
  std::vector<Sample> samples;
  for (std::size_t pos = 0; pos + 1 < n; ++pos) {
    for (const auto& q : queries) {
      if (clean[pos + 1] != q.label.particle()) continue;
      if (std::find(q.verb_forms.begin(), q.verb_forms.end(), clean[pos]) ==
          q.verb_forms.end()) {
        continue;
      }
      const std::size_t first = pos >= window ? pos - window : 0;
      const std::size_t last = std::min(n, pos + 2 + window);  // exclusive
      std::span<const std::string> raw_window(stream.raw.data() + first,
                                              last - first);
      std::string raw_text = join(raw_window);
      std::string clean_text = clean_sentence(raw_text);
      samples.push_back(Sample{
          .id = std::string(source) + ":" + std::to_string(pos),
          .raw_text = std::move(raw_text),
          .clean_text = std::move(clean_text),
          .label = q.label,
          .target_token_index = pos - first,
          .particle_token_index = pos - first + 1,
          .context_before = pos - first,
          .context_after = last - (pos + 2),
      });
    }
  }
  return samples;
}

std::vector<Sample> extract_concordance(std::span<const std::string> tokens,
                                        const Query& query, std::size_t window,
                                        std::string_view source) {
  TokenStream stream;
  for (const auto& t : tokens) {
    std::string clean = clean_sentence(t);
    if (clean.empty()) continue;
    stream.raw.push_back(t);
    stream.clean.push_back(std::move(clean));
  }
  return extract_concordance(stream, std::span<const Query>(&query, 1), window,
                             source);
}

DatasetSummary dataset_summary(std::span<const Sample> samples) {
  DatasetSummary summary;
  for (const auto& s : samples) {
    auto name = s.label.name();
    auto it = std::find(kConstructions.begin(), kConstructions.end(), name);
    ++summary.counts[it - kConstructions.begin()];
    ++summary.total;
  }
  return summary;
}

DatasetSummary reference_profile() {
  DatasetSummary summary;
  const std::pair<std::string_view, std::size_t> reported[] = {
      {"agree_on", 100}, {"agree_to", 100}, {"agree_that", 100},
      {"agree_with", 100}, {"come_back", 99}, {"come_in", 99},
      {"come_out", 99},  {"give_in", 99},   {"give_out", 93},
      {"give_up", 100},  {"give_away", 100},
  };
  for (auto [name, count] : reported) {
    auto it = std::find(kConstructions.begin(), kConstructions.end(), name);
    summary.counts[it - kConstructions.begin()] = count;
    summary.total += count;
  }
  return summary;
}

std::vector<Query> parse_queries(std::string_view text) {
  std::vector<Query> queries;
  std::size_t line_no = 0;
  for (auto line : split_on(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_on(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw InvalidQueryError("query line " + std::to_string(line_no) +
                              ": expected verb<TAB>particle[<TAB>forms]");
    }
    std::string verb = clean_sentence(fields[0]);
    std::string particle = clean_sentence(fields[1]);
    auto category = parse_verb_category(verb);
    if (!category || !is_known_construction(verb + "_" + particle)) {
      throw InvalidQueryError("query line " + std::to_string(line_no) +
                              ": unknown construction '" + verb + " " +
                              particle + "'");
    }
    Query q{ConstructionLabel(*category, particle), {verb}};
    if (fields.size() == 3) {
      for (auto form : split_on(fields[2], ',')) {
        std::string f = clean_sentence(form);
        if (f.empty()) continue;
        if (std::find(q.verb_forms.begin(), q.verb_forms.end(), f) ==
            q.verb_forms.end()) {
          q.verb_forms.push_back(std::move(f));
        }
      }
    }
    for (const auto& existing : queries) {
      if (existing.label == q.label) {
        throw InvalidQueryError("query line " + std::to_string(line_no) +
                                ": duplicate construction '" + q.label.name() +
                                "'");
      }
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

nlohmann::json to_json(const Sample& s) {
  return {
      {"id", s.id},
      {"raw_text", s.raw_text},
      {"clean_text", s.clean_text},
      {"label",
       {{"construction", s.label.name()},
        {"verb_category", std::string(to_string(s.label.verb_category()))},
        {"particle", s.label.particle()}}},
      {"target_token_index", s.target_token_index},
      {"particle_token_index", s.particle_token_index},
      {"context_before", s.context_before},
      {"context_after", s.context_after},
  };
}

Sample sample_from_json(const nlohmann::json& j) {
  try {
    const auto& label = j.at("label");
    return Sample{
        .id = j.at("id").get<std::string>(),
        .raw_text = j.at("raw_text").get<std::string>(),
        .clean_text = j.at("clean_text").get<std::string>(),
        .label = ConstructionLabel::from_strings(
            label.at("verb_category").get<std::string>(),
            label.at("particle").get<std::string>()),
        .target_token_index = j.at("target_token_index").get<std::size_t>(),
        .particle_token_index = j.at("particle_token_index").get<std::size_t>(),
        .context_before = j.at("context_before").get<std::size_t>(),
        .context_after = j.at("context_after").get<std::size_t>(),
    };
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed sample record: ") + e.what());
  }
}

std::string samples_to_json(std::span<const Sample> samples) {
  auto arr = nlohmann::json::array();
  for (const auto& s : samples) arr.push_back(to_json(s));
  return arr.dump(2) + "\n";
}

std::vector<Sample> samples_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("samples file is not JSON: ") + e.what());
  }
  if (!j.is_array()) throw ValidationError("samples file must be a JSON array");
  std::vector<Sample> samples;
  samples.reserve(j.size());
  for (const auto& item : j) samples.push_back(sample_from_json(item));
  return samples;
}

std::string summary_to_csv(const DatasetSummary& summary) {
  std::ostringstream out;
  out << "construction,count\n";
  for (std::size_t i = 0; i < kConstructions.size(); ++i) {
    out << kConstructions[i] << ',' << summary.counts[i] << '\n';
  }
  out << "total," << summary.total << '\n';
  return out.str();
}

}  // namespace layerprobe::corpus
