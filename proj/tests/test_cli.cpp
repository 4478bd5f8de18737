#include <doctest.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "layerprobe/bundle.hpp"
#include "layerprobe/cli.hpp"
#include "layerprobe/selftest.hpp"
#include "support/synthetic.hpp"

using namespace layerprobe;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "layerprobe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, std::string_view text) {
  std::ofstream(p, std::ios::binary) << text;
}

const char* kQueries =
    "# verb\tparticle\tforms\n"
    "give\tup\tgave,gives,given,giving\n"
    "agree\tto\tagreed\n"
    "come\tin\n"
    "give\tin\n";

// Hand count: a.txt has give_up x2 (gave up, gives up), agree_to x1,
// come_in x1, give_in x1 ("give-in" cleans to one token and does not match);
// b.txt has give_up x2, one of them split across a line break.
void write_fixture_corpus(const fs::path& dir) {
  fs::create_directories(dir);
  spit(dir / "a.txt",
       "They gave up. She gives up too! We agree, on the whole.\n"
       "They agreed to go; come in please. Give in, give-in.\n");
  spit(dir / "b.txt", "nothing here give\nup and Giving up\n");
}

}  // namespace

TEST_CASE("corpus subcommand matches a hand count") {
  synthetic::TempDir tmp("cli");
  write_fixture_corpus(tmp.path / "in");
  spit(tmp.path / "queries.tsv", kQueries);
  const auto r = run({"corpus", "--in", (tmp.path / "in").string(), "--queries",
                      (tmp.path / "queries.tsv").string(), "--out", (tmp.path / "out").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto summary = slurp(tmp.path / "out" / "summary.csv");
  CHECK(summary.starts_with("construction,count\n"));
  CHECK(summary.find("\ngive_up,4\n") != std::string::npos);
  CHECK(summary.find("\nagree_to,1\n") != std::string::npos);
  CHECK(summary.find("\ncome_in,1\n") != std::string::npos);
  CHECK(summary.find("\ngive_in,1\n") != std::string::npos);
  CHECK(summary.find("\nagree_on,0\n") != std::string::npos);
  CHECK(summary.ends_with("\ntotal,7\n"));

  const auto samples = corpus::samples_from_json(slurp(tmp.path / "out" / "samples.json"));
  REQUIRE(samples.size() == 7);
  CHECK(samples[0].id == "a.txt:1");
  CHECK(samples[0].label.name() == "give_up");
  CHECK(samples.back().id.starts_with("b.txt:"));
  CHECK(samples.back().clean_text.find("giving up") != std::string::npos);
}

TEST_CASE("corpus subcommand with no matches") {
  synthetic::TempDir tmp("cli");
  fs::create_directories(tmp.path / "in");
  spit(tmp.path / "in" / "x.txt", "Nobody here gives anything away.");
  spit(tmp.path / "queries.tsv", "come\tback\n");
  const auto r = run({"corpus", "--in", (tmp.path / "in").string(), "--queries",
                      (tmp.path / "queries.tsv").string(), "--out", (tmp.path / "out").string()});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(slurp(tmp.path / "out" / "samples.json")) == nlohmann::json::array());
  CHECK(slurp(tmp.path / "out" / "summary.csv").ends_with("\ntotal,0\n"));
}

TEST_CASE("corpus subcommand errors") {
  synthetic::TempDir tmp("cli");
  spit(tmp.path / "queries.tsv", kQueries);
  const auto missing = (tmp.path / "no-such-dir").string();
  auto r = run({"corpus", "--in", missing, "--queries", (tmp.path / "queries.tsv").string(),
                "--out", (tmp.path / "out").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find(missing) != std::string::npos);

  fs::create_directories(tmp.path / "in");
  const auto no_queries = (tmp.path / "nope.tsv").string();
  r = run({"corpus", "--in", (tmp.path / "in").string(), "--queries", no_queries, "--out",
           (tmp.path / "out").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find(no_queries) != std::string::npos);

  spit(tmp.path / "bad.tsv", "take\toff\n");
  r = run({"corpus", "--in", (tmp.path / "in").string(), "--queries",
           (tmp.path / "bad.tsv").string(), "--out", (tmp.path / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("take off") != std::string::npos);
}

TEST_CASE("analyze on the synthetic 12-layer bundle") {
  synthetic::TempDir tmp("cli");
  bundle::write_bundle(synthetic::peaked_bundle(6), tmp.path / "bundle");
  const auto out = tmp.path / "report";
  const auto r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--out", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  CHECK(fs::exists(out / "gdv_curves.csv"));
  CHECK(fs::exists(out / "gdv_curves_synthetic.svg"));
  CHECK(fs::exists(out / "outliers.csv"));
  for (int l = 1; l <= 12; ++l) {
    const std::string stem = "mds_layer_" + std::string(l < 10 ? "0" : "") + std::to_string(l);
    CHECK(fs::exists(out / (stem + ".csv")));
    CHECK(fs::exists(out / (stem + ".svg")));
  }
  CHECK(r.out.find("all: strongest separation at layer 6\n") != std::string::npos);

  // Default groupings: all, one per category, by_category.
  const auto csv = slurp(out / "gdv_curves.csv");
  for (const char* g : {",all,", ",within_category:agree,", ",within_category:come,",
                        ",within_category:give,", ",by_category,"}) {
    CHECK(csv.find(g) != std::string::npos);
  }
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 12);

  const auto manifest = nlohmann::json::parse(slurp(out / "run_manifest.json"));
  CHECK(manifest["command"] == "analyze");
  CHECK(manifest["bundle"]["checksum_fnv1a64"] == bundle::checksum(tmp.path / "bundle"));
  CHECK(manifest["bundle"]["num_layers"] == 12);
  CHECK(manifest["config"]["outlier_k"] == 3.5);
  CHECK(manifest["outputs"].size() == 2 + 24 + 1);
  CHECK(manifest.contains("version"));
}

TEST_CASE("default groupings skip categories with one construction") {
  synthetic::TempDir tmp("cli");
  const auto full = synthetic::peaked_bundle(2, 2, 3, 4);
  std::vector<std::int64_t> rows;
  for (std::size_t i = 0; i < full.samples.size(); ++i) {
    const auto& c = full.samples[i].construction;
    if (c == "give_up" || c == "give_in" || c == "come_in") rows.push_back(static_cast<std::int64_t>(i));
  }
  bundle::write_bundle(bundle::select_rows(full, rows), tmp.path / "bundle");
  auto r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--out",
                (tmp.path / "out").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto csv = slurp(tmp.path / "out" / "gdv_curves.csv");
  CHECK(csv.find(",within_category:give,") != std::string::npos);
  CHECK(csv.find(",within_category:come,") == std::string::npos);
  CHECK(csv.find(",by_category,") != std::string::npos);

  // Asked for explicitly, the same grouping is an error naming the class.
  r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--grouping",
           "within_category:come", "--out", (tmp.path / "out2").string()});
  CHECK(r.code == 4);
  CHECK(r.err.find("come_in") != std::string::npos);
}

TEST_CASE("analyze is deterministic") {
  synthetic::TempDir tmp("cli");
  bundle::write_bundle(synthetic::peaked_bundle(4, 6, 6, 8), tmp.path / "bundle");
  for (const char* method : {"classical", "smacof"}) {
    const auto a = tmp.path / (std::string("a-") + method);
    const auto b = tmp.path / (std::string("b-") + method);
    for (const auto& dir : {a, b}) {
      const auto r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--mds", method,
                          "--out", dir.string()});
      REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto name = entry.path().filename();
      if (name == "run_manifest.json") continue;
      CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), name.string());
      ++compared;
    }
    CHECK(compared == 3 + 2 * 6);
  }
}

TEST_CASE("analyze errors") {
  synthetic::TempDir tmp("cli");
  const auto full = synthetic::peaked_bundle(3, 4, 3, 5);

  SUBCASE("grouping on a missing category names it") {
    std::vector<std::int64_t> rows;
    for (std::size_t i = 0; i < full.samples.size(); ++i)
      if (full.samples[i].verb_category != "give") rows.push_back(static_cast<std::int64_t>(i));
    bundle::write_bundle(bundle::select_rows(full, rows), tmp.path / "bundle");
    const auto r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--grouping",
                        "within_category:give", "--out", (tmp.path / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("give") != std::string::npos);
  }
  SUBCASE("invalid bundle prints the validation report") {
    bundle::write_bundle(full, tmp.path / "bundle");
    fs::resize_file(tmp.path / "bundle" / "layers" / "layer_03.f32", 10);
    const auto r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--out",
                        (tmp.path / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("layer 3") != std::string::npos);
  }
  SUBCASE("missing bundle directory") {
    const auto r = run({"analyze", "--bundle", (tmp.path / "absent").string(), "--out",
                        (tmp.path / "out").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("absent") != std::string::npos);
  }
  SUBCASE("model expectation") {
    bundle::write_bundle(full, tmp.path / "bundle");
    const auto r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--expect-model",
                        "bert-base-uncased", "--out", (tmp.path / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("synthetic") != std::string::npos);
  }
  SUBCASE("singleton class is degenerate") {
    bundle::write_bundle(bundle::select_rows(full, {0, 1, 2, 11, 12}), tmp.path / "bundle");
    const auto r = run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--out",
                        (tmp.path / "out").string()});
    CHECK(r.code == 4);
  }
  SUBCASE("unknown flags and bad values") {
    bundle::write_bundle(full, tmp.path / "bundle");
    CHECK(run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--out",
               (tmp.path / "out").string(), "--bogus"})
              .code == 2);
    CHECK(run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--out",
               (tmp.path / "out").string(), "--mds", "tsne"})
              .code == 2);
    CHECK(run({"analyze", "--bundle", (tmp.path / "bundle").string(), "--out",
               (tmp.path / "out").string(), "--grouping", "everything"})
              .code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
  }
}

TEST_CASE("selftest") {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({"selftest"});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(seconds < 5.0);

  auto checks = selftest::builtin_checks();
  auto it = std::find_if(checks.begin(), checks.end(),
                         [](const auto& c) { return c.name.find("gdv") != std::string::npos && c.compute; });
  REQUIRE(it != checks.end());
  it->expected += 0.01;
  std::ostringstream out;
  CHECK_FALSE(selftest::run_checks(checks, out));
  const auto text = out.str();
  const auto line = text.find("FAIL");
  REQUIRE(line != std::string::npos);
  CHECK(text.substr(line, text.find('\n', line) - line).find(it->name) != std::string::npos);
}

TEST_CASE("version flag") {
  const auto r = run({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out == std::string(LAYERPROBE_VERSION) + "\n");
}
