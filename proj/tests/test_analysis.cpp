#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "layerprobe/analysis.hpp"
#include "layerprobe/errors.hpp"
#include "support/synthetic.hpp"

using namespace layerprobe;
using namespace layerprobe::analysis;
using bundle::EmbeddingBundle;
using bundle::LayerMatrix;

namespace {

const Grouping kAll{Grouping::Kind::by_construction_all, {}};
const Grouping kByCategory{Grouping::Kind::by_category, {}};
Grouping within(std::string c) { return {Grouping::Kind::within_category, std::move(c)}; }

// 1-D bundle with one column per layer; constructions[i] labels row i.
EmbeddingBundle one_dim(const std::vector<std::string>& constructions,
                        const std::vector<std::vector<float>>& layers) {
  EmbeddingBundle b;
  b.model_id = "fixture";
  b.hidden_dim = 1;
  for (std::size_t i = 0; i < constructions.size(); ++i) {
    const auto& c = constructions[i];
    b.samples.push_back({"s" + std::to_string(i), "", c, c.substr(0, c.find('_')), {0, 1}});
  }
  for (const auto& values : layers) {
    LayerMatrix m(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
    b.layers.push_back(m);
  }
  return b;
}

}  // namespace

TEST_CASE("grouping parsing and names") {
  CHECK(parse_groupings("all") == std::vector<Grouping>{kAll});
  CHECK(parse_groupings("by_category") == std::vector<Grouping>{kByCategory});
  const auto w = parse_groupings("within_category:agree,come,give");
  REQUIRE(w.size() == 3);
  CHECK(w[2].name() == "within_category:give");
  CHECK_THROWS_AS(parse_groupings("within_category:take"), ValidationError);
  CHECK_THROWS_AS(parse_groupings("everything"), ValidationError);
}

TEST_CASE("per_layer_gdv on a two-layer 1-D fixture") {
  const auto b = one_dim({"give_up", "give_up", "give_in", "give_in"},
                         {{0, 1, 0.5f, 1.5f}, {0, 1, 10, 11}});
  const auto curve = per_layer_gdv(b, kAll);
  REQUIRE(curve.values.size() == 2);
  CHECK(curve.values[0].layer == 1);
  CHECK(std::abs(curve.values[0].gdv - 0.22361) < 1e-4);
  CHECK(std::abs(curve.values[1].gdv - -0.89553) < 1e-4);
  CHECK(curve.argmin_layer() == 2);
  CHECK(curve.model_id == "fixture");

  const auto give = per_layer_gdv(b, within("give"));
  CHECK(give.values[1].gdv == curve.values[1].gdv);
}

TEST_CASE("identical layers give a constant curve") {
  auto b = synthetic::peaked_bundle(6, 3, 4, 6);
  b.layers[1] = b.layers[0];
  b.layers[2] = b.layers[0];
  const auto curve = per_layer_gdv(b, kAll);
  CHECK(curve.values[0].gdv == curve.values[1].gdv);
  CHECK(curve.values[1].gdv == curve.values[2].gdv);
}

TEST_CASE("designed separation peak is the curve minimum") {
  const auto b = synthetic::peaked_bundle(6);
  const auto curve = per_layer_gdv(b, kAll);
  REQUIRE(curve.values.size() == 12);
  CHECK(curve.argmin_layer() == 6);
  CHECK(curve.values[5].gdv < curve.values[0].gdv);
  CHECK(curve.values[5].gdv < curve.values[11].gdv);
}

TEST_CASE("grouping errors") {
  const auto b = one_dim({"agree_on", "agree_on", "agree_to", "agree_to", "come_in", "come_in"},
                         {{0, 1, 2, 3, 4, 5}});
  try {
    per_layer_gdv(b, within("give"));
    FAIL("expected error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("give") != std::string::npos);
  }
  try {
    per_layer_gdv(b, within("come"));
    FAIL("expected error");
  } catch (const DegenerateDataError& e) {
    CHECK(std::string(e.what()).find("come_in") != std::string::npos);
  }
  const auto lonely = one_dim({"agree_on", "agree_on", "agree_to"}, {{0, 1, 2}});
  try {
    per_layer_gdv(lonely, kAll);
    FAIL("expected error");
  } catch (const DegenerateDataError& e) {
    CHECK(std::string(e.what()).find("agree_to") != std::string::npos);
  }
}

TEST_CASE("curves are unchanged by shuffling bundle rows") {
  const auto b = synthetic::peaked_bundle(4, 6, 5, 8);
  std::vector<std::int64_t> order(static_cast<std::size_t>(b.num_samples()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int64_t>(i);
  std::mt19937 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  const auto shuffled = bundle::select_rows(b, order);
  for (const auto& g : {kAll, kByCategory, within("agree"), within("give")}) {
    const auto a = per_layer_gdv(b, g);
    const auto s = per_layer_gdv(shuffled, g);
    for (std::size_t l = 0; l < a.values.size(); ++l) CHECK(a.values[l].gdv == s.values[l].gdv);
  }
}

TEST_CASE("within_category commutes with filtering the bundle first") {
  const auto b = synthetic::peaked_bundle(4, 6, 5, 8);
  for (const std::string cat : {"agree", "come", "give"}) {
    std::vector<std::int64_t> rows;
    for (std::size_t i = 0; i < b.samples.size(); ++i)
      if (b.samples[i].verb_category == cat) rows.push_back(static_cast<std::int64_t>(i));
    const auto sub = bundle::select_rows(b, rows);
    const auto full = per_layer_gdv(b, within(cat));
    const auto filtered = per_layer_gdv(sub, within(cat));
    const auto filtered_all = per_layer_gdv(sub, kAll);
    for (std::size_t l = 0; l < full.values.size(); ++l) {
      CHECK(full.values[l].gdv == filtered.values[l].gdv);
      CHECK(full.values[l].gdv == filtered_all.values[l].gdv);
    }
  }
}

TEST_CASE("two bundles with the same samples share a layer domain") {
  auto a = synthetic::peaked_bundle(6, 12, 3, 4);
  auto b = synthetic::peaked_bundle(3, 12, 3, 4);
  b.model_id = "other-model";
  const auto ca = per_layer_gdv(a, kAll), cb = per_layer_gdv(b, kAll);
  REQUIRE(ca.values.size() == cb.values.size());
  for (std::size_t l = 0; l < ca.values.size(); ++l) CHECK(ca.values[l].layer == cb.values[l].layer);
}

TEST_CASE("per_layer_mds") {
  EmbeddingBundle b;
  b.model_id = "m";
  b.hidden_dim = 3;
  b.samples = {{"a", "", "give_up", "give", {0, 1}},
               {"b", "", "give_in", "give", {0, 1}},
               {"c", "", "come_in", "come", {0, 1}}};
  b.layers = {LayerMatrix::Identity(3, 3)};
  const auto p = per_layer_mds(b, 1);
  const auto d = mds::pairwise_distances(p.result.coordinates);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(d(i, j) - std::sqrt(2.0)) < 1e-9);
  CHECK(p.constructions == std::vector<std::string>{"give_up", "give_in", "come_in"});
  CHECK(p.verb_categories[2] == "come");

  const auto again = per_layer_mds(b, 1);
  CHECK(again.result.coordinates == p.result.coordinates);

  const auto two = bundle::select_rows(b, {0, 2});
  const auto p2 = per_layer_mds(two, 1);
  CHECK(std::abs(p2.result.coordinates(0, 1)) < 1e-9);
  CHECK(std::abs(p2.result.coordinates(1, 1)) < 1e-9);

  ProjectionOptions smacof;
  smacof.method = mds::Method::smacof;
  const auto ps = per_layer_mds(b, 1, smacof);
  CHECK(ps.result.method == mds::Method::smacof);
  CHECK_FALSE(ps.result.stress_trace.empty());
  CHECK(ps.result.eigenvalues.size() == 3);

  CHECK_THROWS_AS(per_layer_mds(b, 2), ValidationError);
}

TEST_CASE("flag_outliers") {
  SUBCASE("one far point") {
    const auto b = one_dim({"come_in", "come_in", "come_in", "come_in"}, {{0, 0.1f, 0.2f, 100}});
    const auto f = flag_outliers(b, 1, within("come"), 3.5);
    REQUIRE(f.records.size() == 4);
    CHECK_FALSE(f.records[0].flagged);
    CHECK_FALSE(f.records[1].flagged);
    CHECK_FALSE(f.records[2].flagged);
    CHECK(f.records[3].flagged);
    CHECK(f.records[3].sample_id == "s3");
    // centroid 25.075; distances 25.075 24.975 24.875 74.925; median 25.025,
    // MAD 0.1 -> score of the far point (74.925 - 25.025) / 0.1 = 499.
    CHECK(f.records[3].score == doctest::Approx(499.0).epsilon(1e-4));

    const auto raised = flag_outliers(b, 1, within("come"), f.records[3].score + 1.0);
    for (const auto& r : raised.records) CHECK_FALSE(r.flagged);
  }
  SUBCASE("identical points") {
    const auto b = one_dim({"give_up", "give_up", "give_up"}, {{2, 2, 2}});
    for (const auto& r : flag_outliers(b, 1, kAll).records) {
      CHECK_FALSE(r.flagged);
      CHECK(r.score == 0.0);
    }
  }
  SUBCASE("flags survive global scaling") {
    auto b = synthetic::peaked_bundle(2, 2, 12, 5);
    b.layers[0](3, 2) += 30.0f;
    const auto base = flag_outliers(b, 1, kAll);
    auto scaled = b;
    scaled.layers[0] *= 3.7f;
    const auto s = flag_outliers(scaled, 1, kAll);
    int flagged = 0;
    for (std::size_t i = 0; i < base.records.size(); ++i) {
      CHECK(base.records[i].flagged == s.records[i].flagged);
      flagged += base.records[i].flagged;
    }
    CHECK(flagged >= 1);
    CHECK(base.records[3].flagged);
  }
  SUBCASE("degenerate class") {
    const auto b = one_dim({"give_up", "give_up", "give_in"}, {{0, 1, 2}});
    CHECK_THROWS_AS(flag_outliers(b, 1, kAll), DegenerateDataError);
  }
}

TEST_CASE("CSV serialization") {
  CHECK(format_float(-0.895534) == "-0.895534");
  CHECK(format_float(0.1234567) == "0.123457");
  CHECK(format_float(1234567.0) == "1.23457e+06");
  CHECK(format_float(0.0) == "0");
  CHECK(csv_field("a.txt:3") == "a.txt:3");
  CHECK(csv_field("a,b.txt:3") == "\"a,b.txt:3\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");

  const auto b = one_dim({"give_up", "give_up", "give_in", "give_in"}, {{0, 1, 10, 11}});
  const auto csv = gdv_curves_csv({per_layer_gdv(b, kAll)});
  // -9 / (2 sqrt(25.25)) = -0.8955333
  CHECK(csv == "model_id,grouping,layer,gdv\nfixture,all,1,-0.895533\n");

  const auto mds_text = mds_csv(per_layer_mds(b, 1));
  CHECK(mds_text.starts_with("sample_id,construction,verb_category,x,y\ns0,give_up,give,"));

  const auto out = outliers_csv({flag_outliers(b, 1, kAll)});
  CHECK(out.starts_with("layer,grouping,sample_id,score,flagged\n1,all,s0,"));
  CHECK(std::count(out.begin(), out.end(), '\n') == 5);
}
