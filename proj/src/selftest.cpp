#include "layerprobe/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "layerprobe/corpus.hpp"
#include "layerprobe/geometry.hpp"
#include "layerprobe/mds.hpp"

namespace layerprobe::selftest {

namespace {

geometry::LabeledCloud cloud_1d(std::vector<double> xs, std::vector<std::string> labels) {
  geometry::LabeledCloud c;
  c.points.resize(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) c.points(static_cast<Eigen::Index>(i), 0) = xs[i];
  c.labels = std::move(labels);
  return c;
}

geometry::LabeledCloud square(double scale) {
  geometry::LabeledCloud c;
  c.points.resize(4, 2);
  c.points << 0, 0, 0, 1, 4, 0, 4, 1;
  c.points *= scale;
  c.labels = {"A", "A", "B", "B"};
  return c;
}

mds::DistanceMatrix triangle() {
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(3, 3);
  d.diagonal().setZero();
  return mds::DistanceMatrix(d);
}

mds::DistanceMatrix line4() {
  Eigen::MatrixXd d(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d(i, j) = std::abs(i - j);
  return mds::DistanceMatrix(d);
}

Check numeric(std::string name, double expected, double tol, std::function<double()> f) {
  return Check{std::move(name), expected, tol, std::move(f), {}, {}};
}

Check text(std::string name, std::string expected, std::function<std::string()> f) {
  return Check{std::move(name), 0.0, 0.0, {}, std::move(expected), std::move(f)};
}

}  // namespace

std::vector<Check> builtin_checks() {
  std::vector<Check> checks;
  checks.push_back(numeric("gdv.1d_two_pairs", -0.89553, 1e-4, [] {
    return geometry::gdv(cloud_1d({0, 1, 10, 11}, {"A", "A", "B", "B"})).gdv;
  }));
  checks.push_back(numeric("gdv.square", -0.14645, 1e-4, [] { return geometry::gdv(square(1)).gdv; }));
  checks.push_back(numeric("gdv.square_scaled_1000", -0.14645, 1e-4,
                           [] { return geometry::gdv(square(1000)).gdv; }));
  checks.push_back(numeric("gdv.overlapping_1d", 0.22361, 1e-4, [] {
    return geometry::gdv(cloud_1d({0, 1, 0.5, 1.5}, {"A", "A", "B", "B"})).gdv;
  }));
  checks.push_back(numeric("rescale.first_of_0_1_10_11", -0.54727, 1e-5, [] {
    geometry::PointMatrix p(4, 1);
    p << 0, 1, 10, 11;
    return geometry::rescale_half_zscore(p).points(0, 0);
  }));
  checks.push_back(numeric("mds.triangle_eigen_1", 0.5, 1e-9,
                           [] { return mds::classical_mds(triangle()).eigenvalues[0]; }));
  checks.push_back(numeric("mds.triangle_eigen_2", 0.5, 1e-9,
                           [] { return mds::classical_mds(triangle()).eigenvalues[1]; }));
  checks.push_back(numeric("mds.triangle_eigen_3", 0.0, 1e-9,
                           [] { return mds::classical_mds(triangle()).eigenvalues[2]; }));
  checks.push_back(numeric("mds.line_top_eigen", 5.0, 1e-9,
                           [] { return mds::classical_mds(line4(), 1).eigenvalues[0]; }));
  checks.push_back(numeric("mds.triangle_stress", 0.0, 1e-12, [] {
    auto d = triangle();
    return mds::stress(d, mds::classical_mds(d).coordinates);
  }));
  checks.push_back(text("clean.punctuation", "the minister agreed",
                        [] { return corpus::clean_sentence("The Minister, agreed!"); }));
  checks.push_back(text("clean.whitespace", "give up",
                        [] { return corpus::clean_sentence("  give   UP  "); }));
  checks.push_back(text("clean.empty", "", [] { return corpus::clean_sentence(""); }));
  return checks;
}

bool run_checks(const std::vector<Check>& checks, std::ostream& out) {
  std::size_t passed = 0;
  for (const auto& c : checks) {
    bool ok = false;
    char line[256];
    try {
      if (c.compute_text) {
        const std::string got = c.compute_text();
        ok = got == c.expected_text;
        std::snprintf(line, sizeof line, "%-30s expected \"%s\" got \"%s\"", c.name.c_str(),
                      c.expected_text.c_str(), got.c_str());
      } else {
        const double got = c.compute();
        ok = std::abs(got - c.expected) <= c.tolerance;
        std::snprintf(line, sizeof line, "%-30s expected %.9g got %.9g (tol %.0e)",
                      c.name.c_str(), c.expected, got, c.tolerance);
      }
    } catch (const std::exception& e) {
      std::snprintf(line, sizeof line, "%-30s threw: %s", c.name.c_str(), e.what());
    }
    out << (ok ? "PASS  " : "FAIL  ") << line << '\n';
    passed += ok;
  }
  out << passed << '/' << checks.size() << " checks passed\n";
  return passed == checks.size();
}

}  // namespace layerprobe::selftest
