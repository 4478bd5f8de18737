#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "layerprobe/analysis.hpp"
#include "layerprobe/bundle.hpp"
#include "layerprobe/cli.hpp"
#include "layerprobe/corpus.hpp"
#include "layerprobe/geometry.hpp"
#include "layerprobe/mds.hpp"
#include "layerprobe/selftest.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace layerprobe;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

analysis::Grouping one_grouping(const std::string& text) {
  auto parsed = analysis::parse_groupings(text);
  if (parsed.size() != 1) throw ValidationError("expected exactly one grouping, got '" + text + "'");
  return parsed.front();
}

bundle::BundleSample sample_from_dict(const py::dict& d) {
  bundle::BundleSample s;
  s.id = d["id"].cast<std::string>();
  s.clean_text = d.contains("clean_text") ? d["clean_text"].cast<std::string>() : "";
  s.construction = d["construction"].cast<std::string>();
  if (d.contains("verb_category")) {
    s.verb_category = d["verb_category"].cast<std::string>();
  } else {
    s.verb_category = s.construction.substr(0, s.construction.find('_'));
  }
  const auto span = d["subword_span"].cast<std::pair<std::int64_t, std::int64_t>>();
  s.subword_span = {span.first, span.second};
  return s;
}

py::dict sample_to_dict(const bundle::BundleSample& s) {
  return py::dict("id"_a = s.id, "clean_text"_a = s.clean_text, "construction"_a = s.construction,
                  "verb_category"_a = s.verb_category,
                  "subword_span"_a = py::make_tuple(s.subword_span.start, s.subword_span.end));
}

py::dict mds_to_dict(const mds::MdsResult& r) {
  return py::dict("coordinates"_a = r.coordinates, "eigenvalues"_a = r.eigenvalues,
                  "stress_trace"_a = r.stress_trace, "method"_a = std::string(mds::to_string(r.method)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Layer-wise separability analysis of construction embeddings";
  m.attr("__version__") = LAYERPROBE_VERSION;

  // Later registrations are tried first, so subclasses come last.
  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
  static py::exception<IoError> io_error(m, "IoError", error.ptr());
  static py::exception<DegenerateDataError> degenerate_error(m, "DegenerateDataError", error.ptr());
  static py::exception<InvalidQueryError> query_error(m, "InvalidQueryError", validation_error.ptr());
  static py::exception<bundle::BundleError> bundle_error(m, "BundleError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const bundle::BundleError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(bundle_error.ptr())(e.what());
      exc.attr("fault") = std::string(bundle::to_string(e.fault()));
      exc.attr("exit_code") = static_cast<int>(e.exit_code());
      PyErr_SetObject(bundle_error.ptr(), exc.ptr());
    } catch (const InvalidQueryError& e) {
      py::set_error(query_error, e.what());
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const IoError& e) {
      py::set_error(io_error, e.what());
    } catch (const DegenerateDataError& e) {
      py::set_error(degenerate_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  // corpus
  m.def("clean_sentence", &corpus::clean_sentence, "text"_a,
        "Drop ASCII punctuation, trim, collapse whitespace, lowercase.");
  m.def(
      "tokenize",
      [](const std::string& text) {
        auto s = corpus::tokenize(text);
        return py::make_tuple(s.raw, s.clean);
      },
      "text"_a, "(raw tokens, cleaned tokens); tokens that clean to nothing are dropped.");
  m.def("known_constructions", [] {
    std::vector<std::string> out;
    for (auto name : corpus::known_constructions()) out.emplace_back(name);
    return out;
  });
  m.def(
      "extract_concordance",
      [](const std::string& text, const std::string& queries, std::size_t window,
         const std::string& source) {
        const auto q = corpus::parse_queries(queries);
        const auto samples = corpus::extract_concordance(corpus::tokenize(text), q, window, source);
        return json_to_py(nlohmann::json::parse(corpus::samples_to_json(samples)));
      },
      "text"_a, "queries"_a, "window"_a = 10, "source"_a = "text",
      "Samples (as dicts) for every verb form immediately followed by its particle.\n"
      "`queries` uses the query-file format: verb<TAB>particle[<TAB>forms].");
  m.def("reference_profile", [] {
    const auto p = corpus::reference_profile();
    py::dict d;
    for (std::size_t i = 0; i < p.counts.size(); ++i) d[py::str(std::string(corpus::known_constructions()[i]))] = p.counts[i];
    return d;
  });

  // geometry
  m.def(
      "gdv",
      [](const geometry::PointMatrix& points, const std::vector<std::string>& labels) {
        const auto r = geometry::gdv({points, labels});
        py::list inter;
        for (const auto& x : r.inter) inter.append(py::make_tuple(r.classes[x.l], r.classes[x.m], x.value));
        return py::dict("gdv"_a = r.gdv, "classes"_a = r.classes, "intra"_a = r.intra, "inter"_a = inter);
      },
      "points"_a, "labels"_a);
  m.def(
      "rescale_half_zscore",
      [](const geometry::PointMatrix& points) { return geometry::rescale_half_zscore(points).points; },
      "points"_a);

  // mds
  m.def(
      "pairwise_distances",
      [](const mds::PointMatrix& points) { return Eigen::MatrixXd(mds::pairwise_distances(points).values()); },
      "points"_a);
  m.def(
      "classical_mds",
      [](const Eigen::MatrixXd& dist, Eigen::Index k) {
        return mds_to_dict(mds::classical_mds(mds::DistanceMatrix(dist), k));
      },
      "dist"_a, "k"_a = 2);
  m.def(
      "smacof",
      [](const Eigen::MatrixXd& dist, const mds::PointMatrix& init, int max_iter, double tol) {
        return mds_to_dict(mds::smacof(mds::DistanceMatrix(dist), init, {max_iter, tol}));
      },
      "dist"_a, "init"_a, "max_iter"_a = 300, "tol"_a = 1e-6);
  m.def(
      "stress",
      [](const Eigen::MatrixXd& dist, const mds::PointMatrix& coords) {
        return mds::stress(mds::DistanceMatrix(dist), coords);
      },
      "dist"_a, "coordinates"_a);

  // bundle
  py::class_<bundle::EmbeddingBundle>(m, "Bundle")
      .def(py::init([](std::string model_id, const py::list& samples,
                       std::vector<bundle::LayerMatrix> layers, bool includes_embedding_layer) {
             bundle::EmbeddingBundle b;
             b.model_id = std::move(model_id);
             for (const auto& s : samples) b.samples.push_back(sample_from_dict(s.cast<py::dict>()));
             b.hidden_dim = layers.empty() ? 0 : layers.front().cols();
             b.layers = std::move(layers);
             b.includes_embedding_layer = includes_embedding_layer;
             return b;
           }),
           "model_id"_a, "samples"_a, "layers"_a, "includes_embedding_layer"_a = false)
      .def_readonly("model_id", &bundle::EmbeddingBundle::model_id)
      .def_readonly("hidden_dim", &bundle::EmbeddingBundle::hidden_dim)
      .def_readonly("includes_embedding_layer", &bundle::EmbeddingBundle::includes_embedding_layer)
      .def_property_readonly("num_layers", &bundle::EmbeddingBundle::num_layers)
      .def_property_readonly("num_samples", &bundle::EmbeddingBundle::num_samples)
      .def_property_readonly("layer_indices", &bundle::EmbeddingBundle::layer_indices)
      .def_property_readonly("samples",
                             [](const bundle::EmbeddingBundle& b) {
                               py::list out;
                               for (const auto& s : b.samples) out.append(sample_to_dict(s));
                               return out;
                             })
      .def("layer", &bundle::EmbeddingBundle::layer, "index"_a, py::return_value_policy::copy,
           "Copy of the matrix for a layer index as numbered on disk.")
      .def("validate", [](const bundle::EmbeddingBundle& b) {
        std::vector<std::string> out;
        for (const auto& v : bundle::validate_bundle(b)) out.push_back(v.message);
        return out;
      });
  m.def("read_bundle", &bundle::read_bundle, "dir"_a);
  m.def("write_bundle", &bundle::write_bundle, "bundle"_a, "dir"_a);
  m.def("bundle_checksum", &bundle::checksum, "dir"_a);

  // analysis
  m.def(
      "per_layer_gdv",
      [](const bundle::EmbeddingBundle& b, const std::string& grouping) {
        std::vector<std::pair<int, double>> out;
        for (const auto& p : analysis::per_layer_gdv(b, one_grouping(grouping)).values) out.emplace_back(p.layer, p.gdv);
        return out;
      },
      "bundle"_a, "grouping"_a = "all", "[(layer, gdv), ...] in ascending layer order.");
  m.def(
      "per_layer_mds",
      [](const bundle::EmbeddingBundle& b, int layer, const std::string& method, bool rescale_first) {
        analysis::ProjectionOptions o;
        o.method = method == "smacof" ? mds::Method::smacof : mds::Method::classical;
        if (method != "smacof" && method != "classical") throw ValidationError("unknown MDS method '" + method + "'");
        o.rescale_first = rescale_first;
        const auto p = analysis::per_layer_mds(b, layer, o);
        auto d = mds_to_dict(p.result);
        d["sample_ids"] = p.sample_ids;
        d["constructions"] = p.constructions;
        return d;
      },
      "bundle"_a, "layer"_a, "method"_a = "classical", "rescale_first"_a = false);
  m.def(
      "flag_outliers",
      [](const bundle::EmbeddingBundle& b, int layer, const std::string& grouping, double k) {
        py::list out;
        for (const auto& r : analysis::flag_outliers(b, layer, one_grouping(grouping), k).records) {
          out.append(py::dict("sample_id"_a = r.sample_id, "label"_a = r.label, "distance"_a = r.distance,
                              "score"_a = r.score, "flagged"_a = r.flagged));
        }
        return out;
      },
      "bundle"_a, "layer"_a, "grouping"_a = "all", "k"_a = 3.5);

  // tools
  m.def("run_selftest", [] {
    std::ostringstream out;
    const bool ok = cli::cmd_selftest(out);
    return py::make_tuple(ok, out.str());
  });
  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv = {"layerprobe"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        py::print(out.str(), "end"_a = "");
        if (!err.str().empty()) py::print(err.str(), "end"_a = "", "file"_a = py::module_::import("sys").attr("stderr"));
        return code;
      },
      "args"_a, "Runs the command-line tool in-process and returns its exit code.");
}
