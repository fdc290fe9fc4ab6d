// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bloomprobe/activation_store.hpp"
#include "bloomprobe/baselines.hpp"
#include "bloomprobe/corpus.hpp"
#include "bloomprobe/error.hpp"
#include "bloomprobe/evaluation.hpp"
#include "bloomprobe/geometry.hpp"
#include "bloomprobe/json_io.hpp"
#include "bloomprobe/layerscan.hpp"
#include "bloomprobe/pipeline.hpp"
#include "bloomprobe/probe.hpp"

namespace py = pybind11;
namespace bp = bloomprobe;

namespace {

py::object to_py(const bp::Json& j) {
    switch (j.type()) {
        case bp::Json::value_t::null: return py::none();
        case bp::Json::value_t::boolean: return py::bool_(j.get<bool>());
        case bp::Json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case bp::Json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case bp::Json::value_t::number_float: return py::float_(j.get<double>());
        case bp::Json::value_t::string: return py::str(j.get<std::string>());
        case bp::Json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_py(v));
            return out;
        }
        case bp::Json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
            return out;
        }
        default: return py::none();
    }
}

bp::TrainConfig train_config(double lambda, int max_iters, double grad_tol, int num_classes) {
    bp::TrainConfig c;
    c.lambda = lambda;
    c.max_iters = max_iters;
    c.grad_tol = grad_tol;
    c.num_classes = num_classes;
    c.validate();
    return c;
}

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

bp::ActivationTensor make_tensor(const std::string& model_id, FloatArray values, std::vector<std::string> ids) {
    if (values.ndim() != 3) throw bp::InvalidArgument("activations must be a 3-d array (layers, samples, dims)");
    const auto* p = values.data();
    std::vector<float> data(p, p + values.size());
    return bp::ActivationTensor(model_id, values.shape(0), values.shape(1), values.shape(2), std::move(ids),
                                std::move(data));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Layer-wise linear probing of Bloom-level structure in LLM activations";
    m.attr("__version__") = std::string(bp::toolkit_version());
    py::tuple levels(bp::kNumBloomLevels);
    for (int i = 0; i < bp::kNumBloomLevels; ++i) levels[i] = py::str(std::string(bp::kBloomLevelNames[i]));
    m.attr("LEVELS") = levels;

    auto error = py::register_exception<bp::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<bp::ConfigError>(m, "ConfigError", error);
    auto data_error = py::register_exception<bp::DataError>(m, "DataError", error);
    py::register_exception<bp::ParseError>(m, "ParseError", data_error);
    py::register_exception<bp::ValidationError>(m, "ValidationError", data_error);
    auto format_error = py::register_exception<bp::FormatError>(m, "FormatError", data_error);
    py::register_exception<bp::UnsupportedVersionError>(m, "UnsupportedVersionError", format_error);
    py::register_exception<bp::AlignmentError>(m, "AlignmentError", data_error);
    py::register_exception<bp::NumericalError>(m, "NumericalError", data_error);
    py::register_exception<bp::BoundsError>(m, "BoundsError", error);
    py::register_exception<bp::InvalidArgument>(m, "InvalidArgument", error);

    // corpus
    py::class_<bp::Question>(m, "Question")
        .def(py::init([](std::string id, std::string text, int level, const std::string& source) {
                 return bp::Question{std::move(id), std::move(text), level, bp::source_from_string(source)};
             }),
             py::arg("id"), py::arg("text"), py::arg("bloom_level"), py::arg("source") = "other")
        .def_readonly("id", &bp::Question::id)
        .def_readonly("text", &bp::Question::text)
        .def_readonly("bloom_level", &bp::Question::bloom_level)
        .def_property_readonly("source", [](const bp::Question& q) { return std::string(bp::to_string(q.source)); })
        .def("__repr__", [](const bp::Question& q) {
            return "Question(id='" + q.id + "', bloom_level=" + std::to_string(q.bloom_level) + ")";
        });

    py::class_<bp::Corpus>(m, "Corpus")
        .def(py::init<std::vector<bp::Question>>(), py::arg("questions"))
        .def("__len__", &bp::Corpus::size)
        .def("__getitem__",
             [](const bp::Corpus& c, std::size_t i) {
                 if (i >= c.size()) throw py::index_error();
                 return c[i];
             })
        .def_property_readonly("questions", &bp::Corpus::questions)
        .def_property_readonly("ids", &bp::Corpus::ids)
        .def_property_readonly("texts", &bp::Corpus::texts)
        .def_property_readonly("labels", &bp::Corpus::labels)
        .def("class_counts", &bp::Corpus::class_counts)
        .def("subset", &bp::Corpus::subset, py::arg("indices"));

    m.def("load_corpus", py::overload_cast<const std::filesystem::path&>(&bp::load_corpus), py::arg("path"));
    m.def("parse_corpus_jsonl", &bp::parse_corpus_jsonl, py::arg("content"));
    m.def("parse_corpus_delimited", &bp::parse_corpus_delimited, py::arg("content"));
    m.def("balance_downsample", &bp::balance_downsample, py::arg("corpus"), py::arg("seed"));
    m.def(
        "length_analysis",
        [](const bp::Corpus& c, double alpha) { return to_py(bp::to_json(bp::length_analysis(c, alpha))); },
        py::arg("corpus"), py::arg("alpha") = 0.05);

    // activation store
    py::class_<bp::ActivationTensor>(m, "ActivationTensor")
        .def(py::init(&make_tensor), py::arg("model_id"), py::arg("values"), py::arg("sample_ids"))
        .def_property_readonly("model_id", &bp::ActivationTensor::model_id)
        .def_property_readonly("n_layers", &bp::ActivationTensor::n_layers)
        .def_property_readonly("n_samples", &bp::ActivationTensor::n_samples)
        .def_property_readonly("d_model", &bp::ActivationTensor::d_model)
        .def_property_readonly("sample_ids", &bp::ActivationTensor::sample_ids)
        .def("layer",
             [](const bp::ActivationTensor& t, std::size_t l) {
                 const auto s = bp::layer_slice(t, l);
                 return bp::RowMatrixF(s.values);
             },
             py::arg("layer"))
        .def("to_numpy",
             [](const bp::ActivationTensor& t) {
                 FloatArray out({t.n_layers(), t.n_samples(), t.d_model()});
                 std::copy(t.data().begin(), t.data().end(), out.mutable_data());
                 return out;
             })
        .def("__eq__", &bp::ActivationTensor::operator==);

    m.def("read_tensor", &bp::read_tensor, py::arg("path"));
    m.def("write_tensor", &bp::write_tensor, py::arg("tensor"), py::arg("path"));
    m.def(
        "encode_tensor",
        [](const bp::ActivationTensor& t) {
            const auto b = bp::encode_tensor(t);
            return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
        },
        py::arg("tensor"));
    m.def(
        "decode_tensor",
        [](const py::bytes& b) {
            const std::string s = b;
            return bp::decode_tensor({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
        },
        py::arg("data"));

    // probe
    py::class_<bp::LinearProbe>(m, "LinearProbe")
        .def_property_readonly("weights", [](const bp::LinearProbe& p) { return p.params.weights; })
        .def_property_readonly("bias", [](const bp::LinearProbe& p) { return p.params.bias; })
        .def_property_readonly("means", [](const bp::LinearProbe& p) { return p.standardizer.means; })
        .def_property_readonly("scales", [](const bp::LinearProbe& p) { return p.standardizer.scales; })
        .def_readonly("lambda_", &bp::LinearProbe::lambda)
        .def_property_readonly("num_classes", &bp::LinearProbe::num_classes)
        .def_property_readonly("iterations", [](const bp::LinearProbe& p) { return p.train_meta.iterations; })
        .def_property_readonly("converged", [](const bp::LinearProbe& p) { return p.train_meta.converged; })
        .def_property_readonly("final_loss", [](const bp::LinearProbe& p) { return p.train_meta.final_loss; })
        .def_property_readonly("loss_history", [](const bp::LinearProbe& p) { return p.train_meta.loss_history; })
        .def("predict", [](const bp::LinearProbe& p, const bp::Matrix& x) { return bp::predict(p, x); })
        .def("predict_proba", [](const bp::LinearProbe& p, const bp::Matrix& x) { return bp::predict_proba(p, x); })
        .def(
            "to_json", [](const bp::LinearProbe& p, const std::string& model_id,
                          std::size_t layer) { return bp::dump(bp::probe_to_json(p, model_id, layer)); },
            py::arg("model_id") = "", py::arg("layer") = 0)
        .def_static(
            "from_json", [](const std::string& s) { return bp::probe_from_json(bp::Json::parse(s)); },
            py::arg("text"));

    m.def(
        "train_probe",
        [](const bp::Matrix& x, const std::vector<int>& y, double lambda, int max_iters, double grad_tol,
           int num_classes) {
            const auto cfg = train_config(lambda, max_iters, grad_tol, num_classes);
            py::gil_scoped_release release;
            return bp::train_probe(x, y, cfg);
        },
        py::arg("x"), py::arg("y"), py::arg("lambda_") = 1.0, py::arg("max_iters") = 1000,
        py::arg("grad_tol") = 1e-6, py::arg("num_classes") = 0);
    m.def(
        "loss_and_grad",
        [](const bp::Matrix& w, const bp::Vector& b, const bp::Matrix& x, const std::vector<int>& y, double lambda) {
            const auto r = bp::loss_and_grad(bp::ProbeParams{w, b}, x, y, lambda);
            return py::make_tuple(r.loss, r.grad_weights, r.grad_bias);
        },
        py::arg("weights"), py::arg("bias"), py::arg("x"), py::arg("y"), py::arg("lambda_"));

    // evaluation
    m.def(
        "stratified_split",
        [](const std::vector<int>& labels, double ratio, std::uint64_t seed) {
            const auto s = bp::stratified_split(labels, ratio, seed);
            return py::make_tuple(s.train, s.test);
        },
        py::arg("labels"), py::arg("ratio") = 0.8, py::arg("seed") = 42);
    m.def(
        "evaluate",
        [](const std::vector<int>& t, const std::vector<int>& p, int k) {
            return to_py(bp::to_json(bp::evaluate(t, p, k)));
        },
        py::arg("y_true"), py::arg("y_pred"), py::arg("num_classes") = 6);

    // layerscan
    m.def(
        "detect_cso", [](const std::vector<double>& acc, double tau) { return bp::detect_cso(acc, tau); },
        py::arg("accuracies"), py::arg("tau") = bp::kDefaultTau);
    m.def(
        "scan_layers",
        [](const bp::ActivationTensor& t, const bp::Corpus& c, double tau, double ratio, std::uint64_t seed,
           double lambda, int max_iters, double grad_tol, unsigned threads) {
            auto cfg = train_config(lambda, max_iters, grad_tol, 0);
            cfg.seed = seed;
            bp::ScanOptions opts;
            opts.threads = threads;
            bp::ScanReport report;
            {
                py::gil_scoped_release release;
                report = bp::scan_layers(t, c, bp::stratified_split(c.labels(), ratio, seed), cfg, tau, opts);
            }
            return to_py(bp::to_json(report));
        },
        py::arg("tensor"), py::arg("corpus"), py::arg("tau") = bp::kDefaultTau, py::arg("ratio") = 0.8,
        py::arg("seed") = 42, py::arg("lambda_") = 1.0, py::arg("max_iters") = 1000, py::arg("grad_tol") = 1e-6,
        py::arg("threads") = 0);

    // geometry
    m.def(
        "class_centroids",
        [](const bp::ActivationTensor& t, std::size_t layer, const std::vector<int>& labels, int k) {
            return bp::class_centroids(bp::layer_slice(t, layer), labels, k).centroids;
        },
        py::arg("tensor"), py::arg("layer"), py::arg("labels"), py::arg("num_classes") = 6);
    m.def(
        "centroid_profile",
        [](const bp::ActivationTensor& t, const std::vector<int>& labels, int k) {
            return to_py(bp::to_json(bp::centroid_profile(t, labels, k)));
        },
        py::arg("tensor"), py::arg("labels"), py::arg("num_classes") = 6);

    // baselines
    py::class_<bp::TfidfModel>(m, "TfidfModel")
        .def_property_readonly("vocabulary", &bp::TfidfModel::vocabulary)
        .def_property_readonly("idf", &bp::TfidfModel::idf)
        .def("__len__", &bp::TfidfModel::size)
        .def("transform", &bp::TfidfModel::transform, py::arg("texts"))
        .def("to_json", [](const bp::TfidfModel& t) { return bp::dump(bp::to_json(t)); })
        .def_static(
            "from_json", [](const std::string& s) { return bp::tfidf_from_json(bp::Json::parse(s)); },
            py::arg("text"));
    m.def(
        "fit_tfidf",
        [](const std::vector<std::string>& texts, bool lowercase) {
            bp::TfidfConfig cfg;
            cfg.lowercase = lowercase;
            return bp::fit_tfidf(texts, cfg);
        },
        py::arg("texts"), py::arg("lowercase") = true);
    m.def("tfidf_tokenize", &bp::tfidf_tokenize, py::arg("text"), py::arg("lowercase") = true);
    m.def(
        "run_text_baseline",
        [](const bp::Corpus& c, const std::string& features, const std::optional<std::string>& embeddings,
           std::uint64_t seed, double ratio, double lambda, int max_iters, double grad_tol) {
            bp::FeatureSource src = bp::TfidfFeatures{};
            if (features == "embeddings") {
                if (!embeddings) throw bp::InvalidArgument("features='embeddings' needs an embeddings path");
                src = bp::EmbeddingFeatures{*embeddings};
            } else if (features != "tfidf") {
                throw bp::InvalidArgument("features must be 'tfidf' or 'embeddings'");
            }
            auto cfg = train_config(lambda, max_iters, grad_tol, 0);
            cfg.seed = seed;
            return to_py(bp::to_json(bp::run_text_baseline(c, src, seed, cfg, ratio)));
        },
        py::arg("corpus"), py::arg("features") = "tfidf", py::arg("embeddings") = py::none(), py::arg("seed") = 42,
        py::arg("ratio") = 0.8, py::arg("lambda_") = 1.0, py::arg("max_iters") = 1000, py::arg("grad_tol") = 1e-6);

    // pipeline
    m.def(
        "run_pipeline",
        [](const std::map<std::string, std::string>& values) {
            const auto cfg = bp::parse_config(values);
            bp::RunManifest manifest;
            {
                py::gil_scoped_release release;
                manifest = bp::run_pipeline(cfg);
            }
            return to_py(manifest.to_json());
        },
        py::arg("config"),
        "Runs the pipeline from flat config keys (corpus, tensors, out, commands, ...); returns the manifest.");
}
