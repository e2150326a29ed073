#include <memory>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfc/augment.hpp"
#include "cfc/cfc.hpp"
#include "cfc/cli.hpp"
#include "cfc/dataset.hpp"
#include "cfc/detail/text.hpp"
#include "cfc/error.hpp"
#include "cfc/infogain.hpp"
#include "cfc/model_io.hpp"

namespace py = pybind11;

namespace {

struct Candidate {
    std::size_t k = 0;
    double cv_accuracy = 0.0;
    std::size_t feature_count = 0;
    bool selected = false;
};

std::vector<cfc::Cell> parse_row(const cfc::CfcModel& model,
                                 const std::vector<std::string>& tokens) {
    if (tokens.size() != model.schema.size())
        throw cfc::DataError("expected " + std::to_string(model.schema.size()) +
                             " feature values, got " + std::to_string(tokens.size()));
    std::vector<cfc::Cell> row;
    row.reserve(tokens.size());
    for (std::size_t q = 0; q < tokens.size(); ++q)
        row.push_back(cfc::parse_cell(tokens[q], model.schema.at(q),
                                      model.schema.missing_token()));
    return row;
}

std::pair<std::shared_ptr<cfc::CfcModel>, std::vector<Candidate>> train_files(
    const std::string& schema_path, const std::string& data_path,
    const std::string& label_column, std::vector<std::size_t> candidates, int mode,
    std::size_t folds, double alpha, double tolerance, std::size_t max_iterations,
    std::size_t bins, std::uint64_t seed, bool refit_per_fold, std::size_t threads,
    const std::string& strata_column) {
    cfc::SchemaFile schema_file = cfc::load_schema(schema_path);
    const std::string label = label_column.empty() ? schema_file.label_column : label_column;
    cfc::Table table = cfc::read_table(data_path);

    cfc::CfcConfig cfg;
    cfg.candidates = std::move(candidates);
    cfg.mode = cfc::manipulation_mode_from_int(mode);
    cfg.folds = folds;
    cfg.fcm.alpha = alpha;
    cfg.fcm.tolerance = tolerance;
    cfg.fcm.max_iterations = max_iterations;
    cfg.bins = bins;
    cfg.seed = seed;
    cfg.refit_per_fold = refit_per_fold;
    cfg.threads = threads;
    cfg.validate();

    std::vector<std::string> strata;
    cfc::Dataset d = [&] {
        if (strata_column.empty())
            return cfc::dataset_from_table(table, schema_file.schema, label);
        std::vector<std::vector<std::string>> extras;
        auto data = cfc::dataset_from_table(table, schema_file.schema, label, {strata_column},
                                            &extras);
        strata = std::move(extras.front());
        return data;
    }();

    cfc::TrainResult result = cfc::train(d, cfg, strata);
    std::vector<Candidate> report;
    report.reserve(result.candidates.size());
    for (const auto& c : result.candidates)
        report.push_back({c.k, c.cv_accuracy, c.classifier.schema().size(),
                          c.k == result.model.k});
    return {std::make_shared<cfc::CfcModel>(std::move(result.model)), std::move(report)};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "cluster-feature classification";
    m.attr("__version__") = cfc::cli::kToolVersion;

    py::register_exception<cfc::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<cfc::ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<cfc::Prediction>(m, "Prediction")
        .def_readonly("label", &cfc::Prediction::label)
        .def_readonly("probabilities", &cfc::Prediction::probabilities)
        .def_readonly("z", &cfc::Prediction::z)
        .def_readonly("b", &cfc::Prediction::b)
        .def_readonly("memberships", &cfc::Prediction::memberships)
        .def("__repr__", [](const cfc::Prediction& p) {
            return "Prediction(label='" + p.label + "', z=" + std::to_string(p.z) +
                   ", b=" + cfc::detail::format_double(p.b) + ")";
        });

    py::class_<Candidate>(m, "Candidate")
        .def_readonly("k", &Candidate::k)
        .def_readonly("cv_accuracy", &Candidate::cv_accuracy)
        .def_readonly("feature_count", &Candidate::feature_count)
        .def_readonly("selected", &Candidate::selected)
        .def("__repr__", [](const Candidate& c) {
            return "Candidate(k=" + std::to_string(c.k) +
                   ", cv_accuracy=" + cfc::detail::format_double(c.cv_accuracy) +
                   (c.selected ? ", selected=True)" : ")");
        });

    py::class_<cfc::CfcModel, std::shared_ptr<cfc::CfcModel>>(m, "Model")
        .def_property_readonly("k", [](const cfc::CfcModel& m) { return m.k; })
        .def_property_readonly(
            "mode", [](const cfc::CfcModel& m) { return cfc::manipulation_mode_to_int(m.mode); })
        .def_property_readonly("feature_names",
                               [](const cfc::CfcModel& m) {
                                   std::vector<std::string> names;
                                   for (const auto& f : m.schema.features())
                                       names.push_back(f.name);
                                   return names;
                               })
        .def_property_readonly(
            "classes", [](const cfc::CfcModel& m) { return m.classifier.classes(); })
        .def("predict",
             [](const cfc::CfcModel& m, const std::vector<std::string>& tokens) {
                 return cfc::predict(m, parse_row(m, tokens));
             },
             py::arg("tokens"))
        .def("predict_file",
             [](const cfc::CfcModel& m, const std::string& path) {
                 cfc::Table table = cfc::read_table(path);
                 return cfc::predict_batch(m, cfc::rows_from_table(table, m.schema, path));
             },
             py::arg("path"))
        .def("save",
             [](const cfc::CfcModel& m, const std::string& path) { cfc::save_model(m, path); },
             py::arg("path"))
        .def("__repr__", [](const cfc::CfcModel& m) {
            return "Model(k=" + std::to_string(m.k) +
                   ", mode=" + std::to_string(cfc::manipulation_mode_to_int(m.mode)) + ")";
        });

    m.def("load_model",
          [](const std::string& path) {
              return std::make_shared<cfc::CfcModel>(cfc::load_model(path));
          },
          py::arg("path"));

    m.def("train", &train_files, py::arg("schema"), py::arg("data"),
          py::arg("label_column") = "",
          py::arg("candidates") = std::vector<std::size_t>{2, 3, 4, 5}, py::arg("mode") = 1,
          py::arg("folds") = 10, py::arg("alpha") = 3.0, py::arg("tolerance") = 1e-6,
          py::arg("max_iterations") = 300, py::arg("bins") = cfc::kDefaultInfoGainBins,
          py::arg("seed") = 0, py::arg("refit_per_fold") = false, py::arg("threads") = 1,
          py::arg("strata_column") = "",
          py::call_guard<py::gil_scoped_release>());

    m.def("entropy",
          [](const std::vector<std::string>& labels) { return cfc::entropy(labels); },
          py::arg("labels"));
}
