#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ceca/cli.hpp"
#include "ceca/error.hpp"
#include "ceca/serialization.hpp"
#include "ceca/synthetic.hpp"

namespace py = pybind11;
using namespace ceca;

namespace {

Index encode_role(const std::optional<RoleVocabulary>& role, const std::string& value) {
  return value.empty() ? role->values.missing() : role->values.encode(value);
}

std::map<std::string, double> predict_next(const DbnModel& model,
                                           const std::vector<std::string>& prefix,
                                           const std::vector<std::string>& backgrounds,
                                           const std::vector<std::string>& symptoms,
                                           const std::optional<std::string>& next_background) {
  const Vocabulary& v = model.vocabulary;
  if (!backgrounds.empty() && (!v.background || backgrounds.size() != prefix.size()))
    throw ConfigError("backgrounds need a background node and one value per prefix event");
  if (!symptoms.empty() && (!v.symptom || symptoms.size() != prefix.size()))
    throw ConfigError("symptoms need a symptom node and one value per prefix event");
  if (next_background && !v.background) throw ConfigError("model has no background node");

  std::vector<Slice> slices;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    Slice s;
    s.event = v.activity.encode(prefix[i]);
    if (v.background)
      s.background = backgrounds.empty() ? Slice::kWithheld : encode_role(v.background, backgrounds[i]);
    if (v.symptom)
      s.symptom = symptoms.empty() ? Slice::kWithheld : encode_role(v.symptom, symptoms[i]);
    slices.push_back(s);
  }
  std::optional<Index> nb;
  if (next_background) nb = v.background->values.encode(*next_background);

  const auto dist = predict_next_event(model, slices, nb);
  const auto labels = labels_of(v.activity);
  std::map<std::string, double> result;
  for (std::size_t i = 0; i < labels.size(); ++i) result[labels[i]] = dist.probs[i];
  return result;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the ceca next-event predictor";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_command(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI subcommand in-process; returns (exit_code, stdout, stderr).");

  m.def(
      "synthesize",
      [](const std::string& kind, std::size_t traces, std::uint64_t seed) {
        return write_csv_string(generate({parse_synthetic_kind(kind), traces, seed}));
      },
      py::arg("kind"), py::arg("traces") = 1000, py::arg("seed") = 0,
      "Generate a synthetic log as CSV text.");

  py::class_<DbnModel>(m, "Model")
      .def_static("load", [](const std::string& path) { return load_model(path); }, py::arg("path"))
      .def("save", [](const DbnModel& model, const std::string& path) { save_model(path, model); },
           py::arg("path"))
      .def("to_json", [](const DbnModel& model) { return dump(model_to_json(model)); })
      .def_property_readonly("variant",
                             [](const DbnModel& model) { return std::string(to_string(model.variant)); })
      .def_property_readonly("hidden_states", &DbnModel::hidden_states)
      .def_property_readonly("activities",
                             [](const DbnModel& model) { return labels_of(model.vocabulary.activity); })
      .def("predict_next", &predict_next, py::arg("prefix"),
           py::arg("backgrounds") = std::vector<std::string>{},
           py::arg("symptoms") = std::vector<std::string>{},
           py::arg("next_background") = std::nullopt,
           "Next-event distribution as {activity: probability}. Omitted prefix context is "
           "marginalized.");
}
