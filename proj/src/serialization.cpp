#include "ceca/serialization.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "ceca/error.hpp"

namespace ceca {
namespace {

Json nest(const std::vector<double>& data, const std::vector<std::size_t>& shape,
          std::size_t axis, std::size_t& offset) {
  Json arr = Json::array();
  if (axis + 1 == shape.size()) {
    for (std::size_t i = 0; i < shape[axis]; ++i) arr.push_back(data[offset++]);
    return arr;
  }
  for (std::size_t i = 0; i < shape[axis]; ++i)
    arr.push_back(nest(data, shape, axis + 1, offset));
  return arr;
}

Json nest(const CpdTable& table, const std::vector<std::size_t>& shape) {
  std::size_t offset = 0;
  return nest(table.data(), shape, 0, offset);
}

void flatten(const Json& node, const std::vector<std::size_t>& shape, std::size_t axis,
             std::vector<double>& out, const std::string& name) {
  if (!node.is_array() || node.size() != shape[axis])
    throw DataError("model table '" + name + "' has the wrong shape");
  for (const auto& child : node) {
    if (axis + 1 == shape.size()) {
      if (!child.is_number()) throw DataError("model table '" + name + "' has a non-number");
      out.push_back(child.get<double>());
    } else {
      flatten(child, shape, axis + 1, out, name);
    }
  }
}

void load_table(const Json& cpds, const char* name, const std::vector<std::size_t>& shape,
                CpdTable& table) {
  if (!cpds.contains(name)) throw DataError(std::string("model is missing table '") + name + "'");
  std::vector<double> flat;
  flat.reserve(table.rows() * table.cols());
  flatten(cpds.at(name), shape, 0, flat, name);
  for (std::size_t r = 0; r < table.rows(); ++r)
    for (std::size_t c = 0; c < table.cols(); ++c) table(r, c) = flat[r * table.cols() + c];
}

Json role_to_json(const std::optional<RoleVocabulary>& role) {
  if (!role) return nullptr;
  return Json{{"attribute", role->attribute}, {"values", role->values.values()}};
}

std::optional<RoleVocabulary> role_from_json(const Json& node) {
  if (node.is_null()) return std::nullopt;
  return RoleVocabulary{node.at("attribute").get<std::string>(),
                        VariableVocabulary(node.at("values").get<std::vector<std::string>>())};
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Json series_json(const MetricSeries& s) {
  return Json{{"mean", s.mean}, {"stddev", s.stddev}, {"values", s.values}};
}

const char* target_name(PredictionTarget t) {
  return t == PredictionTarget::kSymptom ? "symptom" : "next-event";
}

}  // namespace

Json model_to_json(const DbnModel& model) {
  const CpdSet& c = model.cpds;
  const CpdDims& d = c.dims;
  Json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["structure"] = std::string(to_string(model.variant));
  doc["hidden_states"] = d.hidden;
  doc["vocabularies"] = {{"activity", model.vocabulary.activity.values()},
                         {"background", role_to_json(model.vocabulary.background)},
                         {"symptom", role_to_json(model.vocabulary.symptom)}};
  Json disc = Json::array();
  for (const auto& s : model.discretization)
    disc.push_back({{"attribute", s.attribute}, {"bin_count", s.bin_count},
                    {"lo", s.lo}, {"hi", s.hi}});
  doc["discretization"] = disc;
  doc["cpds"] = {
      {"initial", nest(c.initial, {d.hidden})},
      {"background_emit", nest(c.background_emit, {d.hidden, d.backgrounds})},
      {"event_emit", nest(c.event_emit, {d.hidden, d.backgrounds, d.events})},
      {"symptom_emit", nest(c.symptom_emit, {d.events, d.symptoms})},
      {"transition",
       nest(c.transition, {d.hidden, d.events, d.backgrounds, d.symptoms, d.hidden})},
  };
  doc["metadata"] = {{"seed", model.metadata.seed},
                     {"em_iterations", model.metadata.em_iterations},
                     {"final_log_likelihood", model.metadata.final_log_likelihood},
                     {"smoothing_epsilon", model.metadata.smoothing_epsilon}};
  return doc;
}

DbnModel model_from_json(const Json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("unsupported model format_version " + std::to_string(version));
    DbnModel model;
    model.variant = parse_structure(doc.at("structure").get<std::string>());
    const auto& vocab = doc.at("vocabularies");
    model.vocabulary.activity =
        VariableVocabulary(vocab.at("activity").get<std::vector<std::string>>());
    model.vocabulary.background = role_from_json(vocab.at("background"));
    model.vocabulary.symptom = role_from_json(vocab.at("symptom"));
    for (const auto& s : doc.at("discretization"))
      model.discretization.push_back({s.at("attribute").get<std::string>(),
                                      s.at("bin_count").get<std::size_t>(),
                                      s.at("lo").get<double>(), s.at("hi").get<double>()});

    const CpdDims d = dims_for(model.variant, doc.at("hidden_states").get<std::size_t>(),
                               model.vocabulary);
    model.cpds = CpdSet(d);
    const auto& cpds = doc.at("cpds");
    load_table(cpds, "initial", {d.hidden}, model.cpds.initial);
    load_table(cpds, "background_emit", {d.hidden, d.backgrounds}, model.cpds.background_emit);
    load_table(cpds, "event_emit", {d.hidden, d.backgrounds, d.events}, model.cpds.event_emit);
    load_table(cpds, "symptom_emit", {d.events, d.symptoms}, model.cpds.symptom_emit);
    load_table(cpds, "transition", {d.hidden, d.events, d.backgrounds, d.symptoms, d.hidden},
               model.cpds.transition);
    if (!(model.cpds.max_normalization_error() <= 1e-9))
      throw DataError("model CPD rows do not sum to 1");

    const auto& meta = doc.at("metadata");
    model.metadata.format_version = version;
    model.metadata.seed = meta.at("seed").get<std::uint64_t>();
    model.metadata.em_iterations = meta.at("em_iterations").get<std::size_t>();
    const auto& fll = meta.at("final_log_likelihood");
    model.metadata.final_log_likelihood =
        fll.is_null() ? -std::numeric_limits<double>::infinity() : fll.get<double>();
    model.metadata.smoothing_epsilon = meta.at("smoothing_epsilon").get<double>();
    return model;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("inconsistent model document: ") + e.what());
  }
}

Json to_json(const EmConfig& config) {
  return Json{{"max_iters", config.max_iters},
              {"rel_tol", config.rel_tol},
              {"smoothing_epsilon", config.smoothing_epsilon},
              {"restarts", config.restarts},
              {"seed", config.seed}};
}

Json to_json(const FitReport& report) {
  Json doc{{"iterations", report.iterations},
           {"converged", report.converged},
           {"seed", report.seed},
           {"smoothing_epsilon", report.smoothing_epsilon},
           {"final_log_likelihood", report.final_log_likelihood()},
           {"history", report.history}};
  if (report.smoothing_epsilon > 0.0)
    doc["smoothing_note"] =
        "every count cell receives the pseudo-count above before normalization; "
        "unsmoothed maximum-likelihood tables leave hard zeros that make unseen "
        "held-out transitions impossible";
  return doc;
}

Json to_json(const HiddenStateSelection& selection) {
  Json table = Json::array();
  for (const auto& c : selection.candidates)
    table.push_back({{"hidden_states", c.hidden_states},
                     {"validation_accuracy", c.validation_accuracy},
                     {"train_log_likelihood", c.train_log_likelihood}});
  return Json{{"chosen_hidden_states", selection.chosen},
              {"candidates", table},
              {"fit", to_json(selection.final_fit)}};
}

std::vector<std::string> labels_of(const VariableVocabulary& vocab) {
  std::vector<std::string> out;
  for (Index i = 0; i < vocab.size(); ++i) out.push_back(vocab.decode(i));
  return out;
}

Json to_json(const EvaluationReport& report, const std::vector<std::string>& labels) {
  Json classes = Json::array();
  for (std::size_t i = 0; i < report.per_class.size(); ++i) {
    const auto& c = report.per_class[i];
    if (c.support == 0 && c.predicted == 0) continue;
    classes.push_back({{"label", i < labels.size() ? labels[i] : std::to_string(i)},
                       {"support", c.support},
                       {"predicted", c.predicted},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1}});
  }
  return Json{{"target", target_name(report.target)},
              {"total", report.total},
              {"correct", report.correct},
              {"accuracy", report.accuracy},
              {"macro_f1", report.macro_f1},
              {"per_class", classes},
              {"confusion", report.confusion}};
}

Json to_json(const PredictionDistribution& dist, const std::vector<std::string>& labels) {
  Json probs = Json::object();
  for (std::size_t i = 0; i < dist.probs.size(); ++i)
    probs[i < labels.size() ? labels[i] : std::to_string(i)] = dist.probs[i];
  const Index best = dist.argmax();
  return Json{{"target", target_name(dist.target)},
              {"argmax", best < labels.size() ? labels[best] : std::to_string(best)},
              {"probabilities", probs}};
}

Json to_json(const NgramSweep& sweep) {
  Json rows = Json::array();
  for (const auto& r : sweep.rows)
    rows.push_back({{"n", r.n}, {"accuracy", r.accuracy}, {"macro_f1", r.macro_f1}});
  return Json{{"rows", rows},
              {"best_accuracy_n", sweep.rows.at(sweep.best_accuracy).n},
              {"best_f1_n", sweep.rows.at(sweep.best_f1).n}};
}

Json to_json(const EsaReport& report) {
  const auto& s = report.summary;
  return Json{{"quartile_method", "linear interpolation at rank q*(n-1), inclusive"},
              {"points", report.points.size()},
              {"summary", {{"min", s.min}, {"q1", s.q1}, {"median", s.median},
                           {"q3", s.q3}, {"max", s.max}}},
              {"above_one", report.above_one},
              {"equal_one", report.equal_one},
              {"below_one", report.below_one},
              {"infinite", report.infinite},
              {"equal_tolerance", EsaReport::kEqualTolerance}};
}

Json to_json(const BenchmarkReport& report) {
  const BenchmarkConfig& c = report.config;
  Json structures = Json::array();
  for (const auto& s : c.structures) structures.push_back(s.label());
  Json config{{"dataset", c.dataset},
              {"structures", structures},
              {"hidden_state_grid", c.k_grid},
              {"em", to_json(c.em)},
              {"repetitions", c.repetitions},
              {"split_ratio", c.split_ratio},
              {"base_seed", c.base_seed},
              {"ngram_orders", {c.ngram_min, c.ngram_max}},
              {"min_trace_length", c.min_trace_length},
              {"bin_count", c.bin_count},
              {"symptom_query",
               c.symptom_query == SymptomQuery::kConditional ? "conditional" : "marginal"},
              {"protocol",
               "repeated random train/test splits at split_ratio, repetition r seeded "
               "base_seed + r; metrics are means over repetitions"}};

  Json entries = Json::array();
  for (const auto& e : report.entries) {
    Json entry{{"label", e.label}, {"kind", e.kind}};
    if (e.structure) {
      entry["structure"] = std::string(to_string(e.structure->variant));
      entry["attribute"] = e.structure->background   ? Json(*e.structure->background)
                           : e.structure->symptom    ? Json(*e.structure->symptom)
                                                     : Json(nullptr);
      entry["target"] = target_name(e.structure->target);
      entry["chosen_hidden_states"] = e.chosen_hidden_states;
    }
    if (e.ngram_order) entry["n"] = *e.ngram_order;
    entry["accuracy"] = series_json(e.accuracy);
    entry["macro_f1"] = series_json(e.macro_f1);
    entries.push_back(std::move(entry));
  }
  Json failures = Json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"repetition", f.repetition}, {"label", f.label}, {"message", f.message}});

  return Json{{"config", config},
              {"traces_before_filter", report.traces_before_filter},
              {"traces_after_filter", report.traces_after_filter},
              {"entries", entries},
              {"failures", failures}};
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string benchmark_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "dataset,metric";
  for (const auto& e : report.entries) out << ',' << e.label;
  out << '\n';
  out << report.config.dataset << ",accuracy";
  for (const auto& e : report.entries) out << ',' << number(e.accuracy.mean);
  out << '\n';
  out << report.config.dataset << ",macro_f1";
  for (const auto& e : report.entries) out << ',' << number(e.macro_f1.mean);
  out << '\n';
  return out.str();
}

std::string sweep_csv(const std::string& dataset, const NgramSweep& sweep) {
  std::ostringstream out;
  out << "dataset,metric";
  for (const auto& r : sweep.rows) out << ",n=" << r.n;
  out << '\n' << dataset << ",accuracy";
  for (const auto& r : sweep.rows) out << ',' << number(r.accuracy);
  out << '\n' << dataset << ",macro_f1";
  for (const auto& r : sweep.rows) out << ',' << number(r.macro_f1);
  out << '\n';
  return out.str();
}

std::string esa_csv(const EsaReport& report) {
  std::ostringstream out;
  out << "# quartiles: linear interpolation at rank q*(n-1) (inclusive method); "
         "infinite values excluded\n";
  out << "case_id,position,nl,finite\n";
  for (const auto& p : report.points) {
    out << p.case_id << ',' << p.position << ','
        << (p.nl.finite ? number(p.nl.value) : std::string("inf")) << ','
        << (p.nl.finite ? "true" : "false") << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_model(const std::filesystem::path& path, const DbnModel& model) {
  write_file_atomic(path, dump(model_to_json(model)));
}

DbnModel load_model(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw DataError("model file '" + path.string() + "' is not JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace ceca
