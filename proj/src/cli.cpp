#include "ceca/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ceca/benchmark.hpp"
#include "ceca/error.hpp"
#include "ceca/esa.hpp"
#include "ceca/evaluation.hpp"
#include "ceca/eventlog.hpp"
#include "ceca/learning.hpp"
#include "ceca/parallel.hpp"
#include "ceca/serialization.hpp"
#include "ceca/synthetic.hpp"

namespace ceca {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v <= 0) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + text + "'");
  }
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  for (const auto& part : split_list(text)) grid.push_back(parse_count(part, "hidden-state count"));
  if (grid.empty()) throw ConfigError("empty hidden-state grid");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos) {
    const auto n = parse_count(text, "n-gram order");
    return {n, n};
  }
  return {parse_count(text.substr(0, pos), "n-gram order"),
          parse_count(text.substr(pos + 2), "n-gram order")};
}

struct LogOptions {
  std::string path;
  std::string case_col = "case";
  std::string activity_col = "activity";
  std::string timestamp_col = "timestamp";
  std::string timestamp_format;
  std::vector<std::string> attrs;
  std::size_t min_length = 3;
  bool end_marker = false;
};

void add_log_options(CLI::App* app, LogOptions& o) {
  app->add_option("--log", o.path, "event log CSV")->required();
  app->add_option("--case-col", o.case_col, "case id column");
  app->add_option("--activity-col", o.activity_col, "activity column");
  app->add_option("--timestamp-col", o.timestamp_col, "timestamp column");
  app->add_option("--timestamp-format", o.timestamp_format,
                  "std::get_time format; ISO-8601 when empty");
  app->add_option("--attr", o.attrs, "attribute column, name[:numeric]")
      ->take_all()
      ->delimiter(',')
      ->default_str("");
  app->add_option("--min-length", o.min_length, "drop traces shorter than this");
  app->add_flag("--end-marker", o.end_marker, "append an end-of-trace event");
}

// Declared attributes plus any role attributes not declared explicitly.
ColumnMapping make_mapping(const LogOptions& o, const std::vector<AttributeSpec>& implied) {
  ColumnMapping m;
  m.case_col = o.case_col;
  m.activity_col = o.activity_col;
  m.timestamp_col = o.timestamp_col;
  if (!o.timestamp_format.empty()) m.timestamp_format = o.timestamp_format;
  for (const auto& a : o.attrs) {
    const auto pos = a.find(':');
    AttributeSpec spec{a.substr(0, pos), AttributeKind::kCategorical};
    if (pos != std::string::npos) {
      const std::string kind = a.substr(pos + 1);
      if (kind == "numeric")
        spec.kind = AttributeKind::kNumeric;
      else if (kind != "categorical")
        throw ConfigError("bad attribute kind in '" + a + "'");
    }
    m.attributes.push_back(spec);
  }
  for (const auto& spec : implied) {
    auto it = std::find_if(m.attributes.begin(), m.attributes.end(),
                           [&](const AttributeSpec& a) { return a.name == spec.name; });
    if (it == m.attributes.end()) m.attributes.push_back(spec);
  }
  return m;
}

EventLog load_log(const LogOptions& o, const std::vector<AttributeSpec>& implied,
                  std::ostream& err) {
  std::ifstream in(o.path, std::ios::binary);
  if (!in) throw DataError("cannot open log '" + o.path + "'");
  EventLog log = parse_csv(in, make_mapping(o, implied));
  FilterResult filtered = filter_short_traces(log, o.min_length);
  if (filtered.removed > 0) {
    err << "warning: removed " << filtered.removed << " of " << filtered.original
        << " traces shorter than " << o.min_length << " ("
        << 100.0 * filtered.removed_fraction() << "%)\n";
  }
  if (o.end_marker) return append_end_event(filtered.log);
  return std::move(filtered.log);
}

// Resolved option values of a subcommand, for echoing into artifacts.
Json echo_config(const CLI::App* app) {
  Json cfg = Json::object();
  cfg["subcommand"] = app->get_name();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt == app->get_help_ptr() || opt->get_lnames().empty()) continue;
    const std::string key = opt->get_lnames().front();
    const bool list = opt->get_expected_max() > 1;
    if (opt->count() > 0 || list) {
      const auto results = opt->reduced_results();
      if (results.size() == 1 && !list)
        cfg[key] = results.front();
      else
        cfg[key] = results;
    } else {
      cfg[key] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-")
    out << content;
  else
    write_file_atomic(path, content);
}

std::string fit_report_path(const std::string& model_path) {
  fs::path p(model_path);
  fs::path stem = p.parent_path() / p.stem();
  return stem.string() + ".fit.json";
}

std::vector<AttributeSpec> model_attributes(const DbnModel& model) {
  std::vector<AttributeSpec> out;
  for (const auto* role : {&model.vocabulary.background, &model.vocabulary.symptom}) {
    if (!*role) continue;
    const bool numeric = std::any_of(
        model.discretization.begin(), model.discretization.end(),
        [&](const DiscretizationSpec& d) { return d.attribute == (*role)->attribute; });
    out.push_back({(*role)->attribute,
                   numeric ? AttributeKind::kNumeric : AttributeKind::kCategorical});
  }
  return out;
}

EncodedLog encode_for_model(const EventLog& log, const DbnModel& model) {
  EventLog prepared = log;
  for (const auto& spec : model.discretization)
    prepared = apply_discretization(prepared, spec);
  return encode_log(prepared, model.vocabulary);
}

struct EmOptions {
  std::string hidden_states = "2,4,6,8,10";
  std::size_t restarts = 5;
  std::size_t max_iters = 200;
  double tol = 1e-6;
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::size_t bins = 40;
};

void add_em_options(CLI::App* app, EmOptions& o) {
  app->add_option("--hidden-states", o.hidden_states, "hidden-state grid, e.g. 2,4,6");
  app->add_option("--restarts", o.restarts, "EM restarts per hidden-state count");
  app->add_option("--max-iters", o.max_iters, "EM iteration cap");
  app->add_option("--tol", o.tol, "relative log-likelihood convergence tolerance");
  app->add_option("--epsilon", o.epsilon, "pseudo-count added to every CPD cell");
  app->add_option("--seed", o.seed, "base random seed");
  app->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  app->add_option("--bins", o.bins, "equal-width bins for numeric role attributes");
}

EmConfig make_em(const EmOptions& o) {
  EmConfig em;
  em.max_iters = o.max_iters;
  em.rel_tol = o.tol;
  em.smoothing_epsilon = o.epsilon;
  em.restarts = o.restarts;
  em.seed = o.seed;
  em.threads = o.threads;
  em.validate();
  return em;
}

Index encode_value(const VariableVocabulary& vocab, const std::string& value) {
  return value.empty() ? vocab.missing() : vocab.encode(value);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Context-sensitive next-event prediction with dynamic Bayesian networks",
               "ceca"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic validation log");
  std::string synth_kind, synth_out;
  std::size_t synth_traces = 1000;
  std::uint64_t synth_seed = 0;
  synth->add_option("--kind", synth_kind,
                    "background-causal|background-random|symptom-causal|symptom-random")
      ->required();
  synth->add_option("--traces", synth_traces, "number of traces");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--out", synth_out, "output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "fit a DBN on an event log");
  LogOptions train_log;
  EmOptions train_em;
  std::string structure, background, symptom, train_out, train_report;
  add_log_options(train, train_log);
  add_em_options(train, train_em);
  train->add_option("--structure", structure, "pfa|background|symptom|full (default: from roles)");
  train->add_option("--background", background, "background attribute");
  train->add_option("--symptom", symptom, "symptom attribute");
  train->add_option("--out", train_out, "model JSON")->required();
  train->add_option("--report", train_report, "fit report JSON (default: <out>.fit.json)");

  // predict
  auto* predict = app.add_subcommand("predict", "query a trained model");
  std::string predict_model, prefix, prefix_bg, prefix_sy, next_bg, predict_target = "next-event",
      symptom_mode = "conditional", predict_format = "json", predict_out;
  predict->add_option("--model", predict_model, "model JSON")->required();
  predict->add_option("--prefix", prefix, "comma-separated activities")->required();
  predict->add_option("--backgrounds", prefix_bg,
                      "background value per prefix slice; omitted values are marginalized");
  predict->add_option("--symptoms", prefix_sy,
                      "symptom value per prefix slice; omitted values are marginalized");
  predict->add_option("--next-background", next_bg, "background of the predicted slice");
  predict->add_option("--target", predict_target, "next-event|symptom");
  predict->add_option("--symptom-mode", symptom_mode, "conditional|marginal");
  predict->add_option("--format", predict_format, "json|csv");
  predict->add_option("--out", predict_out, "output file (default stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a model on a log");
  LogOptions eval_log;
  std::string eval_model, eval_target = "next-event", eval_mode = "conditional",
      eval_format = "json", eval_out;
  add_log_options(evaluate, eval_log);
  evaluate->add_option("--model", eval_model, "model JSON")->required();
  evaluate->add_option("--target", eval_target, "next-event|symptom");
  evaluate->add_option("--symptom-mode", eval_mode, "conditional|marginal");
  evaluate->add_option("--format", eval_format, "json|csv");
  evaluate->add_option("--out", eval_out, "output file (default stdout)");

  // esa
  auto* esa = app.add_subcommand("esa", "evidence sensitivity analysis");
  LogOptions esa_log;
  std::string esa_model, esa_out, esa_summary;
  add_log_options(esa, esa_log);
  esa->add_option("--model", esa_model, "model JSON")->required();
  esa->add_option("--out", esa_out, "raw NL values CSV (default stdout)");
  esa->add_option("--summary", esa_summary, "JSON summary");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "repeated-split benchmark");
  LogOptions bench_log;
  EmOptions bench_em;
  std::string roles, ngrams = "3..7", bench_out, bench_csv_path, bench_format = "json",
      dataset_name, bench_mode = "conditional";
  std::size_t repetitions = 10;
  double split = 0.7;
  bool no_pfa = false, no_ngram = false;
  add_log_options(bench, bench_log);
  add_em_options(bench, bench_em);
  bench->add_option("--roles", roles, "attr:background,attr:symptom[,attr:symptom:symptom]");
  bench->add_flag("--no-pfa", no_pfa, "skip the context-free PFA structure");
  bench->add_flag("--no-ngram", no_ngram, "skip the n-gram sweep");
  bench->add_option("--ngrams", ngrams, "n-gram orders, e.g. 3..7");
  bench->add_option("--repetitions", repetitions, "random splits");
  bench->add_option("--split", split, "training fraction");
  bench->add_option("--dataset", dataset_name, "dataset label (default: log file stem)");
  bench->add_option("--symptom-mode", bench_mode, "conditional|marginal");
  bench->add_option("--format", bench_format, "json|csv for --out");
  bench->add_option("--out", bench_out, "report file (default stdout)");
  bench->add_option("--csv", bench_csv_path, "additional table-shaped CSV");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfigError;
  }

  auto parse_mode = [](const std::string& m) {
    if (m == "conditional") return SymptomQuery::kConditional;
    if (m == "marginal") return SymptomQuery::kMarginal;
    throw ConfigError("bad symptom mode '" + m + "'");
  };
  auto parse_target = [](const std::string& t) {
    if (t == "next-event") return PredictionTarget::kNextEvent;
    if (t == "symptom") return PredictionTarget::kSymptom;
    throw ConfigError("bad target '" + t + "'");
  };
  auto check_format = [](const std::string& f) {
    if (f != "json" && f != "csv") throw ConfigError("bad format '" + f + "'");
  };

  try {
    if (synth->parsed()) {
      SyntheticSpec spec{parse_synthetic_kind(synth_kind), synth_traces, synth_seed};
      write_file_atomic(synth_out, write_csv_string(generate(spec)));
      return kExitOk;
    }

    if (train->parsed()) {
      std::optional<std::string> bg, sy;
      if (!background.empty()) bg = background;
      if (!symptom.empty()) sy = symptom;
      StructureVariant variant = bg && sy ? StructureVariant::kFull
                                 : bg     ? StructureVariant::kBackground
                                 : sy     ? StructureVariant::kSymptom
                                          : StructureVariant::kPfa;
      if (!structure.empty() && parse_structure(structure) != variant)
        throw ConfigError("--structure " + structure +
                          " does not match the --background/--symptom roles given");

      std::vector<AttributeSpec> implied;
      if (bg) implied.push_back({*bg, AttributeKind::kCategorical});
      if (sy) implied.push_back({*sy, AttributeKind::kCategorical});
      EventLog log = load_log(train_log, implied, err);

      std::vector<DiscretizationSpec> specs;
      for (const auto& attr : {bg, sy}) {
        if (!attr) continue;
        const AttributeSpec* a = log.find_attribute(*attr);
        if (a != nullptr && a->kind == AttributeKind::kNumeric) {
          auto [binned, spec] = discretize_attribute(log, *attr, train_em.bins);
          log = std::move(binned);
          specs.push_back(spec);
        }
      }
      const EncodedLog encoded = encode_log(log, Roles{bg, sy});
      const EmConfig em = make_em(train_em);
      auto [model, selection] =
          select_hidden_states(variant, encoded, parse_grid(train_em.hidden_states), em);
      model.discretization = specs;

      save_model(train_out, model);
      Json report{{"run", echo_config(train)},
                  {"traces", encoded.traces.size()},
                  {"selection", to_json(selection)}};
      write_file_atomic(train_report.empty() ? fit_report_path(train_out) : train_report,
                        dump(report));
      return kExitOk;
    }

    if (predict->parsed()) {
      check_format(predict_format);
      const DbnModel model = load_model(predict_model);
      const auto events = split_list(prefix);
      const auto bgs = split_list(prefix_bg);
      const auto sys = split_list(prefix_sy);
      if (!bgs.empty() && bgs.size() != events.size())
        throw ConfigError("--backgrounds needs one value per prefix event");
      if (!sys.empty() && sys.size() != events.size())
        throw ConfigError("--symptoms needs one value per prefix event");
      if (!bgs.empty() && !model.vocabulary.background)
        throw ConfigError("model has no background node");
      if (!sys.empty() && !model.vocabulary.symptom)
        throw ConfigError("model has no symptom node");

      std::vector<Slice> slices;
      for (std::size_t i = 0; i < events.size(); ++i) {
        Slice s;
        s.event = model.vocabulary.activity.encode(events[i]);
        if (model.vocabulary.background)
          s.background = bgs.empty() ? Slice::kWithheld
                                     : encode_value(model.vocabulary.background->values, bgs[i]);
        if (model.vocabulary.symptom)
          s.symptom = sys.empty() ? Slice::kWithheld
                                  : encode_value(model.vocabulary.symptom->values, sys[i]);
        slices.push_back(s);
      }

      PredictionDistribution dist;
      std::vector<std::string> labels;
      if (parse_target(predict_target) == PredictionTarget::kSymptom) {
        dist = predict_symptom(model, slices, parse_mode(symptom_mode));
        labels = labels_of(model.vocabulary.symptom->values);
      } else {
        std::optional<Index> nb;
        if (!next_bg.empty()) {
          if (!model.vocabulary.background) throw ConfigError("model has no background node");
          nb = model.vocabulary.background->values.encode(next_bg);
        }
        dist = predict_next_event(model, slices, nb);
        labels = labels_of(model.vocabulary.activity);
      }

      std::string payload;
      if (predict_format == "csv") {
        std::ostringstream csv;
        csv << "value,probability\n";
        for (std::size_t i = 0; i < dist.probs.size(); ++i)
          csv << labels[i] << ',' << dist.probs[i] << '\n';
        payload = csv.str();
      } else {
        Json doc = to_json(dist, labels);
        doc["run"] = echo_config(predict);
        payload = dump(doc);
      }
      write_output(predict_out, payload, out);
      return kExitOk;
    }

    if (evaluate->parsed()) {
      check_format(eval_format);
      const DbnModel model = load_model(eval_model);
      const EventLog log = load_log(eval_log, model_attributes(model), err);
      const EncodedLog encoded = encode_for_model(log, model);
      const auto target = parse_target(eval_target);
      const auto report = evaluate_model(model, encoded, target, parse_mode(eval_mode));
      const auto labels = target == PredictionTarget::kSymptom
                              ? labels_of(model.vocabulary.symptom->values)
                              : labels_of(model.vocabulary.activity);
      std::string payload;
      if (eval_format == "csv") {
        std::ostringstream csv;
        csv << "metric,value\naccuracy," << report.accuracy << "\nmacro_f1,"
            << report.macro_f1 << "\ntotal," << report.total << '\n';
        payload = csv.str();
      } else {
        Json doc{{"run", echo_config(evaluate)}, {"evaluation", to_json(report, labels)}};
        payload = dump(doc);
      }
      write_output(eval_out, payload, out);
      return kExitOk;
    }

    if (esa->parsed()) {
      const DbnModel model = load_model(esa_model);
      const EventLog log = load_log(esa_log, model_attributes(model), err);
      const EsaReport report = esa_report(model, encode_for_model(log, model));
      write_output(esa_out, esa_csv(report), out);
      if (!esa_summary.empty()) {
        Json doc{{"run", echo_config(esa)}, {"esa", to_json(report)}};
        write_file_atomic(esa_summary, dump(doc));
      }
      return kExitOk;
    }

    if (bench->parsed()) {
      check_format(bench_format);
      BenchmarkConfig config;
      config.dataset = dataset_name.empty() ? fs::path(bench_log.path).stem().string()
                                            : dataset_name;
      std::vector<AttributeSpec> implied;
      if (!no_pfa) config.structures.push_back(StructureConfig{});
      for (const auto& r : split_list(roles)) {
        StructureConfig sc = parse_structure_config(r);
        config.structures.push_back(sc);
        for (const auto& a : {sc.background, sc.symptom})
          if (a) implied.push_back({*a, AttributeKind::kCategorical});
      }
      config.k_grid = parse_grid(bench_em.hidden_states);
      config.em = make_em(bench_em);
      config.repetitions = repetitions;
      config.split_ratio = split;
      config.base_seed = bench_em.seed;
      config.include_ngram = !no_ngram;
      std::tie(config.ngram_min, config.ngram_max) = parse_range(ngrams);
      config.min_trace_length = bench_log.min_length;
      config.bin_count = bench_em.bins;
      config.symptom_query = parse_mode(bench_mode);
      config.threads = bench_em.threads;

      // Length filtering is part of the benchmark itself.
      LogOptions unfiltered = bench_log;
      unfiltered.min_length = 0;
      const EventLog log = load_log(unfiltered, implied, err);
      const BenchmarkReport report = run_benchmark(log, config);
      for (const auto& f : report.failures)
        err << "warning: repetition " << f.repetition << " " << f.label << ": " << f.message
            << '\n';

      std::string payload;
      if (bench_format == "csv") {
        payload = benchmark_csv(report);
      } else {
        Json doc = to_json(report);
        doc["run"] = echo_config(bench);
        payload = dump(doc);
      }
      write_output(bench_out, payload, out);
      if (!bench_csv_path.empty()) write_file_atomic(bench_csv_path, benchmark_csv(report));
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const ImpossibleEvidence& e) {
    err << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitConfigError;
}

}  // namespace ceca
