#include "ceca/benchmark.hpp"

#include <cmath>
#include <numeric>

#include "ceca/error.hpp"
#include "ceca/evaluation.hpp"
#include "ceca/parallel.hpp"

namespace ceca {
namespace {

struct StructureRun {
  bool ok = false;
  std::string error;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::size_t hidden_states = 0;
};

struct RepetitionResult {
  std::vector<StructureRun> structures;
  std::optional<NgramSweep> sweep;
  std::string ngram_error;
};

// Bins numeric role attributes on the training side and replays the bins on
// the test side.
std::pair<EventLog, EventLog> prepare(const EventLog& train, const EventLog& test,
                                      const std::vector<std::string>& attributes,
                                      std::size_t bins) {
  EventLog tr = train, te = test;
  for (const auto& name : attributes) {
    const AttributeSpec* spec = tr.find_attribute(name);
    if (spec == nullptr) throw ConfigError("unknown attribute '" + name + "'");
    if (spec->kind != AttributeKind::kNumeric) continue;
    auto [binned, dspec] = discretize_attribute(tr, name, bins);
    tr = std::move(binned);
    te = apply_discretization(te, dspec);
  }
  return {std::move(tr), std::move(te)};
}

StructureRun run_structure(const StructureConfig& sc, const EventLog& train,
                           const EventLog& test, const BenchmarkConfig& config,
                           const EmConfig& em) {
  std::vector<std::string> attrs;
  if (sc.background) attrs.push_back(*sc.background);
  if (sc.symptom) attrs.push_back(*sc.symptom);
  auto [tr, te] = prepare(train, test, attrs, config.bin_count);

  Roles roles{sc.background, sc.symptom};
  const EncodedLog enc_train = encode_log(tr, roles);
  const EncodedLog enc_test = encode_log(te, enc_train.vocabulary);

  auto [model, selection] = select_hidden_states(sc.variant, enc_train, config.k_grid, em);
  const auto report = evaluate_model(model, enc_test, sc.target, config.symptom_query);
  return {true, {}, report.accuracy, report.macro_f1, selection.chosen};
}

}  // namespace

std::string StructureConfig::label() const {
  std::string out;
  switch (variant) {
    case StructureVariant::kPfa: out = "pfa"; break;
    case StructureVariant::kBackground: out = *background + ":background"; break;
    case StructureVariant::kSymptom: out = *symptom + ":symptom"; break;
    case StructureVariant::kFull: out = *background + "+" + *symptom + ":full"; break;
  }
  if (target == PredictionTarget::kSymptom) out += ":symptom-target";
  return out;
}

StructureConfig parse_structure_config(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  StructureConfig sc;
  if (parts.size() == 1 && parts[0] == "pfa") return sc;
  if (parts.size() < 2 || parts.size() > 3 || parts[0].empty())
    throw ConfigError("bad structure '" + text + "', expected attr:background|symptom[:target]");
  if (parts[1] == "background") {
    sc.variant = StructureVariant::kBackground;
    sc.background = parts[0];
  } else if (parts[1] == "symptom") {
    sc.variant = StructureVariant::kSymptom;
    sc.symptom = parts[0];
  } else {
    throw ConfigError("bad role '" + parts[1] + "' in '" + text + "'");
  }
  if (parts.size() == 3) {
    if (parts[2] == "symptom") {
      if (sc.variant != StructureVariant::kSymptom)
        throw ConfigError("symptom target needs a symptom structure: '" + text + "'");
      sc.target = PredictionTarget::kSymptom;
    } else if (parts[2] != "next-event") {
      throw ConfigError("bad target '" + parts[2] + "' in '" + text + "'");
    }
  }
  return sc;
}

void MetricSeries::finalize() {
  if (values.empty()) {
    mean = stddev = 0.0;
    return;
  }
  const double n = static_cast<double>(values.size());
  mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  stddev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

BenchmarkReport run_benchmark(const EventLog& dataset, const BenchmarkConfig& config) {
  if (config.repetitions == 0) throw ConfigError("repetitions must be >= 1");
  if (config.k_grid.empty()) throw ConfigError("hidden-state grid is empty");
  if (!(config.split_ratio > 0.0 && config.split_ratio < 1.0))
    throw ConfigError("split ratio must lie in (0, 1)");
  if (config.include_ngram && (config.ngram_min < 2 || config.ngram_max < config.ngram_min))
    throw ConfigError("invalid n-gram range");
  config.em.validate();

  BenchmarkReport report;
  report.config = config;
  const FilterResult filtered = filter_short_traces(dataset, config.min_trace_length);
  report.traces_before_filter = filtered.original;
  report.traces_after_filter = filtered.log.traces.size();
  if (filtered.log.traces.empty())
    throw ConfigError("no traces left after length filtering");

  std::vector<RepetitionResult> results(config.repetitions);
  EmConfig em = config.em;
  if (resolve_threads(config.threads) > 1) em.threads = 1;

  parallel_for(config.repetitions, config.threads, [&](std::size_t rep) {
    auto [train, test] =
        split_log(filtered.log, config.split_ratio, config.base_seed + rep);
    RepetitionResult& result = results[rep];
    for (const auto& sc : config.structures) {
      try {
        result.structures.push_back(run_structure(sc, train, test, config, em));
      } catch (const std::exception& e) {
        StructureRun failed;
        failed.error = e.what();
        result.structures.push_back(std::move(failed));
      }
    }
    if (config.include_ngram) {
      try {
        const EncodedLog enc_train = encode_log(train, Roles{});
        const EncodedLog enc_test = encode_log(test, enc_train.vocabulary);
        result.sweep = ngram_sweep(enc_train, enc_test, config.ngram_min, config.ngram_max);
      } catch (const std::exception& e) {
        result.ngram_error = e.what();
      }
    }
  });

  for (std::size_t s = 0; s < config.structures.size(); ++s) {
    BenchmarkEntry entry;
    entry.label = config.structures[s].label();
    entry.kind = "dbn";
    entry.structure = config.structures[s];
    for (std::size_t rep = 0; rep < results.size(); ++rep) {
      const StructureRun& run = results[rep].structures[s];
      if (!run.ok) {
        report.failures.push_back({rep, entry.label, run.error});
        continue;
      }
      entry.accuracy.add(run.accuracy);
      entry.macro_f1.add(run.macro_f1);
      entry.chosen_hidden_states.push_back(run.hidden_states);
    }
    entry.accuracy.finalize();
    entry.macro_f1.finalize();
    report.entries.push_back(std::move(entry));
  }

  if (config.include_ngram) {
    std::vector<BenchmarkEntry> per_n;
    for (std::size_t n = config.ngram_min; n <= config.ngram_max; ++n) {
      BenchmarkEntry e;
      e.label = "ngram-" + std::to_string(n);
      e.kind = "ngram";
      e.ngram_order = n;
      per_n.push_back(std::move(e));
    }
    BenchmarkEntry best;
    best.label = "ngram-best";
    best.kind = "ngram";
    for (std::size_t rep = 0; rep < results.size(); ++rep) {
      const auto& sweep = results[rep].sweep;
      if (!sweep) {
        report.failures.push_back({rep, "ngram", results[rep].ngram_error});
        continue;
      }
      for (std::size_t i = 0; i < sweep->rows.size(); ++i) {
        per_n[i].accuracy.add(sweep->rows[i].accuracy);
        per_n[i].macro_f1.add(sweep->rows[i].macro_f1);
      }
      best.accuracy.add(sweep->rows[sweep->best_accuracy].accuracy);
      best.macro_f1.add(sweep->rows[sweep->best_f1].macro_f1);
    }
    for (auto& e : per_n) {
      e.accuracy.finalize();
      e.macro_f1.finalize();
      report.entries.push_back(std::move(e));
    }
    best.accuracy.finalize();
    best.macro_f1.finalize();
    report.entries.push_back(std::move(best));
  }
  return report;
}

}  // namespace ceca
