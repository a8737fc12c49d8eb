#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ceca/dbn.hpp"
#include "ceca/eventlog.hpp"
#include "ceca/learning.hpp"
#include "ceca/ngram.hpp"

namespace ceca {

// One DBN structure to train in every repetition.
struct StructureConfig {
  StructureVariant variant = StructureVariant::kPfa;
  std::optional<std::string> background;
  std::optional<std::string> symptom;
  PredictionTarget target = PredictionTarget::kNextEvent;

  std::string label() const;
};

// Parses "pfa", "<attr>:background", "<attr>:symptom", optionally followed by
// ":next-event" or ":symptom" to pick the prediction target.
StructureConfig parse_structure_config(const std::string& text);

struct BenchmarkConfig {
  std::string dataset = "log";
  std::vector<StructureConfig> structures;
  std::vector<std::size_t> k_grid{2, 4, 6, 8, 10};
  EmConfig em;
  std::size_t repetitions = 10;
  double split_ratio = 0.7;
  std::uint64_t base_seed = 0;
  bool include_ngram = true;
  std::size_t ngram_min = 3;
  std::size_t ngram_max = 7;
  std::size_t min_trace_length = 3;
  std::size_t bin_count = 40;
  SymptomQuery symptom_query = SymptomQuery::kConditional;
  std::size_t threads = 1;
};

struct MetricSeries {
  std::vector<double> values;  // one per successful repetition
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 with fewer than 2 values

  void add(double v) { values.push_back(v); }
  void finalize();
};

struct BenchmarkEntry {
  std::string label;
  std::string kind;  // "dbn" or "ngram"
  std::optional<StructureConfig> structure;
  std::optional<std::size_t> ngram_order;  // unset for the best-of-sweep entry
  MetricSeries accuracy;
  MetricSeries macro_f1;
  std::vector<std::size_t> chosen_hidden_states;
};

struct BenchmarkFailure {
  std::size_t repetition = 0;
  std::string label;
  std::string message;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::size_t traces_before_filter = 0;
  std::size_t traces_after_filter = 0;
  std::vector<BenchmarkEntry> entries;
  std::vector<BenchmarkFailure> failures;
};

// Repeated Monte-Carlo splits: repetition r uses split seed base_seed + r.
// Every structure and the n-gram sweep are scored on the same test side.
BenchmarkReport run_benchmark(const EventLog& dataset, const BenchmarkConfig& config);

}  // namespace ceca
