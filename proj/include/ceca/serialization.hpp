#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ceca/benchmark.hpp"
#include "ceca/dbn.hpp"
#include "ceca/esa.hpp"
#include "ceca/evaluation.hpp"
#include "ceca/learning.hpp"
#include "ceca/ngram.hpp"

namespace ceca {

using Json = nlohmann::ordered_json;

inline constexpr int kModelFormatVersion = 1;

// Model document, format_version 1. CPD tables are nested arrays indexed by
// the conditioning variables first and the child last; role axes that the
// structure lacks have length 1. Vocabulary lists omit the implicit trailing
// MISSING and OTHER symbols.
Json model_to_json(const DbnModel& model);
DbnModel model_from_json(const Json& doc);

Json to_json(const FitReport& report);
Json to_json(const HiddenStateSelection& selection);
Json to_json(const EvaluationReport& report, const std::vector<std::string>& labels);
Json to_json(const PredictionDistribution& dist, const std::vector<std::string>& labels);
Json to_json(const NgramSweep& sweep);
Json to_json(const EsaReport& report);
Json to_json(const BenchmarkReport& report);
Json to_json(const EmConfig& config);

// Labels of a vocabulary including MISSING and OTHER.
std::vector<std::string> labels_of(const VariableVocabulary& vocab);

std::string dump(const Json& doc);  // two-space indent, trailing newline

// Table-shaped CSV: one row per metric, one column per structure/baseline.
std::string benchmark_csv(const BenchmarkReport& report);
// Rows = dataset, columns = n, one block per metric.
std::string sweep_csv(const std::string& dataset, const NgramSweep& sweep);
std::string esa_csv(const EsaReport& report);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const DbnModel& model);
DbnModel load_model(const std::filesystem::path& path);

}  // namespace ceca
