#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ceca/dbn.hpp"
#include "ceca/encoding.hpp"

namespace ceca {

// First 1-based slice that is ever predicted: two slices of history are the
// minimum the two-slice template needs.
inline constexpr std::size_t kFirstPredictedPosition = 3;

struct ClassMetrics {
  std::size_t support = 0;    // occurrences in the truth
  std::size_t predicted = 0;  // times predicted
  std::size_t true_positives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvaluationReport {
  PredictionTarget target = PredictionTarget::kNextEvent;
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  // Mean F1 over classes with positive support.
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
};

EvaluationReport score_predictions(std::span<const Index> truth,
                                   std::span<const Index> predicted,
                                   std::size_t num_classes,
                                   PredictionTarget target);

// Receives slices 1..p-1 and, when requested, the background of slice p.
using NextEventPredictor = std::function<PredictionDistribution(
    std::span<const Slice> prefix, std::optional<Index> next_background)>;

// Receives slices 1..p; must only read the event (and background) of slice p.
using SymptomPredictor =
    std::function<PredictionDistribution(std::span<const Slice> prefix)>;

// One prediction per (trace, position p >= 3).
EvaluationReport evaluate_next_event(const NextEventPredictor& predictor,
                                     const EncodedLog& test,
                                     bool supply_background);

EvaluationReport evaluate_symptom(const SymptomPredictor& predictor,
                                  const EncodedLog& test);

EvaluationReport evaluate_model(const DbnModel& model, const EncodedLog& test,
                                PredictionTarget target,
                                SymptomQuery query = SymptomQuery::kConditional);

}  // namespace ceca
