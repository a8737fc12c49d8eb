#include "ceca/evaluation.hpp"

#include "ceca/error.hpp"

namespace ceca {

EvaluationReport score_predictions(std::span<const Index> truth,
                                   std::span<const Index> predicted,
                                   std::size_t num_classes,
                                   PredictionTarget target) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("truth and prediction lengths differ");
  EvaluationReport report;
  report.target = target;
  report.total = truth.size();
  report.per_class.assign(num_classes, {});
  report.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));

  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Index t = truth[i];
    const Index p = predicted[i];
    if (t >= num_classes || p >= num_classes)
      throw std::out_of_range("class index out of range");
    ++report.confusion[t][p];
    ++report.per_class[t].support;
    ++report.per_class[p].predicted;
    if (t == p) {
      ++report.per_class[t].true_positives;
      ++report.correct;
    }
  }
  if (report.total > 0)
    report.accuracy =
        static_cast<double>(report.correct) / static_cast<double>(report.total);

  double f1_sum = 0.0;
  std::size_t supported = 0;
  for (auto& c : report.per_class) {
    const auto tp = static_cast<double>(c.true_positives);
    c.precision = c.predicted > 0 ? tp / static_cast<double>(c.predicted) : 0.0;
    c.recall = c.support > 0 ? tp / static_cast<double>(c.support) : 0.0;
    const double denom = c.precision + c.recall;
    c.f1 = denom > 0.0 ? 2.0 * c.precision * c.recall / denom : 0.0;
    if (c.support > 0) {
      f1_sum += c.f1;
      ++supported;
    }
  }
  report.macro_f1 = supported > 0 ? f1_sum / static_cast<double>(supported) : 0.0;
  return report;
}

EvaluationReport evaluate_next_event(const NextEventPredictor& predictor,
                                     const EncodedLog& test,
                                     bool supply_background) {
  std::vector<Index> truth, predicted;
  for (const auto& trace : test.traces) {
    const std::span<const Slice> slices(trace.slices);
    for (std::size_t p = kFirstPredictedPosition - 1; p < slices.size(); ++p) {
      std::optional<Index> next_b;
      if (supply_background) next_b = slices[p].background;
      const auto dist = predictor(slices.first(p), next_b);
      truth.push_back(slices[p].event);
      predicted.push_back(dist.argmax());
    }
  }
  if (truth.empty()) throw ConfigError("no evaluable positions in test log");
  return score_predictions(truth, predicted, test.vocabulary.activity.size(),
                           PredictionTarget::kNextEvent);
}

EvaluationReport evaluate_symptom(const SymptomPredictor& predictor,
                                  const EncodedLog& test) {
  if (!test.has_symptom()) throw ConfigError("test log has no symptom attribute");
  std::vector<Index> truth, predicted;
  for (const auto& trace : test.traces) {
    const std::span<const Slice> slices(trace.slices);
    for (std::size_t p = kFirstPredictedPosition - 1; p < slices.size(); ++p) {
      const auto dist = predictor(slices.first(p + 1));
      truth.push_back(slices[p].symptom);
      predicted.push_back(dist.argmax());
    }
  }
  if (truth.empty()) throw ConfigError("no evaluable positions in test log");
  return score_predictions(truth, predicted, test.vocabulary.symptom->values.size(),
                           PredictionTarget::kSymptom);
}

EvaluationReport evaluate_model(const DbnModel& model, const EncodedLog& test,
                                PredictionTarget target, SymptomQuery query) {
  if (target == PredictionTarget::kSymptom) {
    return evaluate_symptom(
        [&](std::span<const Slice> prefix) {
          return predict_symptom(model, prefix, query);
        },
        test);
  }
  return evaluate_next_event(
      [&](std::span<const Slice> prefix, std::optional<Index> next_b) {
        return predict_next_event(model, prefix, next_b);
      },
      test, has_background(model.variant));
}

}  // namespace ceca
