#include "ceca/esa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ceca/error.hpp"
#include "ceca/evaluation.hpp"

namespace ceca {

PredictionDistribution context_free_next_event(const CpdSet& cpds,
                                               std::span<const Slice> prefix) {
  std::vector<Slice> withheld(prefix.begin(), prefix.end());
  for (auto& s : withheld) {
    s.background = Slice::kWithheld;
    s.symptom = Slice::kWithheld;
  }
  return predict_next_event(cpds, withheld, std::nullopt);
}

NlValue nl_at_point(const DbnModel& model, const EncodedTrace& trace,
                    std::size_t position) {
  if (model.variant == StructureVariant::kPfa)
    throw ConfigError("evidence sensitivity needs a model with a context node");
  if (position < kFirstPredictedPosition || position > trace.size())
    throw std::out_of_range("position " + std::to_string(position) +
                            " outside [3, " + std::to_string(trace.size()) + "]");

  const std::span<const Slice> slices(trace.slices);
  const auto prefix = slices.first(position - 1);
  const Slice& target = slices[position - 1];

  std::optional<Index> next_b;
  if (has_background(model.variant)) next_b = target.background;
  const double with_context = predict_next_event(model, prefix, next_b).probs[target.event];
  const double without_context =
      context_free_next_event(model.cpds, prefix).probs[target.event];

  if (!(without_context > 0.0))
    return {std::numeric_limits<double>::infinity(), false};
  return {with_context / without_context, true};
}

QuartileSummary quartiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quartiles of an empty set");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double rank = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

EsaReport esa_report(const DbnModel& model, const EncodedLog& test) {
  EsaReport report;
  std::vector<double> finite;
  for (const auto& trace : test.traces) {
    for (std::size_t p = kFirstPredictedPosition; p <= trace.size(); ++p) {
      EsaPoint point{trace.case_id, p, nl_at_point(model, trace, p)};
      if (!point.nl.finite) {
        ++report.infinite;
      } else {
        finite.push_back(point.nl.value);
        const double v = point.nl.value;
        if (std::abs(v - 1.0) <= EsaReport::kEqualTolerance)
          ++report.equal_one;
        else if (v > 1.0)
          ++report.above_one;
        else
          ++report.below_one;
      }
      report.points.push_back(std::move(point));
    }
  }
  if (report.points.empty()) throw ConfigError("no evaluable points for ESA");
  if (!finite.empty()) report.summary = quartiles(std::move(finite));
  return report;
}

}  // namespace ceca
