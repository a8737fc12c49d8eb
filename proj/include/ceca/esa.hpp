#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ceca/dbn.hpp"
#include "ceca/encoding.hpp"

namespace ceca {

// Next-event distribution at slice t+1 with every background and symptom
// observation withheld and marginalized through its CPD, including the
// background of the predicted slice.
PredictionDistribution context_free_next_event(const CpdSet& cpds,
                                               std::span<const Slice> prefix);

struct NlValue {
  double value = 0.0;
  // False when the true event is impossible without context; value is +inf.
  bool finite = true;
};

// Normalized likelihood of the true event at 1-based position p (3 <= p <= T):
// its probability with all context evidence over its probability with the
// context withheld. Above 1 the context argues for the true event.
NlValue nl_at_point(const DbnModel& model, const EncodedTrace& trace,
                    std::size_t position);

struct EsaPoint {
  std::string case_id;
  std::size_t position = 0;  // 1-based
  NlValue nl;
};

struct QuartileSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Linear interpolation between order statistics at rank q*(n-1) (inclusive
// method). `values` need not be sorted.
QuartileSummary quartiles(std::vector<double> values);

struct EsaReport {
  std::vector<EsaPoint> points;
  QuartileSummary summary;  // over finite values only
  std::size_t above_one = 0;
  std::size_t equal_one = 0;  // within kEqualTolerance
  std::size_t below_one = 0;
  std::size_t infinite = 0;

  static constexpr double kEqualTolerance = 1e-6;
};

EsaReport esa_report(const DbnModel& model, const EncodedLog& test);

}  // namespace ceca
