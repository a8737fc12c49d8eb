#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ceca/encoding.hpp"
#include "ceca/eventlog.hpp"

namespace ceca {

enum class StructureVariant { kPfa, kBackground, kSymptom, kFull };

bool has_background(StructureVariant v);
bool has_symptom(StructureVariant v);
std::string_view to_string(StructureVariant v);
// Accepts "pfa", "background", "symptom", "full" (case-insensitive).
StructureVariant parse_structure(std::string_view name);

// A stack of conditional distributions: one row per conditioning context,
// one column per child value. Row-major.
class CpdTable {
 public:
  CpdTable() = default;
  CpdTable(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

  // Largest |row sum - 1| over all rows; +inf if any entry is negative or NaN.
  double max_normalization_error() const;

  bool operator==(const CpdTable&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct CpdDims {
  std::size_t hidden = 1;
  std::size_t events = 1;
  std::size_t backgrounds = 1;  // 1 when the model has no background node
  std::size_t symptoms = 1;     // 1 when the model has no symptom node

  bool operator==(const CpdDims&) const = default;
};

// All conditional distributions of the two-slice template. Emission and
// transition tables are shared by every slice; only `initial` is specific to
// the first slice.
struct CpdSet {
  CpdDims dims;
  CpdTable initial;          // 1 x K            P(H1)
  CpdTable background_emit;  // K x |B|          P(B | H)
  CpdTable event_emit;       // (K,|B|) x |E|    P(E | H, B)
  CpdTable symptom_emit;     // |E| x |S|        P(S | E)
  CpdTable transition;       // (K,|E|,|B|,|S|) x K   P(H' | H, E, B, S)

  explicit CpdSet(CpdDims d = {});

  std::size_t event_row(std::size_t h, std::size_t b) const {
    return h * dims.backgrounds + b;
  }
  std::size_t transition_row(std::size_t h, std::size_t e, std::size_t b,
                             std::size_t s) const {
    return ((h * dims.events + e) * dims.backgrounds + b) * dims.symptoms + s;
  }

  double max_normalization_error() const;
  bool operator==(const CpdSet&) const = default;
};

// Every row drawn by normalizing i.i.d. uniform(0,1) draws.
CpdSet random_cpds(const CpdDims& dims, std::uint64_t seed);

struct ModelMetadata {
  int format_version = 1;
  std::uint64_t seed = 0;
  std::size_t em_iterations = 0;
  double final_log_likelihood = 0.0;
  double smoothing_epsilon = 0.0;
};

struct DbnModel {
  StructureVariant variant = StructureVariant::kPfa;
  CpdSet cpds;
  Vocabulary vocabulary;
  // Numeric attributes binned before encoding; replayed on new logs.
  std::vector<DiscretizationSpec> discretization;
  ModelMetadata metadata;

  std::size_t hidden_states() const { return cpds.dims.hidden; }
};

CpdDims dims_for(StructureVariant variant, std::size_t hidden_states,
                 const Vocabulary& vocabulary);

DbnModel init_model(StructureVariant variant, std::size_t hidden_states,
                    const Vocabulary& vocabulary, std::uint64_t seed);

struct ForwardState {
  std::vector<double> alpha;      // P(H_t | observations 1..t)
  std::vector<double> predictive; // P(H_{t+1} | observations 1..t)
  double log_likelihood = 0.0;    // log P(observations 1..t)
};

// Filtering over a prefix. Background or symptom indices equal to
// Slice::kWithheld are marginalized through their CPDs.
// Throws ImpossibleEvidence when a slice has zero probability.
ForwardState forward_pass(const CpdSet& cpds, std::span<const Slice> prefix);

// log P(observations) from an independently scaled backward recursion.
double backward_log_likelihood(const CpdSet& cpds, std::span<const Slice> trace);

struct TracePosteriors {
  std::size_t hidden = 0;
  std::vector<std::vector<double>> gamma;  // per slice, length K
  std::vector<std::vector<double>> xi;     // per transition, K*K row-major (h, h')
  double log_likelihood = 0.0;
};

// Forward-backward smoothing; all context must be observed.
TracePosteriors trace_posteriors(const CpdSet& cpds, std::span<const Slice> trace);

enum class PredictionTarget { kNextEvent, kSymptom };

struct PredictionDistribution {
  PredictionTarget target = PredictionTarget::kNextEvent;
  std::vector<double> probs;

  // Lowest index wins ties.
  Index argmax() const;
};

// Distribution of E at slice t+1 given a prefix of length t >= 1. With a
// background value for slice t+1 the hidden belief is reweighted by P(b|h');
// without one the background is marginalized.
PredictionDistribution predict_next_event(const CpdSet& cpds,
                                          std::span<const Slice> prefix,
                                          std::optional<Index> next_background);

// Model-level query: requires a prefix of at least two slices. For models
// with a background node a missing next_background is encoded as MISSING.
PredictionDistribution predict_next_event(const DbnModel& model,
                                          std::span<const Slice> prefix,
                                          std::optional<Index> next_background);

enum class SymptomQuery {
  kConditional,  // P(S_t | E_t) with the slice-t event observed
  kMarginal,     // sum_e P(E_t = e | slices 1..t-1) P(S_t | e)
};

// `prefix` ends with the slice whose symptom is predicted; only its event
// (and background, for kMarginal) is read from that slice.
PredictionDistribution predict_symptom(const DbnModel& model,
                                       std::span<const Slice> prefix,
                                       SymptomQuery query = SymptomQuery::kConditional);

struct LogLikelihood {
  double value = 0.0;  // sum over traces with non-zero probability
  std::size_t impossible_traces = 0;

  // -inf when any trace was impossible.
  double total() const;
};

LogLikelihood log_likelihood(const CpdSet& cpds, const EncodedLog& log);
LogLikelihood log_likelihood(const DbnModel& model, const EncodedLog& log);

}  // namespace ceca
