#include "ceca/dbn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ceca/error.hpp"

namespace ceca {
namespace {

// Uniform draw on the open interval (0, 1) with 53 random bits.
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

void fill_random(CpdTable& table, std::mt19937_64& rng) {
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto row = table.row(r);
    double sum = 0.0;
    for (double& x : row) {
      x = open_unit(rng);
      sum += x;
    }
    for (double& x : row) x /= sum;
  }
}

void check_slice(const CpdDims& dims, const Slice& s, std::size_t t,
                 bool allow_withheld) {
  auto bad = [&](const char* what) {
    throw DataError(std::string(what) + " index out of range at slice " +
                    std::to_string(t + 1));
  };
  if (s.event >= dims.events) bad("event");
  const bool b_withheld = s.background == Slice::kWithheld;
  const bool s_withheld = s.symptom == Slice::kWithheld;
  if ((b_withheld || s_withheld) && !allow_withheld)
    throw DataError("withheld context not supported here");
  if (!b_withheld && s.background >= dims.backgrounds) bad("background");
  if (!s_withheld && s.symptom >= dims.symptoms) bad("symptom");
}

// P(b | h) P(e | h, b) P(s | e) for a fully observed slice.
void slice_emission(const CpdSet& cpds, const Slice& s, std::vector<double>& out) {
  const std::size_t k = cpds.dims.hidden;
  const double ps = cpds.symptom_emit(s.event, s.symptom);
  out.resize(k);
  for (std::size_t h = 0; h < k; ++h) {
    out[h] = cpds.background_emit(h, s.background) *
             cpds.event_emit(cpds.event_row(h, s.background), s.event) * ps;
  }
}

}  // namespace

bool has_background(StructureVariant v) {
  return v == StructureVariant::kBackground || v == StructureVariant::kFull;
}

bool has_symptom(StructureVariant v) {
  return v == StructureVariant::kSymptom || v == StructureVariant::kFull;
}

std::string_view to_string(StructureVariant v) {
  switch (v) {
    case StructureVariant::kPfa: return "pfa";
    case StructureVariant::kBackground: return "background";
    case StructureVariant::kSymptom: return "symptom";
    case StructureVariant::kFull: return "full";
  }
  return "pfa";
}

StructureVariant parse_structure(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "pfa") return StructureVariant::kPfa;
  if (lower == "background") return StructureVariant::kBackground;
  if (lower == "symptom") return StructureVariant::kSymptom;
  if (lower == "full") return StructureVariant::kFull;
  throw ConfigError("unknown structure '" + std::string(name) + "'");
}

double CpdTable::max_normalization_error() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (double x : row(r)) {
      if (!(x >= 0.0)) return std::numeric_limits<double>::infinity();
      sum += x;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

CpdSet::CpdSet(CpdDims d)
    : dims(d),
      initial(1, d.hidden),
      background_emit(d.hidden, d.backgrounds),
      event_emit(d.hidden * d.backgrounds, d.events),
      symptom_emit(d.events, d.symptoms),
      transition(d.hidden * d.events * d.backgrounds * d.symptoms, d.hidden) {}

double CpdSet::max_normalization_error() const {
  return std::max({initial.max_normalization_error(),
                   background_emit.max_normalization_error(),
                   event_emit.max_normalization_error(),
                   symptom_emit.max_normalization_error(),
                   transition.max_normalization_error()});
}

CpdSet random_cpds(const CpdDims& dims, std::uint64_t seed) {
  CpdSet cpds(dims);
  std::mt19937_64 rng(seed);
  fill_random(cpds.initial, rng);
  fill_random(cpds.background_emit, rng);
  fill_random(cpds.event_emit, rng);
  fill_random(cpds.symptom_emit, rng);
  fill_random(cpds.transition, rng);
  return cpds;
}

CpdDims dims_for(StructureVariant variant, std::size_t hidden_states,
                 const Vocabulary& vocabulary) {
  if (hidden_states == 0) throw ConfigError("hidden state count must be >= 1");
  if (vocabulary.activity.values().empty())
    throw ConfigError("activity vocabulary is empty");
  const bool want_b = has_background(variant);
  const bool want_s = has_symptom(variant);
  if (want_b != vocabulary.background.has_value())
    throw ConfigError(std::string(to_string(variant)) + " structure " +
                      (want_b ? "requires" : "does not take") +
                      " a background vocabulary");
  if (want_s != vocabulary.symptom.has_value())
    throw ConfigError(std::string(to_string(variant)) + " structure " +
                      (want_s ? "requires" : "does not take") +
                      " a symptom vocabulary");
  CpdDims dims;
  dims.hidden = hidden_states;
  dims.events = vocabulary.activity.size();
  dims.backgrounds = want_b ? vocabulary.background->values.size() : 1;
  dims.symptoms = want_s ? vocabulary.symptom->values.size() : 1;
  return dims;
}

DbnModel init_model(StructureVariant variant, std::size_t hidden_states,
                    const Vocabulary& vocabulary, std::uint64_t seed) {
  DbnModel model;
  model.variant = variant;
  model.vocabulary = vocabulary;
  model.cpds = random_cpds(dims_for(variant, hidden_states, vocabulary), seed);
  model.metadata.seed = seed;
  return model;
}

ForwardState forward_pass(const CpdSet& cpds, std::span<const Slice> prefix) {
  if (prefix.empty()) throw std::invalid_argument("forward_pass: empty prefix");
  const CpdDims& d = cpds.dims;
  const std::size_t k = d.hidden;

  ForwardState state;
  // Belief over H_t before seeing slice t.
  std::vector<double> prior(cpds.initial.row(0).begin(), cpds.initial.row(0).end());
  std::vector<double> alpha(k), next(k);

  for (std::size_t t = 0; t < prefix.size(); ++t) {
    const Slice& s = prefix[t];
    check_slice(d, s, t, /*allow_withheld=*/true);
    const bool b_obs = s.background != Slice::kWithheld;
    const bool s_obs = s.symptom != Slice::kWithheld;
    const std::size_t b_lo = b_obs ? s.background : 0;
    const std::size_t b_hi = b_obs ? s.background + 1 : d.backgrounds;
    const std::size_t s_lo = s_obs ? s.symptom : 0;
    const std::size_t s_hi = s_obs ? s.symptom + 1 : d.symptoms;

    std::fill(alpha.begin(), alpha.end(), 0.0);
    std::fill(next.begin(), next.end(), 0.0);
    double mass = 0.0;
    for (std::size_t h = 0; h < k; ++h) {
      if (prior[h] == 0.0) continue;
      for (std::size_t b = b_lo; b < b_hi; ++b) {
        const double wb = prior[h] * cpds.background_emit(h, b) *
                          cpds.event_emit(cpds.event_row(h, b), s.event);
        if (wb == 0.0) continue;
        for (std::size_t sy = s_lo; sy < s_hi; ++sy) {
          const double w = wb * cpds.symptom_emit(s.event, sy);
          if (w == 0.0) continue;
          alpha[h] += w;
          mass += w;
          const auto row = cpds.transition.row(cpds.transition_row(h, s.event, b, sy));
          for (std::size_t h2 = 0; h2 < k; ++h2) next[h2] += w * row[h2];
        }
      }
    }
    if (!(mass > 0.0)) throw ImpossibleEvidence(t);
    for (std::size_t h = 0; h < k; ++h) {
      alpha[h] /= mass;
      next[h] /= mass;
    }
    state.log_likelihood += std::log(mass);
    prior.swap(next);
  }
  state.alpha = std::move(alpha);
  state.predictive = std::move(prior);
  return state;
}

double backward_log_likelihood(const CpdSet& cpds, std::span<const Slice> trace) {
  if (trace.empty()) throw std::invalid_argument("backward: empty trace");
  const std::size_t k = cpds.dims.hidden;
  const std::size_t n = trace.size();
  for (std::size_t t = 0; t < n; ++t) check_slice(cpds.dims, trace[t], t, false);

  std::vector<double> beta(k, 1.0), emit(k), next_beta(k);
  double log_scale = 0.0;
  for (std::size_t t = n - 1; t-- > 0;) {
    const Slice& s = trace[t];
    slice_emission(cpds, trace[t + 1], emit);
    double sum = 0.0;
    for (std::size_t h = 0; h < k; ++h) {
      const auto row = cpds.transition.row(
          cpds.transition_row(h, s.event, s.background, s.symptom));
      double acc = 0.0;
      for (std::size_t h2 = 0; h2 < k; ++h2) acc += row[h2] * emit[h2] * beta[h2];
      next_beta[h] = acc;
      sum += acc;
    }
    if (!(sum > 0.0)) throw ImpossibleEvidence(t + 1);
    for (double& x : next_beta) x /= sum;
    log_scale += std::log(sum);
    beta.swap(next_beta);
  }
  slice_emission(cpds, trace[0], emit);
  double total = 0.0;
  for (std::size_t h = 0; h < k; ++h) total += cpds.initial(0, h) * emit[h] * beta[h];
  if (!(total > 0.0)) throw ImpossibleEvidence(0);
  return log_scale + std::log(total);
}

TracePosteriors trace_posteriors(const CpdSet& cpds, std::span<const Slice> trace) {
  if (trace.empty()) throw std::invalid_argument("trace_posteriors: empty trace");
  const std::size_t k = cpds.dims.hidden;
  const std::size_t n = trace.size();
  for (std::size_t t = 0; t < n; ++t) check_slice(cpds.dims, trace[t], t, false);

  std::vector<std::vector<double>> alpha(n, std::vector<double>(k));
  std::vector<std::vector<double>> emit(n);
  std::vector<double> scale(n);
  std::vector<std::span<const double>> rows(k);

  for (std::size_t t = 0; t < n; ++t) slice_emission(cpds, trace[t], emit[t]);

  // Forward.
  for (std::size_t t = 0; t < n; ++t) {
    auto& a = alpha[t];
    if (t == 0) {
      for (std::size_t h = 0; h < k; ++h) a[h] = cpds.initial(0, h) * emit[0][h];
    } else {
      const Slice& p = trace[t - 1];
      std::fill(a.begin(), a.end(), 0.0);
      for (std::size_t h = 0; h < k; ++h) {
        const double w = alpha[t - 1][h];
        if (w == 0.0) continue;
        const auto row = cpds.transition.row(
            cpds.transition_row(h, p.event, p.background, p.symptom));
        for (std::size_t h2 = 0; h2 < k; ++h2) a[h2] += w * row[h2];
      }
      for (std::size_t h = 0; h < k; ++h) a[h] *= emit[t][h];
    }
    const double c = std::accumulate(a.begin(), a.end(), 0.0);
    if (!(c > 0.0)) throw ImpossibleEvidence(t);
    for (double& x : a) x /= c;
    scale[t] = c;
  }

  TracePosteriors post;
  post.hidden = k;
  post.log_likelihood = 0.0;
  for (double c : scale) post.log_likelihood += std::log(c);
  post.gamma.assign(n, std::vector<double>(k));
  post.xi.assign(n - 1, std::vector<double>(k * k));

  // Backward, scaled by the forward constants.
  std::vector<double> beta(k, 1.0), prev(k), weighted(k);
  post.gamma[n - 1] = alpha[n - 1];
  for (std::size_t t = n - 1; t-- > 0;) {
    const Slice& s = trace[t];
    for (std::size_t h2 = 0; h2 < k; ++h2)
      weighted[h2] = emit[t + 1][h2] * beta[h2] / scale[t + 1];
    auto& xi = post.xi[t];
    for (std::size_t h = 0; h < k; ++h) {
      const auto row = cpds.transition.row(
          cpds.transition_row(h, s.event, s.background, s.symptom));
      double acc = 0.0;
      for (std::size_t h2 = 0; h2 < k; ++h2) {
        const double r = row[h2] * weighted[h2];
        acc += r;
        xi[h * k + h2] = alpha[t][h] * r;
      }
      prev[h] = acc;
    }
    beta.swap(prev);
    for (std::size_t h = 0; h < k; ++h) post.gamma[t][h] = alpha[t][h] * beta[h];
  }
  return post;
}

Index PredictionDistribution::argmax() const {
  auto it = std::max_element(probs.begin(), probs.end());
  return static_cast<Index>(std::distance(probs.begin(), it));
}

PredictionDistribution predict_next_event(const CpdSet& cpds,
                                          std::span<const Slice> prefix,
                                          std::optional<Index> next_background) {
  const CpdDims& d = cpds.dims;
  const ForwardState fwd = forward_pass(cpds, prefix);
  std::vector<double> rho = fwd.predictive;

  PredictionDistribution out;
  out.target = PredictionTarget::kNextEvent;
  out.probs.assign(d.events, 0.0);

  if (next_background) {
    const Index b = *next_background;
    if (b >= d.backgrounds) throw DataError("next background index out of range");
    double mass = 0.0;
    for (std::size_t h = 0; h < d.hidden; ++h) {
      rho[h] *= cpds.background_emit(h, b);
      mass += rho[h];
    }
    if (!(mass > 0.0)) throw ImpossibleEvidence(prefix.size());
    for (std::size_t h = 0; h < d.hidden; ++h) {
      if (rho[h] == 0.0) continue;
      const auto row = cpds.event_emit.row(cpds.event_row(h, b));
      for (std::size_t e = 0; e < d.events; ++e) out.probs[e] += rho[h] / mass * row[e];
    }
  } else {
    for (std::size_t h = 0; h < d.hidden; ++h) {
      if (rho[h] == 0.0) continue;
      for (std::size_t b = 0; b < d.backgrounds; ++b) {
        const double w = rho[h] * cpds.background_emit(h, b);
        const auto row = cpds.event_emit.row(cpds.event_row(h, b));
        for (std::size_t e = 0; e < d.events; ++e) out.probs[e] += w * row[e];
      }
    }
  }
  const double total = std::accumulate(out.probs.begin(), out.probs.end(), 0.0);
  if (!(total > 0.0)) throw ImpossibleEvidence(prefix.size());
  for (double& p : out.probs) p /= total;
  return out;
}

PredictionDistribution predict_next_event(const DbnModel& model,
                                          std::span<const Slice> prefix,
                                          std::optional<Index> next_background) {
  if (prefix.size() < 2)
    throw std::invalid_argument("prediction needs a prefix of at least two slices");
  if (has_background(model.variant)) {
    if (!next_background) next_background = model.vocabulary.background->values.missing();
  } else {
    next_background = 0;
  }
  return predict_next_event(model.cpds, prefix, next_background);
}

PredictionDistribution predict_symptom(const DbnModel& model,
                                       std::span<const Slice> prefix,
                                       SymptomQuery query) {
  if (!has_symptom(model.variant))
    throw ConfigError("structure '" + std::string(to_string(model.variant)) +
                      "' has no symptom node");
  if (prefix.empty()) throw std::invalid_argument("predict_symptom: empty prefix");
  const CpdSet& cpds = model.cpds;
  PredictionDistribution out;
  out.target = PredictionTarget::kSymptom;

  if (query == SymptomQuery::kConditional) {
    const Index e = prefix.back().event;
    if (e >= cpds.dims.events) throw DataError("event index out of range");
    const auto row = cpds.symptom_emit.row(e);
    out.probs.assign(row.begin(), row.end());
    return out;
  }

  const auto history = prefix.first(prefix.size() - 1);
  std::optional<Index> next_b;
  if (has_background(model.variant)) next_b = prefix.back().background;
  const auto next = predict_next_event(model, history, next_b);
  out.probs.assign(cpds.dims.symptoms, 0.0);
  for (std::size_t e = 0; e < cpds.dims.events; ++e) {
    const auto row = cpds.symptom_emit.row(e);
    for (std::size_t s = 0; s < cpds.dims.symptoms; ++s)
      out.probs[s] += next.probs[e] * row[s];
  }
  const double total = std::accumulate(out.probs.begin(), out.probs.end(), 0.0);
  for (double& p : out.probs) p /= total;
  return out;
}

double LogLikelihood::total() const {
  return impossible_traces > 0 ? -std::numeric_limits<double>::infinity() : value;
}

LogLikelihood log_likelihood(const CpdSet& cpds, const EncodedLog& log) {
  LogLikelihood ll;
  for (const auto& trace : log.traces) {
    if (trace.slices.empty()) continue;
    try {
      ll.value += forward_pass(cpds, trace.slices).log_likelihood;
    } catch (const ImpossibleEvidence&) {
      ++ll.impossible_traces;
    }
  }
  return ll;
}

LogLikelihood log_likelihood(const DbnModel& model, const EncodedLog& log) {
  return log_likelihood(model.cpds, log);
}

}  // namespace ceca
