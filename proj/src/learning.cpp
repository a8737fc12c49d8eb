#include "ceca/learning.hpp"

#include <cmath>
#include <optional>

#include "ceca/error.hpp"
#include "ceca/evaluation.hpp"
#include "ceca/parallel.hpp"

namespace ceca {
namespace {

void normalize_rows(const CpdTable& counts, CpdTable& out, double epsilon) {
  for (std::size_t r = 0; r < counts.rows(); ++r) {
    const auto in = counts.row(r);
    auto dst = out.row(r);
    double sum = 0.0;
    for (double c : in) sum += c + epsilon;
    if (sum > 0.0) {
      for (std::size_t c = 0; c < in.size(); ++c) dst[c] = (in[c] + epsilon) / sum;
    } else {
      const double u = 1.0 / static_cast<double>(in.size());
      for (double& x : dst) x = u;
    }
  }
}

EncodedLog subset(const EncodedLog& log, const std::vector<std::size_t>& idx) {
  EncodedLog out;
  out.vocabulary = log.vocabulary;
  out.traces.reserve(idx.size());
  for (auto i : idx) out.traces.push_back(log.traces[i]);
  return out;
}

}  // namespace

void EmConfig::validate() const {
  if (max_iters == 0) throw ConfigError("max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
  if (!(smoothing_epsilon >= 0.0))
    throw ConfigError("smoothing epsilon must be non-negative");
  if (restarts == 0) throw ConfigError("restarts must be >= 1");
}

ExpectedCounts expected_counts(const CpdSet& cpds, const EncodedLog& log) {
  ExpectedCounts stats(cpds.dims);
  CpdSet& n = stats.counts;
  const std::size_t k = cpds.dims.hidden;

  for (const auto& trace : log.traces) {
    if (trace.slices.empty()) continue;
    const TracePosteriors post = trace_posteriors(cpds, trace.slices);
    stats.log_likelihood += post.log_likelihood;

    for (std::size_t h = 0; h < k; ++h) n.initial(0, h) += post.gamma[0][h];
    for (std::size_t t = 0; t < trace.size(); ++t) {
      const Slice& s = trace.slices[t];
      const auto& g = post.gamma[t];
      for (std::size_t h = 0; h < k; ++h) {
        n.background_emit(h, s.background) += g[h];
        n.event_emit(n.event_row(h, s.background), s.event) += g[h];
      }
      n.symptom_emit(s.event, s.symptom) += 1.0;
      if (t + 1 < trace.size()) {
        const auto& xi = post.xi[t];
        for (std::size_t h = 0; h < k; ++h) {
          auto row = n.transition.row(n.transition_row(h, s.event, s.background, s.symptom));
          for (std::size_t h2 = 0; h2 < k; ++h2) row[h2] += xi[h * k + h2];
        }
      }
    }
  }
  return stats;
}

CpdSet maximize(const ExpectedCounts& stats, double epsilon) {
  const CpdSet& n = stats.counts;
  CpdSet out(n.dims);
  normalize_rows(n.initial, out.initial, epsilon);
  normalize_rows(n.background_emit, out.background_emit, epsilon);
  normalize_rows(n.event_emit, out.event_emit, epsilon);
  normalize_rows(n.symptom_emit, out.symptom_emit, epsilon);
  normalize_rows(n.transition, out.transition, epsilon);
  return out;
}

std::pair<DbnModel, FitReport> em_fit(const DbnModel& initial,
                                      const EncodedLog& train,
                                      const EmConfig& config) {
  config.validate();
  if (train.traces.empty()) throw ConfigError("training log is empty");
  if (!(train.vocabulary == initial.vocabulary))
    throw ConfigError("model and training log vocabularies differ");

  DbnModel model = initial;
  FitReport report;
  report.seed = initial.metadata.seed;
  report.smoothing_epsilon = config.smoothing_epsilon;

  for (std::size_t iter = 0;; ++iter) {
    const ExpectedCounts stats = expected_counts(model.cpds, train);
    const double ll = stats.log_likelihood;
    if (!report.history.empty()) {
      const double prev = report.history.back();
      report.history.push_back(ll);
      if (std::abs(ll - prev) < config.rel_tol * std::abs(ll)) {
        report.converged = true;
        break;
      }
    } else {
      report.history.push_back(ll);
    }
    if (iter == config.max_iters) break;
    model.cpds = maximize(stats, config.smoothing_epsilon);
    ++report.iterations;
  }

  model.metadata.em_iterations = report.iterations;
  model.metadata.final_log_likelihood = report.final_log_likelihood();
  model.metadata.smoothing_epsilon = config.smoothing_epsilon;
  return {std::move(model), std::move(report)};
}

std::pair<DbnModel, FitReport> train_with_restarts(StructureVariant variant,
                                                   std::size_t hidden_states,
                                                   const EncodedLog& train,
                                                   const EmConfig& config) {
  config.validate();
  if (train.traces.empty()) throw ConfigError("training log is empty");

  std::vector<std::optional<std::pair<DbnModel, FitReport>>> fits(config.restarts);
  parallel_for(config.restarts, config.threads, [&](std::size_t r) {
    const DbnModel init =
        init_model(variant, hidden_states, train.vocabulary, config.seed + r);
    fits[r] = em_fit(init, train, config);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < fits.size(); ++r) {
    if (fits[r]->second.final_log_likelihood() >
        fits[best]->second.final_log_likelihood())
      best = r;
  }
  return std::move(*fits[best]);
}

std::pair<DbnModel, HiddenStateSelection> select_hidden_states(
    StructureVariant variant, const EncodedLog& train,
    const std::vector<std::size_t>& k_grid, const EmConfig& config) {
  config.validate();
  if (k_grid.empty()) throw ConfigError("hidden-state grid is empty");
  if (train.traces.empty()) throw ConfigError("training log is empty");

  HiddenStateSelection selection;
  std::size_t best = 0;
  if (k_grid.size() > 1) {
    auto [inner_idx, val_idx] = split_indices(train.traces.size(), 0.8, config.seed);
    const EncodedLog inner = subset(train, inner_idx);
    const EncodedLog validation = subset(train, val_idx);

    selection.candidates.resize(k_grid.size());
    EmConfig inner_config = config;
    inner_config.threads = 1;
    parallel_for(k_grid.size(), config.threads, [&](std::size_t i) {
      auto [model, fit] = train_with_restarts(variant, k_grid[i], inner, inner_config);
      const auto report = evaluate_model(model, validation, PredictionTarget::kNextEvent);
      selection.candidates[i] = {k_grid[i], report.accuracy, fit.final_log_likelihood()};
    });
    for (std::size_t i = 1; i < k_grid.size(); ++i) {
      const auto& c = selection.candidates[i];
      const auto& b = selection.candidates[best];
      if (c.validation_accuracy > b.validation_accuracy ||
          (c.validation_accuracy == b.validation_accuracy &&
           c.hidden_states < b.hidden_states))
        best = i;
    }
  } else {
    selection.candidates.push_back({k_grid[0], 0.0, 0.0});
  }

  selection.chosen = k_grid[best];
  auto [model, fit] = train_with_restarts(variant, selection.chosen, train, config);
  selection.final_fit = std::move(fit);
  return {std::move(model), std::move(selection)};
}

}  // namespace ceca
