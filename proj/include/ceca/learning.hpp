#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ceca/dbn.hpp"
#include "ceca/encoding.hpp"

namespace ceca {

struct EmConfig {
  std::size_t max_iters = 200;
  double rel_tol = 1e-6;
  // Pseudo-count added to every cell before normalizing. Without it held-out
  // traces hit hard zeros and become impossible.
  double smoothing_epsilon = 1e-6;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  // Worker threads for restarts and per-K fits; 0 means hardware concurrency.
  std::size_t threads = 1;

  void validate() const;
};

struct FitReport {
  // Training log-likelihood of the parameters entering each iteration, plus a
  // final entry for the returned parameters.
  std::vector<double> history;
  std::size_t iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  double smoothing_epsilon = 0.0;

  double final_log_likelihood() const { return history.empty() ? 0.0 : history.back(); }
};

// Expected sufficient statistics of one E-step, laid out like CpdSet.
struct ExpectedCounts {
  CpdSet counts;
  double log_likelihood = 0.0;

  explicit ExpectedCounts(const CpdDims& dims) : counts(dims) {}
};

// Accumulates counts for every trace in log order.
ExpectedCounts expected_counts(const CpdSet& cpds, const EncodedLog& log);

// Adds epsilon to every cell and normalizes each row; all-zero rows become
// uniform.
CpdSet maximize(const ExpectedCounts& stats, double epsilon);

std::pair<DbnModel, FitReport> em_fit(const DbnModel& initial,
                                      const EncodedLog& train,
                                      const EmConfig& config);

// Restarts use seeds seed, seed+1, ...; the winner has the highest final
// training log-likelihood (earliest restart on ties).
std::pair<DbnModel, FitReport> train_with_restarts(StructureVariant variant,
                                                   std::size_t hidden_states,
                                                   const EncodedLog& train,
                                                   const EmConfig& config);

struct HiddenStateCandidate {
  std::size_t hidden_states = 0;
  double validation_accuracy = 0.0;
  double train_log_likelihood = 0.0;
};

struct HiddenStateSelection {
  std::vector<HiddenStateCandidate> candidates;
  std::size_t chosen = 0;
  FitReport final_fit;
};

// Internal 80/20 split seeded by config.seed; the K with the best validation
// next-event accuracy wins (smaller K on ties) and is refit on all of `train`.
std::pair<DbnModel, HiddenStateSelection> select_hidden_states(
    StructureVariant variant, const EncodedLog& train,
    const std::vector<std::size_t>& k_grid, const EmConfig& config);

}  // namespace ceca
