#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "ceca/dbn.hpp"
#include "ceca/encoding.hpp"
#include "ceca/evaluation.hpp"

namespace ceca {

// Frequency model over activity fragments of length up to n. Contexts of
// length 1..n-1 map to next-activity counts; prediction backs off to shorter
// contexts and finally to the global unigram counts.
class NgramModel {
 public:
  using Context = std::vector<Index>;
  using Counts = std::map<Index, std::size_t>;

  NgramModel(std::size_t n, std::size_t alphabet_size);

  void add_trace(std::span<const Index> events);

  // Returns the distribution of the longest stored context matching a suffix
  // of `prefix`.
  PredictionDistribution predict(std::span<const Index> prefix) const;

  // Length of the context predict() would use; 0 means the unigram fallback.
  std::size_t matched_context_length(std::span<const Index> prefix) const;

  const Counts* find(std::span<const Index> context) const;
  std::size_t n() const { return n_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  const std::map<Context, Counts>& table() const { return table_; }
  const std::vector<std::size_t>& unigram() const { return unigram_; }

 private:
  std::size_t n_;
  std::size_t alphabet_size_;
  std::map<Context, Counts> table_;
  std::vector<std::size_t> unigram_;
};

NgramModel fit_ngram(const EncodedLog& train, std::size_t n);

PredictionDistribution ngram_predict(const NgramModel& model,
                                     std::span<const Index> prefix);

EvaluationReport evaluate_ngram(const NgramModel& model, const EncodedLog& test);

struct NgramSweepRow {
  std::size_t n = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct NgramSweep {
  std::vector<NgramSweepRow> rows;
  // Indices into rows; ties go to the smaller n.
  std::size_t best_accuracy = 0;
  std::size_t best_f1 = 0;
};

NgramSweep ngram_sweep(const EncodedLog& train, const EncodedLog& test,
                       std::size_t n_min = 3, std::size_t n_max = 7);

}  // namespace ceca
