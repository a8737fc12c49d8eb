#include "ceca/ngram.hpp"

#include <algorithm>

#include "ceca/error.hpp"

namespace ceca {
namespace {

std::vector<Index> events_of(std::span<const Slice> slices) {
  std::vector<Index> out;
  out.reserve(slices.size());
  for (const auto& s : slices) out.push_back(s.event);
  return out;
}

PredictionDistribution from_counts(const NgramModel::Counts& counts,
                                   std::size_t alphabet_size) {
  PredictionDistribution out;
  out.probs.assign(alphabet_size, 0.0);
  double total = 0.0;
  for (const auto& [e, c] : counts) total += static_cast<double>(c);
  for (const auto& [e, c] : counts) out.probs[e] = static_cast<double>(c) / total;
  return out;
}

}  // namespace

NgramModel::NgramModel(std::size_t n, std::size_t alphabet_size)
    : n_(n), alphabet_size_(alphabet_size), unigram_(alphabet_size, 0) {
  if (n < 2) throw ConfigError("n-gram order must be >= 2");
}

void NgramModel::add_trace(std::span<const Index> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i] >= alphabet_size_) throw DataError("event index out of range");
    ++unigram_[events[i]];
    for (std::size_t len = 1; len < n_ && len <= i; ++len) {
      Context ctx(events.begin() + static_cast<std::ptrdiff_t>(i - len),
                  events.begin() + static_cast<std::ptrdiff_t>(i));
      ++table_[std::move(ctx)][events[i]];
    }
  }
}

const NgramModel::Counts* NgramModel::find(std::span<const Index> context) const {
  auto it = table_.find(Context(context.begin(), context.end()));
  return it == table_.end() ? nullptr : &it->second;
}

std::size_t NgramModel::matched_context_length(std::span<const Index> prefix) const {
  for (std::size_t len = std::min(n_ - 1, prefix.size()); len > 0; --len) {
    if (find(prefix.last(len)) != nullptr) return len;
  }
  return 0;
}

PredictionDistribution NgramModel::predict(std::span<const Index> prefix) const {
  const std::size_t len = matched_context_length(prefix);
  if (len > 0) return from_counts(*find(prefix.last(len)), alphabet_size_);

  PredictionDistribution out;
  out.probs.assign(alphabet_size_, 0.0);
  double total = 0.0;
  for (auto c : unigram_) total += static_cast<double>(c);
  if (total == 0.0) {
    std::fill(out.probs.begin(), out.probs.end(), 1.0 / static_cast<double>(alphabet_size_));
    return out;
  }
  for (std::size_t e = 0; e < alphabet_size_; ++e)
    out.probs[e] = static_cast<double>(unigram_[e]) / total;
  return out;
}

NgramModel fit_ngram(const EncodedLog& train, std::size_t n) {
  if (train.traces.empty()) throw ConfigError("training log is empty");
  NgramModel model(n, train.vocabulary.activity.size());
  for (const auto& trace : train.traces) model.add_trace(events_of(trace.slices));
  return model;
}

PredictionDistribution ngram_predict(const NgramModel& model,
                                     std::span<const Index> prefix) {
  return model.predict(prefix);
}

EvaluationReport evaluate_ngram(const NgramModel& model, const EncodedLog& test) {
  return evaluate_next_event(
      [&](std::span<const Slice> prefix, std::optional<Index>) {
        return model.predict(events_of(prefix));
      },
      test, false);
}

NgramSweep ngram_sweep(const EncodedLog& train, const EncodedLog& test,
                       std::size_t n_min, std::size_t n_max) {
  if (test.traces.empty()) throw ConfigError("test log is empty");
  if (n_min < 2 || n_max < n_min) throw ConfigError("invalid n-gram range");
  NgramSweep sweep;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    const auto report = evaluate_ngram(fit_ngram(train, n), test);
    sweep.rows.push_back({n, report.accuracy, report.macro_f1});
  }
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    if (sweep.rows[i].accuracy > sweep.rows[sweep.best_accuracy].accuracy)
      sweep.best_accuracy = i;
    if (sweep.rows[i].macro_f1 > sweep.rows[sweep.best_f1].macro_f1) sweep.best_f1 = i;
  }
  return sweep;
}

}  // namespace ceca
