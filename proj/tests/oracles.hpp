// Independent reference computations used only by tests. Nothing here shares
// code with the inference or learning paths it checks.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ceca/dbn.hpp"
#include "ceca/encoding.hpp"

namespace ceca::testing {

// Full joint of one complete assignment: hidden path plus every slice value.
inline double path_joint(const CpdSet& c, std::span<const Slice> slices,
                         const std::vector<std::size_t>& path) {
  double p = c.initial(0, path[0]);
  for (std::size_t t = 0; t < slices.size(); ++t) {
    const Slice& s = slices[t];
    const std::size_t h = path[t];
    p *= c.background_emit(h, s.background);
    p *= c.event_emit(h * c.dims.backgrounds + s.background, s.event);
    p *= c.symptom_emit(s.event, s.symptom);
    if (t + 1 < slices.size()) {
      const std::size_t row =
          ((h * c.dims.events + s.event) * c.dims.backgrounds + s.background) *
              c.dims.symptoms + s.symptom;
      p *= c.transition(row, path[t + 1]);
    }
  }
  return p;
}

// Calls fn(path) for every hidden path of length n.
template <typename Fn>
void for_each_path(std::size_t k, std::size_t n, Fn&& fn) {
  std::vector<std::size_t> path(n, 0);
  while (true) {
    fn(path);
    std::size_t i = 0;
    while (i < n && ++path[i] == k) path[i++] = 0;
    if (i == n) return;
  }
}

// Sum of the joint over all hidden paths and over every withheld background
// or symptom value.
inline double brute_marginal(const CpdSet& c, std::vector<Slice> slices) {
  for (std::size_t t = 0; t < slices.size(); ++t) {
    if (slices[t].background == Slice::kWithheld) {
      double sum = 0.0;
      for (Index b = 0; b < c.dims.backgrounds; ++b) {
        auto copy = slices;
        copy[t].background = b;
        sum += brute_marginal(c, copy);
      }
      return sum;
    }
    if (slices[t].symptom == Slice::kWithheld) {
      double sum = 0.0;
      for (Index s = 0; s < c.dims.symptoms; ++s) {
        auto copy = slices;
        copy[t].symptom = s;
        sum += brute_marginal(c, copy);
      }
      return sum;
    }
  }
  double total = 0.0;
  for_each_path(c.dims.hidden, slices.size(),
                [&](const auto& path) { total += path_joint(c, slices, path); });
  return total;
}

struct BrutePosteriors {
  double log_likelihood = 0.0;
  std::vector<std::vector<double>> gamma;
  std::vector<std::vector<double>> xi;  // K*K row-major
};

inline BrutePosteriors brute_posteriors(const CpdSet& c, std::span<const Slice> slices) {
  const std::size_t k = c.dims.hidden;
  const std::size_t n = slices.size();
  BrutePosteriors out;
  out.gamma.assign(n, std::vector<double>(k, 0.0));
  out.xi.assign(n - 1, std::vector<double>(k * k, 0.0));
  double total = 0.0;
  for_each_path(k, n, [&](const auto& path) {
    const double p = path_joint(c, slices, path);
    total += p;
    for (std::size_t t = 0; t < n; ++t) out.gamma[t][path[t]] += p;
    for (std::size_t t = 0; t + 1 < n; ++t) out.xi[t][path[t] * k + path[t + 1]] += p;
  });
  for (auto& g : out.gamma)
    for (double& x : g) x /= total;
  for (auto& x : out.xi)
    for (double& v : x) v /= total;
  out.log_likelihood = std::log(total);
  return out;
}

// P(E_{t+1} = e | prefix, optional background of slice t+1), by enumeration.
inline std::vector<double> brute_next_event(const CpdSet& c, std::span<const Slice> prefix,
                                            std::optional<Index> next_b) {
  std::vector<double> probs(c.dims.events);
  double sum = 0.0;
  for (Index e = 0; e < c.dims.events; ++e) {
    std::vector<Slice> slices(prefix.begin(), prefix.end());
    slices.push_back({e, next_b ? *next_b : Slice::kWithheld, Slice::kWithheld});
    probs[e] = brute_marginal(c, slices);
    sum += probs[e];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

// Smoothed bigram frequency: (count(a -> e) + eps) / (count(a -> .) + |E| eps).
inline std::vector<double> bigram_oracle(const EncodedLog& log, Index last, double eps) {
  const std::size_t n = log.vocabulary.activity.size();
  std::vector<double> counts(n, 0.0);
  for (const auto& tr : log.traces)
    for (std::size_t t = 0; t + 1 < tr.slices.size(); ++t)
      if (tr.slices[t].event == last) counts[tr.slices[t + 1].event] += 1.0;
  double total = 0.0;
  for (double& x : counts) total += (x += eps);
  for (double& x : counts) x /= total;
  return counts;
}

// Smoothed unigram frequency over all slices: (count(e) + eps) / (N + |E| eps).
inline std::vector<double> unigram_oracle(const EncodedLog& log, double eps) {
  const std::size_t n = log.vocabulary.activity.size();
  std::vector<double> counts(n, 0.0);
  for (const auto& tr : log.traces)
    for (const auto& s : tr.slices) counts[s.event] += 1.0;
  double total = 0.0;
  for (double& x : counts) total += (x += eps);
  for (double& x : counts) x /= total;
  return counts;
}

// Random fully observed encoded log over a tiny alphabet.
inline EncodedLog random_encoded_log(std::mt19937_64& rng, std::size_t traces,
                                     std::size_t max_len, std::size_t events,
                                     std::size_t backgrounds = 0,
                                     std::size_t symptoms = 0) {
  EncodedLog log;
  for (std::size_t e = 0; e < events; ++e)
    log.vocabulary.activity.add(std::string(1, static_cast<char>('A' + e)));
  if (backgrounds > 0) {
    log.vocabulary.background = RoleVocabulary{"bg", {}};
    for (std::size_t b = 0; b < backgrounds; ++b)
      log.vocabulary.background->values.add("b" + std::to_string(b));
  }
  if (symptoms > 0) {
    log.vocabulary.symptom = RoleVocabulary{"sy", {}};
    for (std::size_t s = 0; s < symptoms; ++s)
      log.vocabulary.symptom->values.add("s" + std::to_string(s));
  }
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  for (std::size_t i = 0; i < traces; ++i) {
    EncodedTrace tr;
    tr.case_id = "t" + std::to_string(i);
    const std::size_t n = len(rng);
    for (std::size_t t = 0; t < n; ++t) {
      Slice s;
      s.event = static_cast<Index>(rng() % events);
      if (backgrounds > 0) s.background = static_cast<Index>(rng() % backgrounds);
      if (symptoms > 0) s.symptom = static_cast<Index>(rng() % symptoms);
      tr.slices.push_back(s);
    }
    log.traces.push_back(std::move(tr));
  }
  return log;
}

inline double row_sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

}  // namespace ceca::testing
