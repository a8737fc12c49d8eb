#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ceca/error.hpp"
#include "ceca/evaluation.hpp"
#include "ceca/learning.hpp"
#include "oracles.hpp"

using namespace ceca;

namespace {

EncodedLog alternating_log(std::size_t traces) {
  EncodedLog log;
  log.vocabulary.activity = VariableVocabulary({"A", "B"});
  for (std::size_t i = 0; i < traces; ++i) {
    EncodedTrace tr{"c" + std::to_string(i), {}};
    const std::size_t len = 4 + i % 4;
    for (std::size_t t = 0; t < len; ++t) tr.slices.push_back({static_cast<Index>(t % 2), 0, 0});
    log.traces.push_back(tr);
  }
  return log;
}

bool non_decreasing(const std::vector<double>& h, double slack = 1e-9) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] < h[i - 1] - slack) return false;
  return true;
}

}  // namespace

TEST_CASE("EmConfig validation") {
  EmConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.smoothing_epsilon = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.restarts = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("closed-form counts with one hidden state and no smoothing") {
  EncodedLog log;
  log.vocabulary.activity = VariableVocabulary({"A", "B"});
  log.traces.push_back({"c", {{0, 0, 0}, {1, 0, 0}}});
  EmConfig cfg;
  cfg.smoothing_epsilon = 0.0;
  const auto [m, fit] = em_fit(init_model(StructureVariant::kPfa, 1, log.vocabulary, 3), log, cfg);
  CHECK(m.cpds.event_emit(0, 0) == doctest::Approx(0.5));
  CHECK(m.cpds.event_emit(0, 1) == doctest::Approx(0.5));
  CHECK(m.cpds.event_emit(0, 2) == 0.0);
  CHECK(m.cpds.event_emit(0, 3) == 0.0);
  CHECK(fit.converged);
}

TEST_CASE("one hidden state predicts the smoothed unigram frequency") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto log = ceca::testing::random_encoded_log(rng, 1 + rng() % 10, 6, 4);
    EmConfig cfg;
    cfg.restarts = 1;
    cfg.seed = trial;
    const auto [m, fit] = train_with_restarts(StructureVariant::kPfa, 1, log, cfg);
    const auto want = ceca::testing::unigram_oracle(log, cfg.smoothing_epsilon);
    for (const auto& tr : log.traces) {
      if (tr.size() < 2) continue;
      const auto got = predict_next_event(m, std::span(tr.slices).first(2), std::nullopt);
      for (std::size_t e = 0; e < want.size(); ++e) CHECK(std::abs(got.probs[e] - want[e]) < 1e-9);
    }
  }
}

TEST_CASE("expected counts conserve mass") {
  std::mt19937_64 rng(2);
  const auto log = ceca::testing::random_encoded_log(rng, 12, 6, 3, 2, 2);
  const CpdSet c = random_cpds(dims_for(StructureVariant::kFull, 3, log.vocabulary), 5);
  const auto stats = expected_counts(c, log);
  double slices = 0.0, transitions = 0.0;
  for (const auto& tr : log.traces) {
    slices += static_cast<double>(tr.size());
    transitions += static_cast<double>(tr.size() - 1);
  }
  auto total = [](const CpdTable& t) {
    double s = 0.0;
    for (double x : t.data()) s += x;
    return s;
  };
  CHECK(total(stats.counts.transition) == doctest::Approx(transitions).epsilon(1e-12));
  CHECK(total(stats.counts.event_emit) == doctest::Approx(slices).epsilon(1e-12));
  CHECK(total(stats.counts.background_emit) == doctest::Approx(slices).epsilon(1e-12));
  CHECK(total(stats.counts.symptom_emit) == doctest::Approx(slices).epsilon(1e-12));
  CHECK(total(stats.counts.initial) == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(stats.log_likelihood == doctest::Approx(log_likelihood(c, log).total()).epsilon(1e-12));
}

TEST_CASE("M-step rows are normalized and unvisited rows are uniform") {
  CpdDims d{2, 3, 1, 1};
  ExpectedCounts stats(d);
  stats.counts.initial(0, 0) = 4.0;
  stats.counts.event_emit(0, 1) = 2.0;
  for (double eps : {0.0, 1e-6, 0.5}) {
    const CpdSet p = maximize(stats, eps);
    CHECK(p.max_normalization_error() < 1e-12);
    CHECK(p.event_emit(1, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(p.transition(0, 1) == doctest::Approx(0.5));
    CHECK(p.initial(0, 0) == doctest::Approx((4.0 + eps) / (4.0 + 2 * eps)));
  }
}

TEST_CASE("log-likelihood is non-decreasing across EM iterations") {
  std::mt19937_64 rng(3);
  const StructureVariant variants[] = {StructureVariant::kPfa, StructureVariant::kBackground,
                                       StructureVariant::kSymptom, StructureVariant::kFull};
  for (int trial = 0; trial < 16; ++trial) {
    const auto v = variants[trial % 4];
    const auto log = ceca::testing::random_encoded_log(rng, 20, 7, 4, has_background(v) ? 3 : 0,
                                                       has_symptom(v) ? 3 : 0);
    EmConfig cfg;
    cfg.max_iters = 60;
    cfg.rel_tol = 1e-12;
    const auto [m, fit] = em_fit(init_model(v, 1 + trial % 4, log.vocabulary, trial), log, cfg);
    CHECK(non_decreasing(fit.history));
    CHECK(fit.history.size() == fit.iterations + 1);
    CHECK(m.cpds.max_normalization_error() < 1e-9);
  }
}

TEST_CASE("iteration cap and convergence flag") {
  std::mt19937_64 rng(4);
  const auto log = ceca::testing::random_encoded_log(rng, 20, 6, 4);
  EmConfig cfg;
  cfg.max_iters = 3;
  cfg.rel_tol = 1e-15;
  const auto [m, fit] = em_fit(init_model(StructureVariant::kPfa, 3, log.vocabulary, 1), log, cfg);
  CHECK(fit.iterations == 3);
  CHECK_FALSE(fit.converged);
  CHECK(m.metadata.em_iterations == 3);
  CHECK(m.metadata.final_log_likelihood == fit.final_log_likelihood());
  CHECK(m.metadata.smoothing_epsilon == cfg.smoothing_epsilon);
}

TEST_CASE("em_fit rejects empty or mismatched logs") {
  EncodedLog log;
  log.vocabulary.activity = VariableVocabulary({"A"});
  const auto m = init_model(StructureVariant::kPfa, 2, log.vocabulary, 0);
  CHECK_THROWS_AS(em_fit(m, log, EmConfig{}), ConfigError);
  log.traces.push_back({"c", {{0, 0, 0}}});
  EncodedLog other = log;
  other.vocabulary.activity = VariableVocabulary({"B"});
  CHECK_THROWS_AS(em_fit(m, other, EmConfig{}), ConfigError);
}

TEST_CASE("restart selection") {
  std::mt19937_64 rng(5);
  const auto log = ceca::testing::random_encoded_log(rng, 15, 6, 3);
  EmConfig cfg;
  cfg.restarts = 1;
  cfg.seed = 9;
  const auto single = train_with_restarts(StructureVariant::kPfa, 2, log, cfg);
  const auto direct = em_fit(init_model(StructureVariant::kPfa, 2, log.vocabulary, 9), log, cfg);
  CHECK(single.first.cpds == direct.first.cpds);

  cfg.restarts = 3;
  const auto best = train_with_restarts(StructureVariant::kPfa, 2, log, cfg);
  double max_ll = -1e300;
  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto fit = em_fit(init_model(StructureVariant::kPfa, 2, log.vocabulary, 9 + r), log, cfg);
    max_ll = std::max(max_ll, fit.second.final_log_likelihood());
  }
  CHECK(best.second.final_log_likelihood() == max_ll);

  cfg.threads = 3;
  const auto parallel = train_with_restarts(StructureVariant::kPfa, 2, log, cfg);
  CHECK(parallel.first.cpds == best.first.cpds);
  CHECK(parallel.second.seed == best.second.seed);
}

TEST_CASE("hidden-state selection") {
  const auto log = alternating_log(40);
  EmConfig cfg;
  cfg.restarts = 3;

  SUBCASE("singleton grid skips validation") {
    const auto [m, sel] = select_hidden_states(StructureVariant::kPfa, log, {1}, cfg);
    CHECK(sel.chosen == 1);
    CHECK(m.hidden_states() == 1);
    CHECK(sel.candidates.size() == 1);
  }
  SUBCASE("a second state beats the unigram on an alternating process") {
    const auto [m, sel] = select_hidden_states(StructureVariant::kPfa, log, {1, 2}, cfg);
    CHECK(sel.chosen == 2);
    CHECK(sel.candidates[1].validation_accuracy > sel.candidates[0].validation_accuracy);
    CHECK(evaluate_model(m, log, PredictionTarget::kNextEvent).accuracy == 1.0);
  }
  SUBCASE("ties go to the smaller count") {
    const auto [m, sel] = select_hidden_states(StructureVariant::kPfa, log, {2, 3}, cfg);
    REQUIRE(sel.candidates[0].validation_accuracy == sel.candidates[1].validation_accuracy);
    CHECK(sel.chosen == 2);
  }
  CHECK_THROWS_AS(select_hidden_states(StructureVariant::kPfa, log, {}, cfg), ConfigError);
}
