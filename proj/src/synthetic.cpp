#include "ceca/synthetic.hpp"

#include <array>
#include <random>

#include "ceca/error.hpp"

namespace ceca {
namespace {

constexpr std::array<const char*, 4> kContextValues{"w", "x", "y", "z"};
constexpr std::int64_t kEpoch2020 = 1'577'836'800'000;  // 2020-01-01T00:00:00Z
constexpr std::int64_t kHour = 3'600'000;
constexpr std::int64_t kMinute = 60'000;

std::string symptom_of(const std::string& activity) {
  return kContextValues[static_cast<std::size_t>(activity[0] - 'A')];
}

}  // namespace

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kBackgroundCausal: return "background-causal";
    case SyntheticKind::kBackgroundRandom: return "background-random";
    case SyntheticKind::kSymptomCausal: return "symptom-causal";
    case SyntheticKind::kSymptomRandom: return "symptom-random";
  }
  return "background-causal";
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  for (auto kind : {SyntheticKind::kBackgroundCausal, SyntheticKind::kBackgroundRandom,
                    SyntheticKind::kSymptomCausal, SyntheticKind::kSymptomRandom}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown synthetic kind '" + std::string(name) + "'");
}

EventLog generate(const SyntheticSpec& spec) {
  if (spec.num_traces == 0) throw ConfigError("num_traces must be >= 1");
  static const std::array<std::array<const char*, 4>, 2> variants{
      {{"A", "B", "C", "D"}, {"A", "B", "D", "C"}}};

  std::mt19937_64 rng(spec.seed);
  EventLog log;
  log.schema.push_back({std::string(kSyntheticAttribute), AttributeKind::kCategorical});
  const std::string attr(kSyntheticAttribute);

  for (std::size_t i = 0; i < spec.num_traces; ++i) {
    const std::size_t variant = rng() >> 63;
    std::string trace_ctx;
    switch (spec.kind) {
      case SyntheticKind::kBackgroundCausal:
        trace_ctx = kContextValues[2 * variant + (rng() >> 63)];
        break;
      case SyntheticKind::kBackgroundRandom:
        trace_ctx = kContextValues[rng() >> 62];
        break;
      default:
        break;
    }

    Trace trace;
    trace.case_id = "case_" + std::to_string(i + 1);
    for (std::size_t j = 0; j < 4; ++j) {
      Event event;
      event.activity = variants[variant][j];
      event.timestamp = Timestamp{kEpoch2020 + static_cast<std::int64_t>(i) * kHour +
                                  static_cast<std::int64_t>(j) * kMinute};
      switch (spec.kind) {
        case SyntheticKind::kBackgroundCausal:
        case SyntheticKind::kBackgroundRandom:
          event.attributes[attr] = trace_ctx;
          break;
        case SyntheticKind::kSymptomCausal:
          event.attributes[attr] = symptom_of(event.activity);
          break;
        case SyntheticKind::kSymptomRandom:
          event.attributes[attr] = std::string(kContextValues[rng() >> 62]);
          break;
      }
      trace.events.push_back(std::move(event));
    }
    log.traces.push_back(std::move(trace));
  }
  return log;
}

}  // namespace ceca
