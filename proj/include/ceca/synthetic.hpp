#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "ceca/eventlog.hpp"

namespace ceca {

// Four-activity process with two variants <A,B,C,D> and <A,B,D,C> and one
// context attribute "ctx" over {w,x,y,z}:
//   background-causal  trace-constant ctx in {w,x} for variant 1, {y,z} for 2
//   background-random  trace-constant ctx uniform, independent of the variant
//   symptom-causal     per-event ctx = m(activity), A->w B->x C->y D->z
//   symptom-random     per-event ctx uniform
enum class SyntheticKind {
  kBackgroundCausal,
  kBackgroundRandom,
  kSymptomCausal,
  kSymptomRandom,
};

inline constexpr std::string_view kSyntheticAttribute = "ctx";

std::string_view to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kBackgroundCausal;
  std::size_t num_traces = 1000;
  std::uint64_t seed = 0;
};

EventLog generate(const SyntheticSpec& spec);

}  // namespace ceca
