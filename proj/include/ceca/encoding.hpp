#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ceca/eventlog.hpp"

namespace ceca {

using Index = std::uint32_t;

// Dense index mapping for one discrete variable. Observed values come first in
// first-appearance order; MISSING and OTHER are always the last two indices.
class VariableVocabulary {
 public:
  static constexpr std::string_view kMissingLabel = "<MISSING>";
  static constexpr std::string_view kOtherLabel = "<OTHER>";

  VariableVocabulary() = default;
  explicit VariableVocabulary(std::vector<std::string> values);

  // Returns the existing index or appends the value.
  Index add(const std::string& value);

  // Out-of-vocabulary values map to OTHER.
  Index encode(std::string_view value) const;
  std::optional<Index> find(std::string_view value) const;
  const std::string& decode(Index index) const;

  Index missing() const { return static_cast<Index>(values_.size()); }
  Index other() const { return static_cast<Index>(values_.size() + 1); }
  std::size_t size() const { return values_.size() + 2; }
  const std::vector<std::string>& values() const { return values_; }

  bool operator==(const VariableVocabulary& other) const {
    return values_ == other.values_;
  }

 private:
  std::vector<std::string> values_;
  std::unordered_map<std::string, Index> index_;
};

struct RoleVocabulary {
  std::string attribute;
  VariableVocabulary values;

  bool operator==(const RoleVocabulary&) const = default;
};

struct Vocabulary {
  VariableVocabulary activity;
  std::optional<RoleVocabulary> background;
  std::optional<RoleVocabulary> symptom;

  bool operator==(const Vocabulary&) const = default;
};

struct Roles {
  std::optional<std::string> background;
  std::optional<std::string> symptom;
};

// One time slice. Roles absent from the model use index 0 on the collapsed
// axis. kWithheld marks a context value that is unobserved and must be
// marginalized; encoded logs never contain it.
struct Slice {
  static constexpr Index kWithheld = std::numeric_limits<Index>::max();

  Index event = 0;
  Index background = 0;
  Index symptom = 0;

  bool operator==(const Slice&) const = default;
};

struct EncodedTrace {
  std::string case_id;
  std::vector<Slice> slices;

  std::size_t size() const { return slices.size(); }
};

struct EncodedLog {
  std::vector<EncodedTrace> traces;
  Vocabulary vocabulary;

  bool has_background() const { return vocabulary.background.has_value(); }
  bool has_symptom() const { return vocabulary.symptom.has_value(); }
  std::size_t num_slices() const;
};

// Builds the vocabulary from this log.
EncodedLog encode_log(const EventLog& log, const Roles& roles);

// Encodes against a vocabulary built elsewhere (e.g. the training side).
EncodedLog encode_log(const EventLog& log, const Vocabulary& vocabulary);

}  // namespace ceca
