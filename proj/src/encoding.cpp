#include "ceca/encoding.hpp"

#include <numeric>
#include <stdexcept>

#include "ceca/error.hpp"

namespace ceca {
namespace {

const std::string kMissing{VariableVocabulary::kMissingLabel};
const std::string kOther{VariableVocabulary::kOtherLabel};

void check_role(const EventLog& log, const std::string& attribute) {
  const AttributeSpec* spec = log.find_attribute(attribute);
  if (spec == nullptr)
    throw ConfigError("role attribute '" + attribute + "' is not in the schema");
  if (spec->kind != AttributeKind::kCategorical)
    throw ConfigError("role attribute '" + attribute +
                      "' is numeric; discretize it first");
}

const std::string* categorical_value(const Event& event,
                                     const std::string& attribute) {
  auto it = event.attributes.find(attribute);
  if (it == event.attributes.end()) return nullptr;
  return std::get_if<std::string>(&it->second);
}

Index encode_role(const Event& event, const RoleVocabulary& role) {
  const std::string* value = categorical_value(event, role.attribute);
  return value == nullptr ? role.values.missing() : role.values.encode(*value);
}

}  // namespace

VariableVocabulary::VariableVocabulary(std::vector<std::string> values) {
  for (auto& v : values) add(v);
}

Index VariableVocabulary::add(const std::string& value) {
  auto [it, inserted] =
      index_.try_emplace(value, static_cast<Index>(values_.size()));
  if (inserted) values_.push_back(value);
  return it->second;
}

Index VariableVocabulary::encode(std::string_view value) const {
  return find(value).value_or(other());
}

std::optional<Index> VariableVocabulary::find(std::string_view value) const {
  auto it = index_.find(std::string(value));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& VariableVocabulary::decode(Index index) const {
  if (index < values_.size()) return values_[index];
  if (index == missing()) return kMissing;
  if (index == other()) return kOther;
  throw std::out_of_range("vocabulary index " + std::to_string(index) +
                          " out of range");
}

std::size_t EncodedLog::num_slices() const {
  return std::accumulate(
      traces.begin(), traces.end(), std::size_t{0},
      [](std::size_t acc, const EncodedTrace& t) { return acc + t.size(); });
}

EncodedLog encode_log(const EventLog& log, const Roles& roles) {
  if (roles.background && roles.symptom && *roles.background == *roles.symptom)
    throw ConfigError("attribute '" + *roles.background +
                      "' cannot be both background and symptom");
  Vocabulary vocab;
  if (roles.background) {
    check_role(log, *roles.background);
    vocab.background = RoleVocabulary{*roles.background, {}};
  }
  if (roles.symptom) {
    check_role(log, *roles.symptom);
    vocab.symptom = RoleVocabulary{*roles.symptom, {}};
  }
  for (const auto& trace : log.traces) {
    for (const auto& event : trace.events) {
      vocab.activity.add(event.activity);
      if (vocab.background) {
        if (auto* v = categorical_value(event, vocab.background->attribute))
          vocab.background->values.add(*v);
      }
      if (vocab.symptom) {
        if (auto* v = categorical_value(event, vocab.symptom->attribute))
          vocab.symptom->values.add(*v);
      }
    }
  }
  return encode_log(log, vocab);
}

EncodedLog encode_log(const EventLog& log, const Vocabulary& vocabulary) {
  if (vocabulary.background) check_role(log, vocabulary.background->attribute);
  if (vocabulary.symptom) check_role(log, vocabulary.symptom->attribute);

  EncodedLog out;
  out.vocabulary = vocabulary;
  out.traces.reserve(log.traces.size());
  for (const auto& trace : log.traces) {
    EncodedTrace encoded{trace.case_id, {}};
    encoded.slices.reserve(trace.size());
    for (const auto& event : trace.events) {
      Slice slice;
      slice.event = vocabulary.activity.encode(event.activity);
      if (vocabulary.background)
        slice.background = encode_role(event, *vocabulary.background);
      if (vocabulary.symptom)
        slice.symptom = encode_role(event, *vocabulary.symptom);
      encoded.slices.push_back(slice);
    }
    out.traces.push_back(std::move(encoded));
  }
  return out;
}

}  // namespace ceca
