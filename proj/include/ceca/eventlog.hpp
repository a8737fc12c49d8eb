#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ceca/timestamp.hpp"

namespace ceca {

enum class AttributeKind { kCategorical, kNumeric };

// Absent values (empty CSV cells) are simply missing from the map;
// monostate is accepted and treated the same way.
using AttributeValue = std::variant<std::monostate, std::string, double>;

struct Event {
  std::string activity;
  Timestamp timestamp;
  std::map<std::string, AttributeValue> attributes;

  bool operator==(const Event&) const = default;
};

struct Trace {
  std::string case_id;
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
  bool operator==(const Trace&) const = default;
};

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;

  bool operator==(const AttributeSpec&) const = default;
};

struct EventLog {
  std::vector<Trace> traces;
  std::vector<AttributeSpec> schema;  // declaration order

  const AttributeSpec* find_attribute(const std::string& name) const;
  std::size_t num_events() const;
  bool operator==(const EventLog&) const = default;
};

struct ColumnMapping {
  std::string case_col = "case";
  std::string activity_col = "activity";
  std::string timestamp_col = "timestamp";
  std::vector<AttributeSpec> attributes;
  // When unset timestamps are ISO-8601; otherwise a std::get_time format.
  std::optional<std::string> timestamp_format;
};

// One Trace per distinct case id, in order of first appearance. Events are
// stably sorted by timestamp so ties keep input row order.
EventLog parse_csv(std::istream& in, const ColumnMapping& mapping);
EventLog parse_csv_string(const std::string& text, const ColumnMapping& mapping);

// Columns: case, activity, timestamp, then schema attributes.
void write_csv(std::ostream& out, const EventLog& log);
std::string write_csv_string(const EventLog& log);

struct FilterResult {
  EventLog log;
  std::size_t removed = 0;
  std::size_t original = 0;

  double removed_fraction() const {
    return original == 0 ? 0.0
                         : static_cast<double>(removed) /
                               static_cast<double>(original);
  }
};

FilterResult filter_short_traces(const EventLog& log, std::size_t min_len = 3);

// Equal-width binning over [lo, hi]; half-open bins, last bin closed, values
// outside the range clamp to the edge bins.
struct DiscretizationSpec {
  std::string attribute;
  std::size_t bin_count = 40;
  double lo = 0.0;
  double hi = 0.0;

  std::size_t bin(double value) const;
  static std::string label(std::size_t bin);
  bool operator==(const DiscretizationSpec&) const = default;
};

std::pair<EventLog, DiscretizationSpec> discretize_attribute(
    const EventLog& log, const std::string& attribute,
    std::size_t bin_count = 40);

// Applies a spec fitted elsewhere (typically on training data).
EventLog apply_discretization(const EventLog& log,
                              const DiscretizationSpec& spec);

// Appends an end-of-trace event carrying no attributes to every trace.
EventLog append_end_event(const EventLog& log,
                          const std::string& label = "[END]");

// Random trace-level partition with |train| = round(train_ratio * n). Both
// sides keep the original relative order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double train_ratio, std::uint64_t seed);

std::pair<EventLog, EventLog> split_log(const EventLog& log,
                                        double train_ratio,
                                        std::uint64_t seed);

}  // namespace ceca
