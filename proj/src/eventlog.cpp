#include "ceca/eventlog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "ceca/error.hpp"

namespace ceca {
namespace {

// RFC-4180 record reader. Returns false at end of input. `line` tracks the
// physical line where the record started.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(static_cast<unsigned char>(bom[1]) == 0xBB &&
            static_cast<unsigned char>(bom[2]) == 0xBF)) {
        in_.seekg(0);
      }
    }
  }

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    record_line_ = line_ + 1;
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) return false;

    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    while (true) {
      if (c == std::char_traits<char>::eof()) {
        if (quoted) throw RowError(record_line_, "unterminated quoted field");
        fields.push_back(std::move(field));
        ++line_;
        return true;
      }
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
      } else if (ch == '"' && field.empty() && !field_started_quoted) {
        quoted = true;
        field_started_quoted = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
      } else if (ch == '\r' && in_.peek() == '\n') {
        // CRLF: handled by the '\n' branch next iteration.
      } else if (ch == '\n') {
        fields.push_back(std::move(field));
        ++line_;
        return true;
      } else {
        field.push_back(ch);
      }
      c = in_.get();
    }
  }

  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

void write_field(std::ostream& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<double> parse_number(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw DataError("schema error: missing column '" + name + "'");
  return static_cast<std::size_t>(std::distance(header.begin(), it));
}

}  // namespace

const AttributeSpec* EventLog::find_attribute(const std::string& name) const {
  auto it = std::find_if(schema.begin(), schema.end(),
                         [&](const AttributeSpec& a) { return a.name == name; });
  return it == schema.end() ? nullptr : &*it;
}

std::size_t EventLog::num_events() const {
  return std::accumulate(
      traces.begin(), traces.end(), std::size_t{0},
      [](std::size_t acc, const Trace& t) { return acc + t.size(); });
}

EventLog parse_csv(std::istream& in, const ColumnMapping& mapping) {
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw DataError("schema error: empty input");

  const std::size_t case_idx = column_index(header, mapping.case_col);
  const std::size_t act_idx = column_index(header, mapping.activity_col);
  const std::size_t ts_idx = column_index(header, mapping.timestamp_col);
  std::vector<std::size_t> attr_idx;
  for (const auto& attr : mapping.attributes)
    attr_idx.push_back(column_index(header, attr.name));

  EventLog log;
  log.schema = mapping.attributes;
  std::unordered_map<std::string, std::size_t> trace_of_case;

  std::vector<std::string> row;
  while (reader.next(row)) {
    const std::size_t line = reader.record_line();
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != header.size())
      throw RowError(line, "expected " + std::to_string(header.size()) +
                               " fields, found " + std::to_string(row.size()));

    Event event;
    event.activity = row[act_idx];
    if (event.activity.empty()) throw RowError(line, "empty activity label");

    const std::string& ts_text = row[ts_idx];
    auto ts = mapping.timestamp_format
                  ? parse_with_format(ts_text, *mapping.timestamp_format)
                  : parse_iso8601(ts_text);
    if (!ts) throw RowError(line, "unparseable timestamp '" + ts_text + "'");
    event.timestamp = *ts;

    for (std::size_t a = 0; a < mapping.attributes.size(); ++a) {
      const std::string& cell = row[attr_idx[a]];
      const AttributeSpec& spec = mapping.attributes[a];
      if (cell.empty()) {
        continue;
      } else if (spec.kind == AttributeKind::kNumeric) {
        auto v = parse_number(cell);
        if (!v)
          throw RowError(line, "attribute '" + spec.name +
                                   "' is not numeric: '" + cell + "'");
        event.attributes[spec.name] = *v;
      } else {
        event.attributes[spec.name] = cell;
      }
    }

    const std::string& case_id = row[case_idx];
    auto [it, inserted] = trace_of_case.try_emplace(case_id, log.traces.size());
    if (inserted) log.traces.push_back(Trace{case_id, {}});
    log.traces[it->second].events.push_back(std::move(event));
  }

  for (auto& trace : log.traces) {
    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const Event& a, const Event& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  return log;
}

EventLog parse_csv_string(const std::string& text,
                          const ColumnMapping& mapping) {
  std::istringstream in(text);
  return parse_csv(in, mapping);
}

void write_csv(std::ostream& out, const EventLog& log) {
  out << "case,activity,timestamp";
  for (const auto& attr : log.schema) {
    out << ',';
    write_field(out, attr.name);
  }
  out << '\n';
  for (const auto& trace : log.traces) {
    for (const auto& event : trace.events) {
      write_field(out, trace.case_id);
      out << ',';
      write_field(out, event.activity);
      out << ',' << format_iso8601(event.timestamp);
      for (const auto& attr : log.schema) {
        out << ',';
        auto it = event.attributes.find(attr.name);
        if (it == event.attributes.end()) continue;
        if (const auto* s = std::get_if<std::string>(&it->second))
          write_field(out, *s);
        else if (const auto* d = std::get_if<double>(&it->second))
          out << format_number(*d);
      }
      out << '\n';
    }
  }
}

std::string write_csv_string(const EventLog& log) {
  std::ostringstream out;
  write_csv(out, log);
  return out.str();
}

FilterResult filter_short_traces(const EventLog& log, std::size_t min_len) {
  FilterResult result;
  result.original = log.traces.size();
  result.log.schema = log.schema;
  for (const auto& trace : log.traces) {
    if (trace.size() >= min_len)
      result.log.traces.push_back(trace);
    else
      ++result.removed;
  }
  return result;
}

std::size_t DiscretizationSpec::bin(double value) const {
  if (bin_count <= 1 || !(hi > lo)) return 0;
  const double scaled =
      std::floor(static_cast<double>(bin_count) * (value - lo) / (hi - lo));
  if (!(scaled > 0.0)) return 0;
  const double last = static_cast<double>(bin_count - 1);
  return static_cast<std::size_t>(std::min(scaled, last));
}

std::string DiscretizationSpec::label(std::size_t bin) {
  return "bin_" + std::to_string(bin);
}

EventLog apply_discretization(const EventLog& log,
                              const DiscretizationSpec& spec) {
  const AttributeSpec* attr = log.find_attribute(spec.attribute);
  if (attr == nullptr)
    throw ConfigError("unknown attribute '" + spec.attribute + "'");
  if (attr->kind != AttributeKind::kNumeric)
    throw ConfigError("attribute '" + spec.attribute + "' is not numeric");

  EventLog out = log;
  for (auto& a : out.schema)
    if (a.name == spec.attribute) a.kind = AttributeKind::kCategorical;
  for (auto& trace : out.traces) {
    for (auto& event : trace.events) {
      auto it = event.attributes.find(spec.attribute);
      if (it == event.attributes.end()) continue;
      if (const auto* v = std::get_if<double>(&it->second))
        it->second = DiscretizationSpec::label(spec.bin(*v));
    }
  }
  return out;
}

std::pair<EventLog, DiscretizationSpec> discretize_attribute(
    const EventLog& log, const std::string& attribute, std::size_t bin_count) {
  if (bin_count == 0) throw ConfigError("bin_count must be positive");
  const AttributeSpec* attr = log.find_attribute(attribute);
  if (attr == nullptr)
    throw ConfigError("unknown attribute '" + attribute + "'");
  if (attr->kind != AttributeKind::kNumeric)
    throw ConfigError("attribute '" + attribute + "' is not numeric");

  std::optional<double> lo, hi;
  for (const auto& trace : log.traces) {
    for (const auto& event : trace.events) {
      auto it = event.attributes.find(attribute);
      if (it == event.attributes.end()) continue;
      if (const auto* v = std::get_if<double>(&it->second)) {
        lo = lo ? std::min(*lo, *v) : *v;
        hi = hi ? std::max(*hi, *v) : *v;
      }
    }
  }
  if (!lo)
    throw ConfigError("attribute '" + attribute + "' has no values to bin");

  DiscretizationSpec spec{attribute, bin_count, *lo, *hi};
  return {apply_discretization(log, spec), spec};
}

EventLog append_end_event(const EventLog& log, const std::string& label) {
  EventLog out = log;
  for (auto& trace : out.traces) {
    if (trace.events.empty()) continue;
    Event end;
    end.activity = label;
    end.timestamp = trace.events.back().timestamp;
    trace.events.push_back(std::move(end));
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw ConfigError("train ratio must lie in (0, 1)");
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw ConfigError("split of " + std::to_string(n) +
                      " traces leaves one side empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> test(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<EventLog, EventLog> split_log(const EventLog& log,
                                        double train_ratio,
                                        std::uint64_t seed) {
  if (log.traces.empty()) throw ConfigError("cannot split an empty log");
  auto [train_idx, test_idx] =
      split_indices(log.traces.size(), train_ratio, seed);
  EventLog train{{}, log.schema};
  EventLog test{{}, log.schema};
  for (auto i : train_idx) train.traces.push_back(log.traces[i]);
  for (auto i : test_idx) test.traces.push_back(log.traces[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace ceca
