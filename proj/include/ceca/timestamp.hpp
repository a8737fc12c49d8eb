#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ceca {

// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t millis = 0;
  auto operator<=>(const Timestamp&) const = default;
};

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.fff]]" (space also allowed as
// separator) with an optional "Z" or "+HH:MM" / "-HH:MM" offset.
std::optional<Timestamp> parse_iso8601(std::string_view text);

// strftime-style format as understood by std::get_time, interpreted as UTC.
std::optional<Timestamp> parse_with_format(std::string_view text,
                                           const std::string& format);

// Always UTC with a trailing "Z"; milliseconds only when non-zero.
std::string format_iso8601(Timestamp ts);

}  // namespace ceca
