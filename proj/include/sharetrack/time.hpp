#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace sharetrack {

// All stored timestamps are UTC, second resolution.
using Timestamp = std::chrono::sys_seconds;

// ISO-8601 / RFC 3339 date-time: "2015-10-14T00:00:00Z", with optional
// fractional seconds and "+hh:mm" offsets. A bare date is midnight UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);

// RFC 822 / RFC 2822 dates as found in RSS pubDate, e.g.
// "Wed, 14 Oct 2015 00:00:00 GMT" or "14 Oct 15 09:30 -0500".
std::optional<Timestamp> parse_rfc822(std::string_view text);

// "2015-10-14T00:00:00Z"
std::string format_iso8601(Timestamp t);

}  // namespace sharetrack
