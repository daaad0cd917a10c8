#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace parkcast {

/// Naive local date-time with minute precision. No timezone arithmetic is
/// ever applied; the epoch is only used for ordering and calendar math.
using Timestamp = std::chrono::sys_time<std::chrono::minutes>;

/// Parses "YYYY-MM-DD H:MM[:SS]" (a 'T' separator is accepted as well).
/// Seconds must be zero when present. Returns nullopt on any malformation.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DD HH:MM:SS".
std::string format_timestamp(Timestamp ts);

/// Formats as ISO-8601 "YYYY-MM-DDTHH:MM".
std::string format_timestamp_iso(Timestamp ts);

/// Parses "YYYY-MM-DD".
std::optional<std::chrono::sys_days> parse_date(std::string_view text);

std::string format_date(std::chrono::sys_days day);

struct IsoCalendar {
    int year = 0;     // ISO week-numbering year
    int week = 0;     // 1..53
    int weekday = 0;  // 1 = Monday .. 7 = Sunday
};

IsoCalendar iso_calendar(std::chrono::sys_days day);

}  // namespace parkcast
