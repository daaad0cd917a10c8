#include "parkcast/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace parkcast {

namespace {

using namespace std::chrono;

// Reads an unsigned integer of 1..max_digits digits at pos; advances pos.
std::optional<int> read_int(std::string_view s, std::size_t& pos, std::size_t min_digits,
                            std::size_t max_digits) {
    std::size_t start = pos;
    while (pos < s.size() && pos - start < max_digits && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        ++pos;
    }
    if (pos - start < min_digits) return std::nullopt;
    int value = 0;
    std::from_chars(s.data() + start, s.data() + pos, value);
    return value;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::optional<sys_days> parse_date_at(std::string_view s, std::size_t& pos) {
    auto y = read_int(s, pos, 4, 4);
    if (!y || !expect(s, pos, '-')) return std::nullopt;
    auto m = read_int(s, pos, 1, 2);
    if (!m || !expect(s, pos, '-')) return std::nullopt;
    auto d = read_int(s, pos, 1, 2);
    if (!d) return std::nullopt;
    year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    std::string_view s = trim(text);
    std::size_t pos = 0;
    auto date = parse_date_at(s, pos);
    if (!date) return std::nullopt;
    if (!(expect(s, pos, ' ') || expect(s, pos, 'T'))) return std::nullopt;
    auto h = read_int(s, pos, 1, 2);
    if (!h || *h > 23 || !expect(s, pos, ':')) return std::nullopt;
    auto mi = read_int(s, pos, 2, 2);
    if (!mi || *mi > 59) return std::nullopt;
    if (expect(s, pos, ':')) {
        auto sec = read_int(s, pos, 2, 2);
        // minute precision: anything but :00 would be silently truncated
        if (!sec || *sec != 0) return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;
    return Timestamp{*date} + hours{*h} + minutes{*mi};
}

std::string format_timestamp(Timestamp ts) {
    auto day = floor<days>(ts);
    year_month_day ymd{day};
    const int mins = static_cast<int>((ts - day).count());
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:00", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), mins / 60, mins % 60);
    return buf;
}

std::string format_timestamp_iso(Timestamp ts) {
    std::string s = format_timestamp(ts);
    s[10] = 'T';
    return s.substr(0, 16);
}

std::optional<sys_days> parse_date(std::string_view text) {
    std::string_view s = trim(text);
    std::size_t pos = 0;
    auto d = parse_date_at(s, pos);
    if (!d || pos != s.size()) return std::nullopt;
    return d;
}

std::string format_date(sys_days day) {
    year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

IsoCalendar iso_calendar(sys_days day) {
    const int wd = static_cast<int>(weekday{day}.iso_encoding());
    // The ISO year is the year holding the Thursday of this week.
    const sys_days thursday = day + days{4 - wd};
    const year iso_year = year_month_day{thursday}.year();
    const sys_days jan1 = sys_days{iso_year / January / 1};
    const int week = static_cast<int>((thursday - jan1).count() / 7) + 1;
    return {static_cast<int>(iso_year), week, wd};
}

}  // namespace parkcast
