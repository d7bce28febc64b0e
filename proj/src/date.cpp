#include "wordlelab/date.hpp"

#include <array>
#include <cstdio>
#include <vector>

#include "wordlelab/errors.hpp"

namespace wordlelab {

namespace {

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

std::vector<std::string> split_date_parts(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == '-' || c == '/') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

int parse_part(const std::string& s, const std::string& full) {
    if (s.empty() || s.size() > 4) throw IoError("invalid date: '" + full + "'");
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw IoError("invalid date: '" + full + "'");
        v = v * 10 + (c - '0');
    }
    return v;
}

}  // namespace

std::int64_t Date::day_number() const {
    // Howard Hinnant's days_from_civil.
    int y = year;
    const int m = month;
    const int d = day;
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::add_days(std::int64_t n) const {
    // Howard Hinnant's civil_from_days.
    std::int64_t z = day_number() + n + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    Date out;
    out.year = static_cast<int>(y + (m <= 2));
    out.month = static_cast<int>(m);
    out.day = static_cast<int>(d);
    return out;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(const std::string& text) {
    const auto parts = split_date_parts(text);
    if (parts.size() != 3) throw IoError("invalid date: '" + text + "'");

    Date out;
    if (parts[0].size() == 4) {
        // yyyy-mm-dd
        out.year = parse_part(parts[0], text);
        out.month = parse_part(parts[1], text);
        out.day = parse_part(parts[2], text);
    } else if (parts[2].size() == 4) {
        // mm-dd-yyyy
        out.month = parse_part(parts[0], text);
        out.day = parse_part(parts[1], text);
        out.year = parse_part(parts[2], text);
    } else {
        throw IoError("invalid date: '" + text + "'");
    }

    if (out.month < 1 || out.month > 12 || out.day < 1 ||
        out.day > days_in_month(out.year, out.month)) {
        throw IoError("invalid date: '" + text + "'");
    }
    return out;
}

std::int64_t days_between(const Date& from, const Date& to) {
    return to.day_number() - from.day_number();
}

}  // namespace wordlelab
