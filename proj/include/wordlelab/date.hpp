#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace wordlelab {

/// Calendar date. Results files appear in two layouts, mm-dd-yyyy and
/// yyyy-mm-dd; parse() accepts both ('-' or '/' separators).
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    /// Days since 1970-01-01, proleptic Gregorian.
    std::int64_t day_number() const;

    Date add_days(std::int64_t n) const;

    /// yyyy-mm-dd.
    std::string to_string() const;

    /// Throws IoError on anything that is not a valid calendar date.
    static Date parse(const std::string& text);
};

std::int64_t days_between(const Date& from, const Date& to);

}  // namespace wordlelab
