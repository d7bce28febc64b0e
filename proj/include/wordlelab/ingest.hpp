#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wordlelab/date.hpp"

namespace wordlelab::ingest {

/// Percentages of players solving in 1..6 tries plus the fail bucket
/// (7 or more tries / X). Index 0 holds "1 try", index 6 holds "7+/X".
struct TryDistribution {
    std::array<double, 7> pct{};

    double sum() const;

    /// Rescales the components so they sum to exactly 100. A no-op when the
    /// sum is already within 1e-12 of 100, which makes repeated
    /// normalization stable down to the bit level.
    void normalize();

    /// p3 + p4 + p5 + p6 + px: share of players who needed three or more tries.
    double share_three_plus() const;

    double& operator[](std::size_t i) { return pct[i]; }
    double operator[](std::size_t i) const { return pct[i]; }
};

/// Mean number of tries implied by a distribution, counting the 7+/X bucket
/// as 7 tries.
double expected_try_count(const TryDistribution& t);

/// Column headers of the daily-results file, in canonical order.
extern const std::array<const char*, 12> kResultColumns;

struct DailyRecord {
    Date date;
    int contest_number = 0;
    std::string word;
    long long reported_results = 0;
    long long hard_mode_count = 0;
    TryDistribution tries;
};

struct RepairEntry {
    Date date;
    std::string column;  // "reported_results" or "hard_mode_count"
    long long old_value = 0;
    long long new_value = 0;
};

struct CleaningReport {
    std::vector<std::pair<Date, std::string>> dropped_bad_word;
    std::vector<std::pair<Date, double>> dropped_bad_sum;
    std::vector<RepairEntry> repaired_counts;
    std::size_t normalized_rows = 0;  // rows kept; every kept row is normalized
    std::size_t input_rows = 0;

    std::size_t dropped_rows() const;
    /// True when kept + dropped equals the number of input rows, i.e. every
    /// row is accounted for exactly once.
    bool accounts_for_all_rows() const;
};

struct CleanResult {
    std::vector<DailyRecord> records;
    CleaningReport report;
};

/// Reads the delimiter-separated results file. The header must contain every
/// canonical column (case-insensitive, any order); comma and tab delimiters
/// are auto-detected. Percentages are kept exactly as read and words are
/// lowercased; all other validation happens in clean_records. Rows come back
/// in file order. Throws IoError with the line number on malformed rows.
std::vector<DailyRecord> parse_results_file(const std::string& path);
std::vector<DailyRecord> parse_results(std::istream& in, const std::string& source_name);

/// Applies the three repair rules, in order:
///   (a) drop rows whose word is not exactly five letters a-z;
///   (b) repair count outliers: a count below 20% of the median of counts
///       within +-neighbor_window calendar days is replaced by the rounded
///       mean of the non-flagged counts in that window (both count columns,
///       independently);
///   (c) drop rows whose try-percentage sum deviates from 100 by more than
///       sum_drop_tolerance points;
///   (d) rescale the remaining rows so each sums to exactly 100.
/// Output is sorted by date. Throws ComputationError when nothing survives,
/// and when the survivors violate hard_mode <= reported or the
/// contest-number/date ordering.
CleanResult clean_records(const std::vector<DailyRecord>& raw, int neighbor_window = 3,
                          double sum_drop_tolerance = 10.0);

struct HardShareResult {
    /// (word, p3+p4+p5+p6+px) per record, in record order.
    std::vector<std::pair<std::string, double>> shares;
    /// Fraction of records whose share is at or above the threshold.
    double fraction_at_or_above = 0.0;
};

HardShareResult hard_share_statistic(const std::vector<DailyRecord>& records,
                                     double threshold = 90.0);

/// Writes records in the canonical column order (comma-separated,
/// yyyy-mm-dd dates, full-precision percentages).
void write_results_file(const std::string& path, const std::vector<DailyRecord>& records);

/// One JSON object; each drop/repair appears as one entry in its action list.
void write_cleaning_report(const std::string& path, const CleaningReport& report);

}  // namespace wordlelab::ingest
