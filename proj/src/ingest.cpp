#include "wordlelab/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"

namespace wordlelab::ingest {

const std::array<const char*, 12> kResultColumns = {
    "Date",          "Contest number", "Word",   "Number of reported results",
    "Number in hard mode", "1 try",    "2 tries", "3 tries",
    "4 tries",       "5 tries",        "6 tries", "7 or more tries (X)"};

double TryDistribution::sum() const {
    double s = 0.0;
    for (double v : pct) s += v;
    return s;
}

void TryDistribution::normalize() {
    const double s = sum();
    if (s <= 0.0) throw ComputationError("cannot normalize a zero try distribution");
    if (std::abs(s - 100.0) <= 1e-12) return;
    const double scale = 100.0 / s;
    for (double& v : pct) v *= scale;
}

double TryDistribution::share_three_plus() const {
    return pct[2] + pct[3] + pct[4] + pct[5] + pct[6];
}

double expected_try_count(const TryDistribution& t) {
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < 7; ++b) {
        num += static_cast<double>(b + 1) * t.pct[b];
        den += t.pct[b];
    }
    if (den <= 0.0) throw ComputationError("expected_try_count: empty distribution");
    return num / den;
}

std::size_t CleaningReport::dropped_rows() const {
    return dropped_bad_word.size() + dropped_bad_sum.size();
}

bool CleaningReport::accounts_for_all_rows() const {
    return dropped_rows() + normalized_rows == input_rows;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string canonical_header(const std::string& s) {
    std::string out;
    bool pending_space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

long long parse_count(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s.empty()) throw IoError(where + ": empty count field");
    long long v = 0;
    std::size_t pos = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw IoError(where + ": bad count '" + s + "'");
    }
    if (pos != s.size()) throw IoError(where + ": bad count '" + s + "'");
    if (v < 0) throw IoError(where + ": negative count '" + s + "'");
    return v;
}

double parse_percent(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s.empty()) throw IoError(where + ": empty percentage field");
    double v = 0.0;
    std::size_t pos = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw IoError(where + ": bad percentage '" + s + "'");
    }
    if (pos != s.size()) throw IoError(where + ": bad percentage '" + s + "'");
    if (v < 0.0) throw IoError(where + ": negative percentage '" + s + "'");
    return v;
}

std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

std::vector<DailyRecord> parse_results(std::istream& in, const std::string& source_name) {
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw IoError(source_name + ": empty file (missing header)");
    }
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();

    const char delim = header_line.find('\t') != std::string::npos ? '\t' : ',';
    const auto header_fields = split_fields(header_line, delim);

    std::unordered_map<std::string, std::size_t> positions;
    for (std::size_t i = 0; i < header_fields.size(); ++i) {
        positions[canonical_header(header_fields[i])] = i;
    }
    std::array<std::size_t, 12> col{};
    for (std::size_t c = 0; c < kResultColumns.size(); ++c) {
        const auto it = positions.find(canonical_header(kResultColumns[c]));
        if (it == positions.end()) {
            throw IoError(source_name + ": missing column '" + kResultColumns[c] + "'");
        }
        col[c] = it->second;
    }

    std::vector<DailyRecord> records;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        const auto fields = split_fields(line, delim);
        if (fields.size() != header_fields.size()) {
            throw IoError(source_name + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(header_fields.size()) + " fields, got " +
                          std::to_string(fields.size()));
        }
        const std::string where = source_name + ":" + std::to_string(line_no);

        DailyRecord rec;
        try {
            rec.date = Date::parse(trim(fields[col[0]]));
        } catch (const IoError& e) {
            throw IoError(where + ": " + e.what());
        }
        rec.contest_number = static_cast<int>(parse_count(fields[col[1]], where));
        if (rec.contest_number <= 0) throw IoError(where + ": contest number must be positive");
        rec.word = lowercase(trim(fields[col[2]]));
        rec.reported_results = parse_count(fields[col[3]], where);
        rec.hard_mode_count = parse_count(fields[col[4]], where);
        for (std::size_t b = 0; b < 7; ++b) {
            rec.tries[b] = parse_percent(fields[col[5 + b]], where);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<DailyRecord> parse_results_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file '" + path + "'");
    return parse_results(in, path);
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

namespace {

bool is_clean_word(const std::string& w) {
    if (w.size() != 5) return false;
    for (char c : w) {
        if (c < 'a' || c > 'z') return false;
    }
    return true;
}

// A count below this share of its neighborhood median is treated as an
// outlier and replaced by the rounded mean of the non-flagged neighbors.
constexpr double kOutlierMedianShare = 0.2;

void repair_column(std::vector<DailyRecord>& rows, int window,
                   long long DailyRecord::* field, const char* column_name,
                   CleaningReport& report) {
    const std::size_t n = rows.size();
    std::vector<std::int64_t> day(n);
    std::vector<double> value(n);
    for (std::size_t i = 0; i < n; ++i) {
        day[i] = rows[i].date.day_number();
        value[i] = static_cast<double>(rows[i].*field);
    }

    std::vector<bool> flagged(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> in_window;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(day[j] - day[i]) <= window) in_window.push_back(value[j]);
        }
        flagged[i] = value[i] < kOutlierMedianShare * stats::median(std::move(in_window));
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!flagged[i]) continue;
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || flagged[j]) continue;
            if (std::abs(day[j] - day[i]) > window) continue;
            sum += value[j];
            ++count;
        }
        if (count == 0) continue;  // no usable neighbors; leave the value as parsed
        const long long repaired = std::llround(sum / static_cast<double>(count));
        report.repaired_counts.push_back({rows[i].date, column_name, rows[i].*field, repaired});
        rows[i].*field = repaired;
    }
}

}  // namespace

CleanResult clean_records(const std::vector<DailyRecord>& raw, int neighbor_window,
                          double sum_drop_tolerance) {
    if (raw.empty()) throw std::invalid_argument("clean_records: no input rows");
    if (neighbor_window < 1) throw std::invalid_argument("clean_records: neighbor_window must be >= 1");
    if (sum_drop_tolerance < 0.0) {
        throw std::invalid_argument("clean_records: sum_drop_tolerance must be >= 0");
    }

    CleanResult out;
    out.report.input_rows = raw.size();

    // (a) word filter
    std::vector<DailyRecord> rows;
    rows.reserve(raw.size());
    for (const auto& r : raw) {
        if (is_clean_word(r.word)) {
            rows.push_back(r);
        } else {
            out.report.dropped_bad_word.emplace_back(r.date, r.word);
        }
    }

    // (b) count-outlier repair, both columns independently
    if (!rows.empty()) {
        repair_column(rows, neighbor_window, &DailyRecord::reported_results, "reported_results",
                      out.report);
        repair_column(rows, neighbor_window, &DailyRecord::hard_mode_count, "hard_mode_count",
                      out.report);
    }

    // (c) sum filter
    std::vector<DailyRecord> kept;
    kept.reserve(rows.size());
    for (auto& r : rows) {
        const double s = r.tries.sum();
        if (std::abs(s - 100.0) > sum_drop_tolerance) {
            out.report.dropped_bad_sum.emplace_back(r.date, s);
        } else {
            kept.push_back(std::move(r));
        }
    }
    if (kept.empty()) throw ComputationError("clean_records: empty after cleaning");

    // (d) rescale survivors to sum 100
    for (auto& r : kept) r.tries.normalize();

    std::stable_sort(kept.begin(), kept.end(),
                     [](const DailyRecord& a, const DailyRecord& b) { return a.date < b.date; });

    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& r = kept[i];
        if (r.hard_mode_count > r.reported_results) {
            throw ComputationError("clean_records: hard-mode count exceeds reported results on " +
                                   r.date.to_string());
        }
        if (i > 0) {
            if (kept[i - 1].date == r.date) {
                throw ComputationError("clean_records: duplicate date " + r.date.to_string());
            }
            if (kept[i - 1].contest_number >= r.contest_number) {
                throw ComputationError(
                    "clean_records: contest number does not increase with date at " +
                    r.date.to_string());
            }
        }
    }

    out.report.normalized_rows = kept.size();
    out.records = std::move(kept);
    return out;
}

HardShareResult hard_share_statistic(const std::vector<DailyRecord>& records, double threshold) {
    if (records.empty()) throw ComputationError("hard_share_statistic: no records");
    HardShareResult out;
    out.shares.reserve(records.size());
    std::size_t above = 0;
    for (const auto& r : records) {
        const double share = r.tries.share_three_plus();
        out.shares.emplace_back(r.word, share);
        if (share >= threshold) ++above;
    }
    out.fraction_at_or_above = static_cast<double>(above) / static_cast<double>(records.size());
    return out;
}

// ---------------------------------------------------------------------------
// File output
// ---------------------------------------------------------------------------

void write_results_file(const std::string& path, const std::vector<DailyRecord>& records) {
    std::ofstream outf(path);
    if (!outf) throw IoError("cannot write results file '" + path + "'");
    for (std::size_t c = 0; c < kResultColumns.size(); ++c) {
        if (c) outf << ',';
        outf << kResultColumns[c];
    }
    outf << '\n';
    for (const auto& r : records) {
        outf << r.date.to_string() << ',' << r.contest_number << ',' << r.word << ','
             << r.reported_results << ',' << r.hard_mode_count;
        for (double v : r.tries.pct) outf << ',' << stats::fmt_g17(v);
        outf << '\n';
    }
    if (!outf) throw IoError("failed writing results file '" + path + "'");
}

void write_cleaning_report(const std::string& path, const CleaningReport& report) {
    nlohmann::json j;
    j["input_rows"] = report.input_rows;
    j["kept_rows"] = report.normalized_rows;
    j["dropped_rows"] = report.dropped_rows();
    j["dropped_bad_word"] = nlohmann::json::array();
    for (const auto& [date, word] : report.dropped_bad_word) {
        j["dropped_bad_word"].push_back({{"date", date.to_string()}, {"word", word}});
    }
    j["dropped_bad_sum"] = nlohmann::json::array();
    for (const auto& [date, sum] : report.dropped_bad_sum) {
        j["dropped_bad_sum"].push_back({{"date", date.to_string()}, {"sum", sum}});
    }
    j["repaired_counts"] = nlohmann::json::array();
    for (const auto& e : report.repaired_counts) {
        j["repaired_counts"].push_back({{"date", e.date.to_string()},
                                        {"column", e.column},
                                        {"old_value", e.old_value},
                                        {"new_value", e.new_value}});
    }
    std::ofstream outf(path);
    if (!outf) throw IoError("cannot write cleaning report '" + path + "'");
    outf << j.dump(2) << '\n';
    if (!outf) throw IoError("failed writing cleaning report '" + path + "'");
}

}  // namespace wordlelab::ingest
