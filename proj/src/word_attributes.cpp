#include "wordlelab/word_attributes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"

namespace wordlelab::words {

namespace {

bool is_lowercase_word(const std::string& w) {
    return !w.empty() &&
           std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

LetterProbabilityTable::LetterProbabilityTable(std::map<char, double> prob)
    : prob_(std::move(prob)) {
    if (prob_.empty()) throw std::invalid_argument("letter table is empty");
    double total = 0.0;
    for (const auto& [letter, p] : prob_) {
        if (letter < 'a' || letter > 'z') {
            throw std::invalid_argument(std::string("letter table key '") + letter +
                                        "' is not a lowercase letter");
        }
        if (p <= 0.0) {
            throw std::invalid_argument(std::string("letter '") + letter +
                                        "' has non-positive probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("letter probabilities sum to " + stats::fmt_g17(total) +
                                    ", expected 1");
    }
}

bool LetterProbabilityTable::contains(char letter) const {
    return prob_.count(letter) != 0;
}

double LetterProbabilityTable::probability(char letter) const {
    const auto it = prob_.find(letter);
    if (it == prob_.end()) {
        throw ComputationError(std::string("letter '") + letter + "' missing from letter table");
    }
    return it->second;
}

LetterProbabilityTable LetterProbabilityTable::uniform(int k) {
    if (k < 1 || k > 26) throw std::invalid_argument("uniform letter table needs 1 <= k <= 26");
    std::map<char, double> prob;
    for (int i = 0; i < k; ++i) prob[static_cast<char>('a' + i)] = 1.0 / k;
    return LetterProbabilityTable(std::move(prob));
}

FreqLookup compute_freq(const std::string& word, const WordFrequencyTable& table) {
    if (word.size() != 5 || !is_lowercase_word(word)) {
        throw std::invalid_argument("compute_freq: '" + word + "' is not a five-letter word");
    }
    const auto it = table.freq.find(word);
    if (it == table.freq.end()) return {0.0, false};
    return {it->second, true};
}

double compute_wie(const std::string& word, const LetterProbabilityTable& table) {
    if (!is_lowercase_word(word)) {
        throw std::invalid_argument("compute_wie: '" + word + "' is not a lowercase word");
    }
    double entropy = 0.0;
    for (char c : word) {
        const double p = table.probability(c);
        entropy -= p * std::log2(p);
    }
    return entropy;
}

int compute_nre(const std::string& word) {
    if (word.empty()) throw std::invalid_argument("compute_nre: empty word");
    std::array<int, 26> counts{};
    for (char c : word) {
        if (c < 'a' || c > 'z') {
            throw std::invalid_argument("compute_nre: '" + word + "' is not a lowercase word");
        }
        ++counts[c - 'a'];
    }
    int total = 0;
    for (int c : counts) {
        if (c >= 2) total += c;
    }
    return total;
}

AttributeResult compute_attributes(const std::string& word, const WordFrequencyTable& freq_table,
                                   const LetterProbabilityTable& letter_table) {
    AttributeResult out;
    const FreqLookup lookup = compute_freq(word, freq_table);
    out.attributes.freq = lookup.value;
    out.freq_in_table = lookup.in_table;
    out.attributes.wie = compute_wie(word, letter_table);
    out.attributes.nre = compute_nre(word);
    return out;
}

// ---------------------------------------------------------------------------

CorrelationMatrix correlation_matrix(const std::vector<WordAttributes>& attributes,
                                     const std::vector<ingest::TryDistribution>& tries) {
    if (attributes.empty() || attributes.size() != tries.size()) {
        throw std::invalid_argument("correlation_matrix: misaligned or empty inputs");
    }
    const std::size_t n = attributes.size();

    std::array<std::vector<double>, 10> series;
    for (auto& s : series) s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        series[0].push_back(attributes[i].freq);
        series[1].push_back(attributes[i].wie);
        series[2].push_back(static_cast<double>(attributes[i].nre));
        for (std::size_t b = 0; b < 7; ++b) series[3 + b].push_back(tries[i][b]);
    }

    std::array<bool, 10> defined{};
    for (std::size_t s = 0; s < 10; ++s) {
        try {
            series[s] = stats::min_max_normalize(series[s]);
            defined[s] = true;
        } catch (const ComputationError&) {
            defined[s] = false;  // constant series: correlations undefined
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    CorrelationMatrix out;
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 10; ++j) out.value[i][j] = nan;
    }
    for (std::size_t i = 0; i < 10; ++i) {
        if (!defined[i]) continue;
        out.value[i][i] = 1.0;
        for (std::size_t j = i + 1; j < 10; ++j) {
            if (!defined[j]) continue;
            const double r = stats::pearson(series[i], series[j]);
            out.value[i][j] = r;
            out.value[j][i] = r;
        }
    }
    return out;
}

HighLowSplit high_low_split(const std::vector<double>& attribute_values,
                            const std::vector<ingest::TryDistribution>& tries) {
    if (attribute_values.size() != tries.size() || attribute_values.size() < 2) {
        throw std::invalid_argument("high_low_split: need at least two aligned rows");
    }
    const double split = stats::median(attribute_values);

    HighLowSplit out;
    out.split_value = split;
    ingest::TryDistribution high{}, low{};
    for (std::size_t i = 0; i < attribute_values.size(); ++i) {
        auto& target = attribute_values[i] > split ? high : low;
        auto& count = attribute_values[i] > split ? out.high_count : out.low_count;
        for (std::size_t b = 0; b < 7; ++b) target[b] += tries[i][b];
        ++count;
    }
    if (out.high_count == 0) {
        throw ComputationError("high_low_split: all attribute values identical");
    }
    for (std::size_t b = 0; b < 7; ++b) {
        high[b] /= static_cast<double>(out.high_count);
        low[b] /= static_cast<double>(out.low_count);
    }
    high.normalize();
    low.normalize();
    out.high_mean = high;
    out.low_mean = low;
    return out;
}

// ---------------------------------------------------------------------------
// Table files
// ---------------------------------------------------------------------------

namespace {

// Splits a two-column line on whitespace or a comma. Blank lines and lines
// starting with '#' are skipped by the callers.
bool two_columns(const std::string& line, std::string& first, std::string& second) {
    std::string normalized = line;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream ss(normalized);
    std::string extra;
    if (!(ss >> first >> second)) return false;
    if (ss >> extra) return false;
    return true;
}

std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

LetterProbabilityTable load_letter_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open letter table '" + path + "'");
    std::map<char, double> prob;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::string letter, value;
        if (!two_columns(line, letter, value)) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected 'letter probability'");
        }
        letter = lowercase(letter);
        if (letter.size() != 1) {
            throw IoError(path + ":" + std::to_string(line_no) + ": '" + letter +
                          "' is not a single letter");
        }
        try {
            prob[letter[0]] = std::stod(value);
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(line_no) + ": bad probability '" + value + "'");
        }
    }
    try {
        return LetterProbabilityTable(std::move(prob));
    } catch (const std::invalid_argument& e) {
        throw IoError(path + ": " + e.what());
    }
}

WordFrequencyTable load_word_frequency_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open word frequency table '" + path + "'");
    WordFrequencyTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::string word, value;
        if (!two_columns(line, word, value)) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected 'word frequency'");
        }
        double freq = 0.0;
        try {
            freq = std::stod(value);
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(line_no) + ": bad frequency '" + value + "'");
        }
        if (freq < 0.0) {
            throw IoError(path + ":" + std::to_string(line_no) + ": negative frequency");
        }
        table.freq[lowercase(word)] = freq;
    }
    return table;
}

void write_attributes_file(const std::string& path,
                           const std::vector<std::pair<std::string, WordAttributes>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write attributes file '" + path + "'");
    out << "# word freq wie nre\n";
    for (const auto& [word, attrs] : rows) {
        out << word << ' ' << stats::fmt_g17(attrs.freq) << ' ' << stats::fmt_g17(attrs.wie) << ' '
            << attrs.nre << '\n';
    }
    if (!out) throw IoError("failed writing attributes file '" + path + "'");
}

}  // namespace wordlelab::words
