#pragma once

#include <array>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wordlelab/ingest.hpp"

namespace wordlelab::words {

/// Per-letter occurrence probabilities over the word corpus. Probabilities
/// must be positive and sum to 1 within 1e-9.
class LetterProbabilityTable {
public:
    explicit LetterProbabilityTable(std::map<char, double> prob);

    bool contains(char letter) const;
    /// Throws ComputationError when the letter is not in the table.
    double probability(char letter) const;
    const std::map<char, double>& probabilities() const { return prob_; }

    /// Uniform table over the first k lowercase letters.
    static LetterProbabilityTable uniform(int k = 26);

private:
    std::map<char, double> prob_;
};

struct WordFrequencyTable {
    std::unordered_map<std::string, double> freq;
};

struct WordAttributes {
    double freq = 0.0;  // relative corpus frequency
    double wie = 0.0;   // letter-entropy sum, bits
    int nre = 0;        // letter tokens belonging to repeated letters
};

struct FreqLookup {
    double value = 0.0;
    bool in_table = false;
};

/// Table lookup; absent words yield 0 with in_table=false. The word must be
/// five lowercase letters.
FreqLookup compute_freq(const std::string& word, const WordFrequencyTable& table);

/// -sum over positions of p(letter) * log2(p(letter)). Repeated letters
/// contribute once per position. Throws ComputationError when a letter is
/// missing from the table.
double compute_wie(const std::string& word, const LetterProbabilityTable& table);

/// Total tokens of letters that occur at least twice ("eerie" -> 3,
/// "mamma" -> 5, all-distinct -> 0).
int compute_nre(const std::string& word);

struct AttributeResult {
    WordAttributes attributes;
    bool freq_in_table = false;
};

AttributeResult compute_attributes(const std::string& word, const WordFrequencyTable& freq_table,
                                   const LetterProbabilityTable& letter_table);

/// Order of the ten correlation series.
inline constexpr std::array<const char*, 10> kCorrelationSeries = {
    "FREQ", "WIE", "NRE", "1 try", "2 tries", "3 tries", "4 tries", "5 tries", "6 tries",
    "7 or more tries"};

/// Pearson matrix over the min-max normalized series. Entries touching a
/// zero-variance series are NaN (missing), never 0; the diagonal of every
/// non-degenerate series is exactly 1.
struct CorrelationMatrix {
    std::array<std::array<double, 10>, 10> value{};
};

CorrelationMatrix correlation_matrix(const std::vector<WordAttributes>& attributes,
                                     const std::vector<ingest::TryDistribution>& tries);

struct HighLowSplit {
    ingest::TryDistribution high_mean;  // rows with value above the median
    ingest::TryDistribution low_mean;   // rows at or below the median
    std::size_t high_count = 0;
    std::size_t low_count = 0;
    double split_value = 0.0;
};

/// Splits rows at the attribute median (ties go to the low group) and
/// returns the componentwise mean try distribution of each side,
/// renormalized to sum 100. Throws ComputationError when every value is
/// identical.
HighLowSplit high_low_split(const std::vector<double>& attribute_values,
                            const std::vector<ingest::TryDistribution>& tries);

/// Two-column text: letter probability.
LetterProbabilityTable load_letter_table(const std::string& path);
/// Two-column text: word frequency.
WordFrequencyTable load_word_frequency_table(const std::string& path);

/// Columnar text: word freq wie nre.
void write_attributes_file(const std::string& path,
                           const std::vector<std::pair<std::string, WordAttributes>>& rows);

}  // namespace wordlelab::words
