#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"
#include "wordlelab/word_attributes.hpp"

using namespace wordlelab;
using words::LetterProbabilityTable;
using words::WordAttributes;
using words::WordFrequencyTable;

namespace {

std::string data_path(const char* name) {
    return std::string(WORDLELAB_TEST_DATA_DIR) + "/" + name;
}

// Independent reference counter for the repeated-letter statistic.
int brute_force_repeated_tokens(const std::string& word) {
    int total = 0;
    for (char target = 'a'; target <= 'z'; ++target) {
        int count = 0;
        for (char c : word) {
            if (c == target) ++count;
        }
        if (count >= 2) total += count;
    }
    return total;
}

std::string random_word(std::mt19937_64& rng, int len, int alphabet) {
    std::string w;
    for (int i = 0; i < len; ++i) {
        w.push_back(static_cast<char>('a' + static_cast<int>(rng() % alphabet)));
    }
    return w;
}

}  // namespace

TEST_CASE("compute_freq looks up the table and flags absences") {
    WordFrequencyTable table;
    table.freq["aaaaa"] = 0.5;
    const auto hit = words::compute_freq("aaaaa", table);
    CHECK(hit.in_table);
    CHECK(hit.value == doctest::Approx(0.5));

    const auto miss = words::compute_freq("bbbbb", table);
    CHECK(!miss.in_table);
    CHECK(miss.value == 0.0);

    CHECK_THROWS_AS(words::compute_freq("abcd", table), std::invalid_argument);
    CHECK_THROWS_AS(words::compute_freq("ABCDE", table), std::invalid_argument);
}

TEST_CASE("compute_freq returns the corpus value for eerie") {
    const auto table = words::load_word_frequency_table(data_path("word_freq.txt"));
    const auto result = words::compute_freq("eerie", table);
    CHECK(result.in_table);
    CHECK(result.value == doctest::Approx(0.000002437871).epsilon(1e-12));
}

TEST_CASE("compute_wie on the uniform table equals len * log2(k) / k") {
    const auto uniform26 = LetterProbabilityTable::uniform(26);
    const double expected = 5.0 * std::log2(26.0) / 26.0;
    CHECK(words::compute_wie("crane", uniform26) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(words::compute_wie("zzzzz", uniform26) == doctest::Approx(expected).epsilon(1e-12));

    const auto uniform4 = LetterProbabilityTable::uniform(4);
    CHECK(words::compute_wie("abcd", uniform4) == doctest::Approx(4.0 * std::log2(4.0) / 4.0));
}

TEST_CASE("compute_wie hand evaluation on a two-letter table") {
    LetterProbabilityTable table(std::map<char, double>{{'a', 0.75}, {'b', 0.25}});
    // 3 * (-0.75 log2 0.75) + 2 * (-0.25 log2 0.25)
    CHECK(words::compute_wie("aaabb", table) == doctest::Approx(1.9338343733773986).epsilon(1e-12));
}

TEST_CASE("compute_wie is permutation-invariant and additive over positions") {
    const auto table = words::load_letter_table(data_path("letters.txt"));
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        std::string w = random_word(rng, 5, 26);
        std::string shuffled = w;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(words::compute_wie(w, table) ==
              doctest::Approx(words::compute_wie(shuffled, table)).epsilon(1e-12));

        double per_letter = 0.0;
        for (char c : w) per_letter += words::compute_wie(std::string(1, c), table);
        CHECK(words::compute_wie(w, table) == doctest::Approx(per_letter).epsilon(1e-12));
    }
}

TEST_CASE("compute_wie rejects letters missing from the table") {
    LetterProbabilityTable table(std::map<char, double>{{'a', 0.75}, {'b', 0.25}});
    CHECK_THROWS_AS(words::compute_wie("abcde", table), ComputationError);
}

TEST_CASE("letter table validation") {
    CHECK_THROWS_AS(LetterProbabilityTable(std::map<char, double>{{'a', 0.6}, {'b', 0.6}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(LetterProbabilityTable(std::map<char, double>{{'a', 1.5}, {'b', -0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(LetterProbabilityTable({}), std::invalid_argument);
}

TEST_CASE("compute_nre examples") {
    CHECK(words::compute_nre("eerie") == 3);
    CHECK(words::compute_nre("abcde") == 0);
    CHECK(words::compute_nre("happy") == 2);
    CHECK(words::compute_nre("mamma") == 5);
    CHECK_THROWS_AS(words::compute_nre(""), std::invalid_argument);
}

TEST_CASE("compute_nre equals a brute-force token counter on random words") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const std::string w = random_word(rng, 5, 6);  // small alphabet to force repeats
        CHECK(words::compute_nre(w) == brute_force_repeated_tokens(w));
    }
    // 5-letter words can never have exactly one repeated token.
    for (int trial = 0; trial < 200; ++trial) {
        const int nre = words::compute_nre(random_word(rng, 5, 26));
        CHECK(nre != 1);
        CHECK(nre <= 5);
    }
}

namespace {

std::vector<WordAttributes> make_attrs(const std::vector<std::array<double, 3>>& rows) {
    std::vector<WordAttributes> out;
    for (const auto& r : rows) out.push_back({r[0], r[1], static_cast<int>(r[2])});
    return out;
}

std::vector<ingest::TryDistribution> make_tries(const std::vector<std::array<double, 7>>& rows) {
    std::vector<ingest::TryDistribution> out;
    for (const auto& r : rows) {
        ingest::TryDistribution t;
        t.pct = r;
        out.push_back(t);
    }
    return out;
}

}  // namespace

TEST_CASE("correlation_matrix structure") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<std::array<double, 3>> attr_rows;
    std::vector<std::array<double, 7>> try_rows;
    for (int i = 0; i < 40; ++i) {
        attr_rows.push_back({dist(rng), dist(rng), static_cast<double>(rng() % 4)});
        std::array<double, 7> t{};
        for (auto& v : t) v = dist(rng) * 20.0;
        try_rows.push_back(t);
    }
    const auto attrs = make_attrs(attr_rows);
    const auto tries = make_tries(try_rows);
    const auto m = words::correlation_matrix(attrs, tries);

    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(m.value[i][i] == doctest::Approx(1.0));
        for (std::size_t j = 0; j < 10; ++j) {
            CHECK(m.value[i][j] == doctest::Approx(m.value[j][i]).epsilon(1e-12));
            CHECK(m.value[i][j] <= 1.0 + 1e-12);
            CHECK(m.value[i][j] >= -1.0 - 1e-12);
        }
    }
}

TEST_CASE("correlation of a series with its negation is -1") {
    // FREQ = x, WIE = -x: entry (0,1) must be exactly -1.
    std::vector<std::array<double, 3>> attr_rows;
    std::vector<std::array<double, 7>> try_rows;
    for (int i = 0; i < 10; ++i) {
        const double x = static_cast<double>(i);
        attr_rows.push_back({x, -x, static_cast<double>(i % 3)});
        try_rows.push_back({x, 1, 2, 3, 4, 5, 6});
    }
    const auto m = words::correlation_matrix(make_attrs(attr_rows), make_tries(try_rows));
    CHECK(m.value[0][1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(m.value[0][3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlation_matrix is invariant under affine rescaling of an input series") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<std::array<double, 3>> attr_rows;
    std::vector<std::array<double, 7>> try_rows;
    for (int i = 0; i < 25; ++i) {
        attr_rows.push_back({dist(rng), dist(rng), static_cast<double>(rng() % 5)});
        std::array<double, 7> t{};
        for (auto& v : t) v = dist(rng) * 30.0;
        try_rows.push_back(t);
    }
    const auto base = words::correlation_matrix(make_attrs(attr_rows), make_tries(try_rows));

    auto scaled_rows = attr_rows;
    for (auto& r : scaled_rows) r[0] = 1000.0 * r[0] + 5.0;  // affine map of FREQ
    const auto scaled = words::correlation_matrix(make_attrs(scaled_rows), make_tries(try_rows));

    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 10; ++j) {
            CHECK(scaled.value[i][j] == doctest::Approx(base.value[i][j]).epsilon(1e-9));
        }
    }
}

TEST_CASE("correlation_matrix reports zero-variance series as missing") {
    std::vector<std::array<double, 3>> attr_rows;
    std::vector<std::array<double, 7>> try_rows;
    for (int i = 0; i < 8; ++i) {
        attr_rows.push_back({0.5, static_cast<double>(i), 2.0});  // FREQ and NRE constant
        try_rows.push_back({static_cast<double>(i), 1, 2, 3, 4, 5, 6});
    }
    const auto m = words::correlation_matrix(make_attrs(attr_rows), make_tries(try_rows));
    CHECK(std::isnan(m.value[0][1]));
    CHECK(std::isnan(m.value[2][1]));
    CHECK(std::isnan(m.value[0][0]));
    CHECK(m.value[1][1] == doctest::Approx(1.0));
    CHECK(m.value[1][3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("high_low_split on two rows") {
    const auto tries = make_tries({{10, 10, 20, 20, 20, 10, 10}, {0, 0, 0, 0, 0, 0, 100}});
    const auto split = words::high_low_split({0.0, 1.0}, tries);
    CHECK(split.low_count == 1);
    CHECK(split.high_count == 1);
    for (std::size_t b = 0; b < 7; ++b) {
        CHECK(split.low_mean[b] == doctest::Approx(tries[0][b]));
        CHECK(split.high_mean[b] == doctest::Approx(tries[1][b]));
    }
}

TEST_CASE("high_low_split with identical tries gives identical means") {
    std::vector<std::array<double, 7>> rows(6, {1, 2, 17, 35, 31, 12, 2});
    std::vector<double> values = {1, 2, 3, 4, 5, 6};
    const auto split = words::high_low_split(values, make_tries(rows));
    for (std::size_t b = 0; b < 7; ++b) {
        CHECK(split.high_mean[b] == doctest::Approx(split.low_mean[b]).epsilon(1e-12));
    }
    CHECK(split.low_count == 3);  // median ties go low
    CHECK(split.high_count == 3);
}

TEST_CASE("high_low_split rejects constant attribute values") {
    const auto tries = make_tries({{1, 2, 17, 35, 31, 12, 2}, {1, 2, 17, 35, 31, 12, 2}});
    CHECK_THROWS_AS(words::high_low_split({3.0, 3.0}, tries), ComputationError);
    CHECK_THROWS_AS(words::high_low_split({1.0}, make_tries({{1, 2, 17, 35, 31, 12, 2}})),
                    std::invalid_argument);
}

TEST_CASE("high_low_split means are renormalized to 100") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(0.5, 30.0);
    std::vector<std::array<double, 7>> rows;
    std::vector<double> values;
    for (int i = 0; i < 21; ++i) {
        std::array<double, 7> t{};
        double s = 0.0;
        for (auto& v : t) {
            v = dist(rng);
            s += v;
        }
        for (auto& v : t) v *= 100.0 / s;
        rows.push_back(t);
        values.push_back(dist(rng));
    }
    const auto split = words::high_low_split(values, make_tries(rows));
    CHECK(split.high_mean.sum() == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(split.low_mean.sum() == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("table loaders reject malformed files") {
    CHECK_THROWS_AS(words::load_letter_table("/nonexistent/letters.txt"), IoError);
    CHECK_THROWS_AS(words::load_word_frequency_table("/nonexistent/words.txt"), IoError);

    const auto letters = words::load_letter_table(data_path("letters.txt"));
    CHECK(letters.contains('a'));
    CHECK(letters.contains('z'));
    CHECK(letters.probability('e') > letters.probability('z'));
}

TEST_CASE("compute_attributes bundles the three values") {
    const auto letters = words::load_letter_table(data_path("letters.txt"));
    const auto freqs = words::load_word_frequency_table(data_path("word_freq.txt"));
    const auto result = words::compute_attributes("eerie", freqs, letters);
    CHECK(result.freq_in_table);
    CHECK(result.attributes.freq == doctest::Approx(0.000002437871));
    CHECK(result.attributes.nre == 3);
    CHECK(result.attributes.wie > 0.0);
}
