#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "wordlelab/classify.hpp"
#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"

using namespace wordlelab;
using classify::DifficultyLabel;
using classify::Row7;

namespace {

double squared_distance(const Row7& a, const Row7& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 7; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc;
}

std::vector<Row7> three_blobs(std::size_t per_blob, std::uint64_t seed, double spread = 0.5) {
    static const std::array<Row7, 3> centers = {{{1, 9, 31, 34, 18, 6, 1},
                                                 {0.3, 4, 20, 36, 26, 11, 2},
                                                 {0.3, 3, 13, 26, 29, 21, 8}}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, spread);
    std::vector<Row7> rows;
    for (const auto& c : centers) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            Row7 row;
            for (std::size_t b = 0; b < 7; ++b) row[b] = c[b] + noise(rng);
            rows.push_back(row);
        }
    }
    return rows;
}

// Exhaustive 2-partition optimum for small instances: every nonempty
// bipartition, centers at group means.
double brute_force_k2_sse(const std::vector<Row7>& rows) {
    const std::size_t n = rows.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        Row7 mean_a{}, mean_b{};
        std::size_t na = 0, nb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                for (std::size_t b = 0; b < 7; ++b) mean_a[b] += rows[i][b];
                ++na;
            } else {
                for (std::size_t b = 0; b < 7; ++b) mean_b[b] += rows[i][b];
                ++nb;
            }
        }
        for (std::size_t b = 0; b < 7; ++b) {
            mean_a[b] /= static_cast<double>(na);
            mean_b[b] /= static_cast<double>(nb);
        }
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sse += squared_distance(rows[i], (mask & (1u << i)) ? mean_a : mean_b);
        }
        best = std::min(best, sse);
    }
    return best;
}

std::vector<words::WordAttributes> random_attrs(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<words::WordAttributes> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({unit(rng), 3.0 * unit(rng), static_cast<int>(rng() % 5)});
    }
    return out;
}

}  // namespace

TEST_CASE("kmeans with k=1 returns the componentwise mean") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 10.0);
    std::vector<Row7> rows;
    for (int i = 0; i < 12; ++i) {
        Row7 r;
        for (auto& v : r) v = unit(rng);
        rows.push_back(r);
    }
    const auto model = classify::kmeans(rows, 1, 50, 7);
    for (std::size_t b = 0; b < 7; ++b) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[b];
        mean /= static_cast<double>(rows.size());
        CHECK(model.centers[0][b] == doctest::Approx(mean).epsilon(1e-12));
    }
    double expected_sse = 0.0;
    for (const auto& r : rows) expected_sse += squared_distance(r, model.centers[0]);
    CHECK(model.sse == doctest::Approx(expected_sse).epsilon(1e-12));
}

TEST_CASE("kmeans with k equal to the distinct row count has zero SSE") {
    std::vector<Row7> rows;
    for (int i = 0; i < 5; ++i) {
        Row7 r{};
        r[0] = static_cast<double>(i);
        rows.push_back(r);
    }
    const auto model = classify::kmeans(rows, 5, 50, 3);
    CHECK(model.sse == doctest::Approx(0.0));
}

TEST_CASE("kmeans recovers two well-separated blobs exactly") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<Row7> rows;
    for (int i = 0; i < 15; ++i) {
        Row7 r{};
        for (auto& v : r) v = noise(rng);
        rows.push_back(r);
    }
    for (int i = 0; i < 15; ++i) {
        Row7 r{};
        for (auto& v : r) v = 50.0 + noise(rng);
        rows.push_back(r);
    }
    const auto model = classify::kmeans_best_of(rows, 2, 100, 10, 11);
    // All members of each generating blob share an assignment, and every
    // point sits with its nearest center.
    for (int i = 1; i < 15; ++i) CHECK(model.assignments[i] == model.assignments[0]);
    for (int i = 16; i < 30; ++i) CHECK(model.assignments[i] == model.assignments[15]);
    CHECK(model.assignments[0] != model.assignments[15]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double assigned = squared_distance(rows[i], model.centers[static_cast<std::size_t>(model.assignments[i])]);
        for (const auto& c : model.centers) CHECK(assigned <= squared_distance(rows[i], c) + 1e-9);
    }
}

TEST_CASE("kmeans SSE is non-increasing over Lloyd iterations") {
    const auto rows = three_blobs(20, 99, 2.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto model = classify::kmeans(rows, 3, 100, seed);
        for (std::size_t i = 1; i < model.sse_history.size(); ++i) {
            CHECK(model.sse_history[i] <= model.sse_history[i - 1] + 1e-9);
        }
    }
}

TEST_CASE("kmeans best-of-50 restarts reaches the exhaustive k=2 optimum on tiny instances") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.0, 20.0);
    for (int instance = 0; instance < 10; ++instance) {
        const std::size_t n = 5 + static_cast<std::size_t>(rng() % 4);  // 5..8 points
        std::vector<Row7> rows;
        for (std::size_t i = 0; i < n; ++i) {
            Row7 r;
            for (auto& v : r) v = unit(rng);
            rows.push_back(r);
        }
        const auto model = classify::kmeans_best_of(rows, 2, 100, 50,
                                                    static_cast<std::uint64_t>(instance));
        CHECK(model.sse == doctest::Approx(brute_force_k2_sse(rows)).epsilon(1e-9));
    }
}

TEST_CASE("kmeans local optimality: single-point moves cannot lower SSE") {
    const auto rows = three_blobs(6, 5, 1.0);
    const auto model = classify::kmeans_best_of(rows, 3, 100, 10, 21);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double current = squared_distance(rows[i], model.centers[static_cast<std::size_t>(model.assignments[i])]);
        for (const auto& center : model.centers) {
            CHECK(current <= squared_distance(rows[i], center) + 1e-9);
        }
    }
}

TEST_CASE("kmeans input validation") {
    std::vector<Row7> rows(4, Row7{1, 2, 3, 4, 5, 6, 7});
    CHECK_THROWS_AS(classify::kmeans(rows, 2, 50, 1), ComputationError);  // 1 distinct row
    CHECK_THROWS_AS(classify::kmeans(rows, 0, 50, 1), std::invalid_argument);
    CHECK_THROWS_AS(classify::kmeans(rows, 5, 50, 1), std::invalid_argument);
}

TEST_CASE("elbow_curve: identical rows give zero SSE at every k") {
    std::vector<Row7> rows(10, Row7{1, 2, 3, 4, 5, 6, 7});
    const auto curve = classify::elbow_curve(rows, 4, 3);
    REQUIRE(curve.size() == 4);
    for (const auto& [k, sse] : curve) CHECK(sse == doctest::Approx(0.0));
}

TEST_CASE("elbow_curve is non-increasing and bends at the true k on three blobs") {
    const auto rows = three_blobs(25, 31415, 0.8);
    const auto curve = classify::elbow_curve(rows, 6, 7);
    REQUIRE(curve.size() == 6);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].second <= curve[i - 1].second + 1e-9);
    }
    const double drop_2_to_3 = curve[1].second - curve[2].second;
    const double drop_3_to_4 = curve[2].second - curve[3].second;
    CHECK(drop_2_to_3 > 5.0 * drop_3_to_4);
    CHECK(classify::pick_elbow(curve) == 3);
}

TEST_CASE("anova hand oracle") {
    std::vector<Row7> rows;
    // Bucket 0 carries the two groups (1,2,3) and (2,3,4); the other buckets
    // replicate the same values so every row appears in the table.
    for (double v : {1.0, 2.0, 3.0}) rows.push_back(Row7{v, v, v, v, v, v, v});
    for (double v : {2.0, 3.0, 4.0}) rows.push_back(Row7{v, v, v, v, v, v, v});
    const std::vector<int> assignments = {0, 0, 0, 1, 1, 1};
    const auto table = classify::anova(rows, assignments);
    REQUIRE(table.size() == 7);
    CHECK(table[0].f_statistic == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(table[0].p_value == doctest::Approx(0.2878641347266907).epsilon(1e-9));
    CHECK(table[0].group_means[0] == doctest::Approx(2.0));
    CHECK(table[0].group_means[1] == doctest::Approx(3.0));
    CHECK(table[0].group_stddevs[0] == doctest::Approx(1.0));
    CHECK(table[0].feature == "1 try");
}

TEST_CASE("anova degenerate groups") {
    // identical groups -> F = 0, p = 1
    std::vector<Row7> rows;
    for (double v : {1.0, 2.0, 3.0}) rows.push_back(Row7{v, v, v, v, v, v, v});
    for (double v : {1.0, 2.0, 3.0}) rows.push_back(Row7{v, v, v, v, v, v, v});
    auto table = classify::anova(rows, {0, 0, 0, 1, 1, 1});
    CHECK(table[0].f_statistic == doctest::Approx(0.0));
    CHECK(table[0].p_value == doctest::Approx(1.0));

    // perfect separation -> p -> 0
    std::vector<Row7> sep;
    for (int i = 0; i < 3; ++i) sep.push_back(Row7{0, 0, 0, 0, 0, 0, 0});
    for (int i = 0; i < 3; ++i) sep.push_back(Row7{10, 10, 10, 10, 10, 10, 10});
    table = classify::anova(sep, {0, 0, 0, 1, 1, 1});
    CHECK(std::isinf(table[0].f_statistic));
    CHECK(table[0].p_value == doctest::Approx(0.0));

    // all values identical -> undefined, reported as missing
    std::vector<Row7> flat(6, Row7{5, 5, 5, 5, 5, 5, 5});
    table = classify::anova(flat, {0, 0, 0, 1, 1, 1});
    CHECK(std::isnan(table[0].f_statistic));
    CHECK(std::isnan(table[0].p_value));
}

TEST_CASE("anova F is invariant under affine transforms of the data") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> unit(0.0, 10.0);
    std::vector<Row7> rows;
    std::vector<int> assignments;
    for (int i = 0; i < 30; ++i) {
        Row7 r;
        for (auto& v : r) v = unit(rng);
        rows.push_back(r);
        assignments.push_back(i % 3);
    }
    const auto base = classify::anova(rows, assignments);
    auto scaled = rows;
    for (auto& r : scaled) {
        for (auto& v : r) v = 7.0 * v - 13.0;
    }
    const auto transformed = classify::anova(scaled, assignments);
    for (std::size_t b = 0; b < 7; ++b) {
        CHECK(transformed[b].f_statistic ==
              doctest::Approx(base[b].f_statistic).epsilon(1e-9));
    }
}

TEST_CASE("anova validates inputs") {
    std::vector<Row7> rows(4, Row7{1, 2, 3, 4, 5, 6, 7});
    CHECK_THROWS_AS(classify::anova(rows, {0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(classify::anova(rows, {0, 0, 2, 2}), std::invalid_argument);  // cluster 1 empty
    CHECK_THROWS_AS(classify::anova({}, {}), std::invalid_argument);
}

TEST_CASE("label_clusters orders by expected try count") {
    classify::KMeansModel model;
    model.k = 3;
    // concentrated at buckets 2, 4 and 6
    model.centers = {Row7{0, 100, 0, 0, 0, 0, 0}, Row7{0, 0, 0, 100, 0, 0, 0},
                     Row7{0, 0, 0, 0, 0, 100, 0}};
    auto labels = classify::label_clusters(model);
    CHECK(labels[0] == DifficultyLabel::Easy);
    CHECK(labels[1] == DifficultyLabel::Moderate);
    CHECK(labels[2] == DifficultyLabel::Difficult);

    // permuting the clusters permutes the labels identically
    std::swap(model.centers[0], model.centers[2]);
    labels = classify::label_clusters(model);
    CHECK(labels[0] == DifficultyLabel::Difficult);
    CHECK(labels[1] == DifficultyLabel::Moderate);
    CHECK(labels[2] == DifficultyLabel::Easy);

    model.k = 2;
    CHECK_THROWS_AS(classify::label_clusters(model), std::invalid_argument);
}

TEST_CASE("label_clusters reproduces the published cluster naming") {
    // Cluster means of the three difficulty categories as reported for the
    // contest dataset (category 1 moderate, category 2 easy, category 3
    // difficult).
    classify::KMeansModel model;
    model.k = 3;
    model.centers = {Row7{0.267, 4.033, 20.327, 35.673, 26.34, 11.427, 1.933},
                     Row7{0.795, 9.333, 30.689, 33.697, 17.879, 6.477, 1.091},
                     Row7{0.288, 2.877, 12.808, 25.986, 28.863, 21.329, 7.781}};
    const auto labels = classify::label_clusters(model);
    CHECK(labels[0] == DifficultyLabel::Moderate);
    CHECK(labels[1] == DifficultyLabel::Easy);
    CHECK(labels[2] == DifficultyLabel::Difficult);
}

TEST_CASE("decision tree separates a thresholdable dataset perfectly") {
    std::vector<words::WordAttributes> attrs;
    std::vector<DifficultyLabel> labels;
    for (int i = 0; i < 30; ++i) {
        const double wie = i < 15 ? 0.5 + 0.01 * i : 1.5 + 0.01 * i;
        attrs.push_back({0.5, wie, 0});
        labels.push_back(i < 15 ? DifficultyLabel::Easy : DifficultyLabel::Difficult);
    }
    const auto result = classify::train_tree_classifier(attrs, labels, 0.3, 5);
    CHECK(result.train.accuracy == doctest::Approx(1.0));
    CHECK(result.test.accuracy == doctest::Approx(1.0));
    CHECK(result.tree.feature_importances[1] == doctest::Approx(1.0));
}

TEST_CASE("decision tree reaches purity when attribute rows are distinct") {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<words::WordAttributes> attrs;
    std::vector<DifficultyLabel> labels;
    for (int i = 0; i < 40; ++i) {
        attrs.push_back({unit(rng), unit(rng), static_cast<int>(rng() % 5)});
        labels.push_back(static_cast<DifficultyLabel>(rng() % 3));
    }
    const auto result = classify::train_tree_classifier(attrs, labels, 0.25, 8);
    CHECK(result.train.accuracy == doctest::Approx(1.0));
}

TEST_CASE("permuted labels score near the class prior on the test split") {
    std::mt19937_64 rng(123);
    const auto attrs = random_attrs(300, 9);
    std::vector<DifficultyLabel> labels;
    for (int i = 0; i < 300; ++i) labels.push_back(static_cast<DifficultyLabel>(rng() % 3));

    const auto result = classify::train_tree_classifier(attrs, labels, 0.3, 77);
    // Class prior of the majority class.
    std::array<int, 3> counts{};
    for (auto l : labels) ++counts[static_cast<std::size_t>(l)];
    const double prior =
        static_cast<double>(*std::max_element(counts.begin(), counts.end())) / 300.0;
    const double se = std::sqrt(prior * (1.0 - prior) / 90.0);
    CHECK(result.test.accuracy <= prior + 3.0 * se);
    CHECK(result.test.accuracy >= prior - 3.0 * se);
}

TEST_CASE("importances sum to one and survive monotone feature transforms") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<words::WordAttributes> attrs;
    std::vector<DifficultyLabel> labels;
    for (int i = 0; i < 60; ++i) {
        const double freq = unit(rng);
        const double wie = unit(rng);
        attrs.push_back({freq, wie, static_cast<int>(rng() % 3)});
        const double score = freq - wie;
        labels.push_back(score > 0.2   ? DifficultyLabel::Easy
                         : score > -0.2 ? DifficultyLabel::Moderate
                                        : DifficultyLabel::Difficult);
    }
    const auto base = classify::train_tree_classifier(attrs, labels, 0.3, 55);
    const double total = base.tree.feature_importances[0] + base.tree.feature_importances[1] +
                         base.tree.feature_importances[2];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    // Strictly monotone transform of FREQ keeps the split order, hence the
    // same tree shape and importances.
    auto transformed = attrs;
    for (auto& a : transformed) a.freq = std::exp(3.0 * a.freq);
    const auto warped = classify::train_tree_classifier(transformed, labels, 0.3, 55);
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(warped.tree.feature_importances[f] ==
              doctest::Approx(base.tree.feature_importances[f]).epsilon(1e-9));
    }
    CHECK(warped.train.accuracy == doctest::Approx(base.train.accuracy));
    CHECK(warped.test.accuracy == doctest::Approx(base.test.accuracy));
}

TEST_CASE("classify_word walks the tree deterministically") {
    classify::DecisionTreeClassifier single;
    single.nodes.push_back({});
    single.nodes[0].label = static_cast<int>(DifficultyLabel::Moderate);
    CHECK(classify::classify_word(single, {0.1, 0.1, 0}) == DifficultyLabel::Moderate);
    CHECK(classify::classify_word(single, {9.0, 9.0, 5}) == DifficultyLabel::Moderate);

    // Split on WIE at 1.0: below Easy, at or above Difficult.
    classify::DecisionTreeClassifier tree;
    tree.nodes.resize(3);
    tree.nodes[0].feature = 1;
    tree.nodes[0].threshold = 1.0;
    tree.nodes[0].left = 1;
    tree.nodes[0].right = 2;
    tree.nodes[1].label = static_cast<int>(DifficultyLabel::Easy);
    tree.nodes[2].label = static_cast<int>(DifficultyLabel::Difficult);
    CHECK(classify::classify_word(tree, {0.0, 1.4797732853992995, 3}) == DifficultyLabel::Difficult);
    CHECK(classify::classify_word(tree, {0.0, 0.4, 0}) == DifficultyLabel::Easy);
}

TEST_CASE("single-class data yields a single leaf with defined metrics") {
    std::vector<words::WordAttributes> attrs = random_attrs(25, 62);
    std::vector<DifficultyLabel> labels(25, DifficultyLabel::Easy);
    const auto result = classify::train_tree_classifier(attrs, labels, 0.3, 5);
    CHECK(result.tree.nodes.size() == 1);
    CHECK(result.train.accuracy == doctest::Approx(1.0));
    CHECK(result.test.accuracy == doctest::Approx(1.0));
    CHECK(result.train.macro_f1 == doctest::Approx(1.0));
    const double total = result.tree.feature_importances[0] +
                         result.tree.feature_importances[1] +
                         result.tree.feature_importances[2];
    CHECK(total == doctest::Approx(0.0));
}

TEST_CASE("compute_metrics hand check") {
    using L = DifficultyLabel;
    const std::vector<L> truth = {L::Easy, L::Easy, L::Moderate, L::Moderate, L::Difficult};
    const std::vector<L> pred = {L::Easy, L::Moderate, L::Moderate, L::Difficult, L::Difficult};
    const auto m = classify::compute_metrics(truth, pred);
    CHECK(m.accuracy == doctest::Approx(0.6));
    // recalls: Easy 1/2, Moderate 1/2, Difficult 1/1 -> macro 2/3
    CHECK(m.macro_recall == doctest::Approx(2.0 / 3.0));
    // precisions: Easy 1/1, Moderate 1/2, Difficult 1/2 -> macro 2/3
    CHECK(m.macro_precision == doctest::Approx(2.0 / 3.0));
    // per-class f1: 2/3, 1/2, 2/3 -> macro 11/18
    CHECK(m.macro_f1 == doctest::Approx(11.0 / 18.0));
}

TEST_CASE("train_tree_classifier validates inputs") {
    const auto attrs = random_attrs(10, 2);
    std::vector<DifficultyLabel> labels(10, DifficultyLabel::Easy);
    CHECK_THROWS_AS(classify::train_tree_classifier(attrs, labels, 0.3, 1), std::invalid_argument);
    const auto attrs20 = random_attrs(20, 2);
    std::vector<DifficultyLabel> labels19(19, DifficultyLabel::Easy);
    CHECK_THROWS_AS(classify::train_tree_classifier(attrs20, labels19, 0.3, 1),
                    std::invalid_argument);
    std::vector<DifficultyLabel> labels20(20, DifficultyLabel::Easy);
    CHECK_THROWS_AS(classify::train_tree_classifier(attrs20, labels20, 1.2, 1),
                    std::invalid_argument);
}

TEST_CASE("difficulty model serialization round-trips") {
    std::vector<words::WordAttributes> attrs;
    std::vector<DifficultyLabel> labels;
    std::mt19937_64 rng(8080);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        const double wie = unit(rng) * 2.0;
        attrs.push_back({unit(rng), wie, static_cast<int>(rng() % 4)});
        labels.push_back(wie < 0.7   ? DifficultyLabel::Easy
                         : wie < 1.4 ? DifficultyLabel::Moderate
                                     : DifficultyLabel::Difficult);
    }
    const auto trained = classify::train_tree_classifier(attrs, labels, 0.3, 4);

    classify::DifficultyModel model;
    model.tree = trained.tree;
    model.train = trained.train;
    model.test = trained.test;
    model.centers = {Row7{1, 2, 3, 4, 5, 6, 7}, Row7{7, 6, 5, 4, 3, 2, 1}, Row7{2, 2, 2, 2, 2, 2, 2}};
    model.cluster_labels = {DifficultyLabel::Easy, DifficultyLabel::Difficult,
                            DifficultyLabel::Moderate};

    const std::string path = "difficulty_roundtrip.txt";
    classify::save_difficulty_model(path, model);
    const auto loaded = classify::load_difficulty_model(path);
    CHECK(loaded.centers == model.centers);
    CHECK(loaded.cluster_labels == model.cluster_labels);
    CHECK(loaded.train.accuracy == model.train.accuracy);
    CHECK(loaded.test.macro_f1 == model.test.macro_f1);
    for (const auto& a : attrs) {
        CHECK(classify::classify_word(loaded.tree, a) == classify::classify_word(model.tree, a));
    }
    std::remove(path.c_str());

    CHECK_THROWS_AS(classify::load_difficulty_model("/nonexistent/model.txt"), IoError);
}
