#include "wordlelab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"

namespace wordlelab::classify {

namespace {

double squared_distance(const Row7& a, const Row7& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

int nearest_center(const Row7& row, const std::vector<Row7>& centers) {
    int best = 0;
    double best_dist = squared_distance(row, centers[0]);
    for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
        const double d = squared_distance(row, centers[c]);
        if (d < best_dist) {  // ties keep the lowest index
            best_dist = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

KMeansModel kmeans(const std::vector<Row7>& rows, int k, int max_iter, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be >= 1");
    if (rows.size() < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("kmeans: fewer rows than clusters");
    }

    // Initial centers: k distinct sample rows, chosen by seeded shuffle.
    std::vector<std::size_t> distinct;
    {
        std::set<Row7> seen;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (seen.insert(rows[i]).second) distinct.push_back(i);
        }
    }
    if (distinct.size() < static_cast<std::size_t>(k)) {
        throw ComputationError("kmeans: k exceeds the number of distinct rows");
    }
    std::mt19937_64 rng(seed);
    const auto pick = stats::shuffle_indices(distinct.size(), rng);

    KMeansModel model;
    model.k = k;
    model.centers.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) model.centers.push_back(rows[distinct[pick[c]]]);
    model.assignments.assign(rows.size(), -1);

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<int> assign(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) assign[i] = nearest_center(rows[i], model.centers);

        // Reseed emptied clusters at the point farthest from its center.
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (int a : assign) ++sizes[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t farthest = 0;
            double farthest_dist = -1.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (sizes[static_cast<std::size_t>(assign[i])] <= 1) continue;
                const double d = squared_distance(rows[i], model.centers[static_cast<std::size_t>(assign[i])]);
                if (d > farthest_dist) {
                    farthest_dist = d;
                    farthest = i;
                }
            }
            if (farthest_dist < 0.0) break;  // nothing available to steal
            --sizes[static_cast<std::size_t>(assign[farthest])];
            model.centers[static_cast<std::size_t>(c)] = rows[farthest];
            assign[farthest] = c;
            ++sizes[static_cast<std::size_t>(c)];
        }

        // Update centers to the mean of their rows.
        std::vector<Row7> sums(static_cast<std::size_t>(k), Row7{});
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto c = static_cast<std::size_t>(assign[i]);
            for (std::size_t b = 0; b < 7; ++b) sums[c][b] += rows[i][b];
            ++counts[c];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t b = 0; b < 7; ++b) model.centers[c][b] = sums[c][b] / static_cast<double>(counts[c]);
        }

        double sse = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            sse += squared_distance(rows[i], model.centers[static_cast<std::size_t>(assign[i])]);
        }
        model.sse_history.push_back(sse);
        model.sse = sse;

        const bool stable = assign == model.assignments;
        model.assignments = std::move(assign);
        if (stable) break;
    }

    // Final pass so assignments point at the converged centers. On runs cut
    // off by max_iter this can still move points, so the SSE is refreshed.
    double final_sse = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        model.assignments[i] = nearest_center(rows[i], model.centers);
        final_sse += squared_distance(rows[i], model.centers[static_cast<std::size_t>(model.assignments[i])]);
    }
    model.sse = final_sse;
    return model;
}

KMeansModel kmeans_best_of(const std::vector<Row7>& rows, int k, int max_iter, int restarts,
                           std::uint64_t seed) {
    if (restarts < 1) throw std::invalid_argument("kmeans_best_of: restarts must be >= 1");
    KMeansModel best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        KMeansModel m = kmeans(rows, k, max_iter, stats::derive_seed(seed, "restart-" + std::to_string(r)));
        if (!have || m.sse < best.sse) {
            best = std::move(m);
            have = true;
        }
    }
    return best;
}

std::vector<std::pair<int, double>> elbow_curve(const std::vector<Row7>& rows, int k_max,
                                                std::uint64_t seed, int restarts, int max_iter) {
    if (k_max < 1 || rows.size() < static_cast<std::size_t>(k_max)) {
        throw std::invalid_argument("elbow_curve: need k_max in [1, rows]");
    }
    std::vector<std::pair<int, double>> curve;
    KMeansModel previous;
    for (int k = 1; k <= k_max; ++k) {
        KMeansModel best;
        try {
            best = kmeans_best_of(rows, k, max_iter, restarts,
                                  stats::derive_seed(seed, "elbow-k" + std::to_string(k)));
        } catch (const ComputationError&) {
            // k exceeds the distinct rows: SSE stays at the previous level.
            curve.emplace_back(k, previous.sse);
            continue;
        }

        // Warm start from the previous best: its centers plus the farthest
        // point. Guarantees SSE(k) <= SSE(k-1).
        if (k > 1 && !previous.centers.empty()) {
            std::size_t farthest = 0;
            double far_dist = -1.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double d = squared_distance(
                    rows[i], previous.centers[static_cast<std::size_t>(previous.assignments[i])]);
                if (d > far_dist) {
                    far_dist = d;
                    farthest = i;
                }
            }
            auto centers = previous.centers;
            centers.push_back(rows[farthest]);
            // One assignment + update pass is already an improvement; run a
            // few Lloyd rounds to settle.
            KMeansModel warm;
            warm.k = k;
            warm.centers = std::move(centers);
            warm.assignments.assign(rows.size(), -1);
            for (int iter = 0; iter < max_iter; ++iter) {
                std::vector<int> assign(rows.size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    assign[i] = nearest_center(rows[i], warm.centers);
                }
                std::vector<Row7> sums(static_cast<std::size_t>(k), Row7{});
                std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    const auto c = static_cast<std::size_t>(assign[i]);
                    for (std::size_t b = 0; b < 7; ++b) sums[c][b] += rows[i][b];
                    ++counts[c];
                }
                for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
                    if (counts[c] == 0) continue;
                    for (std::size_t b = 0; b < 7; ++b) {
                        warm.centers[c][b] = sums[c][b] / static_cast<double>(counts[c]);
                    }
                }
                const bool stable = assign == warm.assignments;
                warm.assignments = std::move(assign);
                if (stable) break;
            }
            double sse = 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                sse += squared_distance(rows[i], warm.centers[static_cast<std::size_t>(warm.assignments[i])]);
            }
            warm.sse = sse;
            if (warm.sse < best.sse) best = std::move(warm);
        }

        curve.emplace_back(k, best.sse);
        previous = std::move(best);
    }
    return curve;
}

int pick_elbow(const std::vector<std::pair<int, double>>& curve) {
    if (curve.empty()) throw std::invalid_argument("pick_elbow: empty curve");
    if (curve.size() < 3) return curve.back().first;
    // The elbow is where the decrease levels off: the marginal SSE drop
    // entering k dwarfs the drop leaving it.
    const double floor = 1e-12 * std::max(curve.front().second, 1.0);
    int best_k = curve[1].first;
    double best_ratio = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const double before = curve[i - 1].second - curve[i].second;
        const double after = curve[i].second - curve[i + 1].second;
        const double ratio = before / (after + floor);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_k = curve[i].first;
        }
    }
    return best_k;
}

// ---------------------------------------------------------------------------
// ANOVA
// ---------------------------------------------------------------------------

std::vector<AnovaRow> anova(const std::vector<Row7>& rows, const std::vector<int>& assignments) {
    if (rows.empty() || rows.size() != assignments.size()) {
        throw std::invalid_argument("anova: misaligned or empty inputs");
    }
    const int k = *std::max_element(assignments.begin(), assignments.end()) + 1;
    if (k < 2) throw std::invalid_argument("anova: need at least two clusters");
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignments) {
        if (a < 0) throw std::invalid_argument("anova: negative assignment");
        ++counts[static_cast<std::size_t>(a)];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw std::invalid_argument("anova: empty cluster " + std::to_string(c));
    }

    static const std::array<const char*, 7> kBucketNames = {
        "1 try", "2 tries", "3 tries", "4 tries", "5 tries", "6 tries", "7 or more tries"};

    const std::size_t n = rows.size();
    std::vector<AnovaRow> out;
    out.reserve(7);
    for (std::size_t b = 0; b < 7; ++b) {
        AnovaRow row;
        row.feature = kBucketNames[b];

        std::vector<std::vector<double>> groups(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) {
            groups[static_cast<std::size_t>(assignments[i])].push_back(rows[i][b]);
        }

        double grand = 0.0;
        for (std::size_t i = 0; i < n; ++i) grand += rows[i][b];
        grand /= static_cast<double>(n);

        double ss_between = 0.0, ss_within = 0.0;
        for (const auto& g : groups) {
            const double gm = stats::mean(g);
            row.group_means.push_back(gm);
            row.group_stddevs.push_back(g.size() > 1 ? stats::stddev(g, 1) : 0.0);
            ss_between += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
            for (double v : g) ss_within += (v - gm) * (v - gm);
        }

        const double df1 = static_cast<double>(k - 1);
        const double df2 = static_cast<double>(n - static_cast<std::size_t>(k));
        if (ss_within == 0.0 && ss_between == 0.0) {
            // All values identical: F undefined, reported as missing.
            row.f_statistic = std::numeric_limits<double>::quiet_NaN();
            row.p_value = std::numeric_limits<double>::quiet_NaN();
        } else if (ss_within == 0.0) {
            row.f_statistic = std::numeric_limits<double>::infinity();
            row.p_value = 0.0;
        } else {
            row.f_statistic = (ss_between / df1) / (ss_within / df2);
            row.p_value = stats::f_sf(row.f_statistic, df1, df2);
        }
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cluster labeling
// ---------------------------------------------------------------------------

const char* to_string(DifficultyLabel label) {
    switch (label) {
        case DifficultyLabel::Easy: return "Easy";
        case DifficultyLabel::Moderate: return "Moderate";
        case DifficultyLabel::Difficult: return "Difficult";
    }
    return "?";
}

std::vector<DifficultyLabel> label_clusters(const KMeansModel& model) {
    if (model.k != 3) throw std::invalid_argument("label_clusters: requires exactly 3 clusters");

    std::array<double, 3> expected{};
    for (std::size_t c = 0; c < 3; ++c) {
        double num = 0.0, den = 0.0;
        for (std::size_t b = 0; b < 7; ++b) {
            num += static_cast<double>(b + 1) * model.centers[c][b];
            den += model.centers[c][b];
        }
        if (den <= 0.0) throw ComputationError("label_clusters: degenerate cluster center");
        expected[c] = num / den;
    }

    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return expected[static_cast<std::size_t>(a)] <
                                                expected[static_cast<std::size_t>(b)]; });

    std::vector<DifficultyLabel> labels(3);
    labels[static_cast<std::size_t>(order[0])] = DifficultyLabel::Easy;
    labels[static_cast<std::size_t>(order[1])] = DifficultyLabel::Moderate;
    labels[static_cast<std::size_t>(order[2])] = DifficultyLabel::Difficult;
    return labels;
}

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

namespace {

double entropy_of(const std::array<int, 3>& counts, int total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (int c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

int majority_class(const std::array<int, 3>& counts) {
    int best = 0;
    for (int c = 1; c < 3; ++c) {
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

int grow_classifier(std::vector<ClassifierNode>& nodes, const std::vector<std::array<double, 3>>& x,
                    const std::vector<int>& y, std::vector<std::size_t> indices, int depth,
                    int max_depth, int min_samples_leaf, std::array<double, 3>& raw_importance) {
    std::array<int, 3> counts{};
    for (std::size_t i : indices) ++counts[static_cast<std::size_t>(y[i])];
    const int total = static_cast<int>(indices.size());
    const double node_entropy = entropy_of(counts, total);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 0.0;
    if (depth < max_depth && node_entropy > 0.0) {
        for (int f = 0; f < 3; ++f) {
            auto order = indices;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double va = x[a][static_cast<std::size_t>(f)];
                const double vb = x[b][static_cast<std::size_t>(f)];
                return va < vb || (va == vb && a < b);
            });
            std::array<int, 3> left_counts{};
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                ++left_counts[static_cast<std::size_t>(y[order[pos]])];
                const double v = x[order[pos]][static_cast<std::size_t>(f)];
                const double v_next = x[order[pos + 1]][static_cast<std::size_t>(f)];
                if (v == v_next) continue;
                const int n_left = static_cast<int>(pos) + 1;
                const int n_right = total - n_left;
                if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
                std::array<int, 3> right_counts{};
                for (int c = 0; c < 3; ++c) {
                    right_counts[static_cast<std::size_t>(c)] =
                        counts[static_cast<std::size_t>(c)] - left_counts[static_cast<std::size_t>(c)];
                }
                const double gain = node_entropy -
                                    (static_cast<double>(n_left) / total) * entropy_of(left_counts, n_left) -
                                    (static_cast<double>(n_right) / total) * entropy_of(right_counts, n_right);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (v + v_next);
                }
            }
        }
    }

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[node_id].class_counts = counts;
    nodes[node_id].label = majority_class(counts);
    if (best_feature < 0) return node_id;

    raw_importance[static_cast<std::size_t>(best_feature)] += static_cast<double>(total) * best_gain;

    std::vector<std::size_t> left, right;
    for (std::size_t i : indices) {
        if (x[i][static_cast<std::size_t>(best_feature)] < best_threshold) {
            left.push_back(i);
        } else {
            right.push_back(i);
        }
    }
    indices.clear();
    indices.shrink_to_fit();

    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    const int left_id = grow_classifier(nodes, x, y, std::move(left), depth + 1, max_depth,
                                        min_samples_leaf, raw_importance);
    nodes[node_id].left = left_id;
    const int right_id = grow_classifier(nodes, x, y, std::move(right), depth + 1, max_depth,
                                         min_samples_leaf, raw_importance);
    nodes[node_id].right = right_id;
    return node_id;
}

}  // namespace

ClassificationMetrics compute_metrics(const std::vector<DifficultyLabel>& truth,
                                      const std::vector<DifficultyLabel>& predicted) {
    if (truth.empty() || truth.size() != predicted.size()) {
        throw std::invalid_argument("compute_metrics: misaligned or empty inputs");
    }
    std::array<int, 3> tp{}, fp{}, fn{};
    int correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = static_cast<std::size_t>(truth[i]);
        const auto p = static_cast<std::size_t>(predicted[i]);
        if (t == p) {
            ++tp[t];
            ++correct;
        } else {
            ++fn[t];
            ++fp[p];
        }
    }

    ClassificationMetrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    double recall_sum = 0.0, precision_sum = 0.0, f1_sum = 0.0;
    int present = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        if (tp[c] + fn[c] == 0) continue;  // class absent from truth
        ++present;
        const double recall = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
        const double precision =
            tp[c] + fp[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]) : 0.0;
        const double f1 = recall + precision > 0.0 ? 2.0 * recall * precision / (recall + precision) : 0.0;
        recall_sum += recall;
        precision_sum += precision;
        f1_sum += f1;
    }
    m.macro_recall = recall_sum / present;
    m.macro_precision = precision_sum / present;
    m.macro_f1 = f1_sum / present;
    return m;
}

TreeTrainResult train_tree_classifier(const std::vector<words::WordAttributes>& attributes,
                                      const std::vector<DifficultyLabel>& labels,
                                      double test_fraction, std::uint64_t seed, int max_depth,
                                      int min_samples_leaf) {
    if (attributes.size() != labels.size()) {
        throw std::invalid_argument("train_tree_classifier: misaligned inputs");
    }
    if (attributes.size() < 20) {
        throw std::invalid_argument("train_tree_classifier: need at least 20 rows");
    }
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw std::invalid_argument("train_tree_classifier: test_fraction must be in (0,1)");
    }
    if (max_depth < 1 || min_samples_leaf < 1) {
        throw std::invalid_argument("train_tree_classifier: bad depth or leaf-size limits");
    }

    const std::size_t n = attributes.size();
    std::vector<std::array<double, 3>> x(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = {attributes[i].freq, attributes[i].wie, static_cast<double>(attributes[i].nre)};
        y[i] = static_cast<int>(labels[i]);
    }

    std::mt19937_64 rng(stats::derive_seed(seed, "classifier-split"));
    const auto order = stats::shuffle_indices(n, rng);
    std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    n_test = std::min(std::max<std::size_t>(n_test, 1), n - 2);

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t k = 0; k < n; ++k) {
        (k < n_test ? test_idx : train_idx).push_back(order[k]);
    }

    TreeTrainResult result;
    std::array<double, 3> raw_importance{};
    grow_classifier(result.tree.nodes, x, y, train_idx, 0, max_depth, min_samples_leaf,
                    raw_importance);
    const double importance_total = raw_importance[0] + raw_importance[1] + raw_importance[2];
    if (importance_total > 0.0) {
        for (std::size_t f = 0; f < 3; ++f) {
            result.tree.feature_importances[f] = raw_importance[f] / importance_total;
        }
    }

    auto evaluate = [&](const std::vector<std::size_t>& idx) {
        std::vector<DifficultyLabel> truth, pred;
        truth.reserve(idx.size());
        pred.reserve(idx.size());
        for (std::size_t i : idx) {
            truth.push_back(labels[i]);
            pred.push_back(classify_word(result.tree, attributes[i]));
        }
        return compute_metrics(truth, pred);
    };
    result.train = evaluate(train_idx);
    result.test = evaluate(test_idx);
    return result;
}

DifficultyLabel classify_word(const DecisionTreeClassifier& tree,
                              const words::WordAttributes& attrs) {
    if (tree.nodes.empty()) throw std::invalid_argument("classify_word: untrained tree");
    const std::array<double, 3> x = {attrs.freq, attrs.wie, static_cast<double>(attrs.nre)};
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& cur = tree.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(cur.feature)] < cur.threshold ? cur.left : cur.right;
    }
    return static_cast<DifficultyLabel>(tree.nodes[static_cast<std::size_t>(node)].label);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kDifficultyMagic = "wordlelab-difficulty-model";
constexpr const char* kVersion = "v1";

void expect_token(std::istream& in, const std::string& expected, const char* context) {
    std::string token;
    if (!(in >> token) || token != expected) {
        throw IoError(std::string(context) + ": expected '" + expected + "', got '" + token + "'");
    }
}

double read_double(std::istream& in, const char* context) {
    std::string token;
    if (!(in >> token)) throw IoError(std::string(context) + ": unexpected end of input");
    try {
        return std::stod(token);
    } catch (const std::exception&) {
        throw IoError(std::string(context) + ": bad number '" + token + "'");
    }
}

long long read_int(std::istream& in, const char* context) {
    std::string token;
    if (!(in >> token)) throw IoError(std::string(context) + ": unexpected end of input");
    try {
        return std::stoll(token);
    } catch (const std::exception&) {
        throw IoError(std::string(context) + ": bad integer '" + token + "'");
    }
}

void write_metrics(std::ofstream& out, const char* tag, const ClassificationMetrics& m) {
    out << tag << ' ' << stats::fmt_g17(m.accuracy) << ' ' << stats::fmt_g17(m.macro_recall) << ' '
        << stats::fmt_g17(m.macro_precision) << ' ' << stats::fmt_g17(m.macro_f1) << '\n';
}

ClassificationMetrics read_metrics(std::istream& in, const char* tag) {
    expect_token(in, tag, "difficulty model");
    ClassificationMetrics m;
    m.accuracy = read_double(in, tag);
    m.macro_recall = read_double(in, tag);
    m.macro_precision = read_double(in, tag);
    m.macro_f1 = read_double(in, tag);
    return m;
}

}  // namespace

void save_difficulty_model(const std::string& path, const DifficultyModel& model) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write difficulty model '" + path + "'");
    out << kDifficultyMagic << ' ' << kVersion << '\n';
    write_metrics(out, "train_metrics", model.train);
    write_metrics(out, "test_metrics", model.test);
    out << "importances";
    for (double v : model.tree.feature_importances) out << ' ' << stats::fmt_g17(v);
    out << '\n';
    out << "clusters " << model.centers.size() << '\n';
    for (std::size_t c = 0; c < model.centers.size(); ++c) {
        out << "center " << c << ' ' << static_cast<int>(model.cluster_labels[c]);
        for (double v : model.centers[c]) out << ' ' << stats::fmt_g17(v);
        out << '\n';
    }
    out << "nodes " << model.tree.nodes.size() << '\n';
    for (std::size_t i = 0; i < model.tree.nodes.size(); ++i) {
        const auto& node = model.tree.nodes[i];
        out << "node " << i << ' ';
        if (node.is_leaf()) {
            out << "leaf " << node.label;
        } else {
            out << "split " << node.feature << ' ' << stats::fmt_g17(node.threshold) << ' '
                << node.left << ' ' << node.right << ' ' << node.label;
        }
        out << ' ' << node.class_counts[0] << ' ' << node.class_counts[1] << ' '
            << node.class_counts[2] << '\n';
    }
    out << "end\n";
    if (!out) throw IoError("failed writing difficulty model '" + path + "'");
}

DifficultyModel load_difficulty_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open difficulty model '" + path + "'");
    expect_token(in, kDifficultyMagic, "difficulty model");
    expect_token(in, kVersion, "difficulty model");

    DifficultyModel model;
    model.train = read_metrics(in, "train_metrics");
    model.test = read_metrics(in, "test_metrics");
    expect_token(in, "importances", "difficulty model");
    for (double& v : model.tree.feature_importances) v = read_double(in, "difficulty model");

    expect_token(in, "clusters", "difficulty model");
    const long long n_clusters = read_int(in, "difficulty model");
    if (n_clusters < 0) throw IoError("difficulty model: negative cluster count");
    model.centers.resize(static_cast<std::size_t>(n_clusters));
    model.cluster_labels.resize(static_cast<std::size_t>(n_clusters));
    for (long long c = 0; c < n_clusters; ++c) {
        expect_token(in, "center", "difficulty model");
        if (read_int(in, "difficulty model") != c) throw IoError("difficulty model: center order");
        const long long label = read_int(in, "difficulty model");
        if (label < 0 || label > 2) throw IoError("difficulty model: bad label");
        model.cluster_labels[static_cast<std::size_t>(c)] = static_cast<DifficultyLabel>(label);
        for (double& v : model.centers[static_cast<std::size_t>(c)]) {
            v = read_double(in, "difficulty model");
        }
    }

    expect_token(in, "nodes", "difficulty model");
    const long long n_nodes = read_int(in, "difficulty model");
    if (n_nodes < 1) throw IoError("difficulty model: empty tree");
    model.tree.nodes.resize(static_cast<std::size_t>(n_nodes));
    for (long long i = 0; i < n_nodes; ++i) {
        expect_token(in, "node", "difficulty model");
        if (read_int(in, "difficulty model") != i) throw IoError("difficulty model: node order");
        std::string kind;
        in >> kind;
        auto& node = model.tree.nodes[static_cast<std::size_t>(i)];
        if (kind == "leaf") {
            node.label = static_cast<int>(read_int(in, "difficulty model"));
        } else if (kind == "split") {
            node.feature = static_cast<int>(read_int(in, "difficulty model"));
            node.threshold = read_double(in, "difficulty model");
            node.left = static_cast<int>(read_int(in, "difficulty model"));
            node.right = static_cast<int>(read_int(in, "difficulty model"));
            node.label = static_cast<int>(read_int(in, "difficulty model"));
            if (node.feature < 0 || node.feature > 2 || node.left < 0 || node.right < 0 ||
                node.left >= n_nodes || node.right >= n_nodes) {
                throw IoError("difficulty model: invalid split record");
            }
        } else {
            throw IoError("difficulty model: unknown node kind '" + kind + "'");
        }
        for (int& c : node.class_counts) c = static_cast<int>(read_int(in, "difficulty model"));
    }
    expect_token(in, "end", "difficulty model");
    return model;
}

}  // namespace wordlelab::classify
