#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wordlelab/word_attributes.hpp"

namespace wordlelab::classify {

/// One try-distribution row in percentage space.
using Row7 = std::array<double, 7>;

struct KMeansModel {
    int k = 0;
    std::vector<Row7> centers;
    std::vector<int> assignments;
    double sse = 0.0;
    /// SSE after each Lloyd iteration; non-increasing.
    std::vector<double> sse_history;
};

/// Lloyd iterations from k seeded distinct sample rows until assignments
/// stabilize or max_iter is reached. Nearest-center ties go to the lowest
/// center index; an emptied cluster is reseeded at the point farthest from
/// its center. Throws ComputationError when k exceeds the number of
/// distinct rows.
KMeansModel kmeans(const std::vector<Row7>& rows, int k, int max_iter, std::uint64_t seed);

/// Best of `restarts` seeded runs, lowest SSE kept (ties: lowest restart).
KMeansModel kmeans_best_of(const std::vector<Row7>& rows, int k, int max_iter, int restarts,
                           std::uint64_t seed);

/// Best-of-restarts SSE for k = 1..k_max. Each k also warm-starts one run
/// from the previous best centers plus the farthest point, which keeps the
/// curve non-increasing in k.
std::vector<std::pair<int, double>> elbow_curve(const std::vector<Row7>& rows, int k_max,
                                                std::uint64_t seed, int restarts = 10,
                                                int max_iter = 100);

/// Interior k where the SSE decrease levels off: largest ratio of the
/// marginal drop entering k to the drop leaving it.
int pick_elbow(const std::vector<std::pair<int, double>>& curve);

struct AnovaRow {
    std::string feature;
    std::vector<double> group_means;
    std::vector<double> group_stddevs;  // sample stddev; 0 for singleton groups
    double f_statistic = 0.0;           // +inf when within-group variance is 0 with distinct means
    double p_value = 1.0;               // NaN when all values are identical (undefined)
};

/// One-way ANOVA per try bucket across cluster assignments.
std::vector<AnovaRow> anova(const std::vector<Row7>& rows, const std::vector<int>& assignments);

enum class DifficultyLabel { Easy = 0, Moderate = 1, Difficult = 2 };

const char* to_string(DifficultyLabel label);

/// Requires k == 3. Clusters ordered by the expected try count of their
/// centers (7+/X counted as 7): lowest is Easy, then Moderate, Difficult.
/// Returned vector maps cluster index -> label.
std::vector<DifficultyLabel> label_clusters(const KMeansModel& model);

struct ClassifierNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;                     // majority class at this node
    std::array<int, 3> class_counts{};

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTreeClassifier {
    std::vector<ClassifierNode> nodes;  // nodes[0] is the root
    /// Normalized total entropy decrease per feature (FREQ, WIE, NRE); sums
    /// to 1 whenever any split exists.
    std::array<double, 3> feature_importances{};
};

struct ClassificationMetrics {
    double accuracy = 0.0;
    double macro_recall = 0.0;
    double macro_precision = 0.0;
    double macro_f1 = 0.0;
};

/// Macro averages run over the classes present in `truth`; a class never
/// predicted contributes precision 0.
ClassificationMetrics compute_metrics(const std::vector<DifficultyLabel>& truth,
                                      const std::vector<DifficultyLabel>& predicted);

struct TreeTrainResult {
    DecisionTreeClassifier tree;
    ClassificationMetrics train;
    ClassificationMetrics test;
};

/// CART growth with information gain (Shannon entropy), midpoint thresholds,
/// majority-class leaves. Splits stop on purity, exhausted gain, max_depth,
/// or min_samples_leaf.
TreeTrainResult train_tree_classifier(const std::vector<words::WordAttributes>& attributes,
                                      const std::vector<DifficultyLabel>& labels,
                                      double test_fraction, std::uint64_t seed,
                                      int max_depth = 1 << 20, int min_samples_leaf = 1);

DifficultyLabel classify_word(const DecisionTreeClassifier& tree,
                              const words::WordAttributes& attrs);

// Versioned text serialization of a trained difficulty model (tree,
// importances, metrics, cluster centers and labels).
struct DifficultyModel {
    DecisionTreeClassifier tree;
    ClassificationMetrics train;
    ClassificationMetrics test;
    std::vector<Row7> centers;
    std::vector<DifficultyLabel> cluster_labels;
};

void save_difficulty_model(const std::string& path, const DifficultyModel& model);
DifficultyModel load_difficulty_model(const std::string& path);

}  // namespace wordlelab::classify
