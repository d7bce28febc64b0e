#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wordlelab/ingest.hpp"
#include "wordlelab/word_attributes.hpp"

namespace wordlelab::gbrt {

/// Feature order for every tree: FREQ, WIE, NRE.
using FeatureRow = std::array<double, 3>;

FeatureRow to_feature_row(const words::WordAttributes& attrs);

struct GbrtParams {
    double gamma = 0.0;         // complexity charge per leaf
    double lambda = 1.0;        // L2 penalty on leaf weights
    double learning_rate = 0.1;
    int max_depth = 3;
    int n_rounds = 100;
    double min_child_weight = 1.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

/// Node of a regression tree. Leaves have feature == -1 and carry the
/// weight -G/(H+lambda) of the instance set that reached them.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double evaluate(const FeatureRow& x) const;
    int leaf_count() const;
};

struct GbrtModel {
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
    GbrtParams params;
    /// Squared-error loss plus regularization after each round, recorded
    /// during training.
    std::vector<double> training_loss;

    double predict(const FeatureRow& x) const;
};

/// Gradient and hessian of the squared loss l = (y - yhat)^2 / 2 with
/// respect to yhat: g = yhat - y, h = 1.
std::pair<double, double> grad_hess(double y_true, double y_pred);

/// Exact greedy construction. A split is taken iff its gain
///   [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] / 2 - gamma
/// is positive and maximal; candidate thresholds are midpoints between
/// consecutive distinct sorted feature values. Ties keep the lowest feature
/// index, then the lowest threshold.
RegressionTree build_tree(const std::vector<FeatureRow>& features, const std::vector<double>& g,
                          const std::vector<double>& h, const GbrtParams& params);

/// Boosted ensemble: base_score is the target mean, each round fits a tree
/// to the current gradients and contributes learning_rate * tree(x).
GbrtModel train_gbrt(const std::vector<FeatureRow>& features, const std::vector<double>& targets,
                     const GbrtParams& params);

double predict(const GbrtModel& model, const words::WordAttributes& attrs);

/// Seven-bucket predictor: bucket 1 is the fixed constant 0.5, buckets 2..7
/// carry one boosted model each.
struct DistributionPredictor {
    double one_try_constant = 0.5;
    std::vector<GbrtModel> models;          // 6 entries, buckets 2..7
    std::array<double, 6> test_accuracy{};  // fraction within tolerance, buckets 2..7
    std::array<int, 6> test_size{};
    double tolerance = 3.0;

    double mean_accuracy() const;
};

/// Seeded 70/30-style split (test_fraction defaults to 0.30), one model per
/// bucket 2..7; per-bucket accuracy is the fraction of test predictions
/// within +-tolerance percentage points of truth.
DistributionPredictor train_distribution_predictor(
    const std::vector<words::WordAttributes>& attributes,
    const std::vector<ingest::TryDistribution>& tries, double test_fraction, double tolerance,
    std::uint64_t seed, const GbrtParams& params = {});

/// (0.5, m2(x), ..., m7(x)) clipped at 0 and rescaled to sum 100.
ingest::TryDistribution predict_distribution(const DistributionPredictor& predictor,
                                             const words::WordAttributes& attrs);

// Versioned text serialization; loaders throw IoError on malformed input.
void save_model(std::ostream& out, const GbrtModel& model);
GbrtModel load_model(std::istream& in);
void save_predictor(const std::string& path, const DistributionPredictor& predictor);
DistributionPredictor load_predictor(const std::string& path);

/// Columnar text: bucket, accuracy, test size.
void write_accuracy_report(const std::string& path, const DistributionPredictor& predictor);

}  // namespace wordlelab::gbrt
