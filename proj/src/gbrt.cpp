#include "wordlelab/gbrt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"

namespace wordlelab::gbrt {

FeatureRow to_feature_row(const words::WordAttributes& attrs) {
    return {attrs.freq, attrs.wie, static_cast<double>(attrs.nre)};
}

void GbrtParams::validate() const {
    if (gamma < 0.0) throw std::invalid_argument("gbrt: gamma must be >= 0");
    if (lambda < 0.0) throw std::invalid_argument("gbrt: lambda must be >= 0");
    if (learning_rate <= 0.0 || learning_rate > 1.0) {
        throw std::invalid_argument("gbrt: learning_rate must be in (0, 1]");
    }
    if (max_depth < 1) throw std::invalid_argument("gbrt: max_depth must be >= 1");
    if (n_rounds < 1) throw std::invalid_argument("gbrt: n_rounds must be >= 1");
    if (min_child_weight < 0.0) throw std::invalid_argument("gbrt: min_child_weight must be >= 0");
}

double RegressionTree::evaluate(const FeatureRow& x) const {
    int node = 0;
    while (!nodes[node].is_leaf()) {
        const auto& cur = nodes[node];
        node = x[static_cast<std::size_t>(cur.feature)] < cur.threshold ? cur.left : cur.right;
    }
    return nodes[node].weight;
}

int RegressionTree::leaf_count() const {
    int count = 0;
    for (const auto& n : nodes) {
        if (n.is_leaf()) ++count;
    }
    return count;
}

double GbrtModel::predict(const FeatureRow& x) const {
    double value = base_score;
    for (const auto& tree : trees) value += params.learning_rate * tree.evaluate(x);
    return value;
}

std::pair<double, double> grad_hess(double y_true, double y_pred) {
    return {y_pred - y_true, 1.0};
}

// ---------------------------------------------------------------------------
// Tree construction
// ---------------------------------------------------------------------------

namespace {

double leaf_score(double g, double h, double lambda) {
    const double denom = h + lambda;
    return denom > 0.0 ? g * g / denom : 0.0;
}

struct BestSplit {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

int grow(std::vector<TreeNode>& nodes, const std::vector<FeatureRow>& x,
         const std::vector<double>& g, const std::vector<double>& h,
         std::vector<std::size_t> indices, int depth, const GbrtParams& params) {
    double g_sum = 0.0, h_sum = 0.0;
    for (std::size_t i : indices) {
        g_sum += g[i];
        h_sum += h[i];
    }

    BestSplit best;
    if (depth < params.max_depth && indices.size() >= 2) {
        const double parent_score = leaf_score(g_sum, h_sum, params.lambda);
        for (int f = 0; f < 3; ++f) {
            auto order = indices;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double va = x[a][static_cast<std::size_t>(f)];
                const double vb = x[b][static_cast<std::size_t>(f)];
                return va < vb || (va == vb && a < b);
            });
            double g_left = 0.0, h_left = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                g_left += g[order[k]];
                h_left += h[order[k]];
                const double v = x[order[k]][static_cast<std::size_t>(f)];
                const double v_next = x[order[k + 1]][static_cast<std::size_t>(f)];
                if (v == v_next) continue;
                const double h_right = h_sum - h_left;
                if (h_left < params.min_child_weight || h_right < params.min_child_weight) continue;
                const double g_right = g_sum - g_left;
                const double gain = 0.5 * (leaf_score(g_left, h_left, params.lambda) +
                                           leaf_score(g_right, h_right, params.lambda) -
                                           parent_score) -
                                    params.gamma;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = 0.5 * (v + v_next);
                }
            }
        }
    }

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (best.feature < 0) {
        const double denom = h_sum + params.lambda;
        nodes[node_id].weight = denom > 0.0 ? -g_sum / denom : 0.0;
        return node_id;
    }

    std::vector<std::size_t> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (std::size_t i : indices) {
        if (x[i][static_cast<std::size_t>(best.feature)] < best.threshold) {
            left.push_back(i);
        } else {
            right.push_back(i);
        }
    }
    indices.clear();
    indices.shrink_to_fit();

    nodes[node_id].feature = best.feature;
    nodes[node_id].threshold = best.threshold;
    const int left_id = grow(nodes, x, g, h, std::move(left), depth + 1, params);
    nodes[node_id].left = left_id;
    const int right_id = grow(nodes, x, g, h, std::move(right), depth + 1, params);
    nodes[node_id].right = right_id;
    return node_id;
}

}  // namespace

RegressionTree build_tree(const std::vector<FeatureRow>& features, const std::vector<double>& g,
                          const std::vector<double>& h, const GbrtParams& params) {
    params.validate();
    if (features.empty() || features.size() != g.size() || g.size() != h.size()) {
        throw std::invalid_argument("build_tree: misaligned or empty inputs");
    }
    std::vector<std::size_t> all(features.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    RegressionTree tree;
    grow(tree.nodes, features, g, h, std::move(all), 0, params);
    return tree;
}

GbrtModel train_gbrt(const std::vector<FeatureRow>& features, const std::vector<double>& targets,
                     const GbrtParams& params) {
    params.validate();
    const std::size_t n = features.size();
    if (n < 2 || targets.size() != n) {
        throw std::invalid_argument("train_gbrt: need at least two aligned rows");
    }
    for (const auto& row : features) {
        for (double v : row) {
            if (!std::isfinite(v)) throw std::invalid_argument("train_gbrt: non-finite feature");
        }
    }
    for (double y : targets) {
        if (!std::isfinite(y)) throw std::invalid_argument("train_gbrt: non-finite target");
    }

    GbrtModel model;
    model.params = params;
    model.base_score = stats::mean(targets);

    std::vector<double> preds(n, model.base_score);
    std::vector<double> g(n), h(n);
    double penalty = 0.0;

    model.training_loss.reserve(static_cast<std::size_t>(params.n_rounds));
    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            std::tie(g[i], h[i]) = grad_hess(targets[i], preds[i]);
        }
        RegressionTree tree = build_tree(features, g, h, params);

        double weight_sq = 0.0;
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) {
                const double effective = params.learning_rate * node.weight;
                weight_sq += effective * effective;
            }
        }
        penalty += params.gamma * tree.leaf_count() + 0.5 * params.lambda * weight_sq;

        for (std::size_t i = 0; i < n; ++i) {
            preds[i] += params.learning_rate * tree.evaluate(features[i]);
        }
        model.trees.push_back(std::move(tree));

        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = targets[i] - preds[i];
            loss += 0.5 * e * e;
        }
        model.training_loss.push_back(loss + penalty);
    }
    return model;
}

double predict(const GbrtModel& model, const words::WordAttributes& attrs) {
    return model.predict(to_feature_row(attrs));
}

// ---------------------------------------------------------------------------
// Distribution predictor
// ---------------------------------------------------------------------------

double DistributionPredictor::mean_accuracy() const {
    double total = 0.0;
    for (double a : test_accuracy) total += a;
    return total / static_cast<double>(test_accuracy.size());
}

DistributionPredictor train_distribution_predictor(
    const std::vector<words::WordAttributes>& attributes,
    const std::vector<ingest::TryDistribution>& tries, double test_fraction, double tolerance,
    std::uint64_t seed, const GbrtParams& params) {
    if (attributes.size() != tries.size()) {
        throw std::invalid_argument("train_distribution_predictor: misaligned inputs");
    }
    if (attributes.size() < 20) {
        throw std::invalid_argument("train_distribution_predictor: need at least 20 rows");
    }
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw std::invalid_argument("train_distribution_predictor: test_fraction must be in (0,1)");
    }
    if (tolerance < 0.0) {
        throw std::invalid_argument("train_distribution_predictor: tolerance must be >= 0");
    }

    const std::size_t n = attributes.size();
    std::mt19937_64 rng(stats::derive_seed(seed, "distribution-split"));
    const auto order = stats::shuffle_indices(n, rng);
    std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    n_test = std::min(std::max<std::size_t>(n_test, 1), n - 2);

    std::vector<FeatureRow> train_x, test_x;
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        if (k < n_test) {
            test_x.push_back(to_feature_row(attributes[i]));
            test_rows.push_back(i);
        } else {
            train_x.push_back(to_feature_row(attributes[i]));
            train_rows.push_back(i);
        }
    }

    DistributionPredictor predictor;
    predictor.tolerance = tolerance;
    predictor.models.reserve(6);
    for (std::size_t b = 1; b < 7; ++b) {  // buckets 2..7
        std::vector<double> train_y;
        train_y.reserve(train_rows.size());
        for (std::size_t i : train_rows) train_y.push_back(tries[i][b]);

        GbrtParams bucket_params = params;
        bucket_params.seed = stats::derive_seed(seed, "bucket-" + std::to_string(b + 1));
        GbrtModel model = train_gbrt(train_x, train_y, bucket_params);

        std::size_t within = 0;
        for (std::size_t k = 0; k < test_rows.size(); ++k) {
            const double pred = model.predict(test_x[k]);
            if (std::abs(pred - tries[test_rows[k]][b]) <= tolerance) ++within;
        }
        predictor.test_accuracy[b - 1] =
            static_cast<double>(within) / static_cast<double>(test_rows.size());
        predictor.test_size[b - 1] = static_cast<int>(test_rows.size());
        predictor.models.push_back(std::move(model));
    }
    return predictor;
}

ingest::TryDistribution predict_distribution(const DistributionPredictor& predictor,
                                             const words::WordAttributes& attrs) {
    if (predictor.models.size() != 6) {
        throw std::invalid_argument("predict_distribution: predictor is not trained");
    }
    ingest::TryDistribution dist;
    dist[0] = predictor.one_try_constant;
    const FeatureRow x = to_feature_row(attrs);
    for (std::size_t b = 1; b < 7; ++b) {
        dist[b] = std::max(predictor.models[b - 1].predict(x), 0.0);
    }
    dist.normalize();
    return dist;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kModelMagic = "wordlelab-gbrt";
constexpr const char* kPredictorMagic = "wordlelab-distribution-predictor";
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

std::uint64_t read_uint(std::istream& in, const char* context) {
    std::string token;
    if (!(in >> token)) throw IoError(std::string(context) + ": unexpected end of input");
    try {
        return std::stoull(token);
    } catch (const std::exception&) {
        throw IoError(std::string(context) + ": bad integer '" + token + "'");
    }
}

}  // namespace

void save_model(std::ostream& out, const GbrtModel& model) {
    out << kModelMagic << ' ' << kVersion << '\n';
    const auto& p = model.params;
    out << "params " << stats::fmt_g17(p.gamma) << ' ' << stats::fmt_g17(p.lambda) << ' '
        << stats::fmt_g17(p.learning_rate) << ' ' << p.max_depth << ' ' << p.n_rounds << ' '
        << stats::fmt_g17(p.min_child_weight) << ' ' << p.seed << '\n';
    out << "base_score " << stats::fmt_g17(model.base_score) << '\n';
    out << "trees " << model.trees.size() << '\n';
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        out << "tree " << t << " nodes " << tree.nodes.size() << '\n';
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const auto& node = tree.nodes[i];
            if (node.is_leaf()) {
                out << "node " << i << " leaf " << stats::fmt_g17(node.weight) << '\n';
            } else {
                out << "node " << i << " split " << node.feature << ' '
                    << stats::fmt_g17(node.threshold) << ' ' << node.left << ' ' << node.right
                    << '\n';
            }
        }
    }
    out << "end\n";
}

GbrtModel load_model(std::istream& in) {
    expect_token(in, kModelMagic, "gbrt model");
    expect_token(in, kVersion, "gbrt model");
    GbrtModel model;

    expect_token(in, "params", "gbrt model");
    model.params.gamma = read_double(in, "gbrt params");
    model.params.lambda = read_double(in, "gbrt params");
    model.params.learning_rate = read_double(in, "gbrt params");
    model.params.max_depth = static_cast<int>(read_int(in, "gbrt params"));
    model.params.n_rounds = static_cast<int>(read_int(in, "gbrt params"));
    model.params.min_child_weight = read_double(in, "gbrt params");
    model.params.seed = read_uint(in, "gbrt params");

    expect_token(in, "base_score", "gbrt model");
    model.base_score = read_double(in, "gbrt model");

    expect_token(in, "trees", "gbrt model");
    const long long n_trees = read_int(in, "gbrt model");
    if (n_trees < 0) throw IoError("gbrt model: negative tree count");
    model.trees.resize(static_cast<std::size_t>(n_trees));
    for (long long t = 0; t < n_trees; ++t) {
        expect_token(in, "tree", "gbrt tree");
        if (read_int(in, "gbrt tree") != t) throw IoError("gbrt tree: index mismatch");
        expect_token(in, "nodes", "gbrt tree");
        const long long n_nodes = read_int(in, "gbrt tree");
        if (n_nodes < 1) throw IoError("gbrt tree: empty node list");
        auto& tree = model.trees[static_cast<std::size_t>(t)];
        tree.nodes.resize(static_cast<std::size_t>(n_nodes));
        for (long long i = 0; i < n_nodes; ++i) {
            expect_token(in, "node", "gbrt node");
            if (read_int(in, "gbrt node") != i) throw IoError("gbrt node: index mismatch");
            std::string kind;
            in >> kind;
            auto& node = tree.nodes[static_cast<std::size_t>(i)];
            if (kind == "leaf") {
                node.weight = read_double(in, "gbrt node");
            } else if (kind == "split") {
                node.feature = static_cast<int>(read_int(in, "gbrt node"));
                node.threshold = read_double(in, "gbrt node");
                node.left = static_cast<int>(read_int(in, "gbrt node"));
                node.right = static_cast<int>(read_int(in, "gbrt node"));
                if (node.feature < 0 || node.feature > 2 || node.left < 0 || node.right < 0 ||
                    node.left >= n_nodes || node.right >= n_nodes) {
                    throw IoError("gbrt node: invalid split record");
                }
            } else {
                throw IoError("gbrt node: unknown kind '" + kind + "'");
            }
        }
    }
    expect_token(in, "end", "gbrt model");
    return model;
}

void save_predictor(const std::string& path, const DistributionPredictor& predictor) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write predictor file '" + path + "'");
    out << kPredictorMagic << ' ' << kVersion << '\n';
    out << "one_try_constant " << stats::fmt_g17(predictor.one_try_constant) << '\n';
    out << "tolerance " << stats::fmt_g17(predictor.tolerance) << '\n';
    out << "accuracies";
    for (double a : predictor.test_accuracy) out << ' ' << stats::fmt_g17(a);
    out << '\n';
    out << "test_sizes";
    for (int s : predictor.test_size) out << ' ' << s;
    out << '\n';
    for (std::size_t b = 0; b < predictor.models.size(); ++b) {
        out << "model " << (b + 2) << '\n';
        save_model(out, predictor.models[b]);
    }
    out << "end\n";
    if (!out) throw IoError("failed writing predictor file '" + path + "'");
}

DistributionPredictor load_predictor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open predictor file '" + path + "'");
    expect_token(in, kPredictorMagic, "predictor");
    expect_token(in, kVersion, "predictor");
    DistributionPredictor predictor;
    expect_token(in, "one_try_constant", "predictor");
    predictor.one_try_constant = read_double(in, "predictor");
    expect_token(in, "tolerance", "predictor");
    predictor.tolerance = read_double(in, "predictor");
    expect_token(in, "accuracies", "predictor");
    for (double& a : predictor.test_accuracy) a = read_double(in, "predictor");
    expect_token(in, "test_sizes", "predictor");
    for (int& s : predictor.test_size) s = static_cast<int>(read_int(in, "predictor"));
    predictor.models.reserve(6);
    for (int b = 2; b <= 7; ++b) {
        expect_token(in, "model", "predictor");
        if (read_int(in, "predictor") != b) throw IoError("predictor: bucket order mismatch");
        predictor.models.push_back(load_model(in));
    }
    expect_token(in, "end", "predictor");
    return predictor;
}

void write_accuracy_report(const std::string& path, const DistributionPredictor& predictor) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write accuracy report '" + path + "'");
    out << "# bucket accuracy test_size\n";
    for (std::size_t b = 0; b < predictor.models.size(); ++b) {
        out << (b + 2) << ' ' << stats::fmt_g17(predictor.test_accuracy[b]) << ' '
            << predictor.test_size[b] << '\n';
    }
    out << "# mean " << stats::fmt_g17(predictor.mean_accuracy()) << '\n';
    if (!out) throw IoError("failed writing accuracy report '" + path + "'");
}

}  // namespace wordlelab::gbrt
