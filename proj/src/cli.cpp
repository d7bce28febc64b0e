#include "wordlelab/cli.hpp"

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wordlelab/classify.hpp"
#include "wordlelab/errors.hpp"
#include "wordlelab/pipeline.hpp"
#include "wordlelab/stats.hpp"

namespace wordlelab::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitIoConfig = 2;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string target_date;
    std::optional<double> tolerance;
    bool retrain = false;
};

pipeline::PipelineConfig effective_config(const GlobalOptions& opts) {
    if (opts.config_path.empty()) {
        throw ConfigError("--config is required (path to a JSON pipeline config)");
    }
    pipeline::PipelineConfig config = pipeline::load_config(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
    if (!opts.target_date.empty()) config.arima.target_date = opts.target_date;
    if (opts.tolerance) config.gbrt.tolerance = *opts.tolerance;
    config.validate();
    return config;
}

void print_distribution(const ingest::TryDistribution& d) {
    static const char* names[7] = {"1 try", "2 tries", "3 tries", "4 tries",
                                   "5 tries", "6 tries", "7+ (X)"};
    for (std::size_t b = 0; b < 7; ++b) {
        std::printf("  %-8s %6.2f%%\n", names[b], d[b]);
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Wordle daily-results toolkit: cleaning, forecasting, distribution prediction "
                 "and difficulty classification"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Path to the JSON pipeline config")
        ->envname("WORDLELAB_CONFIG");
    app.add_option("--seed", opts.seed, "Override the global seed");
    app.add_option("--out", opts.out_dir, "Override the output directory");

    auto* preprocess = app.add_subcommand("preprocess", "Clean the daily-results file");
    auto* attributes = app.add_subcommand("attributes", "Compute word attributes for the dataset");
    auto* forecast = app.add_subcommand("forecast", "Forecast reported results to the target date");
    forecast->add_option("--target-date", opts.target_date, "Forecast target date (ISO)");

    std::string predict_word;
    auto* predict = app.add_subcommand("predict", "Predict the 7-bucket try distribution of a word");
    predict->add_option("word", predict_word, "Solution word")->required();
    predict->add_option("--tolerance", opts.tolerance,
                        "Accuracy tolerance in percentage points");
    predict->add_flag("--retrain", opts.retrain, "Retrain even when a cached model exists");

    std::string classify_word_arg;
    auto* classify_cmd = app.add_subcommand("classify", "Classify a word's difficulty");
    classify_cmd->add_option("word", classify_word_arg, "Solution word")->required();
    classify_cmd->add_flag("--retrain", opts.retrain, "Retrain even when a cached model exists");

    auto* report = app.add_subcommand("report", "Dataset feature report (correlations, splits)");

    std::vector<double> sweep_coefficients;
    auto* sensitivity = app.add_subcommand("sensitivity",
                                           "Forecast under alternative leading coefficients");
    sensitivity->add_option("--coefficients", sweep_coefficients, "Replacement values")
        ->delimiter(',')
        ->required();
    sensitivity->add_option("--target-date", opts.target_date, "Forecast target date (ISO)");

    // Let --config/--seed/--out placed after the subcommand reach the parent.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("wordlelab");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitIoConfig;
    }

    try {
        const pipeline::PipelineConfig config = effective_config(opts);

        if (preprocess->parsed()) {
            const auto result = pipeline::run_preprocess(config);
            std::printf("rows: %zu in, %zu kept, %zu dropped (%zu bad word, %zu bad sum), %zu repaired\n",
                        result.report.input_rows, result.report.normalized_rows,
                        result.report.dropped_rows(), result.report.dropped_bad_word.size(),
                        result.report.dropped_bad_sum.size(), result.report.repaired_counts.size());
        } else if (attributes->parsed()) {
            const auto result = pipeline::run_attributes(config);
            std::printf("attributes written for %zu words (%zu missing from the frequency table)\n",
                        result.rows.size(), result.words_missing_frequency);
        } else if (forecast->parsed()) {
            const auto result = pipeline::run_forecast(config);
            std::printf("ADF p-value: raw %.4f, differenced %.4f\n", result.adf_raw.p_value,
                        result.adf_differenced.p_value);
            std::printf("selected ARIMA(%d,%d,%d), Ljung-Box p = %.4f\n", result.orders.p,
                        config.arima.d, result.orders.q, result.ljung_box.p_value);
            std::printf("forecast for %s: %.0f, Len = %.2f%%, interval [%.0f, %.0f]\n",
                        result.target_date.c_str(), result.interval.point,
                        100.0 * result.interval.len, result.interval.lower, result.interval.upper);
        } else if (predict->parsed()) {
            const auto result = pipeline::run_predict(config, predict_word, opts.retrain);
            std::printf("word: %s (freq %s, wie %.6f, nre %d)%s\n", result.word.c_str(),
                        stats::fmt_g17(result.attributes.freq).c_str(), result.attributes.wie,
                        result.attributes.nre,
                        result.freq_in_table ? "" : " [word absent from frequency table]");
            print_distribution(result.distribution);
            std::printf("mean accuracy %.3f (within %.1f points, buckets 2-7)%s\n",
                        result.mean_accuracy, config.gbrt.tolerance,
                        result.model_loaded_from_cache ? " [cached model]" : "");
        } else if (classify_cmd->parsed()) {
            const auto result = pipeline::run_classify(config, classify_word_arg, opts.retrain);
            std::printf("word: %s -> %s\n", result.word.c_str(),
                        classify::to_string(result.word_label));
            std::printf("elbow suggests k = %d; labels by cluster:", result.elbow_k);
            for (const auto label : result.cluster_labels) {
                std::printf(" %s", classify::to_string(label));
            }
            std::printf("\nimportances: freq %.3f, wie %.3f, nre %.3f\n",
                        result.feature_importances[0], result.feature_importances[1],
                        result.feature_importances[2]);
            std::printf("accuracy: train %.3f, test %.3f%s\n", result.train_metrics.accuracy,
                        result.test_metrics.accuracy,
                        result.model_loaded_from_cache ? " [cached model]" : "");
        } else if (report->parsed()) {
            const auto result = pipeline::run_report(config);
            std::printf("fraction of words where >= %.0f%% of players needed 3+ tries: %.3f\n",
                        result.hard_share_threshold, result.hard_share.fraction_at_or_above);
        } else if (sensitivity->parsed()) {
            const auto sweep = pipeline::run_sensitivity(config, sweep_coefficients);
            std::printf("# coefficient forecast\n");
            for (const auto& [coeff, value] : sweep) {
                std::printf("%g %.2f\n", coeff, value);
            }
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitIoConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIoConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitComputation;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace wordlelab::cli
