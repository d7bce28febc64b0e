#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wordlelab/arima.hpp"
#include "wordlelab/classify.hpp"
#include "wordlelab/gbrt.hpp"
#include "wordlelab/ingest.hpp"
#include "wordlelab/word_attributes.hpp"

namespace wordlelab::pipeline {

struct ArimaConfig {
    int d = 1;
    int max_order = 3;
    std::string target_date;  // ISO date the forecast runs to
    int hindcast_months = 2;  // trailing calendar months feeding the interval
};

struct GbrtConfig {
    gbrt::GbrtParams params;
    double test_fraction = 0.30;
    double tolerance = 3.0;  // percentage points counted as a correct prediction
};

struct ClusteringConfig {
    int k_max = 8;
    int restarts = 10;
};

struct PipelineConfig {
    std::string results_file;
    std::string letter_table;
    std::string word_frequency_table;
    std::string output_dir;
    ArimaConfig arima;
    GbrtConfig gbrt;
    ClusteringConfig clustering;
    std::uint64_t seed = 0;

    /// Generic checks (fractions, orders); per-command path checks happen in
    /// the run_* entry points. Throws ConfigError.
    void validate() const;
};

/// Reads a JSON config file; missing fields keep their defaults.
PipelineConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Command entry points. Each validates its inputs, computes, writes its
// output files into output_dir, then writes <stage>_manifest.json recording
// the config snapshot, seed and input/output digests. Returned structs carry
// the computed results for callers that want them.
// ---------------------------------------------------------------------------

ingest::CleanResult run_preprocess(const PipelineConfig& config);

struct ForecastReport {
    arima::AdfResult adf_raw;
    arima::AdfResult adf_differenced;
    arima::OrderSelection orders;
    arima::ArimaModel model;
    arima::LjungBoxResult ljung_box;
    std::string target_date;
    int horizon = 0;
    arima::ForecastInterval interval;
    std::size_t hindcast_rows = 0;
};

ForecastReport run_forecast(const PipelineConfig& config);

struct AttributesReport {
    std::vector<std::pair<std::string, words::WordAttributes>> rows;
    std::size_t words_missing_frequency = 0;
};

AttributesReport run_attributes(const PipelineConfig& config);

struct PredictReport {
    std::string word;
    words::WordAttributes attributes;
    bool freq_in_table = false;
    ingest::TryDistribution distribution;
    std::array<double, 6> bucket_accuracy{};  // buckets 2..7
    double mean_accuracy = 0.0;
    bool model_loaded_from_cache = false;
};

PredictReport run_predict(const PipelineConfig& config, const std::string& word,
                          bool retrain = false);

struct ClassifyReport {
    std::string word;
    words::WordAttributes attributes;
    int elbow_k = 0;
    std::vector<std::pair<int, double>> elbow;
    classify::KMeansModel kmeans;
    std::vector<classify::AnovaRow> anova;
    std::vector<classify::DifficultyLabel> cluster_labels;
    classify::ClassificationMetrics train_metrics;
    classify::ClassificationMetrics test_metrics;
    std::array<double, 3> feature_importances{};
    classify::DifficultyLabel word_label = classify::DifficultyLabel::Moderate;
    bool model_loaded_from_cache = false;
};

ClassifyReport run_classify(const PipelineConfig& config, const std::string& word,
                            bool retrain = false);

struct DatasetReport {
    ingest::HardShareResult hard_share;
    double hard_share_threshold = 90.0;
    words::CorrelationMatrix correlation;
    words::HighLowSplit split_freq;
    words::HighLowSplit split_wie;
    words::HighLowSplit split_nre;
};

DatasetReport run_report(const PipelineConfig& config);

std::vector<std::pair<double, double>> run_sensitivity(const PipelineConfig& config,
                                                       const std::vector<double>& coefficients);

/// FNV-1a digest of a file's bytes as 16 hex characters.
std::string file_digest(const std::string& path);

}  // namespace wordlelab::pipeline
