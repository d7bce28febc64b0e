#include "wordlelab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"

namespace wordlelab::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
    if (gbrt.test_fraction <= 0.0 || gbrt.test_fraction >= 1.0) {
        throw ConfigError("config: gbrt.test_fraction must be in (0, 1)");
    }
    if (gbrt.tolerance < 0.0) throw ConfigError("config: gbrt.tolerance must be >= 0");
    try {
        gbrt.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (arima.d < 0) throw ConfigError("config: arima.d must be >= 0");
    if (arima.max_order < 0) throw ConfigError("config: arima.max_order must be >= 0");
    if (arima.hindcast_months < 1) throw ConfigError("config: arima.hindcast_months must be >= 1");
    if (clustering.k_max < 1) throw ConfigError("config: clustering.k_max must be >= 1");
    if (clustering.restarts < 1) throw ConfigError("config: clustering.restarts must be >= 1");
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& target) {
    if (!j.contains(key)) return;
    try {
        target = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }

    PipelineConfig config;
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        read_field(p, "results_file", config.results_file);
        read_field(p, "letter_table", config.letter_table);
        read_field(p, "word_frequency_table", config.word_frequency_table);
        read_field(p, "output_dir", config.output_dir);
    }
    if (j.contains("arima")) {
        const auto& a = j.at("arima");
        read_field(a, "d", config.arima.d);
        read_field(a, "max_order", config.arima.max_order);
        read_field(a, "target_date", config.arima.target_date);
        read_field(a, "hindcast_months", config.arima.hindcast_months);
    }
    if (j.contains("gbrt")) {
        const auto& g = j.at("gbrt");
        read_field(g, "gamma", config.gbrt.params.gamma);
        read_field(g, "lambda", config.gbrt.params.lambda);
        read_field(g, "learning_rate", config.gbrt.params.learning_rate);
        read_field(g, "max_depth", config.gbrt.params.max_depth);
        read_field(g, "n_rounds", config.gbrt.params.n_rounds);
        read_field(g, "min_child_weight", config.gbrt.params.min_child_weight);
        read_field(g, "test_fraction", config.gbrt.test_fraction);
        read_field(g, "tolerance", config.gbrt.tolerance);
    }
    if (j.contains("clustering")) {
        const auto& c = j.at("clustering");
        read_field(c, "k_max", config.clustering.k_max);
        read_field(c, "restarts", config.clustering.restarts);
    }
    read_field(j, "seed", config.seed);
    config.validate();
    return config;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for digesting");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(stats::fnv1a64(bytes)));
    return buf;
}

namespace {

json config_snapshot(const PipelineConfig& c) {
    json j;
    j["paths"] = {{"results_file", c.results_file},
                  {"letter_table", c.letter_table},
                  {"word_frequency_table", c.word_frequency_table},
                  {"output_dir", c.output_dir}};
    j["arima"] = {{"d", c.arima.d},
                  {"max_order", c.arima.max_order},
                  {"target_date", c.arima.target_date},
                  {"hindcast_months", c.arima.hindcast_months}};
    j["gbrt"] = {{"gamma", c.gbrt.params.gamma},
                 {"lambda", c.gbrt.params.lambda},
                 {"learning_rate", c.gbrt.params.learning_rate},
                 {"max_depth", c.gbrt.params.max_depth},
                 {"n_rounds", c.gbrt.params.n_rounds},
                 {"min_child_weight", c.gbrt.params.min_child_weight},
                 {"test_fraction", c.gbrt.test_fraction},
                 {"tolerance", c.gbrt.tolerance}};
    j["clustering"] = {{"k_max", c.clustering.k_max}, {"restarts", c.clustering.restarts}};
    j["seed"] = c.seed;
    return j;
}

/// Tracks a stage's inputs and outputs and writes <stage>_manifest.json.
/// Input digests are taken up front, so missing inputs fail before any
/// output file is created.
class Stage {
public:
    Stage(const PipelineConfig& config, std::string name)
        : config_(config), name_(std::move(name)), started_(std::chrono::steady_clock::now()) {
        config_.validate();
    }

    void require_input(const std::string& path, const char* what) {
        if (path.empty()) {
            throw ConfigError("config: " + std::string(what) + " path is required for " + name_);
        }
        inputs_[path] = file_digest(path);
    }

    void prepare_output_dir() const {
        if (config_.output_dir.empty()) {
            throw ConfigError("config: output_dir is required for " + name_);
        }
        std::error_code ec;
        fs::create_directories(config_.output_dir, ec);
        if (ec) throw IoError("cannot create output directory '" + config_.output_dir + "'");
    }

    std::string path(const std::string& relative) const {
        return (fs::path(config_.output_dir) / relative).string();
    }

    void record_output(const std::string& relative) {
        outputs_[relative] = file_digest(path(relative));
    }

    void finish() {
        json manifest;
        manifest["stage"] = name_;
        manifest["seed"] = config_.seed;
        manifest["config"] = config_snapshot(config_);
        manifest["inputs"] = inputs_;
        manifest["outputs"] = outputs_;
        const std::string manifest_path = path(name_ + "_manifest.json");
        std::ofstream out(manifest_path);
        if (!out) throw IoError("cannot write manifest '" + manifest_path + "'");
        out << manifest.dump(2) << '\n';
        if (!out) throw IoError("failed writing manifest '" + manifest_path + "'");

        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_);
        std::fprintf(stderr, "[wordlelab] %s finished in %.2fs\n", name_.c_str(), elapsed.count());
    }

private:
    const PipelineConfig& config_;
    std::string name_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
    std::chrono::steady_clock::time_point started_;
};

ingest::CleanResult load_clean(const PipelineConfig& config) {
    const auto raw = ingest::parse_results_file(config.results_file);
    if (raw.empty()) throw ComputationError("results file has no data rows");
    return ingest::clean_records(raw);
}

struct Tables {
    words::WordFrequencyTable word_freq;
    words::LetterProbabilityTable letters;
};

Tables load_tables(const PipelineConfig& config) {
    return {words::load_word_frequency_table(config.word_frequency_table),
            words::load_letter_table(config.letter_table)};
}

words::AttributeResult attributes_for(const std::string& word, const Tables& tables) {
    try {
        return words::compute_attributes(word, tables.word_freq, tables.letters);
    } catch (const ComputationError& e) {
        throw ComputationError("word '" + word + "': " + e.what());
    }
}

std::vector<words::WordAttributes> dataset_attributes(const std::vector<ingest::DailyRecord>& records,
                                                      const Tables& tables) {
    std::vector<words::WordAttributes> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(attributes_for(r.word, tables).attributes);
    return out;
}

std::string normalized_word(const std::string& word) {
    std::string w = word;
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (w.size() != 5 || !std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
        throw ConfigError("word '" + word + "' must be exactly five letters a-z");
    }
    return w;
}

json distribution_to_json(const ingest::TryDistribution& d) {
    return json{{"1 try", d[0]},   {"2 tries", d[1]}, {"3 tries", d[2]}, {"4 tries", d[3]},
                {"5 tries", d[4]}, {"6 tries", d[5]}, {"7 or more tries", d[6]}};
}

json attributes_to_json(const words::WordAttributes& a) {
    return json{{"freq", a.freq}, {"wie", a.wie}, {"nre", a.nre}};
}

void write_high_low_file(const std::string& path, const words::HighLowSplit& split) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "# bucket high_mean low_mean\n";
    static const std::array<const char*, 7> names = {"1", "2", "3", "4", "5", "6", "X"};
    for (std::size_t b = 0; b < 7; ++b) {
        out << names[b] << ' ' << stats::fmt_g17(split.high_mean[b]) << ' '
            << stats::fmt_g17(split.low_mean[b]) << '\n';
    }
    out << "# high_count " << split.high_count << " low_count " << split.low_count
        << " split_value " << stats::fmt_g17(split.split_value) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

ingest::CleanResult run_preprocess(const PipelineConfig& config) {
    Stage stage(config, "preprocess");
    stage.require_input(config.results_file, "results_file");
    stage.prepare_output_dir();

    auto result = load_clean(config);

    ingest::write_results_file(stage.path("cleaned.csv"), result.records);
    stage.record_output("cleaned.csv");
    ingest::write_cleaning_report(stage.path("cleaning_report.json"), result.report);
    stage.record_output("cleaning_report.json");
    stage.finish();
    return result;
}

// ---------------------------------------------------------------------------
// attributes
// ---------------------------------------------------------------------------

AttributesReport run_attributes(const PipelineConfig& config) {
    Stage stage(config, "attributes");
    stage.require_input(config.results_file, "results_file");
    stage.require_input(config.letter_table, "letter_table");
    stage.require_input(config.word_frequency_table, "word_frequency_table");
    stage.prepare_output_dir();

    const auto clean = load_clean(config);
    const auto tables = load_tables(config);

    AttributesReport report;
    report.rows.reserve(clean.records.size());
    for (const auto& r : clean.records) {
        const auto result = attributes_for(r.word, tables);
        if (!result.freq_in_table) ++report.words_missing_frequency;
        report.rows.emplace_back(r.word, result.attributes);
    }

    words::write_attributes_file(stage.path("attributes.txt"), report.rows);
    stage.record_output("attributes.txt");
    stage.finish();
    return report;
}

// ---------------------------------------------------------------------------
// forecast + sensitivity
// ---------------------------------------------------------------------------

namespace {

struct FittedSeries {
    std::vector<ingest::DailyRecord> records;
    std::vector<double> series;
    arima::OrderSelection orders;
    arima::ArimaModel model;
};

FittedSeries fit_reported_series(const PipelineConfig& config) {
    FittedSeries out;
    out.records = load_clean(config).records;
    out.series.reserve(out.records.size());
    for (const auto& r : out.records) out.series.push_back(static_cast<double>(r.reported_results));

    const std::uint64_t seed = stats::derive_seed(config.seed, "arima");
    out.orders = arima::select_orders(out.series, config.arima.d, config.arima.max_order, seed);
    out.model = arima::fit_arima(out.series, out.orders.p, config.arima.d, out.orders.q, seed);
    return out;
}

int horizon_to_target(const std::vector<ingest::DailyRecord>& records,
                      const std::string& target_date) {
    if (target_date.empty()) throw ConfigError("config: arima.target_date is required");
    Date target;
    try {
        target = Date::parse(target_date);
    } catch (const IoError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const auto horizon = days_between(records.back().date, target);
    if (horizon < 1) {
        throw ConfigError("config: target date " + target.to_string() +
                          " is not after the last training date " +
                          records.back().date.to_string());
    }
    return static_cast<int>(horizon);
}

}  // namespace

ForecastReport run_forecast(const PipelineConfig& config) {
    Stage stage(config, "forecast");
    stage.require_input(config.results_file, "results_file");
    stage.prepare_output_dir();

    ForecastReport report;
    auto fitted = fit_reported_series(config);
    const auto& records = fitted.records;
    const auto& series = fitted.series;
    const auto& model = fitted.model;
    report.orders = fitted.orders;
    report.model = model;

    // Degenerate (constant) series leave the unit-root and white-noise tests
    // undefined; the forecast itself still goes through, so those fields are
    // reported as NaN instead of failing the stage.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const int adf_lag = std::min(arima::default_adf_lag(series.size()),
                                 static_cast<int>(series.size()) - 10);
    try {
        report.adf_raw = arima::adf_test(series, adf_lag);
    } catch (const ComputationError&) {
        report.adf_raw = {nan, nan, adf_lag};
    }
    const auto differenced = arima::difference(series, config.arima.d);
    if (config.arima.d > 0) {
        const int adf_lag_diff = std::min(arima::default_adf_lag(differenced.size()),
                                          static_cast<int>(differenced.size()) - 10);
        try {
            report.adf_differenced = arima::adf_test(differenced, adf_lag_diff);
        } catch (const ComputationError&) {
            report.adf_differenced = {nan, nan, adf_lag_diff};
        }
    } else {
        report.adf_differenced = report.adf_raw;
    }

    // White-noise check on the residuals past the conditioning prefix.
    std::vector<double> resid(model.residuals.begin() + model.p, model.residuals.end());
    const int fitted_params = model.p + model.q;
    int lb_lags = std::max(10, fitted_params + 5);
    lb_lags = std::min<int>(lb_lags, static_cast<int>(resid.size()) - 1);
    try {
        report.ljung_box = arima::ljung_box(resid, lb_lags, fitted_params);
    } catch (const ComputationError&) {
        report.ljung_box = {nan, nan, lb_lags, lb_lags - fitted_params};
    }

    report.horizon = horizon_to_target(records, config.arima.target_date);
    report.target_date = config.arima.target_date;
    const auto path_values = arima::forecast(model, report.horizon);
    const double point = path_values.back();

    // Hindcast window: the last hindcast_months distinct calendar months.
    // One-step in-sample prediction for row i is y_i - resid[i - d]; rows in
    // the conditioning prefix have no residual and are skipped.
    std::set<int> month_keys;
    for (const auto& r : records) month_keys.insert(r.date.year * 12 + (r.date.month - 1));
    std::set<int> window_keys;
    for (auto it = month_keys.rbegin();
         it != month_keys.rend() && window_keys.size() < static_cast<std::size_t>(config.arima.hindcast_months);
         ++it) {
        window_keys.insert(*it);
    }
    std::vector<double> recent_true, recent_pred;
    for (std::size_t i = static_cast<std::size_t>(model.d + model.p); i < records.size(); ++i) {
        const int key = records[i].date.year * 12 + (records[i].date.month - 1);
        if (!window_keys.count(key)) continue;
        recent_true.push_back(series[i]);
        recent_pred.push_back(series[i] - model.residuals[i - static_cast<std::size_t>(model.d)]);
    }
    if (recent_true.empty()) throw ComputationError("forecast: hindcast window is empty");
    report.hindcast_rows = recent_true.size();
    report.interval = arima::prediction_interval(point, recent_true, recent_pred);

    // Plot-data exports.
    {
        const double band = 1.96 / std::sqrt(static_cast<double>(differenced.size()));
        std::ofstream acf_out(stage.path("acf.txt"));
        acf_out << "# lag acf band95\n";
        for (std::size_t lag = 0; lag < report.orders.acf.size(); ++lag) {
            acf_out << lag << ' ' << stats::fmt_g17(report.orders.acf[lag]) << ' '
                    << stats::fmt_g17(band) << '\n';
        }
        std::ofstream pacf_out(stage.path("pacf.txt"));
        pacf_out << "# lag pacf band95\n";
        for (std::size_t lag = 0; lag < report.orders.pacf.size(); ++lag) {
            pacf_out << lag << ' ' << stats::fmt_g17(report.orders.pacf[lag]) << ' '
                     << stats::fmt_g17(band) << '\n';
        }
    }
    {
        std::ofstream res_out(stage.path("residuals.txt"));
        res_out << "# date residual\n";
        for (std::size_t t = static_cast<std::size_t>(model.p); t < model.residuals.size(); ++t) {
            res_out << records[t + static_cast<std::size_t>(model.d)].date.to_string() << ' '
                    << stats::fmt_g17(model.residuals[t]) << '\n';
        }
    }
    {
        std::ofstream path_out(stage.path("forecast_path.txt"));
        path_out << "# step value\n";
        for (std::size_t h = 0; h < path_values.size(); ++h) {
            path_out << (h + 1) << ' ' << stats::fmt_g17(path_values[h]) << '\n';
        }
    }
    stage.record_output("acf.txt");
    stage.record_output("pacf.txt");
    stage.record_output("residuals.txt");
    stage.record_output("forecast_path.txt");

    json j;
    j["stage"] = "forecast";
    j["adf"] = {{"raw",
                 {{"statistic", report.adf_raw.statistic},
                  {"p_value", report.adf_raw.p_value},
                  {"lags", report.adf_raw.lags_used}}},
                {"differenced",
                 {{"statistic", report.adf_differenced.statistic},
                  {"p_value", report.adf_differenced.p_value},
                  {"lags", report.adf_differenced.lags_used}}}};
    j["orders"] = {{"p", report.orders.p}, {"d", config.arima.d}, {"q", report.orders.q}};
    j["model"] = {{"constant", model.constant},
                  {"ar", model.ar_coeffs},
                  {"ma", model.ma_coeffs},
                  {"residual_variance", model.residual_variance}};
    j["ljung_box"] = {{"statistic", report.ljung_box.statistic},
                      {"p_value", report.ljung_box.p_value},
                      {"lags", report.ljung_box.lags},
                      {"dof", report.ljung_box.dof}};
    j["forecast"] = {{"target_date", report.target_date},
                     {"horizon", report.horizon},
                     {"point", report.interval.point},
                     {"len", report.interval.len},
                     {"lower", report.interval.lower},
                     {"upper", report.interval.upper},
                     {"hindcast_rows", report.hindcast_rows}};
    std::ofstream jout(stage.path("forecast.json"));
    if (!jout) throw IoError("cannot write forecast report");
    jout << j.dump(2) << '\n';
    jout.close();
    stage.record_output("forecast.json");
    stage.finish();
    return report;
}

std::vector<std::pair<double, double>> run_sensitivity(const PipelineConfig& config,
                                                       const std::vector<double>& coefficients) {
    Stage stage(config, "sensitivity");
    stage.require_input(config.results_file, "results_file");
    if (coefficients.empty()) throw ConfigError("sensitivity: no coefficient values given");
    stage.prepare_output_dir();

    const auto fitted = fit_reported_series(config);
    const int horizon = horizon_to_target(fitted.records, config.arima.target_date);
    const auto sweep = arima::sensitivity_sweep(fitted.model, coefficients, horizon);

    std::ofstream out(stage.path("sensitivity.txt"));
    if (!out) throw IoError("cannot write sensitivity table");
    out << "# coefficient forecast\n";
    for (const auto& [coeff, value] : sweep) {
        out << stats::fmt_g17(coeff) << ' ' << stats::fmt_g17(value) << '\n';
    }
    out.close();
    stage.record_output("sensitivity.txt");
    stage.finish();
    return sweep;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

PredictReport run_predict(const PipelineConfig& config, const std::string& word, bool retrain) {
    Stage stage(config, "predict");
    stage.require_input(config.results_file, "results_file");
    stage.require_input(config.letter_table, "letter_table");
    stage.require_input(config.word_frequency_table, "word_frequency_table");
    stage.prepare_output_dir();

    PredictReport report;
    report.word = normalized_word(word);

    const auto clean = load_clean(config);
    const auto tables = load_tables(config);
    const auto word_attrs = attributes_for(report.word, tables);
    report.attributes = word_attrs.attributes;
    report.freq_in_table = word_attrs.freq_in_table;

    const std::string model_rel = "models/distribution_predictor.txt";
    const std::string model_path = stage.path(model_rel);
    std::error_code ec;
    fs::create_directories(fs::path(model_path).parent_path(), ec);
    if (ec) throw IoError("cannot create models directory");

    gbrt::DistributionPredictor predictor;
    if (!retrain && fs::exists(model_path)) {
        predictor = gbrt::load_predictor(model_path);
        report.model_loaded_from_cache = true;
    } else {
        const auto attrs = dataset_attributes(clean.records, tables);
        std::vector<ingest::TryDistribution> tries;
        tries.reserve(clean.records.size());
        for (const auto& r : clean.records) tries.push_back(r.tries);
        predictor = gbrt::train_distribution_predictor(attrs, tries, config.gbrt.test_fraction,
                                                       config.gbrt.tolerance,
                                                       stats::derive_seed(config.seed, "gbrt"),
                                                       config.gbrt.params);
        gbrt::save_predictor(model_path, predictor);
    }
    stage.record_output(model_rel);

    report.distribution = gbrt::predict_distribution(predictor, report.attributes);
    report.bucket_accuracy = predictor.test_accuracy;
    report.mean_accuracy = predictor.mean_accuracy();

    gbrt::write_accuracy_report(stage.path("accuracy_report.txt"), predictor);
    stage.record_output("accuracy_report.txt");

    json j;
    j["stage"] = "predict";
    j["word"] = report.word;
    j["attributes"] = attributes_to_json(report.attributes);
    j["freq_in_table"] = report.freq_in_table;
    j["distribution"] = distribution_to_json(report.distribution);
    j["bucket_accuracy"] = {{"2 tries", report.bucket_accuracy[0]},
                            {"3 tries", report.bucket_accuracy[1]},
                            {"4 tries", report.bucket_accuracy[2]},
                            {"5 tries", report.bucket_accuracy[3]},
                            {"6 tries", report.bucket_accuracy[4]},
                            {"7 or more tries", report.bucket_accuracy[5]}};
    j["mean_accuracy"] = report.mean_accuracy;
    std::ofstream jout(stage.path("prediction.json"));
    if (!jout) throw IoError("cannot write prediction report");
    jout << j.dump(2) << '\n';
    jout.close();
    stage.record_output("prediction.json");
    stage.finish();
    return report;
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

ClassifyReport run_classify(const PipelineConfig& config, const std::string& word, bool retrain) {
    Stage stage(config, "classify");
    stage.require_input(config.results_file, "results_file");
    stage.require_input(config.letter_table, "letter_table");
    stage.require_input(config.word_frequency_table, "word_frequency_table");
    stage.prepare_output_dir();

    ClassifyReport report;
    report.word = normalized_word(word);

    const auto clean = load_clean(config);
    const auto tables = load_tables(config);
    report.attributes = attributes_for(report.word, tables).attributes;

    std::vector<classify::Row7> rows;
    rows.reserve(clean.records.size());
    for (const auto& r : clean.records) rows.push_back(r.tries.pct);

    const int k_max = std::min<int>(config.clustering.k_max, static_cast<int>(rows.size()));
    report.elbow = classify::elbow_curve(rows, k_max, stats::derive_seed(config.seed, "elbow"),
                                         config.clustering.restarts);
    report.elbow_k = classify::pick_elbow(report.elbow);

    report.kmeans = classify::kmeans_best_of(rows, 3, 100, config.clustering.restarts,
                                             stats::derive_seed(config.seed, "kmeans"));
    report.anova = classify::anova(rows, report.kmeans.assignments);
    report.cluster_labels = classify::label_clusters(report.kmeans);

    const std::string model_rel = "models/difficulty_classifier.txt";
    const std::string model_path = stage.path(model_rel);
    std::error_code ec;
    fs::create_directories(fs::path(model_path).parent_path(), ec);
    if (ec) throw IoError("cannot create models directory");

    classify::DifficultyModel difficulty;
    if (!retrain && fs::exists(model_path)) {
        difficulty = classify::load_difficulty_model(model_path);
        report.model_loaded_from_cache = true;
    } else {
        const auto attrs = dataset_attributes(clean.records, tables);
        std::vector<classify::DifficultyLabel> labels;
        labels.reserve(rows.size());
        for (int a : report.kmeans.assignments) {
            labels.push_back(report.cluster_labels[static_cast<std::size_t>(a)]);
        }
        const auto trained = classify::train_tree_classifier(
            attrs, labels, 0.30, stats::derive_seed(config.seed, "classifier"));
        difficulty.tree = trained.tree;
        difficulty.train = trained.train;
        difficulty.test = trained.test;
        difficulty.centers = report.kmeans.centers;
        difficulty.cluster_labels = report.cluster_labels;
        classify::save_difficulty_model(model_path, difficulty);
    }
    stage.record_output(model_rel);

    report.train_metrics = difficulty.train;
    report.test_metrics = difficulty.test;
    report.feature_importances = difficulty.tree.feature_importances;
    report.word_label = classify::classify_word(difficulty.tree, report.attributes);

    // Cluster table, one row per bucket: per-cluster mean +- std, F, p.
    {
        std::ofstream out(stage.path("cluster_report.txt"));
        if (!out) throw IoError("cannot write cluster report");
        std::vector<std::size_t> sizes(3, 0);
        for (int a : report.kmeans.assignments) ++sizes[static_cast<std::size_t>(a)];
        out << "# cluster sizes:";
        for (std::size_t c = 0; c < 3; ++c) {
            out << ' ' << classify::to_string(report.cluster_labels[c]) << "=" << sizes[c];
        }
        out << "\n# feature";
        for (std::size_t c = 0; c < 3; ++c) {
            out << " mean_" << classify::to_string(report.cluster_labels[c]) << " std_"
                << classify::to_string(report.cluster_labels[c]);
        }
        out << " F p\n";
        for (const auto& row : report.anova) {
            std::string feature = row.feature;
            std::replace(feature.begin(), feature.end(), ' ', '_');
            out << feature;
            for (std::size_t c = 0; c < row.group_means.size(); ++c) {
                out << ' ' << stats::fmt_g17(row.group_means[c]) << ' '
                    << stats::fmt_g17(row.group_stddevs[c]);
            }
            out << ' ' << stats::fmt_g17(row.f_statistic) << ' ' << stats::fmt_g17(row.p_value)
                << '\n';
        }
    }
    stage.record_output("cluster_report.txt");

    {
        std::ofstream out(stage.path("metrics.txt"));
        if (!out) throw IoError("cannot write metrics report");
        out << "# set accuracy recall precision f1\n";
        out << "train " << stats::fmt_g17(report.train_metrics.accuracy) << ' '
            << stats::fmt_g17(report.train_metrics.macro_recall) << ' '
            << stats::fmt_g17(report.train_metrics.macro_precision) << ' '
            << stats::fmt_g17(report.train_metrics.macro_f1) << '\n';
        out << "test " << stats::fmt_g17(report.test_metrics.accuracy) << ' '
            << stats::fmt_g17(report.test_metrics.macro_recall) << ' '
            << stats::fmt_g17(report.test_metrics.macro_precision) << ' '
            << stats::fmt_g17(report.test_metrics.macro_f1) << '\n';
    }
    stage.record_output("metrics.txt");

    json j;
    j["stage"] = "classify";
    j["word"] = report.word;
    j["attributes"] = attributes_to_json(report.attributes);
    j["label"] = classify::to_string(report.word_label);
    j["elbow_k"] = report.elbow_k;
    j["elbow"] = json::array();
    for (const auto& [k, sse] : report.elbow) j["elbow"].push_back({{"k", k}, {"sse", sse}});
    j["cluster_labels"] = json::array();
    for (std::size_t c = 0; c < report.cluster_labels.size(); ++c) {
        j["cluster_labels"].push_back(classify::to_string(report.cluster_labels[c]));
    }
    j["feature_importances"] = {{"freq", report.feature_importances[0]},
                                {"wie", report.feature_importances[1]},
                                {"nre", report.feature_importances[2]}};
    j["metrics"] = {{"train",
                     {{"accuracy", report.train_metrics.accuracy},
                      {"recall", report.train_metrics.macro_recall},
                      {"precision", report.train_metrics.macro_precision},
                      {"f1", report.train_metrics.macro_f1}}},
                    {"test",
                     {{"accuracy", report.test_metrics.accuracy},
                      {"recall", report.test_metrics.macro_recall},
                      {"precision", report.test_metrics.macro_precision},
                      {"f1", report.test_metrics.macro_f1}}}};
    std::ofstream jout(stage.path("classification.json"));
    if (!jout) throw IoError("cannot write classification report");
    jout << j.dump(2) << '\n';
    jout.close();
    stage.record_output("classification.json");
    stage.finish();
    return report;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

DatasetReport run_report(const PipelineConfig& config) {
    Stage stage(config, "report");
    stage.require_input(config.results_file, "results_file");
    stage.require_input(config.letter_table, "letter_table");
    stage.require_input(config.word_frequency_table, "word_frequency_table");
    stage.prepare_output_dir();

    const auto clean = load_clean(config);
    const auto tables = load_tables(config);
    const auto attrs = dataset_attributes(clean.records, tables);

    DatasetReport report;
    report.hard_share = ingest::hard_share_statistic(clean.records, report.hard_share_threshold);

    std::vector<ingest::TryDistribution> tries;
    std::vector<double> freq_series, wie_series, nre_series;
    for (std::size_t i = 0; i < clean.records.size(); ++i) {
        tries.push_back(clean.records[i].tries);
        freq_series.push_back(attrs[i].freq);
        wie_series.push_back(attrs[i].wie);
        nre_series.push_back(static_cast<double>(attrs[i].nre));
    }
    report.correlation = words::correlation_matrix(attrs, tries);
    report.split_freq = words::high_low_split(freq_series, tries);
    report.split_wie = words::high_low_split(wie_series, tries);
    report.split_nre = words::high_low_split(nre_series, tries);

    {
        std::ofstream out(stage.path("hard_share.txt"));
        if (!out) throw IoError("cannot write hard-share table");
        out << "# word share_three_plus\n";
        for (const auto& [w, share] : report.hard_share.shares) {
            out << w << ' ' << stats::fmt_g17(share) << '\n';
        }
        out << "# fraction_at_or_above_" << stats::fmt_g17(report.hard_share_threshold) << ' '
            << stats::fmt_g17(report.hard_share.fraction_at_or_above) << '\n';
    }
    stage.record_output("hard_share.txt");

    {
        std::ofstream out(stage.path("correlation.txt"));
        if (!out) throw IoError("cannot write correlation matrix");
        out << "# series:";
        for (const char* name : words::kCorrelationSeries) {
            std::string n = name;
            std::replace(n.begin(), n.end(), ' ', '_');
            out << ' ' << n;
        }
        out << '\n';
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t j = 0; j < 10; ++j) {
                if (j) out << ' ';
                out << stats::fmt_g17(report.correlation.value[i][j]);
            }
            out << '\n';
        }
    }
    stage.record_output("correlation.txt");

    write_high_low_file(stage.path("high_low_freq.txt"), report.split_freq);
    stage.record_output("high_low_freq.txt");
    write_high_low_file(stage.path("high_low_wie.txt"), report.split_wie);
    stage.record_output("high_low_wie.txt");
    write_high_low_file(stage.path("high_low_nre.txt"), report.split_nre);
    stage.record_output("high_low_nre.txt");

    json j;
    j["stage"] = "report";
    j["rows"] = clean.records.size();
    j["hard_share"] = {{"threshold", report.hard_share_threshold},
                       {"fraction_at_or_above", report.hard_share.fraction_at_or_above}};
    std::ofstream jout(stage.path("report.json"));
    if (!jout) throw IoError("cannot write dataset report");
    jout << j.dump(2) << '\n';
    jout.close();
    stage.record_output("report.json");
    stage.finish();
    return report;
}

}  // namespace wordlelab::pipeline
