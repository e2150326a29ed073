#include "cfc/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfc/augment.hpp"
#include "cfc/cfc.hpp"
#include "cfc/dataset.hpp"
#include "cfc/detail/rng.hpp"
#include "cfc/detail/text.hpp"
#include "cfc/error.hpp"
#include "cfc/fcm.hpp"
#include "cfc/infogain.hpp"
#include "cfc/model_io.hpp"

namespace cfc::cli {

namespace {

using nlohmann::json;

std::string hex16(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

class PhaseTimer {
public:
    void start() { begin_ = std::chrono::steady_clock::now(); }
    double stop() {
        auto end = std::chrono::steady_clock::now();
        return std::chrono::duration<double, std::milli>(end - begin_).count();
    }

private:
    std::chrono::steady_clock::time_point begin_;
};

/// Column-aligned text table; the first column is left-aligned, the rest
/// right-aligned.
std::string render_aligned(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    }
    std::string text;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) text += "  ";
            std::size_t pad = widths[c] - row[c].size();
            if (c == 0) {
                text += row[c];
                if (c + 1 < row.size()) text.append(pad, ' ');
            } else {
                text.append(pad, ' ');
                text += row[c];
            }
        }
        text += '\n';
    }
    return text;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("failed while writing '" + path + "'");
}

void write_manifest(const std::string& path, const json& manifest) {
    write_text_file(path, manifest.dump(2) + "\n");
}

json input_entry(const std::string& path) {
    return json{{"path", path}, {"digest", file_digest(path)}};
}

std::size_t default_thread_count() {
    const char* env = std::getenv("CFC_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    auto parsed = detail::parse_uint(env);
    if (!parsed)
        throw ConfigError("CFC_THREADS must be a non-negative integer, got '" +
                          std::string(env) + "'");
    return static_cast<std::size_t>(*parsed);
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
    std::string data;
    std::string out;
    std::string fractions;
    std::string group_column;
    std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& args, std::ostream& out) {
    auto fractions = parse_fractions(args.fractions);
    if (!fractions.empty() && args.group_column.empty())
        throw ConfigError("--fractions requires --group-column");

    PhaseTimer timer;
    timer.start();
    Table table = read_table(args.data);
    double load_ms = timer.stop();

    timer.start();
    Table sampled = fractions.empty()
                        ? table
                        : sample_table_by_group(table, args.group_column, fractions, args.seed);
    double sample_ms = timer.stop();

    timer.start();
    write_table(args.out, sampled);
    double write_ms = timer.stop();

    json manifest = {
        {"command", "sample"},
        {"version", kToolVersion},
        {"seed", args.seed},
        {"config",
         {{"fractions", fractions},
          {"group_column", args.group_column}}},
        {"inputs", {{"data", input_entry(args.data)}}},
        {"outputs", {args.out}},
        {"timings_ms", {{"load", load_ms}, {"sample", sample_ms}, {"write", write_ms}}},
    };
    write_manifest(args.out + ".manifest.json", manifest);

    out << "kept " << sampled.rows.size() << " of " << table.rows.size() << " rows -> "
        << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterArgs {
    std::string schema;
    std::string data;
    std::string label_column;
    std::string k_spec;
    double alpha = 3.0;
    double tolerance = 1e-6;
    std::size_t max_iterations = 300;
    std::size_t bins = kDefaultInfoGainBins;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_cluster(const ClusterArgs& args, std::ostream& out) {
    auto ks = parse_cluster_counts(args.k_spec);
    if (ks.size() != 1)
        throw ConfigError("cluster takes exactly one cluster count, got " +
                          std::to_string(ks.size()));
    FcmConfig fcm;
    fcm.k = ks.front();
    fcm.alpha = args.alpha;
    fcm.tolerance = args.tolerance;
    fcm.max_iterations = args.max_iterations;
    fcm.seed = args.seed;
    fcm.validate();
    if (args.bins < 2) throw ConfigError("--bins must be at least 2");

    PhaseTimer timer;
    timer.start();
    SchemaFile schema_file = load_schema(args.schema);
    const std::string label =
        args.label_column.empty() ? schema_file.label_column : args.label_column;
    Table table = read_table(args.data);
    Dataset d = dataset_from_table(table, schema_file.schema, label);
    double load_ms = timer.stop();

    timer.start();
    auto normalization = fit_normalization(d);
    auto normalized = apply_normalization(d, normalization);
    auto weights = compute_feature_weights(normalized, args.bins);
    auto result = fit(normalized, fcm, weights);
    double cluster_ms = timer.stop();

    timer.start();
    std::filesystem::create_directories(args.out);
    auto dir = std::filesystem::path(args.out);

    std::string memberships;
    for (std::size_t j = 1; j <= fcm.k; ++j) memberships += "w" + std::to_string(j) + ",";
    memberships += "z,b\n";
    auto features = build_cluster_features(result.memberships);
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t j = 0; j < fcm.k; ++j)
            memberships += detail::format_double(result.memberships.at(i, j)) + ",";
        memberships += std::to_string(features.z[i]) + "," +
                       detail::format_double(features.b[i]) + "\n";
    }
    write_text_file((dir / "memberships.csv").string(), memberships);

    std::string centroids;
    for (std::size_t j = 0; j < fcm.k; ++j) {
        centroids += "cluster " + std::to_string(j + 1) + "\n";
        for (std::size_t q = 0; q < d.m(); ++q) {
            const auto& comp = result.centroids.at(j, q);
            centroids += "  " + d.schema().at(q).name + ": ";
            if (comp.missing) {
                centroids += "missing";
            } else if (d.schema().at(q).kind == FeatureKind::Symbolic) {
                centroids += comp.representative + " (";
                const auto& vocab = result.centroids.vocabulary(q);
                for (std::size_t v = 0; v < vocab.size(); ++v) {
                    if (v > 0) centroids += ", ";
                    centroids += vocab[v] + "=" + detail::format_double(comp.category_weights[v]);
                }
                centroids += ")";
            } else {
                centroids += detail::format_double(comp.value);
            }
            centroids += "\n";
        }
    }
    write_text_file((dir / "centroids.txt").string(), centroids);
    double write_ms = timer.stop();

    json manifest = {
        {"command", "cluster"},
        {"version", kToolVersion},
        {"seed", args.seed},
        {"config",
         {{"k", fcm.k},
          {"alpha", fcm.alpha},
          {"tolerance", fcm.tolerance},
          {"max_iterations", fcm.max_iterations},
          {"bins", args.bins},
          {"label_column", label}}},
        {"inputs",
         {{"schema", input_entry(args.schema)}, {"data", input_entry(args.data)}}},
        {"outputs", {(dir / "memberships.csv").string(), (dir / "centroids.txt").string()}},
        {"timings_ms", {{"load", load_ms}, {"cluster", cluster_ms}, {"write", write_ms}}},
    };
    write_manifest((dir / "manifest.json").string(), manifest);

    out << "clustered " << d.n() << " rows into " << fcm.k << " clusters in "
        << result.iterations << " iterations -> " << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string schema;
    std::string data;
    std::string label_column;
    std::string k_spec = "2,3,4,5";
    int mode = 1;
    std::size_t folds = 10;
    double alpha = 3.0;
    double tolerance = 1e-6;
    std::size_t max_iterations = 300;
    std::size_t bins = kDefaultInfoGainBins;
    std::uint64_t seed = 0;
    std::string strata_column;
    bool refit_per_fold = false;
    std::size_t threads = 1;
    std::size_t ga_population = 20;
    std::size_t ga_generations = 20;
    double ga_crossover = 0.6;
    double ga_mutation = 0.033;
    std::string model;
    std::string out;
};

CfcConfig train_config(const TrainArgs& args) {
    CfcConfig cfg;
    cfg.candidates = parse_cluster_counts(args.k_spec);
    cfg.mode = manipulation_mode_from_int(args.mode);
    cfg.folds = args.folds;
    cfg.fcm.alpha = args.alpha;
    cfg.fcm.tolerance = args.tolerance;
    cfg.fcm.max_iterations = args.max_iterations;
    cfg.bins = args.bins;
    cfg.seed = args.seed;
    cfg.refit_per_fold = args.refit_per_fold;
    cfg.threads = args.threads;
    cfg.selection.population = args.ga_population;
    cfg.selection.generations = args.ga_generations;
    cfg.selection.crossover = args.ga_crossover;
    cfg.selection.mutation = args.ga_mutation;
    cfg.validate();
    return cfg;
}

json config_json(const CfcConfig& cfg, const std::string& label,
                 const std::string& strata_column) {
    return json{
        {"candidates", cfg.candidates},
        {"mode", manipulation_mode_to_int(cfg.mode)},
        {"folds", cfg.folds},
        {"alpha", cfg.fcm.alpha},
        {"tolerance", cfg.fcm.tolerance},
        {"max_iterations", cfg.fcm.max_iterations},
        {"bins", cfg.bins},
        {"refit_per_fold", cfg.refit_per_fold},
        {"threads", cfg.threads},
        {"ga",
         {{"population", cfg.selection.population},
          {"generations", cfg.selection.generations},
          {"crossover", cfg.selection.crossover},
          {"mutation", cfg.selection.mutation}}},
        {"label_column", label},
        {"strata_column", strata_column},
    };
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
    CfcConfig cfg = train_config(args);

    PhaseTimer timer;
    timer.start();
    SchemaFile schema_file = load_schema(args.schema);
    const std::string label =
        args.label_column.empty() ? schema_file.label_column : args.label_column;
    Table table = read_table(args.data);
    std::vector<std::string> strata;
    Dataset d = [&] {
        if (args.strata_column.empty())
            return dataset_from_table(table, schema_file.schema, label);
        std::vector<std::vector<std::string>> extras;
        auto data = dataset_from_table(table, schema_file.schema, label, {args.strata_column},
                                       &extras);
        strata = std::move(extras.front());
        return data;
    }();
    double load_ms = timer.stop();

    timer.start();
    TrainResult result = train(d, cfg, strata);
    double train_ms = timer.stop();

    timer.start();
    save_model(result.model, args.model);

    std::vector<std::vector<std::string>> aligned;
    aligned.push_back({"", "k", "CV accuracy (%)", "features"});
    std::string delimited = "k,cv_accuracy,features,selected\n";
    for (const auto& c : result.candidates) {
        bool selected = c.k == result.model.k;
        aligned.push_back({selected ? "*" : "", std::to_string(c.k),
                           format_percent(c.cv_accuracy),
                           std::to_string(c.classifier.schema().size())});
        delimited += std::to_string(c.k) + "," + detail::format_double(c.cv_accuracy) + "," +
                     std::to_string(c.classifier.schema().size()) + "," +
                     (selected ? "1" : "0") + "\n";
    }
    if (!args.out.empty()) write_text_file(args.out, delimited);
    double write_ms = timer.stop();

    json manifest = {
        {"command", "train"},
        {"version", kToolVersion},
        {"seed", args.seed},
        {"config", config_json(cfg, label, args.strata_column)},
        {"inputs",
         {{"schema", input_entry(args.schema)}, {"data", input_entry(args.data)}}},
        {"outputs", args.out.empty() ? json::array({args.model})
                                     : json::array({args.model, args.out})},
        {"timings_ms", {{"load", load_ms}, {"train", train_ms}, {"write", write_ms}}},
    };
    write_manifest(args.model + ".manifest.json", manifest);

    out << render_aligned(aligned);
    out << "selected k* = " << result.model.k << " -> " << args.model << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string model;
    std::string data;
    std::string schema;
    bool emit_memberships = false;
    std::string out;
};

int cmd_predict(const PredictArgs& args, std::ostream& out) {
    PhaseTimer timer;
    timer.start();
    CfcModel model = load_model(args.model);
    if (!args.schema.empty()) {
        SchemaFile schema_file = load_schema(args.schema);
        auto expected = model.schema.fingerprint();
        auto provided = schema_file.schema.fingerprint();
        if (provided != expected)
            throw DataError("schema fingerprint mismatch: model was trained with " +
                            hex16(expected) + ", '" + args.schema + "' describes " +
                            hex16(provided));
    }
    Table table = read_table(args.data);
    auto rows = rows_from_table(table, model.schema, args.data);
    double load_ms = timer.stop();

    timer.start();
    auto predictions = predict_batch(model, rows);
    double predict_ms = timer.stop();

    timer.start();
    std::string text = "predicted,probability,z,b";
    if (args.emit_memberships)
        for (std::size_t j = 1; j <= model.k; ++j) text += ",w" + std::to_string(j);
    text += "\n";
    for (const auto& p : predictions) {
        double probability = 0.0;
        for (std::size_t c = 0; c < p.probabilities.size(); ++c)
            probability = std::max(probability, p.probabilities[c]);
        text += p.label + "," + detail::format_double(probability) + "," +
                std::to_string(p.z) + "," + detail::format_double(p.b);
        if (args.emit_memberships)
            for (double w : p.memberships) text += "," + detail::format_double(w);
        text += "\n";
    }
    write_text_file(args.out, text);
    double write_ms = timer.stop();

    json inputs = {{"model", input_entry(args.model)}, {"data", input_entry(args.data)}};
    if (!args.schema.empty()) inputs["schema"] = input_entry(args.schema);
    json manifest = {
        {"command", "predict"},
        {"version", kToolVersion},
        {"config",
         {{"emit_memberships", args.emit_memberships}, {"k", model.k},
          {"mode", manipulation_mode_to_int(model.mode)}}},
        {"inputs", inputs},
        {"outputs", {args.out}},
        {"timings_ms", {{"load", load_ms}, {"predict", predict_ms}, {"write", write_ms}}},
    };
    write_manifest(args.out + ".manifest.json", manifest);

    out << "predicted " << predictions.size() << " rows -> " << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string data;
    std::string label_column;
    std::string predictions;
    std::string out;
    std::string csv;
};

std::string rate_cell(const std::optional<double>& rate) {
    return rate ? format_percent(*rate) : "n/a";
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
    PhaseTimer timer;
    timer.start();
    Table truth_table = read_table(args.data);
    auto label_col = truth_table.column(args.label_column);
    if (!label_col)
        throw DataError("'" + args.data + "' has no column '" + args.label_column + "'");
    Table pred_table = read_table(args.predictions);
    auto pred_col = pred_table.column("predicted");
    if (!pred_col)
        throw DataError("'" + args.predictions + "' has no column 'predicted'");

    std::vector<std::string> truth;
    truth.reserve(truth_table.rows.size());
    for (const auto& row : truth_table.rows) truth.push_back(row[*label_col]);
    std::vector<std::string> predicted;
    predicted.reserve(pred_table.rows.size());
    for (const auto& row : pred_table.rows) predicted.push_back(row[*pred_col]);

    std::set<std::string> class_set(truth.begin(), truth.end());
    class_set.insert(predicted.begin(), predicted.end());
    std::vector<std::string> classes(class_set.begin(), class_set.end());
    double load_ms = timer.stop();

    timer.start();
    EvaluationReport report = evaluate(predicted, truth, classes);
    double evaluate_ms = timer.stop();

    timer.start();
    std::vector<std::vector<std::string>> aligned;
    std::vector<std::string> header = {"Class"};
    std::vector<std::string> tp_row = {"TP rate (%)"};
    std::vector<std::string> fp_row = {"FP rate (%)"};
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
        header.push_back(report.classes[c]);
        tp_row.push_back(rate_cell(report.tpr[c]));
        fp_row.push_back(rate_cell(report.fpr[c]));
    }
    header.push_back("Average");
    tp_row.push_back(format_percent(report.weighted_tpr));
    fp_row.push_back(format_percent(report.weighted_fpr));
    aligned.push_back(std::move(header));
    aligned.push_back(std::move(tp_row));
    aligned.push_back(std::move(fp_row));
    std::string text = render_aligned(aligned);
    text += "Overall accuracy (%): " + format_percent(report.accuracy) + "\n";
    write_text_file(args.out, text);

    std::string delimited = "class,support,tp_rate,fp_rate\n";
    for (std::size_t c = 0; c < report.classes.size(); ++c)
        delimited += report.classes[c] + "," + std::to_string(report.support[c]) + "," +
                     rate_cell(report.tpr[c]) + "," + rate_cell(report.fpr[c]) + "\n";
    delimited += "Average," + std::to_string(report.total) + "," +
                 format_percent(report.weighted_tpr) + "," +
                 format_percent(report.weighted_fpr) + "\n";
    if (!args.csv.empty()) write_text_file(args.csv, delimited);
    double write_ms = timer.stop();

    json manifest = {
        {"command", "evaluate"},
        {"version", kToolVersion},
        {"config", {{"label_column", args.label_column}}},
        {"inputs",
         {{"data", input_entry(args.data)},
          {"predictions", input_entry(args.predictions)}}},
        {"outputs",
         args.csv.empty() ? json::array({args.out}) : json::array({args.out, args.csv})},
        {"timings_ms", {{"load", load_ms}, {"evaluate", evaluate_ms}, {"write", write_ms}}},
    };
    write_manifest(args.out + ".manifest.json", manifest);

    out << text;
    return kExitOk;
}

} // namespace

std::vector<std::size_t> parse_cluster_counts(const std::string& text) {
    std::vector<std::size_t> counts;
    for (const auto& token : detail::split(text, ',')) {
        std::string item(detail::trim(token));
        if (item.empty()) throw ConfigError("empty entry in cluster-count set '" + text + "'");
        auto dots = item.find("..");
        if (dots == std::string::npos) {
            auto value = detail::parse_uint(item);
            if (!value)
                throw ConfigError("cluster count '" + item + "' is not a non-negative integer");
            counts.push_back(static_cast<std::size_t>(*value));
            continue;
        }
        auto lo = detail::parse_uint(std::string(detail::trim(item.substr(0, dots))));
        auto hi = detail::parse_uint(std::string(detail::trim(item.substr(dots + 2))));
        if (!lo || !hi) throw ConfigError("malformed cluster-count range '" + item + "'");
        if (*hi < *lo) throw ConfigError("cluster-count range '" + item + "' is reversed");
        for (auto k = *lo; k <= *hi; ++k) counts.push_back(static_cast<std::size_t>(k));
    }
    if (counts.empty()) throw ConfigError("cluster-count set '" + text + "' is empty");
    return counts;
}

std::map<std::string, double> parse_fractions(const std::string& text) {
    std::map<std::string, double> fractions;
    if (detail::trim(text).empty()) return fractions;
    for (const auto& token : detail::split(text, ',')) {
        std::string item(detail::trim(token));
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("fraction entry '" + item + "' is not name=value");
        std::string name(detail::trim(item.substr(0, eq)));
        auto value = detail::parse_double(std::string(detail::trim(item.substr(eq + 1))));
        if (!value) throw ConfigError("fraction for '" + name + "' is not a number");
        if (*value < 0.0 || *value > 1.0)
            throw ConfigError("fraction for '" + name + "' must be in [0, 1], got " +
                              std::string(detail::trim(item.substr(eq + 1))));
        if (!fractions.emplace(name, *value).second)
            throw ConfigError("duplicate fraction for group '" + name + "'");
    }
    return fractions;
}

std::string format_percent(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", rate * 100.0);
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for digesting");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return hex16(detail::fnv1a64(buffer.str()));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cluster-feature classification pipeline", kToolName};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "stratified group sampling of a data file");
    sample->add_option("--data", sample_args.data, "input data file")->required();
    sample->add_option("--out", sample_args.out, "output data file")->required();
    sample->add_option("--fractions", sample_args.fractions,
                       "per-group keep fractions, e.g. neptune=0.05,smurf=0.05");
    sample->add_option("--group-column", sample_args.group_column,
                       "column holding the group tag");
    sample->add_option("--seed", sample_args.seed, "sampling seed");

    ClusterArgs cluster_args;
    auto* cluster = app.add_subcommand("cluster", "run fuzzy clustering only");
    cluster->add_option("--schema", cluster_args.schema, "schema file")->required();
    cluster->add_option("--data", cluster_args.data, "labeled data file")->required();
    cluster->add_option("--label-column", cluster_args.label_column,
                        "label column (defaults to the schema's)");
    cluster->add_option("--K", cluster_args.k_spec, "cluster count")->required();
    cluster->add_option("--alpha", cluster_args.alpha, "fuzzy degree");
    cluster->add_option("--tol", cluster_args.tolerance, "convergence tolerance");
    cluster->add_option("--max-iter", cluster_args.max_iterations, "iteration cap");
    cluster->add_option("--bins", cluster_args.bins, "info-gain discretization bins");
    cluster->add_option("--seed", cluster_args.seed, "clustering seed");
    cluster->add_option("--out", cluster_args.out, "output directory")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a classifier over candidate cluster counts");
    train->add_option("--schema", train_args.schema, "schema file")->required();
    train->add_option("--data", train_args.data, "labeled training data")->required();
    train->add_option("--label-column", train_args.label_column,
                      "label column (defaults to the schema's)");
    train->add_option("--K", train_args.k_spec, "candidate cluster counts, e.g. 2..8 or 2,4,6");
    train->add_option("--T", train_args.mode, "cluster-feature mode: 1 basic, 2 all, 3 selected");
    train->add_option("--q", train_args.folds, "cross-validation folds");
    train->add_option("--alpha", train_args.alpha, "fuzzy degree");
    train->add_option("--tol", train_args.tolerance, "convergence tolerance");
    train->add_option("--max-iter", train_args.max_iterations, "iteration cap");
    train->add_option("--bins", train_args.bins, "info-gain discretization bins");
    train->add_option("--seed", train_args.seed, "master seed");
    train->add_option("--strata-column", train_args.strata_column,
                      "column with fold-stratification tags");
    train->add_flag("--refit-per-fold", train_args.refit_per_fold,
                    "re-cluster inside every scoring fold");
    train->add_option("--threads", train_args.threads,
                      "candidate worker threads (default from CFC_THREADS)");
    train->add_option("--ga-population", train_args.ga_population, "GA population size");
    train->add_option("--ga-generations", train_args.ga_generations, "GA generation count");
    train->add_option("--ga-crossover", train_args.ga_crossover, "GA crossover probability");
    train->add_option("--ga-mutation", train_args.ga_mutation, "GA mutation probability");
    train->add_option("--model", train_args.model, "output model file")->required();
    train->add_option("--out", train_args.out, "candidate report file (delimited)");

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "classify unlabeled rows with a trained model");
    predict->add_option("--model", predict_args.model, "model file")->required();
    predict->add_option("--data", predict_args.data, "input data file")->required();
    predict->add_option("--schema", predict_args.schema,
                        "optional schema file to cross-check against the model");
    predict->add_flag("--emit-memberships", predict_args.emit_memberships,
                      "append per-cluster membership columns");
    predict->add_option("--out", predict_args.out, "predictions file")->required();

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against labeled data");
    evaluate->add_option("--data", evaluate_args.data, "labeled data file")->required();
    evaluate->add_option("--label-column", evaluate_args.label_column, "truth label column")
        ->required();
    evaluate->add_option("--predictions", evaluate_args.predictions, "predictions file")
        ->required();
    evaluate->add_option("--out", evaluate_args.out, "aligned report file")->required();
    evaluate->add_option("--csv", evaluate_args.csv, "delimited report file");

    try {
        train_args.threads = default_thread_count();
        std::vector<const char*> argv;
        argv.push_back(kToolName);
        for (const auto& arg : args) argv.push_back(arg.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());

        if (sample->parsed()) return cmd_sample(sample_args, out);
        if (cluster->parsed()) return cmd_cluster(cluster_args, out);
        if (train->parsed()) return cmd_train(train_args, out);
        if (predict->parsed()) return cmd_predict(predict_args, out);
        return cmd_evaluate(evaluate_args, out);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace cfc::cli
