#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "cfc/cli.hpp"
#include "cfc/error.hpp"
#include "support/fixtures.hpp"

using namespace cfc;

namespace {

struct RunOutcome {
    int code = 0;
    std::string out;
    std::string err;
};

RunOutcome run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::filesystem::path cli_dir() {
    auto dir = fixtures::temp_dir() / "cli";
    std::filesystem::create_directories(dir);
    return dir;
}

const char* kSchemaJson = R"({
  "label": "class",
  "features": [{"name": "x", "kind": "continuous"}]
})";

/// Two tight, fully separable 1-D blobs of 20 points each.
std::string blob_csv() {
    std::string text = "x,class\n";
    for (int i = 0; i < 20; ++i) {
        text += "0." + std::to_string(100 + i) + ",c0\n";
        text += "0." + std::to_string(900 - i) + ",c1\n";
    }
    return text;
}

std::filesystem::path write_fixture(const std::filesystem::path& dir, const std::string& name,
                                    const std::string& content) {
    auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

TEST_CASE("cluster-count specs parse ranges and lists") {
    CHECK(cli::parse_cluster_counts("2..8") ==
          std::vector<std::size_t>{2, 3, 4, 5, 6, 7, 8});
    CHECK(cli::parse_cluster_counts("2,4,6") == std::vector<std::size_t>{2, 4, 6});
    CHECK(cli::parse_cluster_counts("2,5..7") == std::vector<std::size_t>{2, 5, 6, 7});
    CHECK(cli::parse_cluster_counts(" 3 ") == std::vector<std::size_t>{3});

    CHECK_THROWS_AS(cli::parse_cluster_counts(""), ConfigError);
    CHECK_THROWS_AS(cli::parse_cluster_counts("a"), ConfigError);
    CHECK_THROWS_AS(cli::parse_cluster_counts("5..3"), ConfigError);
    CHECK_THROWS_AS(cli::parse_cluster_counts("2,,3"), ConfigError);
    CHECK_THROWS_AS(cli::parse_cluster_counts("2..x"), ConfigError);
}

TEST_CASE("fraction specs parse name=value pairs") {
    CHECK(cli::parse_fractions("").empty());
    auto fractions = cli::parse_fractions("neptune=0.05, smurf=0.5,normal=1");
    CHECK(fractions.size() == 3);
    CHECK(fractions.at("neptune") == doctest::Approx(0.05));
    CHECK(fractions.at("smurf") == doctest::Approx(0.5));
    CHECK(fractions.at("normal") == doctest::Approx(1.0));

    CHECK_THROWS_AS(cli::parse_fractions("a=1.5"), ConfigError);
    CHECK_THROWS_AS(cli::parse_fractions("a=-0.1"), ConfigError);
    CHECK_THROWS_AS(cli::parse_fractions("a=x"), ConfigError);
    CHECK_THROWS_AS(cli::parse_fractions("=0.5"), ConfigError);
    CHECK_THROWS_AS(cli::parse_fractions("a"), ConfigError);
    CHECK_THROWS_AS(cli::parse_fractions("a=0.5,a=0.2"), ConfigError);
}

TEST_CASE("rates format as two-decimal percentages") {
    CHECK(cli::format_percent(0.971) == "97.10");
    CHECK(cli::format_percent(1.0) == "100.00");
    CHECK(cli::format_percent(0.0) == "0.00");
    CHECK(cli::format_percent(2.0 / 3.0) == "66.67");
}

TEST_CASE("train, predict, and evaluate round trip through files") {
    auto dir = cli_dir() / "pipeline";
    std::filesystem::create_directories(dir);
    auto schema = write_fixture(dir, "schema.json", kSchemaJson);
    auto data = write_fixture(dir, "train.csv", blob_csv());
    auto model = dir / "model.cfc";
    auto candidates = dir / "candidates.csv";

    auto train = run_cli({"train", "--schema", schema.string(), "--data", data.string(),
                          "--K", "2", "--q", "5", "--seed", "11", "--model", model.string(),
                          "--out", candidates.string()});
    CAPTURE(train.err);
    REQUIRE(train.code == cli::kExitOk);
    CHECK(train.out.find("selected k* = 2") != std::string::npos);
    CHECK(train.out.find("CV accuracy") != std::string::npos);
    CHECK(std::filesystem::exists(model));
    CHECK(slurp(candidates) == "k,cv_accuracy,features,selected\n2,1,3,1\n");

    auto manifest = slurp(model.string() + ".manifest.json");
    CHECK(manifest.find("\"command\": \"train\"") != std::string::npos);
    CHECK(manifest.find("\"digest\"") != std::string::npos);
    CHECK(manifest.find("\"seed\": 11") != std::string::npos);

    auto preds = dir / "preds.csv";
    auto predict = run_cli({"predict", "--model", model.string(), "--data", data.string(),
                            "--out", preds.string(), "--emit-memberships"});
    CAPTURE(predict.err);
    REQUIRE(predict.code == cli::kExitOk);
    auto pred_lines = split_lines(slurp(preds));
    REQUIRE(pred_lines.size() == 41);
    CHECK(pred_lines[0] == "predicted,probability,z,b,w1,w2");
    for (std::size_t i = 1; i < pred_lines.size(); ++i) {
        auto fields = [&] {
            std::vector<std::string> f;
            std::istringstream in(pred_lines[i]);
            std::string cell;
            while (std::getline(in, cell, ',')) f.push_back(cell);
            return f;
        }();
        REQUIRE(fields.size() == 6);
        double w1 = std::stod(fields[4]);
        double w2 = std::stod(fields[5]);
        CHECK(w1 + w2 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::stod(fields[3]) == doctest::Approx(std::max(w1, w2)));
    }

    auto report = dir / "report.txt";
    auto csv = dir / "report.csv";
    auto evaluate = run_cli({"evaluate", "--data", data.string(), "--label-column", "class",
                             "--predictions", preds.string(), "--out", report.string(),
                             "--csv", csv.string()});
    CAPTURE(evaluate.err);
    REQUIRE(evaluate.code == cli::kExitOk);
    auto text = slurp(report);
    CHECK(text.find("TP rate (%)") != std::string::npos);
    CHECK(text.find("Average") != std::string::npos);
    CHECK(text.find("Overall accuracy (%): 100.00") != std::string::npos);
    CHECK(evaluate.out == text);
    CHECK(slurp(csv).find("Average,40,100.00,0.00") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    auto dir = cli_dir() / "determinism";
    std::filesystem::create_directories(dir);
    auto schema = write_fixture(dir, "schema.json", kSchemaJson);
    auto data = write_fixture(dir, "train.csv", blob_csv());

    auto run_pipeline = [&](const std::string& tag) {
        auto model = dir / ("model_" + tag + ".cfc");
        auto preds = dir / ("preds_" + tag + ".csv");
        auto report = dir / ("report_" + tag + ".txt");
        REQUIRE(run_cli({"train", "--schema", schema.string(), "--data", data.string(),
                         "--K", "2,3", "--q", "5", "--seed", "7", "--model", model.string()})
                    .code == cli::kExitOk);
        REQUIRE(run_cli({"predict", "--model", model.string(), "--data", data.string(),
                         "--out", preds.string()})
                    .code == cli::kExitOk);
        REQUIRE(run_cli({"evaluate", "--data", data.string(), "--label-column", "class",
                         "--predictions", preds.string(), "--out", report.string()})
                    .code == cli::kExitOk);
        return std::tuple{slurp(model), slurp(preds), slurp(report)};
    };

    CHECK(run_pipeline("one") == run_pipeline("two"));
}

TEST_CASE("evaluate reproduces hand-counted rates") {
    auto dir = cli_dir() / "evaluate";
    std::filesystem::create_directories(dir);
    auto truth = write_fixture(dir, "truth.csv", "class\na\na\na\nb\nb\nc\n");
    auto preds = write_fixture(dir, "preds.csv",
                               "predicted\na\na\nb\nb\nb\na\n");
    auto report = dir / "report.txt";
    auto csv = dir / "report.csv";

    auto outcome = run_cli({"evaluate", "--data", truth.string(), "--label-column", "class",
                            "--predictions", preds.string(), "--out", report.string(),
                            "--csv", csv.string()});
    CAPTURE(outcome.err);
    REQUIRE(outcome.code == cli::kExitOk);

    auto lines = split_lines(slurp(csv));
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "class,support,tp_rate,fp_rate");
    CHECK(lines[1] == "a,3,66.67,33.33");
    CHECK(lines[2] == "b,2,100.00,25.00");
    CHECK(lines[3] == "c,1,0.00,0.00");
    CHECK(lines[4] == "Average,6,66.67,25.00");

    auto text = slurp(report);
    CHECK(text.find("Overall accuracy (%): 66.67") != std::string::npos);
}

TEST_CASE("evaluate marks undefined rates as n/a") {
    auto dir = cli_dir() / "evaluate_na";
    std::filesystem::create_directories(dir);
    auto truth = write_fixture(dir, "truth.csv", "class\na\na\n");
    auto preds = write_fixture(dir, "preds.csv", "predicted\na\nghost\n");
    auto report = dir / "report.txt";
    auto csv = dir / "report.csv";

    REQUIRE(run_cli({"evaluate", "--data", truth.string(), "--label-column", "class",
                     "--predictions", preds.string(), "--out", report.string(),
                     "--csv", csv.string()})
                .code == cli::kExitOk);
    auto lines = split_lines(slurp(csv));
    REQUIRE(lines.size() == 4);
    CHECK(lines[1] == "a,2,50.00,n/a");
    CHECK(lines[2] == "ghost,0,n/a,50.00");
}

TEST_CASE("sample without fractions copies the parsed table") {
    auto dir = cli_dir() / "sample_copy";
    std::filesystem::create_directories(dir);
    auto data = write_fixture(dir, "data.csv", blob_csv());
    auto out = dir / "copy.csv";

    auto outcome = run_cli({"sample", "--data", data.string(), "--out", out.string()});
    REQUIRE(outcome.code == cli::kExitOk);
    CHECK(slurp(out) == blob_csv());
    CHECK(outcome.out.find("kept 40 of 40 rows") != std::string::npos);
}

TEST_CASE("sample keeps rounded per-group counts") {
    auto dir = cli_dir() / "sample_groups";
    std::filesystem::create_directories(dir);
    auto data = write_fixture(dir, "data.csv", blob_csv());
    auto out = dir / "sampled.csv";

    auto outcome = run_cli({"sample", "--data", data.string(), "--out", out.string(),
                            "--fractions", "c0=0.5,c1=0.25", "--group-column", "class",
                            "--seed", "4"});
    REQUIRE(outcome.code == cli::kExitOk);
    auto lines = split_lines(slurp(out));
    std::size_t c0 = 0;
    std::size_t c1 = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].find(",c0") != std::string::npos) ++c0;
        if (lines[i].find(",c1") != std::string::npos) ++c1;
    }
    CHECK(c0 == 10);
    CHECK(c1 == 5);
}

TEST_CASE("invalid fractions fail before any output is written") {
    auto dir = cli_dir() / "sample_invalid";
    std::filesystem::create_directories(dir);
    auto data = write_fixture(dir, "data.csv", blob_csv());
    auto out = dir / "never.csv";

    auto outcome = run_cli({"sample", "--data", data.string(), "--out", out.string(),
                            "--fractions", "c0=1.5", "--group-column", "class"});
    CHECK(outcome.code == cli::kExitUsage);
    CHECK(outcome.err.find("must be in [0, 1]") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(out));

    outcome = run_cli({"sample", "--data", data.string(), "--out", out.string(),
                       "--fractions", "c0=0.5"});
    CHECK(outcome.code == cli::kExitUsage);
    CHECK(outcome.err.find("--group-column") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("cluster emits memberships and centroids") {
    auto dir = cli_dir() / "cluster";
    std::filesystem::create_directories(dir);
    auto schema = write_fixture(dir, "schema.json", kSchemaJson);
    auto data = write_fixture(dir, "data.csv", blob_csv());
    auto out = dir / "run";

    auto outcome = run_cli({"cluster", "--schema", schema.string(), "--data", data.string(),
                            "--K", "2", "--seed", "5", "--out", out.string()});
    CAPTURE(outcome.err);
    REQUIRE(outcome.code == cli::kExitOk);

    auto lines = split_lines(slurp(out / "memberships.csv"));
    REQUIRE(lines.size() == 41);
    CHECK(lines[0] == "w1,w2,z,b");
    auto centroids = slurp(out / "centroids.txt");
    CHECK(centroids.find("cluster 1") != std::string::npos);
    CHECK(centroids.find("cluster 2") != std::string::npos);
    CHECK(centroids.find("  x: ") != std::string::npos);
    CHECK(std::filesystem::exists(out / "manifest.json"));

    CHECK(run_cli({"cluster", "--schema", schema.string(), "--data", data.string(),
                   "--K", "2,3", "--seed", "5", "--out", out.string()})
              .code == cli::kExitUsage);
}

TEST_CASE("exit codes distinguish usage, data, and success") {
    auto dir = cli_dir() / "exit_codes";
    std::filesystem::create_directories(dir);
    auto schema = write_fixture(dir, "schema.json", kSchemaJson);
    auto data = write_fixture(dir, "train.csv", blob_csv());

    CHECK(run_cli({"--help"}).code == cli::kExitOk);
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"bogus"}).code == cli::kExitUsage);
    CHECK(run_cli({"train", "--schema", schema.string(), "--data", data.string(),
                   "--model", (dir / "m.cfc").string(), "--unknown-flag"})
              .code == cli::kExitUsage);
    CHECK(run_cli({"train", "--schema", schema.string(), "--data", data.string(), "--K", "0",
                   "--model", (dir / "m.cfc").string()})
              .code == cli::kExitUsage);
    CHECK(run_cli({"train", "--schema", schema.string(), "--data",
                   (dir / "absent.csv").string(), "--model", (dir / "m.cfc").string()})
              .code == cli::kExitData);
    CHECK(run_cli({"predict", "--model", (dir / "absent.cfc").string(), "--data",
                   data.string(), "--out", (dir / "p.csv").string()})
              .code == cli::kExitData);

    auto bad_schema = write_fixture(dir, "bad.json", "{not json");
    CHECK(run_cli({"train", "--schema", bad_schema.string(), "--data", data.string(),
                   "--model", (dir / "m.cfc").string()})
              .code == cli::kExitData);
}

TEST_CASE("predict cross-checks the schema fingerprint") {
    auto dir = cli_dir() / "fingerprint";
    std::filesystem::create_directories(dir);
    auto schema = write_fixture(dir, "schema.json", kSchemaJson);
    auto data = write_fixture(dir, "train.csv", blob_csv());
    auto model = dir / "model.cfc";
    REQUIRE(run_cli({"train", "--schema", schema.string(), "--data", data.string(), "--K", "2",
                     "--q", "5", "--model", model.string()})
                .code == cli::kExitOk);

    auto preds = dir / "preds.csv";
    CHECK(run_cli({"predict", "--model", model.string(), "--data", data.string(), "--schema",
                   schema.string(), "--out", preds.string()})
              .code == cli::kExitOk);

    auto other = write_fixture(dir, "other.json", R"({
      "label": "class",
      "features": [{"name": "renamed", "kind": "continuous"}]
    })");
    auto mismatch = run_cli({"predict", "--model", model.string(), "--data", data.string(),
                             "--schema", other.string(), "--out", preds.string()});
    CHECK(mismatch.code == cli::kExitData);
    CHECK(mismatch.err.find("fingerprint mismatch") != std::string::npos);
    CHECK(mismatch.err.find("trained with") != std::string::npos);
}

TEST_CASE("CFC_THREADS seeds the default worker count") {
    auto dir = cli_dir() / "threads_env";
    std::filesystem::create_directories(dir);
    auto schema = write_fixture(dir, "schema.json", kSchemaJson);
    auto data = write_fixture(dir, "train.csv", blob_csv());
    auto model = dir / "model.cfc";

    setenv("CFC_THREADS", "2", 1);
    auto outcome = run_cli({"train", "--schema", schema.string(), "--data", data.string(),
                            "--K", "2", "--q", "5", "--model", model.string()});
    unsetenv("CFC_THREADS");
    REQUIRE(outcome.code == cli::kExitOk);
    CHECK(slurp(model.string() + ".manifest.json").find("\"threads\": 2") !=
          std::string::npos);

    setenv("CFC_THREADS", "banana", 1);
    auto invalid = run_cli({"train", "--schema", schema.string(), "--data", data.string(),
                            "--K", "2", "--q", "5", "--model", model.string()});
    unsetenv("CFC_THREADS");
    CHECK(invalid.code == cli::kExitUsage);
}

TEST_CASE("bundled connection data trains and scores through the pipeline") {
    auto data_dir = std::filesystem::path(CFC_REPO_DATA_DIR);
    auto schema = data_dir / "kdd99_schema.json";
    auto data = data_dir / "sample_connections.csv";
    REQUIRE(std::filesystem::exists(schema));
    REQUIRE(std::filesystem::exists(data));

    auto dir = cli_dir() / "bundled";
    std::filesystem::create_directories(dir);
    auto sampled = dir / "sampled.csv";
    auto model = dir / "connections.model";
    auto preds = dir / "predictions.csv";
    auto report = dir / "report.txt";

    auto sample = run_cli({"sample", "--data", data.string(), "--out", sampled.string(),
                           "--group-column", "label", "--fractions", "normal=0.5",
                           "--seed", "7"});
    REQUIRE(sample.code == cli::kExitOk);
    CHECK(sample.out.find("kept 39 of 48 rows") != std::string::npos);

    auto train = run_cli({"train", "--schema", schema.string(), "--data", sampled.string(),
                          "--model", model.string(), "--K", "2,3", "--q", "5",
                          "--seed", "7"});
    REQUIRE(train.code == cli::kExitOk);
    REQUIRE(run_cli({"predict", "--model", model.string(), "--data", data.string(),
                     "--out", preds.string()})
                .code == cli::kExitOk);
    auto evaluate = run_cli({"evaluate", "--data", data.string(), "--label-column", "label",
                             "--predictions", preds.string(), "--out", report.string()});
    REQUIRE(evaluate.code == cli::kExitOk);
    CHECK(evaluate.out.find("Overall accuracy (%)") != std::string::npos);
    CHECK(slurp(report).find("TP rate (%)") != std::string::npos);
}
