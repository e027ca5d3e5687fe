#include "commands.hpp"

#include "eals/dataset.hpp"
#include "eals/ingest.hpp"
#include "eals/model.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eals::cli {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("eals_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run_cli(const std::vector<std::string>& args) {
        out_.str({});
        err_.str({});
        return run(args, out_, err_);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    // Synthetic log turned into a 2-core snapshot.
    std::string prepared() {
        EXPECT_EQ(run_cli({"synth", path("raw.tsv"), "--users", "150", "--items", "120", "--interactions", "3000"}),
                  exit_ok);
        EXPECT_EQ(run_cli({"prepare", path("raw.tsv"), path("data.snap"), "--kcore", "2"}), exit_ok);
        return path("data.snap");
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

TEST_F(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run_cli({"--help"}), exit_ok);
    EXPECT_EQ(run_cli({}), exit_usage);
    EXPECT_EQ(run_cli({"frobnicate"}), exit_usage);
    const auto data = prepared();
    EXPECT_EQ(run_cli({"train", data, path("m"), "--learner", "svd"}), exit_usage);
    EXPECT_EQ(run_cli({"train", data, path("m"), "--factors", "abc"}), exit_usage);
}

TEST_F(Cli, MissingInputIsIoError) {
    EXPECT_EQ(run_cli({"prepare", path("nope.tsv"), path("out.snap")}), exit_io);
    EXPECT_EQ(run_cli({"train", path("nope.snap"), path("m")}), exit_io);
}

TEST_F(Cli, MalformedInputIsValidationError) {
    std::ofstream(path("bad.tsv")) << "a\tx\t1\nb\ty\n";
    EXPECT_EQ(run_cli({"prepare", path("bad.tsv"), path("out.snap")}), exit_validation);
    EXPECT_NE(err_.str().find("line 2"), std::string::npos);
}

TEST_F(Cli, PrepareKcoreOneRoundTrips) {
    const RawInteractions raw{{"a", "x", 5}, {"b", "x", 7}, {"a", "y", 6}};
    {
        std::ofstream f(path("raw.tsv"));
        write_interactions(f, raw, TextFormat::tsv);
    }
    ASSERT_EQ(run_cli({"prepare", path("raw.tsv"), path("out.snap"), "--kcore", "1"}), exit_ok);
    std::ifstream in(path("out.snap"));
    const auto snap = read_dataset_snapshot(in);
    const auto direct = build_dataset(raw);
    EXPECT_EQ(snap.nnz(), direct.nnz());
    EXPECT_EQ(snap.num_users(), direct.num_users());
    for (UserIndex u = 0; u < direct.num_users(); ++u) EXPECT_EQ(snap.user_row(u).size(), direct.user_row(u).size());
    EXPECT_TRUE(fs::exists(path("out.snap.manifest.json")));
}

TEST_F(Cli, PrepareEmptyCoreWarns) {
    std::ofstream f(path("raw.tsv"));
    for (int u = 0; u < 20; ++u)
        for (int i = 0; i < 9; ++i) f << "u" << u << "\ti" << (u * 9 + i) << '\t' << i << '\n';
    f.close();
    EXPECT_EQ(run_cli({"prepare", path("raw.tsv"), path("out.snap"), "--kcore", "10"}), exit_validation);
}

TEST_F(Cli, TrainIsReproducibleFromManifest) {
    const auto data = prepared();
    for (const auto* learner : {"eals", "als", "bpr"}) {
        const std::vector<std::string> common{"--learner", learner, "--factors", "4", "--iters", "5", "--epochs", "3"};
        auto a = std::vector<std::string>{"train", data, path("a.model")};
        auto b = std::vector<std::string>{"train", data, path("b.model")};
        a.insert(a.end(), common.begin(), common.end());
        b.insert(b.end(), common.begin(), common.end());
        ASSERT_EQ(run_cli(a), exit_ok) << err_.str();
        ASSERT_EQ(run_cli(b), exit_ok) << err_.str();
        EXPECT_EQ(slurp(path("a.model")), slurp(path("b.model"))) << learner;

        const auto manifest = nlohmann::json::parse(slurp(path("a.model.manifest.json")));
        EXPECT_EQ(manifest["command"], "train");
        EXPECT_EQ(manifest["seed"], 42);
        EXPECT_EQ(manifest["config"]["learner"], learner);
        EXPECT_EQ(manifest["dataset_fingerprint"], file_fingerprint(data));
        EXPECT_FALSE(slurp(path("a.model.trace.jsonl")).empty());
    }
}

TEST_F(Cli, SeedFromEnvironment) {
    const auto data = prepared();
    ::setenv("EALS_SEED", "9", 1);
    ASSERT_EQ(run_cli({"train", data, path("env.model"), "--factors", "3", "--iters", "2"}), exit_ok);
    ::unsetenv("EALS_SEED");
    ASSERT_EQ(run_cli({"train", data, path("flag.model"), "--factors", "3", "--iters", "2", "--seed", "9"}), exit_ok);
    EXPECT_EQ(slurp(path("env.model")), slurp(path("flag.model")));
}

TEST_F(Cli, OfflineEvalOneEventPerUser) {
    const auto data = prepared();
    ASSERT_EQ(run_cli({"train", data, path("m"), "--factors", "4", "--iters", "5"}), exit_ok);
    ASSERT_EQ(run_cli({"eval-offline", path("m"), data, "--report", path("r.jsonl"), "--breakdown", path("b.csv")}),
              exit_ok)
        << err_.str();
    std::ifstream in(data);
    const auto snap = read_dataset_snapshot(in);
    std::ifstream report(path("r.jsonl"));
    std::size_t lines = 0;
    std::string line, last;
    while (std::getline(report, line)) {
        ++lines;
        last = line;
    }
    EXPECT_EQ(lines, snap.num_users() + 1);
    EXPECT_EQ(nlohmann::json::parse(last)["type"], "aggregate");
    EXPECT_EQ(slurp(path("b.csv")).substr(0, 21), "history,count,hr,ndcg");

    // Same manifest, same bytes.
    ASSERT_EQ(run_cli({"eval-offline", path("m"), data, "--report", path("r2.jsonl")}), exit_ok);
    EXPECT_EQ(slurp(path("r.jsonl")), slurp(path("r2.jsonl")));
}

TEST_F(Cli, DimensionMismatchIsValidationError) {
    const auto data = prepared();
    std::ofstream(path("small.tsv")) << "a\tx\t1\na\ty\t2\nb\tx\t3\n";
    ASSERT_EQ(run_cli({"prepare", path("small.tsv"), path("small.snap"), "--kcore", "1"}), exit_ok);
    ASSERT_EQ(run_cli({"train", path("small.snap"), path("m"), "--factors", "2", "--iters", "2"}), exit_ok);
    EXPECT_EQ(run_cli({"eval-offline", path("m"), data}), exit_validation);
}

TEST_F(Cli, OnlineEvalTimeOrderedAndOrderFreeWithoutUpdates) {
    const auto data = prepared();
    ASSERT_EQ(run_cli({"train", data, path("m"), "--factors", "4", "--iters", "5", "--split", "chrono"}), exit_ok);
    ASSERT_EQ(run_cli({"eval-online", path("m"), data, "--report", path("r.jsonl")}), exit_ok) << err_.str();
    std::ifstream report(path("r.jsonl"));
    std::string line;
    std::int64_t prev = INT64_MIN;
    std::size_t events = 0;
    while (std::getline(report, line)) {
        const auto j = nlohmann::json::parse(line);
        if (j.contains("type")) break;
        EXPECT_GE(j["t"].get<std::int64_t>(), prev);
        prev = j["t"].get<std::int64_t>();
        ++events;
    }
    EXPECT_GT(events, 0u);
    EXPECT_EQ(run_cli({"eval-online", path("m"), data, "--online-iters", "0", "--window", "50"}), exit_ok);
    EXPECT_NE(out_.str().find("window_begin"), std::string::npos);
}

TEST_F(Cli, BenchOneRowPerLearnerAndK) {
    ASSERT_EQ(run_cli({"bench", "--factors-list", "2,4", "--synthetic", "60", "50", "600"}), exit_ok) << err_.str();
    std::istringstream csv(out_.str());
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "learner,factors,users,items,nnz,seconds");
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 4u);
}

TEST_F(Cli, ToolBinaryExitCode) {
    const char* tool = std::getenv("EALS_TOOL");
    if (tool == nullptr) GTEST_SKIP() << "EALS_TOOL not set";
    const std::string cmd = std::string(tool) + " train " + path("missing.snap") + " " + path("m") + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    EXPECT_EQ(WEXITSTATUS(status), exit_io);
}

}  // namespace
}  // namespace eals::cli
