#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "climatescope/document.hpp"
#include "support.hpp"

namespace climatescope::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string path(const fs::path& p) { return p.string(); }

TEST(Cli, VersionAndUsage) {
  EXPECT_EQ(cli({"--version"}).code, kSuccess);
  EXPECT_EQ(cli({}).code, kUsage);
  EXPECT_EQ(cli({"bogus"}).code, kUsage);
  EXPECT_EQ(cli({"model", "--matrix"}).code, kUsage);
}

TEST(Cli, IngestReportsParseErrorsAsDataErrors) {
  const auto dir = testing::scratch_dir("cli_bad_csv");
  testing::write_file(dir / "bad.csv", "e,code,2000\nA,X,abc\n");
  const auto r = cli({"ingest", "--input", path(dir / "bad.csv"), "--out", path(dir / "m.json")});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("non-numeric"), std::string::npos);
}

TEST(Cli, ModelUnknownTargetIsUsageError) {
  const auto dir = testing::scratch_dir("cli_unknown_target");
  ASSERT_EQ(cli({"ingest", "--input", path(testing::sample_dir() / "worldbank_sample.csv"),
                 "--missing", "interpolate", "--out", path(dir / "matrix.json")})
                .code,
            kSuccess);
  EXPECT_EQ(cli({"model", "--matrix", path(dir / "matrix.json"), "--target", "NOPE", "--out",
                 path(dir / "metrics.json")})
                .code,
            kUsage);
}

TEST(Cli, HttpBackendWithoutCredentialExitsWithBackendCode) {
  ::unsetenv("CLIMATESCOPE_TEST_ABSENT");
  const auto dir = testing::scratch_dir("cli_http");
  ASSERT_EQ(cli({"ingest", "--input", path(testing::sample_dir() / "worldbank_sample.csv"),
                 "--missing", "interpolate", "--out", path(dir / "matrix.json")})
                .code,
            kSuccess);
  const auto r = cli({"pipeline", "--task", "model emissions", "--data", path(dir / "matrix.json"),
                      "--backend", "http", "--endpoint", "http://127.0.0.1:9/v1/chat",
                      "--credential-env", "CLIMATESCOPE_TEST_ABSENT", "--out",
                      path(dir / "transcript.json")});
  EXPECT_EQ(r.code, kBackendError);
  EXPECT_FALSE(fs::exists(dir / "transcript.json"));
}

TEST(Cli, ReportOnIncompleteBundleNamesTheArtifact) {
  const auto dir = testing::scratch_dir("cli_incomplete_bundle");
  const auto r = cli({"report", "--bundle", path(dir), "--out", path(dir / "report.md")});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("matrix.json"), std::string::npos);
}

TEST(Cli, FullChainWithPipelineRubricAndPlots) {
  const auto dir = testing::scratch_dir("cli_full_chain");
  const auto m = path(dir / "matrix.json");
  const auto sample = testing::sample_dir();
  ASSERT_EQ(cli({"ingest", "--input", path(sample / "worldbank_sample.csv"), "--missing",
                 "interpolate", "--out", m}).code, kSuccess);
  ASSERT_EQ(cli({"stats", "--matrix", m, "--out", path(dir / "stats.csv")}).code, kSuccess);
  ASSERT_EQ(cli({"correlate", "--matrix", m, "--out", path(dir / "correlation.csv")}).code, kSuccess);
  ASSERT_EQ(cli({"discover", "--matrix", m, "--out", path(dir / "order.json"), "--scores",
                 path(dir / "scores.json")}).code, kSuccess);
  ASSERT_EQ(cli({"prune", "--matrix", m, "--order", path(dir / "order.json"), "--out",
                 path(dir / "graph.json"), "--dot", path(dir / "graph.dot")}).code, kSuccess);
  ASSERT_EQ(cli({"model", "--matrix", m, "--target", "SYN.EMISSIONS.IDX", "--method", "tree",
                 "--out", path(dir / "metrics.json")}).code, kSuccess);
  ASSERT_EQ(cli({"pipeline", "--task", "correlate urbanization and clean fuel access", "--data", m,
                 "--evidence", path(sample / "evidence"), "--out", path(dir / "transcript.json")})
                .code,
            kSuccess);
  fs::copy_file(sample / "reviewer_rubric.json", dir / "rubric.json");
  testing::write_file(dir / "task.txt", "correlate urbanization and clean fuel access");
  const auto r = cli({"report", "--bundle", path(dir), "--out", path(dir / "out" / "report.md"),
                      "--plots", path(dir / "out" / "plots")});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto report = testing::read_file(dir / "out" / "report.md");
  EXPECT_NE(report.find("## Rubric"), std::string::npos);
  EXPECT_NE(report.find("| overall (stored) | 6.4 |"), std::string::npos);
  EXPECT_NE(report.find("terminated by final-report"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "plots" / "leaf_variances.gp"));
  EXPECT_EQ(doc::document_kind(testing::read_file(dir / "scores.json")), "score_estimate");
  EXPECT_EQ(testing::read_file(dir / "graph.dot").rfind("digraph causal {", 0), 0u);
}

TEST(Cli, ConfigFileSuppliesOptionDefaults) {
  const auto dir = testing::scratch_dir("cli_config");
  const auto m = path(dir / "matrix.json");
  ASSERT_EQ(cli({"ingest", "--input", path(testing::sample_dir() / "worldbank_sample.csv"),
                 "--missing", "interpolate", "--out", m}).code, kSuccess);
  testing::write_file(dir / "run.toml", "[model]\ntarget = \"SYN.INCOME.IDX\"\nmethod = \"tree\"\n");
  const auto r = cli({"--config", path(dir / "run.toml"), "model", "--matrix", m, "--out",
                      path(dir / "metrics.json")});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto metrics = doc::metrics_from_document(testing::read_file(dir / "metrics.json"));
  EXPECT_EQ(metrics.target, "SYN.INCOME.IDX");
  EXPECT_EQ(metrics.method, stats::ModelKind::kTree);
}

}  // namespace
}  // namespace climatescope::cli
