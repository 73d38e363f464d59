#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "shapkit/cli.hpp"
#include "shapkit/table_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "shapkit");
  std::ostringstream out, err;
  const int status = shapkit::run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("shapkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    ASSERT_EQ(cli({"gen-fixtures", "--output", (dir_ / "fx").string()}).status, 0);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string fx(const std::string& name) const { return (dir_ / "fx" / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ExplainTabularGame) {
  const auto r = cli({"explain", "--model", fx("sickness_game.json")});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["attributions"], json({1.0, 1.0}));
  EXPECT_EQ(j["base_value"], 0.0);
  EXPECT_EQ(j["method"], "exact");
  EXPECT_EQ(j["evaluations_used"], 4);
}

TEST_F(CliTest, ExplainMaxGameThreeWays) {
  for (const char* method : {"exact", "kernel", "max"}) {
    const auto r = cli({"explain", "--model", fx("max_game.json"), "--data", fx("max_game_data.csv"),
                        "--method", method});
    ASSERT_EQ(r.status, 0) << method << r.err;
    const auto phi = json::parse(r.out)["attributions"].get<std::vector<double>>();
    EXPECT_NEAR(phi[0], 3.0, 1e-9) << method;
    EXPECT_NEAR(phi[1], 2.0, 1e-9) << method;
    EXPECT_NEAR(phi[2], 0.0, 1e-9) << method;
  }
}

TEST_F(CliTest, CsvFormatAndOutputFile) {
  const std::string out = (dir_ / "e.csv").string();
  const auto r = cli({"explain", "--model", fx("dense_tree.json"), "--data",
                      fx("dense_tree_data.csv"), "--method", "sampling", "--permutations", "50",
                      "--format", "csv", "--output", out});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto text = shapkit::read_text_file(out);
  EXPECT_EQ(text.rfind("method,base_value,prediction,evaluations_used,seed,phi_0", 0), 0u);
}

TEST_F(CliTest, CompareReportsPerMethodErrors) {
  const auto r = cli({"compare", "--model", fx("dense_tree.json"), "--data",
                      fx("dense_tree_data.csv"), "--methods", "exact,kernel,linear"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["results"].size(), 3u);
  EXPECT_EQ(j["results"][2]["error"]["code"], "config_error");
  ASSERT_EQ(j["deviations"].size(), 1u);
  EXPECT_LT(j["deviations"][0]["max_abs"].get<double>(), 1e-9);

  const auto bad = cli({"compare", "--model", fx("dense_tree.json"), "--data",
                        fx("dense_tree_data.csv"), "--methods", "linear,deep"});
  EXPECT_EQ(bad.status, 2);
}

TEST_F(CliTest, ErrorsAreSingleJsonLines) {
  auto r = cli({"explain", "--model", fx("missing.json")});
  EXPECT_EQ(r.status, 4);
  EXPECT_EQ(json::parse(r.err)["error"], "io_error");

  r = cli({"explain", "--model", fx("dense_tree.json"), "--data", fx("dense_tree_data.csv"),
           "--method", "kernel", "--budget", "3"});
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "config_error");

  r = cli({"explain", "--model", fx("sparse_tree.json"), "--data", fx("sparse_tree_data.csv")});
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "capacity_error");

  r = cli({"explain", "--model", fx("sickness_game.json"), "--method", "bogus"});
  EXPECT_EQ(r.status, 2);

  r = cli({"explain", "--model", fx("dense_tree.json"), "--data", fx("max_game_data.csv")});
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "shape_error");

  r = cli({"frobnicate"});
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.err.find('\n'), r.err.size() - 1);
}

TEST_F(CliTest, LowOrderNeedsBudgetAboveThreshold) {
  auto r = cli({"explain", "--model", fx("dense_tree.json"), "--data", fx("dense_tree_data.csv"),
                "--method", "low-order"});
  EXPECT_EQ(r.status, 0) << r.err;
  r = cli({"explain", "--model", fx("dense_tree.json"), "--data", fx("dense_tree_data.csv"),
           "--method", "low-order", "--threshold", "5"});
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "budget_required");
}

TEST_F(CliTest, DeepOnMaskingNetwork) {
  const auto r = cli({"explain", "--model", fx("masking_mlp.json"), "--data", fx("masking_data.csv"),
                      "--background", fx("masking_background.csv"), "--method", "deep",
                      "--instance", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  double s = j["base_value"].get<double>();
  for (double v : j["attributions"]) s += v;
  EXPECT_NEAR(s, j["prediction"].get<double>(), 1e-9);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"explain", "--model", fx("dense_tree.json"), "--data", fx("dense_tree_data.csv"),
       "--method", "sampling", "--seed", "4", "--permutations", "64"},
      {"explain", "--model", fx("dense_tree.json"), "--data", fx("dense_tree_data.csv"),
       "--method", "kernel", "--budget", "64", "--lasso", "auto", "--seed", "4"},
  };
  for (const auto& c : commands) {
    const auto a = cli(c), b = cli(c);
    ASSERT_EQ(a.status, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
  const auto g = cli({"gen-fixtures", "--output", (dir_ / "fx2").string()});
  EXPECT_EQ(shapkit::read_text_file(fx("manifest.json")),
            shapkit::read_text_file(dir_ / "fx2" / "manifest.json"));
}

TEST_F(CliTest, LinearExampleMatchesExact) {
  shapkit::write_text_file(dir_ / "lin.json", R"({"type":"linear","weights":[2,3],"bias":1})");
  shapkit::write_text_file(dir_ / "x.csv", "a,b\n1,2\n");
  shapkit::write_text_file(dir_ / "bg.csv", "a,b\n1,-1\n-1,1\n");
  std::vector<double> phi[2];
  int k = 0;
  for (const char* method : {"linear", "exact"}) {
    const auto r = cli({"explain", "--model", (dir_ / "lin.json").string(), "--data",
                        (dir_ / "x.csv").string(), "--background", (dir_ / "bg.csv").string(),
                        "--method", method});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["base_value"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["prediction"].get<double>(), 9.0, 1e-12);
    phi[k++] = j["attributions"].get<std::vector<double>>();
  }
  EXPECT_NEAR(phi[0][0], 2.0, 1e-12);
  EXPECT_NEAR(phi[0][1], 6.0, 1e-12);
  EXPECT_NEAR(phi[1][0], phi[0][0], 1e-9);
  EXPECT_NEAR(phi[1][1], phi[0][1], 1e-9);
}

TEST_F(CliTest, CompareDeepAgainstExactOnSmallNet) {
  shapkit::write_text_file(dir_ / "net.json", R"({"type":"mlp","layers":[
    {"weights":[[1,-1],[0.5,2]],"bias":[0,-0.5],"activation":"relu"},
    {"weights":[[1.5,-1]],"bias":[0.2],"activation":"identity"}]})");
  shapkit::write_text_file(dir_ / "d.csv", "a,b\n1.5,0.3\n-1,2\n0.4,-0.8\n2,1\n");
  const auto r = cli({"compare", "--model", (dir_ / "net.json").string(), "--data",
                      (dir_ / "d.csv").string(), "--background-mode", "mean", "--methods",
                      "exact,deep"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["deviations"].size(), 1u);
  EXPECT_GE(j["deviations"][0]["max_abs"].get<double>(), 0.0);
  EXPECT_EQ(j["results"][0]["prediction"], j["results"][1]["prediction"]);
}

TEST_F(CliTest, BenchmarkMaskingBoundaries) {
  const auto out = dir_ / "mask";
  const auto r = cli({"benchmark", "--scenario", "masking", "--output", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto table = shapkit::read_text_file(out / "masking.csv");
  EXPECT_EQ(table.rfind("instance,method,fraction,output_before,output_after,delta_log_odds", 0),
            0u);
  const auto manifest = json::parse(shapkit::read_text_file(out / "manifest.json"));
  EXPECT_EQ(manifest["files"]["masking.csv"], shapkit::sha256_hex(table));
  EXPECT_EQ(cli({"benchmark", "--scenario", "forest", "--output", out.string()}).status, 2);
}
