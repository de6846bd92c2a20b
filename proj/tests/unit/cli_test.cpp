#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gae/cli.hpp"
#include "gae/model_io.hpp"
#include "gae/core_model.hpp"
#include "gae/recommend.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gae");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = gae::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "gae_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run({"synth", "--matches", "3000", "--seed", "7", "--out", path("data.jsonl"), "--truth", path("truth.model")}).code, 0);
    ASSERT_EQ(run({"train", "--data", path("data.jsonl"), "--epochs", "3", "--out", path("m.model")}).code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static std::string path(const std::string& name) { return (dir_ / name).string(); }
  static fs::path dir_;
};

fs::path CliTest::dir_;

}  // namespace

TEST_F(CliTest, SynthIsDeterministic) {
  ASSERT_EQ(run({"synth", "--matches", "500", "--seed", "7", "--out", path("a.jsonl")}).code, 0);
  ASSERT_EQ(run({"synth", "--matches", "500", "--seed", "7", "--out", path("b.jsonl")}).code, 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  EXPECT_FALSE(slurp(path("a.jsonl")).empty());
}

TEST_F(CliTest, TrainReproducesModelFileByteForByte) {
  auto r = run({"train", "--data", path("data.jsonl"), "--epochs", "3", "--out", path("again.model")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("again.model")), slurp(path("m.model")));
  EXPECT_NE(r.out.find("epoch"), std::string::npos);
}

TEST_F(CliTest, TrainWithValidationReportsAuc) {
  ASSERT_EQ(run({"synth", "--matches", "400", "--seed", "8", "--out", path("valid.jsonl")}).code, 0);
  auto r = run({"train", "--data", path("data.jsonl"), "--valid", path("valid.jsonl"), "--epochs", "2", "--dim", "4",
                "--format", "csv", "--out", path("v.model")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "epoch,loss,penalized_loss,validation_auc");
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("1,", 0), 0u);
  EXPECT_NE(line.back(), ',');
}

TEST_F(CliTest, PredictMatchesInProcessValue) {
  auto r = run({"predict", "--model", path("m.model"), "--red", "avatar_00,avatar_01", "--blue", "avatar_02", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = gae::load_embedding_model(path("m.model"));
  const auto& reg = model.registry;
  const double p = gae::win_probability(model, {reg.at("avatar_00"), reg.at("avatar_01")}, {reg.at("avatar_02")});
  EXPECT_EQ(r.out, fmt::format("p_red_win\n{}\n", p));
}

TEST_F(CliTest, PairIsSymmetric) {
  auto ab = run({"pair", "--model", path("m.model"), "--a", "avatar_03", "--b", "avatar_11"});
  auto ba = run({"pair", "--model", path("m.model"), "--a", "avatar_11", "--b", "avatar_03"});
  ASSERT_EQ(ab.code, 0);
  EXPECT_EQ(ab.out, ba.out);
  EXPECT_EQ(run({"pair", "--model", path("m.model"), "--a", "avatar_03", "--b", "avatar_03"}).code, 2);
}

TEST_F(CliTest, SimilarAndRecommendCsv) {
  auto s = run({"similar", "--model", path("m.model"), "--avatar", "avatar_05", "--top-k", "4", "--format", "csv"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(std::count(s.out.begin(), s.out.end(), '\n'), 5);
  EXPECT_EQ(s.out.find("avatar_05,"), std::string::npos);

  auto r = run({"recommend", "--model", path("m.model"), "--ally", "avatar_00,avatar_01", "--enemy", "avatar_02",
                "--familiar", "avatar_07,avatar_08", "--top-k", "3", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = gae::load_embedding_model(path("m.model"));
  const auto& reg = model.registry;
  auto expected = gae::recommend_pick(
      model, gae::DraftState{{reg.at("avatar_00"), reg.at("avatar_01")}, {reg.at("avatar_02")}, {}, {}}, 3);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  for (std::size_t k = 0; k < 3; ++k) {
    std::getline(lines, line);
    EXPECT_EQ(line.rfind(fmt::format("{},{},", k + 1, model.registry.name(expected[k].avatar)), 0), 0u) << line;
  }
  auto table = run({"recommend", "--model", path("m.model"), "--ally", "avatar_00", "--familiar", "avatar_07"});
  EXPECT_NE(table.out.find("best familiar pick: avatar_07"), std::string::npos) << table.out;
}

TEST_F(CliTest, GradcheckPasses) {
  auto r = run({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("within tolerance"), std::string::npos);
}

TEST_F(CliTest, EvalWritesTenRowsPerKindAndIsDeterministic) {
  {
    std::ofstream grid(path("grid.json"));
    grid << R"({"gae":[{"epochs":2,"dim":4}],"lr":{"epochs":2},"fm":[{"epochs":2,"factors":4}]})";
  }
  auto r = run({"eval", "--data", path("data.jsonl"), "--grid", path("grid.json"), "--folds", "10", "--seed", "3",
                "--report", path("bench1.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("p_value"), std::string::npos);
  const auto csv = slurp(path("bench1.csv"));
  for (const char* kind : {"gae,", "lr,", "fm,"}) {
    std::size_t rows = 0;
    std::istringstream lines(csv);
    std::string line;
    while (std::getline(lines, line)) rows += line.rfind(kind, 0) == 0;
    EXPECT_EQ(rows, 10u) << kind;
  }
  ASSERT_EQ(run({"eval", "--data", path("data.jsonl"), "--grid", path("grid.json"), "--folds", "10", "--seed", "3",
                 "--report", path("bench2.csv")}).code, 0);
  EXPECT_EQ(slurp(path("bench2.csv")), csv);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"train", "--data", path("data.jsonl")}).code, 1);
  EXPECT_EQ(run({"predict", "--model", path("m.model"), "--red", "ghost", "--blue", "avatar_01"}).code, 2);
  {
    std::ofstream bad(path("bad.jsonl"));
    bad << "{oops\n";
  }
  auto bad = run({"train", "--data", path("bad.jsonl"), "--out", path("x.model")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos);
  ASSERT_EQ(run({"synth", "--matches", "50", "--seed", "9", "--out", path("tiny.jsonl")}).code, 0);
  EXPECT_EQ(run({"eval", "--data", path("tiny.jsonl"), "--folds", "51", "--model-kind", "lr"}).code, 2);
  EXPECT_EQ(run({"train", "--data", path("data.jsonl"), "--lr", "1e300", "--init-scale", "1", "--epochs", "3",
                 "--out", path("boom.model")}).code, 3);
  EXPECT_EQ(run({"gradcheck", "--tolerance", "1e-30"}).code, 3);
}

TEST_F(CliTest, HelpDocumentsDefaults) {
  auto r = run({"train", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--dim"), std::string::npos);
  EXPECT_NE(r.out.find("[8]"), std::string::npos) << r.out;
  auto e = run({"eval", "--help"});
  EXPECT_NE(e.out.find("--folds"), std::string::npos);
  EXPECT_NE(e.out.find("[10]"), std::string::npos);
}
