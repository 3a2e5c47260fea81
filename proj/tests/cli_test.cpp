#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "econlab/cli/app.hpp"
#include "econlab/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "econlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = econlab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("econlab_cli_" + name);
  fs::remove_all(dir);
  return dir.string();
}

const std::string kSource = ECONLAB_SOURCE_DIR;

}  // namespace

TEST(Cli, RunSimDefaults) {
  const auto dir = fresh_dir("sim");
  const auto r = run({"--data-dir", dir, "run-sim"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = json::parse(r.out);
  EXPECT_EQ(summary["seed"], 1);
  EXPECT_EQ(summary["horizon"], 12);
  const auto result = json::parse(econlab::util::read_file(summary["result"].get<std::string>()));
  EXPECT_EQ(result["metrics"]["total_consumption"].size(), 12u);
}

TEST(Cli, RunSimConfigFileAndOverrides) {
  const auto dir = fresh_dir("sim_cfg");
  fs::create_directories(dir);
  econlab::util::write_file_atomic(dir + "/c.json", R"({"levers":{"income_tax_rate":0.2},"horizon":5,"seed":9})");
  auto r = run({"--data-dir", dir, "run-sim", "--config", dir + "/c.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["horizon"], 5);
  EXPECT_EQ(json::parse(r.out)["seed"], 9);
  r = run({"--data-dir", dir, "run-sim", "--config", dir + "/c.json", "--seed", "2", "--horizon", "3", "--out", dir + "/r.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(econlab::util::read_file(dir + "/r.json"))["metrics"]["avg_income"].size(), 3u);

  econlab::util::write_file_atomic(dir + "/bad.json", R"({"levers":{"carbon_tariff":1}})");
  r = run({"--data-dir", dir, "run-sim", "--config", dir + "/bad.json"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(json::parse(r.err)["error"]["message"].get<std::string>().find("carbon_tariff"), std::string::npos);
}

TEST(Cli, IndexReportsBadLine) {
  const auto dir = fresh_dir("index");
  fs::create_directories(dir);
  econlab::util::write_file_atomic(
      dir + "/c.jsonl",
      R"({"doc_id":"a","title":"t","venue":"v","year":2020,"abstract":"x","introduction":"y"})"
      "\n{broken\n");
  const auto r = run({"--data-dir", dir, "index", "--corpus", dir + "/c.jsonl"});
  EXPECT_NE(r.code, 0);
  const auto err = json::parse(r.err);
  EXPECT_NE(err["error"]["message"].get<std::string>().find("line 2"), std::string::npos) << r.err;

  const auto ok = run({"--data-dir", dir, "index", "--corpus", kSource + "/data/sample_corpus.jsonl"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(json::parse(ok.out)["documents"], 12);
  EXPECT_TRUE(fs::exists(dir + "/index/embeddings.f32"));
}

TEST(Cli, WorkflowWithBundledScript) {
  const auto dir = fresh_dir("workflow");
  const auto r = run({"--data-dir", dir, "workflow", "--corpus", kSource + "/data/sample_corpus.jsonl", "--replies",
                      kSource + "/data/replies/innovation_support.txt", "--intuition",
                      "does government support for innovation increase household consumption", "--auto-confirm"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = json::parse(r.out);
  EXPECT_TRUE(s["verdict"].is_string());
  EXPECT_TRUE(fs::exists(s["session_dir"].get<std::string>() + "/session.json"));
  EXPECT_TRUE(fs::exists(s["session_dir"].get<std::string>() + "/memory.jsonl"));
  EXPECT_TRUE(fs::exists(s["session_dir"].get<std::string>() + "/manifests.jsonl"));
}

TEST(Cli, WorkflowWithoutConfirmationStopsAtIdea) {
  const auto dir = fresh_dir("workflow_gate");
  const auto r = run({"--data-dir", dir, "workflow", "--corpus", kSource + "/data/sample_corpus.jsonl", "--intuition",
                      "does innovation support raise household income"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = json::parse(r.out);
  EXPECT_EQ(s["stage"], "idea");
  EXPECT_EQ(s["idea"]["outcome"], "hypothesis");
  EXPECT_TRUE(s["verdict"].is_null());
}

TEST(Cli, WorkflowNeedsAnIndex) {
  const auto r = run({"--data-dir", fresh_dir("noindex"), "workflow", "--intuition", "x"});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(json::parse(r.err)["error"]["category"], "conflict");
}

TEST(Cli, UsageErrorsAreJson) {
  auto r = run({"bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"]["category"], "usage");
  r = run({"run-sim", "--horizon", "0"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, DataDirFromEnvironment) {
  const auto dir = fresh_dir("env");
  setenv("ECON_DATA_DIR", dir.c_str(), 1);
  const auto r = run({"run-sim", "--horizon", "2"});
  unsetenv("ECON_DATA_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["result"].get<std::string>().rfind(dir, 0), 0u);
}
