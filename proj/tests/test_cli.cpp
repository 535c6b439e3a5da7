#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "djinn/ensemble.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path scratch = fs::temp_directory_path() / "djinn_cli_test";

int run(const std::string &args, std::string *stdout_text = nullptr) {
  const fs::path log = scratch / "stdout.txt";
  fs::create_directories(scratch);
  const std::string cmd = std::string(DJINN_CLI) + " " + args + " > " + log.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (stdout_text) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *stdout_text = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string quick = " --preset iris --epochs 5 --trees 3 --permutations 2";

}  // namespace

TEST(Cli, TrainWritesArtifactsReproducibly) {
  const fs::path a = scratch / "train_a", b = scratch / "train_b";
  fs::remove_all(a);
  fs::remove_all(b);
  ASSERT_EQ(run("train" + quick + " --out " + a.string()), 0);
  ASSERT_EQ(run("train" + quick + " --out " + b.string()), 0);
  for (const char *f : {"report.json", "ensemble.json", "cost_history_djinn.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  EXPECT_TRUE(report["reports"][0]["metrics"].contains("accuracy"));
}

TEST(Cli, ExplicitDataFlags) {
  const fs::path out = scratch / "explicit";
  fs::remove_all(out);
  const std::string args = std::string("train --data ") + DJINN_DATA_DIR +
                           "/iris.csv --target species --task classification --trees 2 "
                           "--max-depth 3 --epochs 3 --lr 0.006 --batch 6 --seed 0 "
                           "--permutations 1 --out " + out.string();
  EXPECT_EQ(run(args), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST(Cli, MissingFileLeavesNoOutput) {
  const fs::path out = scratch / "missing";
  fs::remove_all(out);
  EXPECT_EQ(run("train --data /nonexistent.csv --target y --task regression --out " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, InvalidFlagsExitOne) {
  const fs::path out = scratch / "invalid";
  fs::remove_all(out);
  EXPECT_EQ(run("train --preset iris --lr -1 --out " + out.string()), 1);
  EXPECT_EQ(run("train --preset iris --batch 100000 --out " + out.string()), 1);
  EXPECT_EQ(run("train --preset nope --out " + out.string()), 1);
  EXPECT_EQ(run("train --preset iris --scheme bogus --out " + out.string()), 1);
  EXPECT_EQ(run("sweep-trees --preset iris --out " + out.string()), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, CompareEmitsAllSchemesWithPvalues) {
  const fs::path out = scratch / "compare";
  fs::remove_all(out);
  ASSERT_EQ(run("compare" + quick + " --out " + out.string()), 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  ASSERT_EQ(report["reports"].size(), 3u);
  EXPECT_TRUE(report["reports"][1]["pvalues"].contains("djinn"));
  EXPECT_TRUE(report["reports"][2]["pvalues"].contains("djinn"));
  for (const char *s : {"djinn", "random_dense", "random_sparse"})
    EXPECT_TRUE(fs::exists(out / (std::string("cost_history_") + s + ".csv")));
}

TEST(Cli, SweepAndBayesopt) {
  const fs::path out = scratch / "sweep";
  fs::remove_all(out);
  ASSERT_EQ(run("sweep-trees --preset diabetes --epochs 2 --permutations 2 --counts 1,2 --out " +
                out.string()),
            0);
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_NE(csv.find("\n1,1,"), std::string::npos);

  const fs::path bo = scratch / "bayesopt";
  fs::remove_all(bo);
  ASSERT_EQ(run("bayesopt" + quick + " --budget 4 --out " + bo.string()), 0);
  const auto report = nlohmann::json::parse(slurp(bo / "report.json"));
  EXPECT_EQ(report["networks_trained"].get<int>(), 8);
  EXPECT_TRUE(fs::exists(bo / "trials.csv"));
  EXPECT_TRUE(fs::exists(bo / "best_architecture.json"));
}

TEST(Cli, ExportDotDrawsEveryNonzeroWeight) {
  const fs::path out = scratch / "dot";
  fs::remove_all(out);
  ASSERT_EQ(run("train" + quick + " --out " + out.string()), 0);
  std::string dot;
  ASSERT_EQ(run("export-dot --model " + (out / "ensemble.json").string(), &dot), 0);
  const auto ens = djinn::ensemble_from_json(nlohmann::json::parse(slurp(out / "ensemble.json")));
  long nonzero = 0;
  for (const auto &w : ens.members[0].weights) nonzero += (w.array() != 0.0).count();
  long edges = 0;
  for (auto pos = dot.find("->"); pos != std::string::npos; pos = dot.find("->", pos + 2)) ++edges;
  EXPECT_EQ(edges, nonzero);
  EXPECT_EQ(run("export-dot --model /nonexistent.json"), 1);
}

TEST(Cli, LogicDemoWritesDotFiles) {
  const fs::path out = scratch / "logic";
  fs::remove_all(out);
  std::string text;
  ASSERT_EQ(run("logic-demo --epochs 50 --out " + out.string(), &text), 0);
  EXPECT_NE(text.find("xor"), std::string::npos);
  for (const char *g : {"if", "or", "xor"}) {
    const std::string tree = slurp(out / (std::string(g) + "_tree.dot"));
    EXPECT_EQ(tree.rfind("digraph", 0), 0u);
    EXPECT_TRUE(fs::exists(out / (std::string(g) + "_network.dot")));
  }
}
