#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

using namespace cellseq;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& file) {
  auto dir = fs::temp_directory_path() / "cellseq_test_cli";
  fs::create_directories(dir);
  return dir / file;
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("validate"), std::string::npos);
  EXPECT_EQ(run({"diagnose", "--help"}).code, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"validate"}).code, 2);
  EXPECT_EQ(run({"validate", "no_such_rule"}).code, 2);
  EXPECT_EQ(run({"iterate", "torus2", "--emit", "sideways"}).code, 2);
  EXPECT_EQ(run({"visual", "torus2", "--sample", "random"}).code, 2);
  EXPECT_EQ(run({"visual", "torus2", "--depth", "3", "--sample-level", "4"}).code, 2);
}

TEST(Cli, ValidateBuiltinAndFile) {
  auto r = run({"validate", "pillow"});
  EXPECT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_TRUE(j["ok"].get<bool>());

  auto path = scratch("torus2.json");
  EXPECT_EQ(run({"example", "torus2", "--dump", path.string()}).code, 0);
  EXPECT_EQ(run({"validate", path.string()}).code, 0);
}

TEST(Cli, InvalidRuleExitsOne) {
  auto ex = torus_doubling(2);
  json j = rule_to_json(*ex.rule, &ex.realization);
  const auto& d1 = ex.rule->refined;
  const std::string victim = d1.name(d1.cells_of_dim(1).front());
  j["image"][victim] = "F0";
  auto path = scratch("broken.json");
  {
    std::ofstream out(path);
    out << j.dump(2);
  }
  auto r = run({"validate", path.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find(victim), std::string::npos);
  auto it = run({"iterate", path.string()});
  EXPECT_EQ(it.code, 1);
  EXPECT_NE((it.out + it.err).find(victim), std::string::npos);
}

TEST(Cli, IterateCounts) {
  auto r = run({"iterate", "torus2", "--level", "3"});
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  ASSERT_EQ(j["counts"].size(), 4u);
  EXPECT_EQ(j["counts"][3]["chambers"].get<std::uint64_t>(), 256u);
  EXPECT_EQ(j["counts"][3]["cells"].get<std::uint64_t>(), 1024u);
  auto dot = run({"iterate", "pillow", "--level", "1", "--emit", "adjacency"});
  EXPECT_EQ(dot.code, 0);
  EXPECT_NE(dot.out.find("graph"), std::string::npos);
}

TEST(Cli, VisualWritesCsv) {
  auto csv = scratch("scatter.csv");
  auto r = run({"visual", "torus2", "--depth", "4", "--csv", csv.string()});
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["visual"]["c_meas"].get<double>(), 2.0);
  EXPECT_TRUE(j["visual"]["metric"].get<bool>());
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "i,j,separation,q_eps,rho");
}

TEST(Cli, DiagnoseSuites) {
  for (const char* suite : {"core", "qv", "bqs", "cxc", "qs"}) {
    auto r = run({"diagnose", "torus2", "--suite", suite, "--max-level", "3"});
    EXPECT_EQ(r.code, 0) << suite << r.err;
    EXPECT_NO_THROW((void)json::parse(r.out)) << suite;
  }
}

TEST(Cli, ExportFormats) {
  EXPECT_EQ(run({"export", "torus2", "--what", "rule"}).code, 0);
  auto dot = run({"export", "pillow", "--what", "dot", "--level", "1"});
  EXPECT_EQ(dot.code, 0);
  auto mesh = run({"export", "torus2", "--what", "mesh", "--level", "3"});
  EXPECT_EQ(mesh.code, 0);
  EXPECT_EQ(std::count(mesh.out.begin(), mesh.out.end(), '\n'), 5);
}

TEST(Cli, OutputIsDeterministic) {
  const std::vector<std::vector<std::string>> cmds = {
      {"--seed", "0", "diagnose", "pillow", "--suite", "bqs", "--max-level", "4"},
      {"--seed", "0", "diagnose", "torus2", "--suite", "cxc", "--max-level", "3"},
      {"visual", "pillow", "--depth", "4"},
      {"--jobs", "2", "visual", "pillow", "--depth", "4"},
  };
  for (const auto& c : cmds) {
    auto a = run(c), b = run(c);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
  }
  // Thread count does not change the result.
  EXPECT_EQ(run(cmds[2]).out, run(cmds[3]).out);
}
