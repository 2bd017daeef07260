#include "cli.hpp"

#include "tdesign/io.hpp"
#include "tdesign/scan.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "tdesign");
  std::ostringstream out, err;
  const int code = tdesign::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tdesign_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ConstructThenVerifyReznick) {
  const std::string f = path("r.json");
  EXPECT_EQ(run({"construct", "reznick_11pt", "--out", f}).code, 0);
  const Result v = run({"verify", f, "--t", "3", "--oracle", "all"});
  EXPECT_EQ(v.code, 0) << v.out << v.err;
  EXPECT_NE(v.out.find("PASS"), std::string::npos);
  EXPECT_EQ(run({"verify", f, "--t", "4"}).code, 1);
  // t recorded in the file is the default.
  EXPECT_EQ(run({"verify", f}).code, 0);
}

TEST_F(Cli, SolveBelowJumpFails) {
  const Result r = run({"solve", "--t", "2", "--d", "3", "--n", "5", "--mode", "equal_norm", "--restarts", "5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("solve:"), std::string::npos);  // progress goes to stderr
}

TEST_F(Cli, SolveWritesDesignWithMeta) {
  const std::string f = path("s.json");
  const Result r = run({"--json", "solve", "--t", "2", "--d", "2", "--n", "3", "--restarts", "3", "--out", f});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.at("is_design").get<bool>());
  const tdesign::DesignFile file = tdesign::load_design(f);
  EXPECT_EQ(file.config.size(), 3);
  EXPECT_EQ(file.meta.at("converged"), "zero_found");
  EXPECT_TRUE(file.meta.contains("f_value"));
  EXPECT_TRUE(file.meta.contains("iterations"));
  EXPECT_TRUE(file.meta.contains("seed"));
}

TEST_F(Cli, ConstructAllNamesToStdout) {
  for (const char* name : {"equally_spaced_lines", "mercedes_benz", "twelve_point_design", "three_mubs_R4",
                           "reznick_11pt", "new_11pt_d5", "stroud_design", "kempner_24pt", "kempner_24pt_weighted"}) {
    const Result r = run({"construct", name});
    ASSERT_EQ(r.code, 0) << name << r.err;
    EXPECT_NO_THROW(tdesign::parse_design_json(r.out)) << name;
  }
  EXPECT_EQ(run({"construct", "stroud_design", "--d", "6", "--sign", "-1"}).code, 0);
  EXPECT_EQ(run({"construct", "twelve_point_design", "--theta", "0.1,0.2,0.3,0.4"}).code, 0);
}

TEST_F(Cli, ConstructZ3Orbit) {
  const std::string f = path("z.json");
  ASSERT_EQ(run({"construct", "z3_orbit", "--out", f}).code, 0);
  EXPECT_EQ(run({"verify", f, "--oracle", "all"}).code, 0);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"construct", "nonsense"}).code, 2);
  EXPECT_EQ(run({"construct", "stroud_design", "--d", "7"}).code, 2);
  EXPECT_EQ(run({"construct", "twelve_point_design", "--theta", "1,2"}).code, 2);
  EXPECT_EQ(run({"solve", "--t", "2", "--d", "3"}).code, 2);
  EXPECT_EQ(run({"solve", "--t", "2", "--d", "3", "--n", "6", "--restarts", "0"}).code, 2);
  EXPECT_EQ(run({"verify", path("missing.json"), "--t", "2"}).code, 2);
  std::ofstream(path("bad.json")) << "{not json";
  EXPECT_EQ(run({"verify", path("bad.json"), "--t", "2"}).code, 2);
  EXPECT_EQ(run({"--gradient-tolerance", "-1", "solve", "--t", "1", "--d", "2", "--n", "2"}).code, 2);
}

TEST_F(Cli, CubatureOracleNeedsUnitVectors) {
  const std::string f = path("r.json");
  run({"construct", "reznick_11pt", "--out", f});
  EXPECT_EQ(run({"verify", f, "--oracle", "cubature"}).code, 2);
  const Result all = run({"--json", "verify", f, "--oracle", "all"});
  EXPECT_EQ(all.code, 0);
  EXPECT_EQ(nlohmann::json::parse(all.out).at("skipped").at(0), "cubature");
}

TEST_F(Cli, AnalyzeAndCompare) {
  const std::string m = path("m.json"), tw = path("tw.json"), k = path("k.json");
  run({"construct", "three_mubs_R4", "--out", m});
  run({"construct", "twelve_point_design", "--theta", "0,1.5707963267948966,1.5707963267948966,1.5707963267948966",
       "--out", tw});
  run({"construct", "kempner_24pt", "--out", k});
  EXPECT_EQ(run({"compare", m, tw, "--fingerprint", "3"}).code, 0);
  EXPECT_EQ(run({"compare", m, k}).code, 1);

  const Result a = run({"--json", "analyze", m, "--angles", "--incidence", "0.25", "--match-family", "--fingerprint", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j.at("angles").size(), 2u);
  EXPECT_EQ(j.at("angles").at(1).at("multiplicity"), 48);
  EXPECT_EQ(j.at("incidence").at("counts").at(0), 8);
  EXPECT_EQ(j.at("match_family").at("theta").size(), 4u);

  const Result plain = run({"analyze", k});
  EXPECT_EQ(plain.code, 0);
  EXPECT_NE(plain.out.find("squared angles"), std::string::npos);
  EXPECT_NE(plain.out.find("norms"), std::string::npos);
  EXPECT_EQ(run({"analyze", k, "--match-family"}).code, 1);
}

TEST_F(Cli, ScanWritesCsvAndResumes) {
  const std::string f = path("scan.csv");
  const Result r = run({"--restarts", "5", "--json", "scan", "--t", "2", "--d", "2", "--mode", "equal_norm", "--n-from",
                        "2", "--n-to", "4", "--out", f});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("jump"), 3);
  const tdesign::ScanTable t = tdesign::load_scan(f);
  EXPECT_EQ(t.records.size(), 3u);
  EXPECT_EQ(t.meta.restarts, 5);
  const Result again = run({"--restarts", "5", "scan", "--t", "2", "--d", "2", "--n-from", "2", "--n-to", "5",
                            "--out", f, "--resume"});
  EXPECT_EQ(again.code, 0);
  EXPECT_EQ(tdesign::load_scan(f).records.size(), 4u);
  EXPECT_EQ(tdesign::load_scan(f).records[0].wall_seconds, t.records[0].wall_seconds);
  const Result b = run({"--restarts", "5", "scan", "--t", "2", "--d", "2", "--n-from", "1", "--n-to", "8", "--bisect"});
  EXPECT_EQ(b.code, 0);
  EXPECT_NE(b.out.find("jump: 3"), std::string::npos);
}

TEST_F(Cli, ConfigFileAndEnvironment) {
  const std::string cfg = path("opts.ini"), f = path("s.json");
  std::ofstream(cfg) << "restarts=2\nseed=40\n";
  Result r = run({"--config", cfg, "--json", "solve", "--t", "2", "--d", "2", "--n", "3", "--out", f});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto seed = nlohmann::json::parse(r.out).at("seed").get<int>();
  EXPECT_TRUE(seed == 40 || seed == 41);

  // Flags override file values.
  r = run({"--config", cfg, "--seed", "7", "--json", "solve", "--t", "2", "--d", "2", "--n", "3"});
  const auto s2 = nlohmann::json::parse(r.out).at("seed").get<int>();
  EXPECT_TRUE(s2 == 7 || s2 == 8);

  ::setenv("TDESIGN_CONFIG", cfg.c_str(), 1);
  r = run({"--json", "solve", "--t", "2", "--d", "2", "--n", "3"});
  ::unsetenv("TDESIGN_CONFIG");
  const auto s3 = nlohmann::json::parse(r.out).at("seed").get<int>();
  EXPECT_TRUE(s3 == 40 || s3 == 41);

  std::ofstream(cfg) << "restarts=0\n";
  EXPECT_EQ(run({"--config", cfg, "solve", "--t", "2", "--d", "2", "--n", "3"}).code, 2);
}

TEST_F(Cli, Help) {
  const Result r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("construct"), std::string::npos);
}
