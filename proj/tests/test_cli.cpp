#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const fs::path out = fs::temp_directory_path() / ("kicksim_cli_" + std::to_string(::getpid()) + ".txt");
  const std::string cmd = env + " " KICKSIM_BIN " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove(out);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("kicksim_test_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, RunWritesOutputs) {
  const auto out = dir / "out";
  const auto r = run("run --config " KICKSIM_CONFIGS "/two_slit.cfg --out " + out.string());
  ASSERT_EQ(r.code, 0);
  for (const char* f : {"patterns.csv", "report.json", "samples.csv", "histogram.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_FALSE(fs::exists(out / ".kicksim.lock"));
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report["schema_version"], 1);
}

TEST_F(Cli, ByteIdenticalReruns) {
  const std::string cfg = KICKSIM_CONFIGS "/two_slit.cfg";
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir / "a").string(), "KICKSIM_THREADS=1").code, 0);
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir / "b").string() + " --threads 4").code, 0);
  for (const char* f : {"patterns.csv", "report.json", "samples.csv", "histogram.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir / "c").string() + " --seed 99").code, 0);
  EXPECT_NE(slurp(dir / "a" / "samples.csv"), slurp(dir / "c" / "samples.csv"));
}

TEST_F(Cli, AllShippedConfigsRun) {
  for (const auto& e : fs::directory_iterator(KICKSIM_CONFIGS)) {
    const auto out = dir / e.path().stem();
    EXPECT_EQ(run("run --config " + e.path().string() + " --out " + out.string()).code, 0) << e.path();
  }
}

TEST_F(Cli, MalformedConfigExitsTwoWithoutOutput) {
  const auto out = dir / "bad";
  for (const std::string text : {"colour = red\n", "d = x\n", "sigma = 1\n", "d = 1\nd = 1\n"}) {
    const auto cfg = write_config("bad.cfg", text + "output_dir = " + out.string() + "\n");
    EXPECT_EQ(run("run --config " + cfg.string()).code, 2) << text;
    EXPECT_FALSE(fs::exists(out)) << text;
  }
  EXPECT_EQ(run("run --config " + (dir / "missing.cfg").string()).code, 2);
}

TEST_F(Cli, NumericalGuardExitsThreeWithoutOutput) {
  const auto out = dir / "guard";
  const auto cfg = write_config("guard.cfg", "sigma = 0.25\noutput_dir = " + out.string() + "\n");
  EXPECT_EQ(run("run --config " + cfg.string()).code, 3);
  EXPECT_FALSE(fs::exists(out));
  const auto cfg2 = write_config("near.cfg", "t = 0.1\noutput_dir = " + out.string() + "\n");
  EXPECT_EQ(run("run --config " + cfg2.string()).code, 3);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(Cli, LockedOutputDirectory) {
  const auto out = dir / "locked";
  fs::create_directories(out);
  std::ofstream(out / ".kicksim.lock") << "";
  EXPECT_EQ(run("run --config " KICKSIM_CONFIGS "/three_slit.cfg --out " + out.string()).code, 1);
  EXPECT_FALSE(fs::exists(out / "report.json"));
}

TEST_F(Cli, Spectrum) {
  const auto r = run("spectrum 3 1 --folded --json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["kicks"][2]["h_over_d"], "-1/3");
  EXPECT_EQ(run("spectrum 1").code, 2);
  EXPECT_EQ(run("spectrum 0").code, 2);
  EXPECT_EQ(run("spectrum 4 -1").code, 2);
  EXPECT_NE(run("spectrum 5").out.find("4/5"), std::string::npos);
}

TEST_F(Cli, VerifyVerdict) {
  const auto r = run("verify spectrum --json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["suite"], "spectrum");
  EXPECT_TRUE(j["pass"].get<bool>());
  ASSERT_FALSE(j["checks"].empty());
  for (const auto& c : j["checks"])
    for (const char* k : {"name", "value", "threshold", "pass"}) EXPECT_TRUE(c.contains(k)) << k;
}

TEST_F(Cli, VerifyUnknownSuite) { EXPECT_EQ(run("verify nonsense").code, 2); }

TEST_F(Cli, VerifyWideSlitsFail) {
  // sigma = d/4: the slits overlap and the kick form loses its fidelity.
  const auto r = run("verify equivalence --json --sigma-over-d 0.25");
  EXPECT_EQ(r.code, 4);
  EXPECT_FALSE(nlohmann::json::parse(r.out)["pass"].get<bool>());
}

TEST_F(Cli, DefaultsIsLoadable) {
  const auto r = run("defaults");
  ASSERT_EQ(r.code, 0);
  const auto cfg = write_config("defaults.cfg", r.out + "output_dir = " + (dir / "d").string() + "\n");
  // output_dir appears twice (default and override), which the parser rejects.
  EXPECT_EQ(run("run --config " + cfg.string()).code, 2);
  const auto cfg2 = write_config("defaults2.cfg", r.out);
  EXPECT_EQ(run("run --config " + cfg2.string() + " --out " + (dir / "d").string()).code, 0);
}
