// End-to-end runs of the command-line tool.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const std::string cli = EVLAB_CLI;
const fs::path configs = EVLAB_CONFIG_DIR;

int run(const std::string& args, const fs::path& log = "/dev/null") {
  const std::string cmd = "'" + cli + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("evlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, SimulateWritesArtifactsAndEchoesOverrides) {
  const auto out = dir / "run";
  ASSERT_EQ(run("simulate --config '" + (configs / "iid_half.cfg").string() + "' --n 500 --reps 200 --seed 9 --out '" +
                out.string() + "' --dump-raw"),
            0);
  const std::string est = slurp(out / "estimates.csv");
  EXPECT_EQ(est.rfind("x2,y2,x1,y1,empirical,std_err,theoretical,abs_dev,dev_in_se\n", 0), 0u);
  EXPECT_EQ(std::count(est.begin(), est.end(), '\n'), 4);
  const std::string manifest = slurp(out / "manifest.cfg");
  EXPECT_NE(manifest.find("n = 500\n"), std::string::npos);
  EXPECT_NE(manifest.find("reps = 200\n"), std::string::npos);
  EXPECT_NE(manifest.find("seed = 9\n"), std::string::npos);
  EXPECT_NE(manifest.find("manifest.version"), std::string::npos);
  const std::string summary = slurp(out / "summary.json");
  EXPECT_NE(summary.find("\"empty_observation_count\""), std::string::npos);
  EXPECT_NE(summary.find("\"base_seed\": 9"), std::string::npos);
  const std::string raw = slurp(out / "raw.csv");
  EXPECT_EQ(std::count(raw.begin(), raw.end(), '\n'), 201);
  const std::string path = slurp(out / "path_r0.csv");
  EXPECT_EQ(std::count(path.begin(), path.end(), '\n'), 500);
}

TEST_F(Cli, ManifestReproducesEstimates) {
  const auto a = dir / "a", b = dir / "b", c = dir / "c";
  ASSERT_EQ(run("simulate --config '" + (configs / "pattern.cfg").string() + "' --reps 300 --out '" + a.string() + "'"),
            0);
  ASSERT_EQ(run("simulate --config '" + (a / "manifest.cfg").string() + "' --out '" + b.string() + "'"), 0);
  EXPECT_EQ(slurp(a / "estimates.csv"), slurp(b / "estimates.csv"));
  ASSERT_EQ(run("simulate --config '" + (configs / "ar1_half.cfg").string() + "' --n 300 --reps 100 --workers 4 --out '" +
                c.string() + "'"),
            0);
  ASSERT_EQ(run("simulate --config '" + (c / "manifest.cfg").string() + "' --workers 1 --out '" + b.string() + "'"), 0);
  EXPECT_EQ(slurp(c / "estimates.csv"), slurp(b / "estimates.csv"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("simulate"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("simulate --config '" + (dir / "missing.cfg").string() + "'"), 2);

  std::ofstream(dir / "bad.cfg") << "n = 100\nreps = 10\nquad = 3, 0, 1, 0\n";
  const auto log = dir / "log.txt";
  EXPECT_EQ(run("simulate --config '" + (dir / "bad.cfg").string() + "' --out '" + dir.string() + "'", log), 2);
  EXPECT_NE(slurp(log).find("quad"), std::string::npos);

  std::ofstream(dir / "embed.cfg") << "n = 64\nreps = 10\ncorrelation.kind = power_decay\ncorrelation.c = 2\n"
                                      "correlation.alpha = 1\nquad = 0, 0, 1, 1\n";
  EXPECT_EQ(run("simulate --config '" + (dir / "embed.cfg").string() + "' --out '" + dir.string() + "'", log), 3);
  EXPECT_NE(slurp(log).find("embedding"), std::string::npos);

  std::ofstream(dir / "ok.cfg") << "n = 100\nreps = 10\n";
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run("simulate --config '" + (dir / "ok.cfg").string() + "' --out '" + (dir / "file").string() + "'"), 4);
}

TEST_F(Cli, LimitGrid) {
  const auto out = dir / "limit.csv";
  ASSERT_EQ(run("limit --pd point_mass:1 --quad 0,0,0,0 --quad 0,1,1,0 --out '" + out.string() + "'"), 0);
  EXPECT_EQ(slurp(out), "x2,y2,x1,y1,value\n0,0,0,0,0.135335283237\n0,1,1,0,0.135335283237\n");

  ASSERT_EQ(run("limit --pd uniform --x2 -1,0 --y2 0 --x1 1,2,3 --y1 0 --out '" + out.string() + "'"), 0);
  const std::string grid = slurp(out);
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 7);

  ASSERT_EQ(run("limit --pd beta:2,2 --out '" + out.string() + "'"), 0);
  EXPECT_EQ(slurp(out), "x2,y2,x1,y1,value\n");

  EXPECT_EQ(run("limit --pd uniform --quad 2,0,1,0"), 2);
  EXPECT_EQ(run("limit --pd gamma:1 --quad 0,0,1,1"), 2);
  EXPECT_EQ(run("limit --pd point_mass:1.5 --quad 0,0,1,1"), 2);
}

TEST_F(Cli, CheckVerdicts) {
  const auto out = dir / "check.csv";
  ASSERT_EQ(run("check --correlation iid --max-n 10000 --out '" + out.string() + "'"), 0);
  const std::string iid = slurp(out);
  EXPECT_NE(iid.find("berman,Satisfied"), std::string::npos);
  EXPECT_NE(iid.find("dprime,Satisfied"), std::string::npos);

  ASSERT_EQ(run("check --correlation log_decay:1 --max-n 10000 --out '" + out.string() + "'"), 0);
  EXPECT_NE(slurp(out).find("berman,Violated"), std::string::npos);

  EXPECT_EQ(run("check --correlation ar1:2"), 2);
  EXPECT_EQ(run("check --correlation ar1:0.5 --p 1"), 2);
}
