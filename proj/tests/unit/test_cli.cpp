#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "grsm/cli.hpp"
#include "grsm/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "grsm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = grsm::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("grsm_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& body) {
  const auto p = dir / "run.yaml";
  std::ofstream(p) << body;
  return p.string();
}

const char* kSmoke =
    "system: {modulation: 16, mapping_mode: epn}\n"
    "channel: {model: rayleigh_iid, alpha_realizations: 300}\n"
    "detector: {compensation: single}\n"
    "sweep: {snr_db: [0, 5], trials_per_point: 1500, target_errors: 0}\n";

}  // namespace

TEST(Cli, PoolDesignGoldenSixteen) {
  const auto r = run({"pool-design", "-M", "16", "--na", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, grsm::read_text_file(std::string(GRSM_GOLDEN_DIR) + "/pool_design_16_4.csv"));
}

TEST(Cli, PoolDesignGoldenFour) {
  const auto dir = scratch("pd4");
  const auto out = (dir / "t.csv").string();
  EXPECT_EQ(run({"pool-design", "-M", "4", "--na", "6", "--out", out}).code, 0);
  EXPECT_EQ(grsm::read_text_file(out),
            grsm::read_text_file(std::string(GRSM_GOLDEN_DIR) + "/pool_design_4_6.csv"));
}

TEST(Cli, PoolDesignInfeasible) {
  const auto r = run({"pool-design", "-M", "16", "--na", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("7 nonzero patterns"), std::string::npos);
  EXPECT_EQ(run({"pool-design", "-M", "8", "--na", "4"}).code, 1);
}

TEST(Cli, OverlapTable) {
  const auto r = run({"overlap-table", "-M", "16", "--sigma2", "0.1"});
  ASSERT_EQ(r.code, 0);
  const auto rows = [&] {
    std::vector<std::vector<std::string>> v;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "pool_index,delta_theta,euclidean_distance,overlap_closed_form,overlap_quadrature");
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::istringstream ls(line);
      std::string x;
      while (std::getline(ls, x, ',')) f.push_back(x);
      v.push_back(f);
    }
    return v;
  }();
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& f : rows) {
    EXPECT_NEAR(std::stod(f[1]), M_PI, 1e-12);
    EXPECT_NEAR(std::stod(f[4]) / std::stod(f[3]), 1.0, 1e-9);
  }
  EXPECT_NEAR(std::stod(rows[0][2]), 4 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(run({"overlap-table", "-M", "16", "--sigma2", "0"}).code, 1);
}

TEST(Cli, PnVariance) {
  const auto r = run({"pn-variance", "--sigma2", "0.1", "--max-branches", "4", "--trials", "1000000"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,analytic,monte_carlo,relative_gap");
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ls(line);
    std::string f[4];
    for (auto& x : f) std::getline(ls, x, ',');
    if (n == 1) EXPECT_DOUBLE_EQ(std::stod(f[1]), 0.2);
    EXPECT_LT(std::stod(f[3]), 0.02);
  }
  EXPECT_EQ(n, 4);
  const auto z = run({"pn-variance", "--sigma2", "0", "--trials", "100"});
  EXPECT_NE(z.out.find("1,0,0,0\n"), std::string::npos);
  EXPECT_EQ(run({"pn-variance", "--max-branches", "0"}).code, 1);
}

TEST(Cli, BerSweepWritesArtifacts) {
  const auto dir = scratch("sweep");
  const auto cfg = write_config(dir, kSmoke);
  const auto out = (dir / "out").string();
  const auto r = run({"ber-sweep", "--config", cfg, "--out", out, "--plot", "--threads", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = grsm::parse_csv(grsm::read_text_file(out + "/ber.csv"));
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_TRUE(fs::exists(out + "/manifest.json"));
  EXPECT_TRUE(fs::exists(out + "/ber.svg"));
}

TEST(Cli, BerSweepThreadsByteIdentical) {
  const auto dir = scratch("threads");
  const auto cfg = write_config(dir, kSmoke);
  ASSERT_EQ(run({"ber-sweep", "--config", cfg, "--out", (dir / "a").string(), "--threads", "1"}).code, 0);
  ASSERT_EQ(run({"ber-sweep", "--config", cfg, "--out", (dir / "b").string(), "--threads", "8"}).code, 0);
  EXPECT_EQ(grsm::read_text_file((dir / "a/ber.csv").string()),
            grsm::read_text_file((dir / "b/ber.csv").string()));
}

TEST(Cli, BerSweepOverridesAndEnvDir) {
  const auto dir = scratch("env");
  const auto cfg = write_config(dir, kSmoke);
  const auto target = (dir / "from_env").string();
  ::setenv(grsm::cli::kOutputDirEnv, target.c_str(), 1);
  const auto r = run({"ber-sweep", "--config", cfg, "--trials-override", "300", "--seed", "9"});
  ::unsetenv(grsm::cli::kOutputDirEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = grsm::parse_csv(grsm::read_text_file(target + "/ber.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].trials, 300u);
}

TEST(Cli, BerSweepConfigErrors) {
  const auto dir = scratch("bad");
  const auto cfg = write_config(dir, "system: {modulation: 16, mapping_mode: epn}\nchannel: {n_txx: 3}\n");
  const auto r = run({"ber-sweep", "--config", cfg, "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("channel.n_txx"), std::string::npos);
  EXPECT_EQ(run({"ber-sweep", "--config", (dir / "missing.yaml").string()}).code, 1);
  EXPECT_EQ(run({"ber-sweep"}).code, 1);
  EXPECT_EQ(run({"no-such-command"}).code, 1);
}

TEST(Cli, BerSweepRuntimeErrorExitsTwo) {
  const auto dir = scratch("rt");
  const auto cfg = write_config(dir, kSmoke);
  const auto blocker = dir / "file";
  std::ofstream(blocker) << "x";
  const auto r = run({"ber-sweep", "--config", cfg, "--out", (blocker / "sub").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, HelpListsEveryConfigKey) {
  const auto r = run({"ber-sweep", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* key : {"system.modulation", "channel.angular_spread_deg", "phase_noise.correlation",
                          "detector.prior_active", "sweep.channel_redraw_period"}) {
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
  }
  EXPECT_NE(r.out.find("7.5"), std::string::npos);
}
