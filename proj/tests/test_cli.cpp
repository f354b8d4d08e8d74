#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using std::filesystem::path;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

std::string slurp(const path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

path workdir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto d = std::filesystem::temp_directory_path() / "rosen_cli_tests" / info->name();
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

Run run(const path& dir, const std::string& args) {
  const auto o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = std::string(ROSEN_CLI) + " " + args + " > " + o.string() + " 2> " + e.string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(o), slurp(e)};
}

path write_config(const path& dir, const std::string& model, const std::string& extra = "") {
  const auto p = dir / "c.ini";
  std::ofstream os(p);
  os << "[model]\n" << model << "\n[domain]\nL = 16\ngrading = graded\nM = 48\nrefinement = 4\n"
     << "[simulation]\nn_times = 5\nn = 40\nseed = 5\n[analysis]\npaths = 4\npath_points = 33\nberman_gaps = 3\n" << extra
     << "[output]\ndir = " << (dir / "out").string() << "\n";
  return p;
}

const std::string kConstant = "kind = constant\nh1 = 0.6\nh2 = 0.8\nT = 1\ngamma = 0.99\n";

std::vector<path> outputs(const path& dir, const std::string& prefix) {
  std::vector<path> v;
  for (const auto& e : std::filesystem::directory_iterator(dir / "out")) {
    if (e.path().filename().string().rfind(prefix, 0) == 0) v.push_back(e.path());
  }
  return v;
}

}  // namespace

TEST(Cli, ValidateAcceptsShippedConfigs) {
  const auto d = workdir();
  for (const char* name : {"default.ini", "quick.ini"}) {
    const auto r = run(d, "validate --config " + (path(ROSEN_SOURCE_DIR) / "configs" / name).string());
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("profile ok"), std::string::npos);
  }
}

TEST(Cli, GammaNotAboveHurstIsRejected) {
  const auto d = workdir();
  const auto cfg = write_config(d, "kind = constant\nh1 = 0.6\nh2 = 0.8\nT = 1\ngamma = 0.7\n");
  const auto r = run(d, "validate --config " + cfg.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gamma"), std::string::npos) << r.err;
}

TEST(Cli, MalformedConfigReportsLocation) {
  const auto d = workdir();
  const auto p = d / "bad.ini";
  std::ofstream(p) << "[simulation]\nn = 4\nno equals here\n";
  const auto r = run(d, "simulate --config " + p.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(p.string() + ":3"), std::string::npos) << r.err;
}

TEST(Cli, MissingConfigFlagFails) {
  const auto d = workdir();
  EXPECT_EQ(run(d, "simulate").code, 1);
}

TEST(Cli, SimulateIsByteReproducible) {
  const auto d = workdir();
  const auto cfg = write_config(d, kConstant);
  ASSERT_EQ(run(d, "simulate --config " + cfg.string()).code, 0);
  const auto files = outputs(d, "paths_");
  ASSERT_EQ(files.size(), 1u);
  const auto first = slurp(files[0]);
  ASSERT_EQ(run(d, "simulate --config " + cfg.string() + " --threads 1").code, 0);
  EXPECT_EQ(slurp(files[0]), first);
  EXPECT_NE(first.find("seed=5"), std::string::npos);
  ASSERT_EQ(run(d, "simulate --config " + cfg.string() + " --seed 6").code, 0);
  EXPECT_EQ(outputs(d, "paths_").size(), 2u);
}

TEST(Cli, ZeroSamplesWritesHeaderOnly) {
  const auto d = workdir();
  auto cfg = write_config(d, kConstant);
  auto text = slurp(cfg);
  text.replace(text.find("n = 40"), 6, "n = 0");
  std::ofstream(cfg) << text;
  ASSERT_EQ(run(d, "simulate --config " + cfg.string()).code, 0);
  const auto files = outputs(d, "paths_");
  ASSERT_EQ(files.size(), 1u);
  const auto body = slurp(files[0]);
  EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 4);
}

TEST(Cli, SpectrumWritesCsvAndSummary) {
  const auto d = workdir();
  const auto cfg = write_config(d, kConstant);
  ASSERT_EQ(run(d, "spectrum --config " + cfg.string()).code, 0);
  EXPECT_EQ(outputs(d, "spectrum_").size(), 1u);
  EXPECT_EQ(outputs(d, "cf_").size(), 1u);
  EXPECT_EQ(outputs(d, "summary_spectrum_").size(), 1u);
}

TEST(Cli, SyntheticSingleEigenvalueIsNotIntegrable) {
  const auto d = workdir();
  const auto cfg = write_config(d, kConstant, "synthetic_spectrum = 0.5\n");
  const auto r = run(d, "localtime --config " + cfg.string());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("not integrable"), std::string::npos) << r.out;
  const auto j = slurp(outputs(d, "berman_").at(0));
  EXPECT_NE(j.find("\"integrable\": false"), std::string::npos);
}

TEST(Cli, LocaltimeWritesHistogramsAndBerman) {
  const auto d = workdir();
  const auto cfg = write_config(d, kConstant);
  const auto r = run(d, "localtime --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(integrable)"), std::string::npos) << r.out;
  EXPECT_EQ(outputs(d, "localtime_").size(), 1u);
  EXPECT_EQ(outputs(d, "summary_localtime_").size(), 1u);
  EXPECT_NE(r.err.find("wall time"), std::string::npos);
}
