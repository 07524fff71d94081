#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "geosched/csv.hpp"

using namespace geosched;
using namespace geosched::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "geosched_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

Config small_config() {
  Config c = Config::defaults();
  c.set("schedule.steps", "8");
  c.set("cost.samples", "128");
  c.set("optimize.max_iters", "5");
  c.set("sample.n", "200");
  c.set("train.iterations", "4");
  c.set("train.batch", "16");
  c.set("train.width", "8");
  c.set("train.depth", "1");
  c.set("train.embed", "4");
  c.set("train.checkpoint_every", "2");
  c.set("train.diagnostic_samples", "8");
  c.set("train.eval_samples", "20");
  c.set("eval.probe_count", "2");
  c.set("eval.probe_points", "8");
  c.set("sweep.steps", "4,8");
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GEOSCHED_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, UnknownKeysAreRejected) {
  Config c = Config::defaults();
  EXPECT_THROW(c.set("target.kindd", "bimodal"), ConfigError);
  const fs::path dir = scratch("unknown");
  write(dir / "bad.ini", "[train]\nlearning_rat = 0.1\n");
  EXPECT_THROW(c.merge_ini(dir / "bad.ini"), ConfigError);
  write(dir / "loose.ini", "seed = 3\n");
  EXPECT_THROW(c.merge_ini(dir / "loose.ini"), ConfigError);
}

TEST(Config, IniOverridesAndTypedAccess) {
  Config c = Config::defaults();
  const fs::path dir = scratch("ini");
  write(dir / "ok.ini", "; comment\n[run]\nseed = 17\n[sweep]\nsteps = 5, 10\n[train]\nlog_time = off\n");
  c.merge_ini(dir / "ok.ini");
  EXPECT_EQ(c.integer("run.seed"), 17);
  EXPECT_EQ(c.integer_list("sweep.steps"), (std::vector<long>{5, 10}));
  EXPECT_FALSE(c.boolean("train.log_time"));
  c.set("train.gamma", "abc");
  EXPECT_THROW(c.real("train.gamma"), ConfigError);
}

TEST(Config, ResolvedIniRoundTrips) {
  Config c = Config::defaults();
  c.apply_preset("cantor");
  const fs::path dir = scratch("roundtrip");
  write(dir / "resolved.ini", c.to_ini());
  Config d = Config::defaults();
  d.merge_ini(dir / "resolved.ini");
  EXPECT_EQ(c.values(), d.values());
}

TEST(Config, PresetsExistAndUnknownPresetFails) {
  EXPECT_EQ(Config::preset_names(), (std::vector<std::string>{"bimodal", "cantor", "gaussian-geodesic", "t-sweep"}));
  Config c = Config::defaults();
  EXPECT_THROW(c.apply_preset("mnist"), ConfigError);
  c.apply_preset("cantor");
  EXPECT_EQ(c.str("target.kind"), "cantor");
  EXPECT_EQ(c.real("train.gamma"), 0.01);
}

TEST(Builders, RejectBadValues) {
  Config c = Config::defaults();
  c.set("noise.family", "vq");
  EXPECT_THROW(make_noise_schedule(c), ConfigError);
  c = Config::defaults();
  c.set("noise.beta_min", "-1");
  EXPECT_THROW(make_noise_schedule(c), ConfigError);
  c = Config::defaults();
  c.set("sample.sampler", "ddim");
  EXPECT_THROW(make_sampler(c), ConfigError);
  c = Config::defaults();
  c.set("schedule.kind", "file");
  EXPECT_THROW(make_schedule(c, NoiseSchedule{}), ConfigError);
}

TEST(Builders, GaussianGeodesicIsValidAndDenseNearZero) {
  const auto d = gaussian_geodesic(NoiseSchedule{}, 0.01, 50);
  EXPECT_EQ(d.steps(), 50);
  EXPECT_LT(d[25], 0.2);
}

TEST(Commands, EveryCommandIsByteDeterministic) {
  const Config cfg = small_config();
  std::ostringstream log;
  for (const std::string cmd : {"optimize", "train", "sample", "sweep"}) {
    const fs::path a = scratch(cmd + "_a");
    const fs::path b = scratch(cmd + "_b");
    run_command(cmd, cfg, a, log);
    run_command(cmd, cfg, b, log);
    int csvs = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++csvs;
      EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << cmd << " " << entry.path().filename();
    }
    EXPECT_GT(csvs, 0) << cmd;
    EXPECT_EQ(slurp(a / "config.ini"), slurp(b / "config.ini"));
  }
  Config ev = cfg;
  ev.set("eval.samples_file", (fs::temp_directory_path() / "geosched_cli_test" / "sample_a" / "samples.csv").string());
  const fs::path a = scratch("eval_a");
  const fs::path b = scratch("eval_b");
  run_command("eval", ev, a, log);
  run_command("eval", ev, b, log);
  EXPECT_EQ(slurp(a / "density.csv"), slurp(b / "density.csv"));
  EXPECT_EQ(slurp(a / "report.txt"), slurp(b / "report.txt"));
}

TEST(Commands, LearnedScoreFromTrainCheckpoint) {
  Config cfg = small_config();
  std::ostringstream log;
  const fs::path train_dir = scratch("learned_train");
  run_command("train", cfg, train_dir, log);
  cfg.set("score.source", "checkpoint");
  cfg.set("score.checkpoint", (train_dir / "checkpoint.bin").string());
  cfg.set("schedule.kind", "file");
  cfg.set("schedule.file", (train_dir / "schedule.csv").string());
  const fs::path out = scratch("learned_sample");
  run_command("sample", cfg, out, log);
  EXPECT_EQ(csv::read_column(out / "samples.csv").size(), 200u);
  cfg.set("noise.family", "vp_cosine");
  EXPECT_THROW(run_command("sample", cfg, scratch("learned_bad"), log), ConfigError);
}

TEST(Commands, FlatPathIsReportedNotFatal) {
  Config cfg = small_config();
  cfg.set("target.kind", "standard_normal");
  const fs::path out = scratch("flat");
  std::ostringstream log;
  run_command("optimize", cfg, out, log);
  EXPECT_NE(slurp(out / "summary.txt").find("flat_path = 1"), std::string::npos);
  EXPECT_NE(log.str().find("flat path"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  write(dir / "bad.ini", "[sample]\nsamplr = ode_euler\n");
  write(dir / "small.ini", "[sample]\nn = 50\n[schedule]\nsteps = 5\n");
  EXPECT_EQ(run_cli("sample --config " + (dir / "small.ini").string() + " --out " + (dir / "ok").string()), 0);
  EXPECT_EQ(run_cli("sample --config " + (dir / "bad.ini").string() + " --out " + (dir / "bad").string()), 2);
  EXPECT_EQ(run_cli("sample --preset nope --out " + (dir / "bad").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  write(dir / "diverge.ini", "[train]\nlearning_rate = 1e300\niterations = 3\nbatch = 60\n[schedule]\nsteps = 5\n");
  EXPECT_EQ(run_cli("train --config " + (dir / "diverge.ini").string() + " --out " + (dir / "div").string()), 3);
  EXPECT_TRUE(fs::exists(dir / "div" / "diagnostic_checkpoint.bin"));
}
