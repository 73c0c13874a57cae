// Config parsing, file formats, sweeps and the command-line driver.

#include <nosam/config.hpp>
#include <nosam/io.hpp>
#include <nosam/presets.hpp>
#include <nosam/sweep.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace nosam;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nosam_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NOSAM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// ---- config -------------------------------------------------------------------------

TEST(Config, DefaultsAreBenchmark) {
  const ProblemConfig c = parse_config_string("");
  EXPECT_EQ(c.h, 1e-3);
  EXPECT_EQ(c.dt, 2.5e-7);
  EXPECT_EQ(c.n_steps(), 4000);
  EXPECT_EQ(c.lambda_reg, 1e-4);
  EXPECT_EQ(c.schwarz_tolerance, 1e-8);
  EXPECT_EQ(c.training_steps(), 4000);
}

TEST(Config, ParsesAndRoundTrips) {
  const ProblemConfig c = parse_config_string(
      "# comment\n tf = 5e-4  \nbeta12=3\ntraction_method = residual_reaction\nmax_schwarz_iters = 50\n");
  EXPECT_EQ(c.tf, 5e-4);
  EXPECT_EQ(c.beta12, 3.0);
  EXPECT_EQ(c.traction_method, TractionMethod::ResidualReaction);
  EXPECT_EQ(c.max_schwarz_iters, 50);
  const ProblemConfig back = parse_config_string(format_config(c));
  EXPECT_EQ(format_config(back), format_config(c));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config_string("alpha12 = 1\n"), ConfigError);  // unknown key
  EXPECT_THROW(parse_config_string("tf = 1\ntf = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_string("dt = fast\n"), ConfigError);
  EXPECT_THROW(parse_config_string("dt = -1\n"), ConfigError);
  EXPECT_THROW(parse_config_string("max_schwarz_iters = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config_string("just words\n"), ConfigError);
  try {
    parse_config_string("h = 1e-3\nbogus = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
}

// ---- file formats -------------------------------------------------------------------

TEST(Io, TrajectoryRoundTrip) {
  ProblemConfig cfg;
  cfg.tf = 1e-5;
  const Trajectory t = run_monolithic(cfg);
  const fs::path dir = scratch("traj");
  io::save_trajectory(dir, t);
  const Trajectory back = io::load_trajectory(dir);
  EXPECT_EQ(back.u, t.u);
  EXPECT_EQ(back.a, t.a);
  EXPECT_EQ(back.t_gamma, t.t_gamma);
  EXPECT_EQ(back.g_gamma, t.g_gamma);
  EXPECT_EQ(back.interface_index, t.interface_index);
  EXPECT_EQ(back.times, t.times);
  const io::json side = io::read_json(dir / "u.json");
  EXPECT_EQ(side["n_nodes"], 1001);
  EXPECT_EQ(side["n_steps"], 41);
  EXPECT_EQ(fs::file_size(dir / "u.bin"), 1001u * 41u * 8u);
  fs::remove_all(dir);
}

TEST(Io, RomRoundTrip) {
  ProblemConfig cfg;
  cfg.tf = 5e-5;
  const Trajectory t = run_monolithic(cfg);
  const double smax = compute_sigma_max(t, cfg.material);
  const auto spec = TransmissionSpec::robin_robin(1e-3, 1e-3, 1.0, 1.0, smax);
  const TrainedRom rom = train_rom(cfg, t, Side::RightOfInterface, spec.into(Side::RightOfInterface), smax,
                                   ModeChoice::fixed(6), 200);
  const fs::path dir = scratch("rom");
  io::save_rom(dir, rom, spec.kind, "abc");
  const TrainedRom back = io::load_rom(dir);
  EXPECT_EQ(back.side, Side::RightOfInterface);
  EXPECT_EQ(back.ops.form, RomForm::Robin);
  EXPECT_EQ(back.basis.phi, rom.basis.phi);
  EXPECT_LE((back.ops.K - rom.ops.K).cwiseAbs().maxCoeff(), 1e-15 * rom.ops.K.cwiseAbs().maxCoeff());
  EXPECT_EQ(back.ops.alpha, rom.ops.alpha);
  EXPECT_EQ(io::read_json(dir / "operators.json")["training_trajectory_hash"], "abc");
  fs::remove_all(dir);
}

TEST(Io, MissingFilesRaiseIoError) {
  EXPECT_THROW(io::load_trajectory(scratch("nothing")), IoError);
  EXPECT_THROW(io::load_rom(scratch("nothing")), IoError);
  EXPECT_THROW(load_config("/nonexistent/config.txt"), IoError);
}

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// ---- sweep ---------------------------------------------------------------------------

TEST(Sweep, GridCardinalityAndOrder) {
  const auto grid = generate_grid(SweepAxes::benchmark());
  EXPECT_EQ(grid.size(), 625u);
  EXPECT_EQ(grid.front(), (RobinParams{1e-3, 1e-3, 1e-3, 1e-3}));
  EXPECT_EQ(grid[1], (RobinParams{1e-3, 1e-3, 1e-3, 1e-1}));
  EXPECT_NE(std::find(grid.begin(), grid.end(), RobinParams{1e-3, 1e-3, 1.0, 1.0}), grid.end());
  EXPECT_EQ(generate_grid({{1.0}, {2.0}, {3.0}, {4.0}}).size(), 1u);
}

TEST(Sweep, ParetoFront) {
  auto rec = [](double e, double it) {
    SweepRecord r;
    r.eps_avg = e;
    r.mean_iterations = it;
    r.converged = true;
    return r;
  };
  EXPECT_EQ(pareto_front({rec(1, 1)}).size(), 1u);
  const auto two = pareto_front({rec(1, 1), rec(2, 2)});
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].eps_avg, 1.0);
  std::vector<SweepRecord> many{rec(1, 5), rec(2, 3), rec(3, 1), rec(3, 3), rec(2, 3), rec(0.5, 9)};
  SweepRecord bad = rec(0.1, 0.1);
  bad.converged = false;
  many.push_back(bad);
  const auto front = pareto_front(many);
  EXPECT_EQ(front.size(), 5u);  // ties kept, dominated (3,3) and unconverged dropped
  for (const auto& a : front)
    for (const auto& b : front) EXPECT_FALSE(dominates(a, b));
}

TEST(Sweep, CsvHeader) {
  EXPECT_STREQ(sweep_csv_header(), "alpha12_bar,alpha21_bar,beta12,beta21,eps_avg,mean_iterations,wall_time_s,converged");
  SweepRecord r;
  r.params = {1e-3, 1.0, 3.0, 5.0};
  EXPECT_EQ(sweep_csv_row(r), "0.001,1,3,5,,0,0,false");
}

TEST(Sweep, SerialAndParallelAgree) {
  ProblemConfig cfg;
  cfg.tf = 2.5e-5;
  const ReferenceData ref = ReferenceData::compute(cfg);
  const SweepContext ctx{cfg, &ref.traj, ref.sigma_max};
  const auto grid = generate_grid({{1e-3, 1.0}, {1e-3}, {1.0, 5.0}, {1.0, 3.0}});
  const auto serial = run_sweep(ctx, grid, 1);
  const auto parallel = run_sweep(ctx, grid, 3);
  ASSERT_EQ(serial.size(), 8u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(serial[i].params, grid[i]);
    EXPECT_EQ(parallel[i].params, grid[i]);
    EXPECT_EQ(serial[i].eps_avg, parallel[i].eps_avg);
    EXPECT_EQ(serial[i].mean_iterations, parallel[i].mean_iterations);
    EXPECT_TRUE(serial[i].converged);
  }
  EXPECT_TRUE(run_sweep(ctx, {}, 2).empty());
}

TEST(Sweep, FailuresAreRecorded) {
  ProblemConfig cfg;
  cfg.tf = 2.5e-6;
  const ReferenceData ref = ReferenceData::compute(cfg);
  const SweepContext ctx{cfg, &ref.traj, ref.sigma_max};
  const SweepRecord r = run_sweep_point(ctx, {0.0, 1.0, 1.0, 1.0});  // invalid Robin pair
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.diagnostic.empty());
}

// ---- command line -------------------------------------------------------------------

TEST(Cli, ExitCodesAndOutputs) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "short.cfg") << "tf = 2.5e-5\n";
    std::ofstream(dir / "empty.cfg") << "tf = 0\n";
    std::ofstream(dir / "bad.cfg") << "no_such_key = 1\n";
  }
  const std::string cfg = (dir / "short.cfg").string();
  EXPECT_EQ(run_cli("monolithic --config " + (dir / "empty.cfg").string() + " --out " + (dir / "m0").string()), 0);
  EXPECT_EQ(io::read_json(dir / "m0" / "u.json")["n_steps"], 1);

  EXPECT_EQ(run_cli("monolithic --config " + cfg + " --out " + (dir / "m").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "m" / "manifest.json"));
  const io::json man = io::read_json(dir / "m" / "manifest.json");
  EXPECT_FALSE(man["files"].empty());
  for (const auto& f : man["files"]) EXPECT_EQ(f["sha256"], io::sha256_file(dir / "m" / f["path"].get<std::string>()));

  EXPECT_EQ(run_cli("train --config " + cfg + " --trajectory " + (dir / "m").string() +
                    " --subdomain 2 --modes 5 --transmission rr --out " + (dir / "rom2").string()),
            0);
  EXPECT_EQ(run_cli("couple --config " + cfg + " --transmission rr --right rom:" + (dir / "rom2").string() +
                    " --out " + (dir / "c").string()),
            0);
  const io::json s = io::read_json(dir / "c" / "summary.json");
  EXPECT_TRUE(s["converged"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "c" / "errors.csv"));
  EXPECT_TRUE(fs::exists(dir / "c" / "sub2_u.bin"));
  EXPECT_EQ(run_cli("report --in " + (dir / "c").string()), 0);

  EXPECT_EQ(run_cli("couple --bogus-flag"), 2);
  EXPECT_EQ(run_cli("monolithic --config " + (dir / "bad.cfg").string() + " --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run_cli("couple --config " + cfg + " --transmission rr --left rom:" + (dir / "rom2").string() +
                    " --out " + (dir / "y").string()),
            2);  // ROM belongs to the other subdomain
  EXPECT_EQ(run_cli("monolithic --config /nonexistent.cfg --out " + (dir / "z").string()), 4);
  EXPECT_EQ(run_cli("report --in " + (dir / "missing").string()), 4);
  fs::remove_all(dir);
}
