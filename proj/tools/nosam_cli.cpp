// nosam: command-line driver for monolithic runs, ROM training, coupled runs,
// sweeps and the bundled studies.
//
// Exit codes: 0 success, 2 configuration error, 3 solver divergence, 4 I/O error.

#include <nosam/config.hpp>
#include <nosam/error.hpp>
#include <nosam/experiment.hpp>
#include <nosam/io.hpp>
#include <nosam/presets.hpp>
#include <nosam/sweep.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace nosam;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kDiverged = 3;
constexpr int kIo = 4;

ProblemConfig config_from(const std::string& path) {
  if (path.empty()) return ProblemConfig{};
  return load_config(path);
}

Side side_from(int subdomain) {
  if (subdomain == 1) return Side::LeftOfInterface;
  if (subdomain == 2) return Side::RightOfInterface;
  throw ConfigError("--subdomain must be 1 or 2");
}

/// "fom" or "rom:PATH".
std::shared_ptr<const TrainedRom> model_from(const std::string& spec, Side side) {
  if (spec == "fom") return nullptr;
  if (spec.rfind("rom:", 0) != 0) throw ConfigError("model must be 'fom' or 'rom:PATH', got '" + spec + "'");
  auto rom = std::make_shared<TrainedRom>(io::load_rom(spec.substr(4)));
  if (rom->side != side) throw ConfigError("ROM '" + spec.substr(4) + "' belongs to the other subdomain");
  return rom;
}

void print_row_table(const io::json& rows) {
  std::printf("%-28s %12s %10s %10s %12s %10s\n", "case", "eps_avg", "iters", "wall_s", "target_eps", "target_it");
  for (const auto& r : rows) {
    auto num = [&](const char* k) { return r.contains(k) && r[k].is_number() ? r[k].get<double>() : std::nan(""); };
    const std::string name = r.value("case", r.value("left_model", std::string("?")));
    std::printf("%-28s %12.4e %10.4f %10.4f %12.4e %10.3f\n", name.c_str(), num("eps_avg"), num("mean_iterations"),
                num("wall_time_s"), num("target_eps"), num("target_iterations"));
  }
}

void report(const fs::path& in) {
  const io::json s = io::read_json(in / "summary.json");
  for (auto it = s.begin(); it != s.end(); ++it) {
    if (it.key() == "rows") continue;
    std::cout << it.key() << ": " << it.value().dump() << "\n";
  }
  if (s.contains("rows")) {
    std::cout << "\n";
    print_row_table(s["rows"]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-overlapping Schwarz coupling of 1D elastic-wave FOMs and OpInf ROMs"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, traj_dir, transmission = "dn", left = "fom", right = "fom", preset;
  int subdomain = 1, jobs = 1;
  std::optional<double> energy;
  std::optional<Index> modes;
  std::optional<double> a12, a21, b12, b21;
  bool save_states = true;

  auto* mono = app.add_subcommand("monolithic", "Run the single-domain reference and save its trajectory");
  mono->add_option("--config", config_path, "Config file (key = value)");
  mono->add_option("--out", out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Build a POD basis and infer OpInf operators for one subdomain");
  train->add_option("--config", config_path, "Config file");
  train->add_option("--trajectory", traj_dir, "Directory written by 'monolithic'")->required();
  train->add_option("--subdomain", subdomain, "1 (left) or 2 (right)")->required();
  auto* e_opt = train->add_option("--energy", energy, "Energy fraction retained by the basis");
  auto* m_opt = train->add_option("--modes", modes, "Explicit number of modes");
  e_opt->excludes(m_opt);
  train->add_option("--transmission", transmission, "dn, rr or dd")->required();
  train->add_option("--out", out_dir, "Output directory")->required();

  auto* couple = app.add_subcommand("couple", "Run a coupled FOM/ROM simulation");
  couple->add_option("--config", config_path, "Config file");
  couple->add_option("--left", left, "fom or rom:PATH");
  couple->add_option("--right", right, "fom or rom:PATH");
  couple->add_option("--transmission", transmission, "dn, rr or dd")->required();
  couple->add_option("--alpha12", a12, "Robin alpha12_bar (overrides config)");
  couple->add_option("--alpha21", a21, "Robin alpha21_bar");
  couple->add_option("--beta12", b12, "Robin beta12");
  couple->add_option("--beta21", b21, "Robin beta21");
  couple->add_flag("!--no-states", save_states, "Skip writing the subdomain fields");
  couple->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Robin parameter sweep");
  sweep->add_option("--config", config_path, "Config file");
  sweep->add_option("--preset", preset, "Grid preset")->check(CLI::IsMember({"fig2"}))->required();
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* pre = app.add_subcommand("preset", "Run a bundled study");
  pre->add_option("name", preset, "table1, table2, fig2 or fig8")
      ->check(CLI::IsMember({"table1", "table2", "fig2", "fig8"}))
      ->required();
  pre->add_option("--config", config_path, "Config file (defaults to the benchmark setting)");
  pre->add_option("--jobs", jobs, "Worker threads (fig2 only)")->check(CLI::PositiveNumber);
  pre->add_option("--out", out_dir, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Print the summary of an output directory");
  rep->add_option("--in", in_dir, "Output directory of a previous run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  try {
    if (*rep) {
      report(in_dir);
      return kOk;
    }
    ProblemConfig cfg = config_from(config_path);
    const fs::path out(out_dir);
    if (*couple) {
      if (a12) cfg.alpha12_bar = *a12;
      if (a21) cfg.alpha21_bar = *a21;
      if (b12) cfg.beta12 = *b12;
      if (b21) cfg.beta21 = *b21;
      cfg.validate();
    }
    if (preset == "fig8" && config_path.empty()) cfg = fig8_config();
    io::ensure_dir(out);
    io::write_text(out / "config.txt", format_config(cfg));

    if (*mono) {
      const Trajectory t = run_monolithic(cfg);
      io::save_trajectory(out, t);
      io::write_json(out / "summary.json", {{"n_states", t.n_states()},
                                            {"sigma_max", compute_sigma_max(t, cfg.material)},
                                            {"config_hash", config_hash(cfg)}});
      io::write_manifest(out, command, config_path, "");
    } else if (*train) {
      if (!energy && !modes) throw ConfigError("one of --energy or --modes is required");
      const Trajectory t = io::load_trajectory(traj_dir);
      const double smax = compute_sigma_max(t, cfg.material);
      const auto kind = parse_transmission_kind(transmission);
      const Side side = side_from(subdomain);
      const auto spec = TransmissionSpec::from_config(kind, cfg, smax);
      const Index samples = std::min(cfg.training_steps(), t.n_states() - 1);
      const TrainedRom rom = train_rom(cfg, t, side, spec.into(side), smax,
                                       energy ? ModeChoice::by_energy(*energy) : ModeChoice::fixed(*modes), samples);
      io::save_rom(out, rom, kind, io::trajectory_hash(traj_dir));
      std::cerr << "subdomain " << subdomain << ": " << rom.basis.r << " modes, captured energy "
                << rom.basis.captured_energy << "\n";
      io::write_manifest(out, command, config_path, "");
    } else if (*couple) {
      const ReferenceData ref = ReferenceData::compute(cfg);
      const auto spec = TransmissionSpec::from_config(parse_transmission_kind(transmission), cfg, ref.sigma_max);
      auto l = make_model(cfg, Side::LeftOfInterface, spec, model_from(left, Side::LeftOfInterface));
      auto r = make_model(cfg, Side::RightOfInterface, spec, model_from(right, Side::RightOfInterface));
      StateRecorder states;
      TrajectoryReference tr(ref.traj);
      const CoupledResult res =
          run_case(cfg, spec, *l, *r, tr, save_states ? states.observer() : WindowObserver{});
      io::json extra = {{"transmission", to_string(spec.kind)}};
      if (spec.kind == TransmissionKind::RobinRobin) {
        extra["alpha12_bar"] = spec.alpha12_bar;
        extra["alpha21_bar"] = spec.alpha21_bar;
        extra["beta12"] = spec.beta12;
        extra["beta21"] = spec.beta21;
      }
      write_case(out, cfg, res, extra);
      if (save_states) states.save(out, l->layout(), r->layout(), cfg.dt, cfg.t0);
      io::write_manifest(out, command, config_path, "");
      if (!res.run.diagnostic.empty()) std::cerr << res.run.diagnostic << "\n";
      std::cerr << "mean iterations " << res.run.mean_iterations() << ", eps_avg " << res.errors.eps_avg << "\n";
      if (!res.run.converged) return kDiverged;
    } else if (*sweep || *pre) {
      if (preset == "fig2") {
        preset_fig2(ReferenceData::compute(cfg), out, jobs);
      } else if (preset == "table1") {
        preset_table1(ReferenceData::compute(cfg), out);
      } else if (preset == "table2") {
        preset_table2(ReferenceData::compute(cfg), out);
      } else {
        preset_fig8(cfg, out);
      }
      io::write_manifest(out, command, config_path, preset);
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kDiverged;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  }
}
