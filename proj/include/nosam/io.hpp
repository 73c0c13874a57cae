#pragma once

// On-disk formats: little-endian f64 column-major fields with JSON
// sidecars, CSV tables, operator JSON and the per-run manifest.

#include <nosam/config.hpp>
#include <nosam/experiment.hpp>
#include <nosam/metrics.hpp>
#include <nosam/monolithic.hpp>
#include <nosam/opinf.hpp>
#include <nosam/pod.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace nosam::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::ostringstream o;
  for (unsigned int i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return o.str();
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

/// Raw column-major f64 matrix.
inline void write_matrix_bin(const fs::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline Matrix read_matrix_bin(const fs::path& path, Index rows, Index cols) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != static_cast<std::size_t>(rows * cols) * sizeof(double)) {
    throw IoError("'" + path.string() + "' has " + std::to_string(bytes) + " bytes, expected " +
                  std::to_string(rows * cols * 8));
  }
  in.seekg(0);
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed for '" + path.string() + "'");
  return m;
}

// ---- trajectories -------------------------------------------------------

struct FieldMeta {
  std::string field;
  Index n_nodes = 0;
  Index n_steps = 0;
  double dt = 0.0;
  double t0 = 0.0;
  double x_left = 0.0;
  double x_right = 0.0;
  double h = 0.0;
};

inline json to_json(const FieldMeta& m) {
  return {{"field", m.field},   {"n_nodes", m.n_nodes}, {"n_steps", m.n_steps}, {"dt", m.dt},
          {"t0", m.t0},         {"x_left", m.x_left},   {"x_right", m.x_right}, {"h", m.h},
          {"dtype", "float64"}, {"endianness", "little"}, {"layout", "column-major, one column per step"}};
}

inline void write_field(const fs::path& dir, const std::string& name, const Matrix& m, const Mesh1D& mesh, double dt,
                        double t0) {
  write_matrix_bin(dir / (name + ".bin"), m);
  write_json(dir / (name + ".json"), to_json({name, m.rows(), m.cols(), dt, t0, mesh.x_left, mesh.x_right, mesh.h}));
}

inline std::pair<Matrix, FieldMeta> read_field(const fs::path& dir, const std::string& name) {
  const json j = read_json(dir / (name + ".json"));
  FieldMeta m;
  try {
    m.field = j.at("field");
    m.n_nodes = j.at("n_nodes");
    m.n_steps = j.at("n_steps");
    m.dt = j.at("dt");
    m.t0 = j.at("t0");
    m.x_left = j.at("x_left");
    m.x_right = j.at("x_right");
    m.h = j.at("h");
  } catch (const json::exception& e) {
    throw IoError("sidecar '" + (dir / (name + ".json")).string() + "' is incomplete: " + e.what());
  }
  return {read_matrix_bin(dir / (name + ".bin"), m.n_nodes, m.n_steps), m};
}

/// u, v, a (nodes x states), g_gamma (1 x states) and t_gamma (2 x states).
inline void save_trajectory(const fs::path& dir, const Trajectory& t) {
  ensure_dir(dir);
  write_field(dir, "u", t.u, t.mesh, t.dt, t.t0);
  write_field(dir, "v", t.v, t.mesh, t.dt, t.t0);
  write_field(dir, "a", t.a, t.mesh, t.dt, t.t0);
  write_field(dir, "g_gamma", Matrix(t.g_gamma.transpose()), t.mesh, t.dt, t.t0);
  write_field(dir, "t_gamma", t.t_gamma, t.mesh, t.dt, t.t0);
  write_json(dir / "interface.json", {{"interface_index", t.interface_index},
                                      {"t_gamma_rows", {"left subdomain", "right subdomain"}}});
}

inline Trajectory load_trajectory(const fs::path& dir) {
  Trajectory t;
  auto [u, meta] = read_field(dir, "u");
  t.u = std::move(u);
  t.v = read_field(dir, "v").first;
  t.a = read_field(dir, "a").first;
  t.g_gamma = read_field(dir, "g_gamma").first.row(0).transpose();
  t.t_gamma = read_field(dir, "t_gamma").first;
  if (t.v.cols() != t.u.cols() || t.a.cols() != t.u.cols() || t.g_gamma.size() != t.u.cols() ||
      t.t_gamma.cols() != t.u.cols()) {
    throw IoError("trajectory fields in '" + dir.string() + "' do not conform");
  }
  t.mesh = build_uniform_mesh(meta.x_left, meta.x_right, meta.h);
  t.dt = meta.dt;
  t.t0 = meta.t0;
  t.times.resize(static_cast<std::size_t>(t.u.cols()));
  for (Index k = 0; k < t.u.cols(); ++k) t.times[static_cast<std::size_t>(k)] = t.t0 + static_cast<double>(k) * t.dt;
  t.interface_index = read_json(dir / "interface.json").at("interface_index");
  return t;
}

/// Hash of the displacement field, used to tie bases/operators to their data.
inline std::string trajectory_hash(const fs::path& dir) { return sha256_file(dir / "u.bin"); }

// ---- ROMs ----------------------------------------------------------------

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw IoError("matrix must be a nested array");
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows ? static_cast<Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (static_cast<Index>(j[i].size()) != cols) throw IoError("ragged matrix in JSON");
    for (Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

/// Writes basis.bin/basis.json and operators.json into `dir`.
inline void save_rom(const fs::path& dir, const TrainedRom& rom, TransmissionKind kind, const std::string& source_hash) {
  ensure_dir(dir);
  write_matrix_bin(dir / "basis.bin", rom.basis.phi);
  json sv = json::array();
  for (Index i = 0; i < rom.basis.singular_values.size(); ++i) sv.push_back(rom.basis.singular_values(i));
  write_json(dir / "basis.json", {{"N", rom.basis.phi.rows()},
                                  {"r", rom.basis.r},
                                  {"rank", rom.basis.rank},
                                  {"captured_energy", rom.basis.captured_energy},
                                  {"energy_target", rom.basis.energy_target < 0 ? json(nullptr) : json(rom.basis.energy_target)},
                                  {"singular_values", sv},
                                  {"source_trajectory_hash", source_hash}});
  const RomOperators& o = rom.ops;
  json mats = {{"K_tilde", matrix_to_json(o.K)}, {"B_tilde", matrix_to_json(o.B)}};
  if (o.form == RomForm::Neumann) mats["H_tilde"] = matrix_to_json(o.H);
  if (o.form == RomForm::Robin) {
    mats["S_tilde"] = matrix_to_json(o.S);
    mats["R_tilde"] = matrix_to_json(o.R);
  }
  json j = {{"r", o.r},
            {"lambda_reg", o.lambda_reg},
            {"sigma_max", o.sigma_max},
            {"transmission_kind", to_string(kind)},
            {"form", to_string(o.form)},
            {"subdomain", rom.side == Side::LeftOfInterface ? 1 : 2},
            {"alpha", o.alpha},
            {"beta", o.beta},
            {"matrices", mats},
            {"basis_file", "basis.bin"},
            {"training_trajectory_hash", source_hash}};
  write_json(dir / "operators.json", j);
}

inline TrainedRom load_rom(const fs::path& dir) {
  const json j = read_json(dir / "operators.json");
  const json b = read_json(dir / "basis.json");
  TrainedRom rom;
  try {
    rom.side = j.at("subdomain").get<int>() == 1 ? Side::LeftOfInterface : Side::RightOfInterface;
    RomOperators& o = rom.ops;
    o.form = parse_rom_form(j.at("form"));
    o.r = j.at("r");
    o.lambda_reg = j.at("lambda_reg");
    o.sigma_max = j.at("sigma_max");
    o.alpha = j.at("alpha");
    o.beta = j.at("beta");
    const json& m = j.at("matrices");
    o.K = matrix_from_json(m.at("K_tilde"));
    o.B = matrix_from_json(m.at("B_tilde"));
    if (o.form == RomForm::Neumann) o.H = matrix_from_json(m.at("H_tilde"));
    if (o.form == RomForm::Robin) {
      o.S = matrix_from_json(m.at("S_tilde"));
      o.R = matrix_from_json(m.at("R_tilde"));
    }
    rom.basis.r = b.at("r");
    rom.basis.rank = b.at("rank");
    rom.basis.captured_energy = b.at("captured_energy");
    rom.basis.energy_target = b.at("energy_target").is_null() ? -1.0 : b.at("energy_target").get<double>();
    const auto sv = b.at("singular_values").get<std::vector<double>>();
    rom.basis.singular_values = Eigen::Map<const Vector>(sv.data(), static_cast<Index>(sv.size()));
    rom.basis.phi = read_matrix_bin(dir / j.at("basis_file").get<std::string>(), b.at("N"), rom.basis.r);
  } catch (const json::exception& e) {
    throw IoError("ROM files in '" + dir.string() + "' are incomplete: " + e.what());
  } catch (const ConfigError& e) {
    throw IoError("ROM files in '" + dir.string() + "' are invalid: " + e.what());
  }
  if (rom.ops.r != rom.basis.r || rom.ops.K.rows() != rom.ops.r) throw IoError("ROM operator sizes do not match basis");
  return rom;
}

// ---- tables ----------------------------------------------------------------

inline std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

inline void write_iterations_csv(const fs::path& path, const ProblemConfig& cfg, const SchwarzRun& run) {
  std::ostringstream o;
  o << "step_index,time_s,iterations\n";
  for (std::size_t i = 0; i < run.iterations.size(); ++i) {
    const auto n = static_cast<Index>(i + 1);
    o << n << "," << fmt(cfg.time_at(n)) << "," << run.iterations[i] << "\n";
  }
  write_text(path, o.str());
}

inline void write_errors_csv(const fs::path& path, const ErrorReport& r) {
  std::ostringstream o;
  o << "step_index,time_s,eps_sub1,eps_sub2,eps_total\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    o << i << "," << fmt(r.times[i]) << "," << fmt(r.eps_left[i]) << "," << fmt(r.eps_right[i]) << ","
      << fmt(r.total(i)) << "\n";
  }
  write_text(path, o.str());
}

// ---- manifest ----------------------------------------------------------------

/// Lists every regular file under `dir` with its SHA-256; written last.
inline void write_manifest(const fs::path& dir, const std::string& command, const std::string& config_path,
                           const std::string& preset) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const auto& f : files) {
    list.push_back({{"path", fs::relative(f, dir).generic_string()}, {"sha256", sha256_file(f)},
                    {"bytes", fs::file_size(f)}});
  }
  write_json(dir / "manifest.json",
             {{"command", command},
              {"config_path", config_path.empty() ? json(nullptr) : json(config_path)},
              {"output_dir", dir.string()},
              {"preset", preset.empty() ? json(nullptr) : json(preset)},
              {"determinism", "no random seeds; outputs are bit-identical for identical inputs on one platform "
                              "(wall times excepted)"},
              {"files", list}});
}

}  // namespace nosam::io
