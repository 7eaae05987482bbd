#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nssl/error.hpp"
#include "nssl/estimates.hpp"
#include "nssl/field.hpp"

// Experiment configuration, initial-data generators and the run driver.
//
// Config files are flat `section.key = value` lines, `#` starts a comment.
// Lists are comma separated.

namespace nssl {

class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "config");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// Line of the key in the source (0 for keys set programmatically).
  int line(const std::string& key) const;
  const std::string& source() const { return source_; }

  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& def) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double def) const;
  long integer(const std::string& key, long def) const;
  bool flag(const std::string& key, bool def) const;
  std::vector<double> nums(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  std::vector<std::string> keys() const;
  /// Keys never read through an accessor.
  std::vector<std::string> unused() const;
  /// Sorted `key = value` lines; the hashed identity of the config.
  std::string canonical() const;

  /// ConfigError "source:line: key: what".
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry& get(const std::string& key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

// ---- initial data ----------------------------------------------------------

struct GeneratorSpec {
  std::string name = "zero";
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  std::map<std::string, double> params;
};

/// Registered generator names.
const std::vector<std::string>& generator_names();

/// Samples a generator on `grid` with ncomp components (1 for densities,
/// 3 for velocities; 2D velocities carry a third vertical component).
///   zero             all zeros
///   taylor-green     amplitude A; 2D: v_h = (U1, U2) + A(-cos x1 sin x2, sin x1 cos x2),
///                    v3 = c3 A cos x1 cos x2 (params U1, U2, c3); 3D: A(sin cos cos,
///                    -cos sin cos, 0); scalar A cos x1 cos x2
///   gaussian-bump    peak A, width sigma (default L/16) at the box centre; vectors are
///                    the perpendicular gradient of the bump, scaled to max |v| = A
///   random-band      seeded Fourier modes with kmin <= |k| <= kmax (defaults 1, 4),
///                    projected when divfree != 0 (default 1 for vectors), max |f| = A
///   patch-ball       scalar h0 = -A times the ball indicator of radius r (default L/8)
///                    mollified at scale eps (default one grid spacing)
///   algebraic-vortex 2D vortex with v_theta = A a r/(r^2 + a^2) chi, v3 = A a/sqrt(r^2 + a^2) chi,
///                    chi an erfc cutoff at R (default L/8), core a (default dx/2)
/// Velocity generators return divergence-free fields (horizontally on 2D grids).
/// Density fields with sup |h0| > h_gate throw ConfigError.
PhysicalField initial_data(const GeneratorSpec& spec, const Grid& grid, int ncomp,
                           double h_gate = 0.5);

// ---- experiments -----------------------------------------------------------

const std::vector<std::string>& experiment_kinds();

struct GridSpec {
  int n = 32;
  double length = kTwoPi;
};

struct TimeSpec {
  double dt = 1e-2;
  double T = 1.0;
  int cadence = 1;
};

struct ExperimentConfig {
  std::string kind;
  GridSpec grid;
  TimeSpec time;
  std::map<std::string, GeneratorSpec> init;     // by role: velocity, density, ...
  std::vector<std::string> monitors;             // gated subset; empty = all
  std::map<std::string, double> tolerances;      // rhs overrides by monitor id
  bool deterministic = true;
  bool cfl_waived = false;
  std::string output = "out";
  Config raw;
};

/// Reads the common sections and validates kinds, generators and monitor ids.
/// NSSL_DETERMINISTIC, when set, overrides experiment.deterministic.
ExperimentConfig parse_experiment(const Config& cfg);

struct ArtifactEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string kind;
  std::string config_hash;
  std::string code_version;
  double wall_clock = 0.0;
  bool deterministic = true;
  int threads = 1;  // NSSL_THREADS at run time; computation itself is serial
  std::vector<MonitorReport> monitors;
  std::vector<ArtifactEntry> artifacts;
  ExitCode exit_code = ExitCode::kPass;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

const char* code_version();

/// Runs the experiment and writes series.csv, monitors.txt, snapshots and
/// manifest.json into the output directory (created if needed). Solver errors
/// are rethrown as ContextError with the experiment kind prepended.
RunManifest run_experiment(const ExperimentConfig& cfg);
RunManifest run_config_file(const std::string& path, const std::string& output_override = "");

/// Error carrying the exit code of the error it wraps.
class ContextError : public Error {
 public:
  ContextError(const std::string& what, ExitCode code) : Error(what), code_(code) {}
  ExitCode exit_code() const noexcept override { return code_; }

 private:
  ExitCode code_;
};

// ---- artifacts -------------------------------------------------------------

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Manifest checksums against the files on disk; returns the mismatching paths.
std::vector<std::string> verify_manifest(const std::string& dir);

/// Plain-text summary of a run directory: manifest header, monitor verdicts
/// and the range of every series.
std::string report_dir(const std::string& dir);

/// Log-log fit of every series in a CSV (or only `name`) over [t0, t1].
std::map<std::string, DecayFit> fit_series(const std::string& csv, double t0, double t1,
                                           const std::string& name = "");

}  // namespace nssl
