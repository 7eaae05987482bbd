#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "internal.hpp"
#include "json.hpp"
#include "nssl/snapshot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace nssl {

namespace {

const std::vector<std::string> kKinds{"hns2d",      "ins3d-direct", "ins3d-picard",  "decay-probe",
                                      "patch",      "twisted-div",  "stokes-maxreg", "euler-lagrange"};

bool env_flag(const char* name, bool& out) {
  const char* v = std::getenv(name);
  if (!v || !*v) return false;
  const std::string s(v);
  out = !(s == "0" || s == "false" || s == "no" || s == "off");
  return true;
}

bool known_monitor(const std::string& kind, const std::string& id) {
  for (const std::string& m : detail::monitor_registry(kind)) {
    if (m == id) return true;
    if (!m.empty() && m.back() == ':' && id.rfind(m, 0) == 0) return true;
  }
  return false;
}

std::string hex(const unsigned char* d, unsigned n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < n; ++i) {
    s += digits[d[i] >> 4];
    s += digits[d[i] & 15];
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ConfigError("write failed for '" + path + "'");
}

json monitor_json(const MonitorReport& m) {
  json j{{"id", m.id},   {"anchor", m.anchor}, {"lhs", m.lhs},
         {"rhs", m.rhs}, {"ratio", m.ratio},   {"verdict", verdict_name(m.verdict)}};
  if (!std::isfinite(m.ratio)) j["ratio"] = nullptr;
  if (!m.note.empty()) j["note"] = m.note;
  if (m.lower_bound) j["bound"] = "lower";
  return j;
}

Verdict parse_verdict(const std::string& s) {
  if (s == verdict_name(Verdict::kPass)) return Verdict::kPass;
  if (s == verdict_name(Verdict::kFail)) return Verdict::kFail;
  return Verdict::kReportOnly;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() { return kKinds; }

const char* code_version() { return "nssl 1.0.0"; }

ExperimentConfig parse_experiment(const Config& cfg) {
  ExperimentConfig e;
  e.raw = cfg;
  const Config& c = e.raw;
  e.kind = c.str("experiment.kind");
  if (std::find(kKinds.begin(), kKinds.end(), e.kind) == kKinds.end())
    c.fail("experiment.kind", "unknown experiment kind '" + e.kind + "'");
  e.deterministic = c.flag("experiment.deterministic", true);
  env_flag("NSSL_DETERMINISTIC", e.deterministic);
  e.cfl_waived = c.flag("time.cfl_waive", false);
  e.output = c.str("output.dir", "out");

  const long n = c.integer("grid.n", 32);
  if (n < 8 || n % 2 != 0 || n > 4096) c.fail("grid.n", "must be an even size in [8, 4096]");
  e.grid.n = static_cast<int>(n);
  e.grid.length = c.num("grid.length", kTwoPi);
  if (!(e.grid.length > 0.0)) c.fail("grid.length", "must be positive");

  e.time.dt = c.num("time.dt", 1e-2);
  e.time.T = c.num("time.T", 1.0);
  const long cad = c.integer("time.cadence", 1);
  if (!(e.time.dt > 0.0)) c.fail("time.dt", "must be positive");
  if (!(e.time.T >= 0.0)) c.fail("time.T", "must be non-negative");
  if (cad < 1) c.fail("time.cadence", "must be >= 1");
  e.time.cadence = static_cast<int>(cad);

  for (const std::string& key : c.keys()) {
    if (key.rfind("init.", 0) != 0) continue;
    const std::string role = key.substr(5);
    if (role.find('.') != std::string::npos) continue;
    GeneratorSpec g;
    g.name = c.str(key);
    const std::string pre = key + ".";
    for (const std::string& k : c.keys()) {
      if (k.rfind(pre, 0) != 0) continue;
      const std::string p = k.substr(pre.size());
      if (p == "amplitude")
        g.amplitude = c.num(k);
      else if (p == "seed") {
        const long s = c.integer(k, 1);
        if (s < 0) c.fail(k, "seed must be non-negative");
        g.seed = static_cast<std::uint64_t>(s);
      } else
        g.params[p] = c.num(k);
    }
    if (!c.has(pre + "seed") && !e.deterministic) g.seed = std::random_device{}();
    try {
      detail::check_generator(g);
    } catch (const ConfigError& err) {
      c.fail(key, err.what());
    }
    e.init[role] = g;
  }
  for (const std::string& k : c.keys())
    if (k.rfind("init.", 0) == 0 && k.find('.', 5) != std::string::npos &&
        !e.init.count(k.substr(5, k.find('.', 5) - 5)))
      c.fail(k, "parameter of an undeclared generator role");

  if (c.has("monitors.gate")) {
    e.monitors = c.words("monitors.gate");
    for (const std::string& id : e.monitors)
      if (!known_monitor(e.kind, id)) c.fail("monitors.gate", "unknown monitor '" + id + "'");
  }
  for (const std::string& k : c.keys()) {
    if (k.rfind("tol.", 0) != 0) continue;
    const std::string id = k.substr(4);
    if (!known_monitor(e.kind, id)) c.fail(k, "unknown monitor '" + id + "'");
    e.tolerances[id] = c.num(k);
  }
  return e;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char d[EVP_MAX_MD_SIZE];
  unsigned n = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), d, &n, EVP_sha256(), nullptr))
    throw NumericalError("sha256: digest failed");
  return hex(d, n);
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

std::string RunManifest::to_json() const {
  json j;
  j["kind"] = kind;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["wall_clock_s"] = wall_clock;
  j["deterministic"] = deterministic;
  j["threads"] = threads;
  j["exit_code"] = static_cast<int>(exit_code);
  j["monitors"] = json::array();
  for (const auto& m : monitors) j["monitors"].push_back(monitor_json(m));
  j["artifacts"] = json::array();
  for (const auto& a : artifacts)
    j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.kind = j.at("kind");
    m.config_hash = j.at("config_hash");
    m.code_version = j.at("code_version");
    m.wall_clock = j.at("wall_clock_s");
    m.deterministic = j.at("deterministic");
    m.threads = j.value("threads", 1);
    m.exit_code = static_cast<ExitCode>(j.at("exit_code").get<int>());
    for (const auto& r : j.at("monitors")) {
      MonitorReport x;
      x.id = r.at("id");
      x.anchor = r.at("anchor");
      x.lhs = r.at("lhs");
      x.rhs = r.at("rhs");
      x.ratio = r.at("ratio").is_null() ? kInf : r.at("ratio").get<double>();
      x.verdict = parse_verdict(r.at("verdict"));
      x.note = r.value("note", "");
      x.lower_bound = r.value("bound", "") == "lower";
      m.monitors.push_back(x);
    }
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("path"), a.at("sha256"), a.at("bytes")});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return m;
}

void detail::RunContext::snapshot(const std::string& tag, const PhysicalField& f) {
  const std::string name = "snap_" + tag + ".nssl";
  write_snapshot((fs::path(dir) / name).string(), f);
  out.files.push_back(name);
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  detail::Runner runner;
  try {
    runner = detail::prepare(cfg);
  } catch (const ContextError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ContextError(cfg.kind + ": " + e.what(), ExitCode::kConfigError);
  } catch (const Error& e) {
    throw ContextError(cfg.kind + ": " + e.what(), e.exit_code());
  }
  const std::vector<std::string> unused = cfg.raw.unused();
  if (!unused.empty()) cfg.raw.fail(unused.front(), "unknown key for experiment kind '" + cfg.kind + "'");

  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec || !fs::is_directory(cfg.output))
    throw ConfigError("output directory '" + cfg.output + "' is not writable");

  detail::RunContext ctx{cfg, cfg.output, {}};
  try {
    runner(ctx);
  } catch (const Error& e) {
    throw ContextError(cfg.kind + ": " + e.what(), e.exit_code());
  }

  std::vector<MonitorReport> kept;
  for (MonitorReport m : ctx.out.monitors) {
    const bool gated = std::any_of(cfg.monitors.begin(), cfg.monitors.end(), [&](const std::string& g) {
      return g == m.id || (!g.empty() && g.back() == ':' && m.id.rfind(g, 0) == 0);
    });
    if (!cfg.monitors.empty() && !gated &&
        m.verdict != Verdict::kReportOnly) {
      m.verdict = Verdict::kReportOnly;
      m.note += m.note.empty() ? "not gated by this config" : "; not gated by this config";
    }
    auto t = cfg.tolerances.find(m.id);
    if (t != cfg.tolerances.end()) m.rebound(t->second);
    kept.push_back(m);
  }

  const fs::path dir(cfg.output);
  ctx.out.series.write_csv((dir / "series.csv").string());
  std::string text;
  for (const auto& m : kept) text += m.format() + "\n";
  write_file((dir / "monitors.txt").string(), text);

  RunManifest man;
  man.kind = cfg.kind;
  man.config_hash = sha256_hex(cfg.raw.canonical());
  man.code_version = code_version();
  man.deterministic = cfg.deterministic;
  if (const char* t = std::getenv("NSSL_THREADS")) man.threads = std::max(1, std::atoi(t));
  man.monitors = kept;
  std::vector<std::string> files{"series.csv", "monitors.txt"};
  files.insert(files.end(), ctx.out.files.begin(), ctx.out.files.end());
  for (const std::string& f : files) {
    const std::string p = (dir / f).string();
    man.artifacts.push_back({f, sha256_file(p), static_cast<std::uint64_t>(fs::file_size(p))});
  }
  for (const auto& m : kept)
    if (m.verdict == Verdict::kFail) man.exit_code = ExitCode::kMonitorFailure;
  man.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file((dir / "manifest.json").string(), man.to_json());
  return man;
}

RunManifest run_config_file(const std::string& path, const std::string& output_override) {
  Config c = Config::load(path);
  if (!output_override.empty()) c.set("output.dir", output_override);
  return run_experiment(parse_experiment(c));
}

std::vector<std::string> verify_manifest(const std::string& dir) {
  const RunManifest m = RunManifest::from_json(read_file((fs::path(dir) / "manifest.json").string()));
  std::vector<std::string> bad;
  for (const auto& a : m.artifacts) {
    const fs::path p = fs::path(dir) / a.path;
    if (!fs::exists(p) || sha256_file(p.string()) != a.sha256) bad.push_back(a.path);
  }
  return bad;
}

std::string report_dir(const std::string& dir) {
  const RunManifest m = RunManifest::from_json(read_file((fs::path(dir) / "manifest.json").string()));
  std::ostringstream os;
  char buf[256];
  os << "kind: " << m.kind << "\n";
  os << "config_hash: " << m.config_hash << "\n";
  os << "code_version: " << m.code_version << "\n";
  std::snprintf(buf, sizeof buf, "%.3f", m.wall_clock);
  os << "wall_clock_s: " << buf << "\n";
  os << "exit_code: " << static_cast<int>(m.exit_code) << "\n";
  const std::vector<std::string> bad = verify_manifest(dir);
  os << "checksums: " << (bad.empty() ? "ok" : "MISMATCH") << "\n";
  for (const auto& b : bad) os << "  changed: " << b << "\n";
  os << "\nmonitors:\n";
  for (const auto& r : m.monitors) {
    std::snprintf(buf, sizeof buf, "  %-12s %-36s lhs %-12.6g rhs %-12.6g", verdict_name(r.verdict),
                  r.id.c_str(), r.lhs, r.rhs);
    os << buf << "\n";
  }
  const fs::path csv = fs::path(dir) / "series.csv";
  if (fs::exists(csv)) {
    const NormSeries s = NormSeries::read_csv(csv.string());
    os << "\nseries:\n";
    for (const std::string& name : s.names()) {
      const auto v = s.values(name);
      const auto t = s.times(name);
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      std::snprintf(buf, sizeof buf, "  %-36s n %-5zu t [%g, %g] min %-12.6g max %-12.6g last %.6g",
                    name.c_str(), v.size(), t.front(), t.back(), *lo, *hi, v.back());
      os << buf << "\n";
    }
  }
  return os.str();
}

std::map<std::string, DecayFit> fit_series(const std::string& csv, double t0, double t1,
                                           const std::string& name) {
  const NormSeries s = NormSeries::read_csv(csv);
  if (!name.empty() && !s.has(name)) throw ConfigError("fit: no series named '" + name + "'");
  std::map<std::string, DecayFit> out;
  for (const std::string& n : s.names()) {
    if (!name.empty() && n != name) continue;
    const auto v = s.values(n);
    if (std::any_of(v.begin(), v.end(), [](double x) { return !(x > 0.0); })) {
      if (!name.empty()) throw ConfigError("fit: series '" + n + "' has non-positive values");
      continue;
    }
    try {
      out[n] = decay_fit(s.times(n), v, t0, t1);
    } catch (const ConfigError&) {
      if (!name.empty()) throw;
    }
  }
  return out;
}

}  // namespace nssl
