#include "nssl/nssl.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "nssl/harness.hpp"
#include "nssl/snapshot.hpp"

struct nssl_run {
  nssl::RunManifest manifest;
  std::string json;
};

struct nssl_fit_set {
  std::vector<std::string> names;
  std::vector<nssl::DecayFit> fits;
};

struct nssl_snapshot {
  nssl::SnapshotHeader header;
  nssl::PhysicalField field;
};

namespace {

thread_local std::string last_error;

int fail(int code, const std::string& what) {
  last_error = what;
  return code;
}

// Runs f, translating exceptions into status codes.
template <class F>
int guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const nssl::Error& e) {
    return fail(static_cast<int>(e.exit_code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(NSSL_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NSSL_INTERNAL, e.what());
  } catch (...) {
    return fail(NSSL_INTERNAL, "unknown error");
  }
}

int null_arg(const char* name) { return fail(NSSL_CONFIG_ERROR, std::string(name) + " is null"); }

int finish_run(nssl::RunManifest m, nssl_run** run) {
  auto r = std::make_unique<nssl_run>();
  r->json = m.to_json();
  r->manifest = std::move(m);
  const int code = static_cast<int>(r->manifest.exit_code);
  if (code != NSSL_OK) last_error = "one or more monitors failed";
  *run = r.release();
  return code;
}

}  // namespace

extern "C" {

const char* nssl_version(void) { return nssl::code_version(); }

const char* nssl_last_error(void) { return last_error.c_str(); }

size_t nssl_experiment_kind_count(void) { return nssl::experiment_kinds().size(); }

const char* nssl_experiment_kind(size_t i) {
  const auto& k = nssl::experiment_kinds();
  return i < k.size() ? k[i].c_str() : nullptr;
}

size_t nssl_generator_count(void) { return nssl::generator_names().size(); }

const char* nssl_generator(size_t i) {
  const auto& g = nssl::generator_names();
  return i < g.size() ? g[i].c_str() : nullptr;
}

int nssl_run_file(const char* path, const char* out_dir, nssl_run** run) {
  if (!path) return null_arg("path");
  if (!run) return null_arg("run");
  *run = nullptr;
  return guarded([&] { return finish_run(nssl::run_config_file(path, out_dir ? out_dir : ""), run); });
}

int nssl_run_text(const char* text, const char* source, const char* out_dir, nssl_run** run) {
  if (!text) return null_arg("text");
  if (!run) return null_arg("run");
  *run = nullptr;
  return guarded([&] {
    nssl::Config c = nssl::Config::parse(text, source ? source : "config");
    if (out_dir) c.set("output.dir", out_dir);
    return finish_run(nssl::run_experiment(nssl::parse_experiment(c)), run);
  });
}

void nssl_run_free(nssl_run* run) { delete run; }

int nssl_run_exit_code(const nssl_run* run) {
  return run ? static_cast<int>(run->manifest.exit_code) : NSSL_CONFIG_ERROR;
}

const char* nssl_run_kind(const nssl_run* run) { return run ? run->manifest.kind.c_str() : ""; }

const char* nssl_run_config_hash(const nssl_run* run) {
  return run ? run->manifest.config_hash.c_str() : "";
}

const char* nssl_run_manifest_json(const nssl_run* run) { return run ? run->json.c_str() : ""; }

double nssl_run_wall_clock(const nssl_run* run) { return run ? run->manifest.wall_clock : 0.0; }

size_t nssl_run_monitor_count(const nssl_run* run) { return run ? run->manifest.monitors.size() : 0; }

int nssl_run_monitor(const nssl_run* run, size_t i, nssl_monitor* out) {
  if (!run) return null_arg("run");
  if (!out) return null_arg("out");
  if (i >= run->manifest.monitors.size()) return fail(NSSL_CONFIG_ERROR, "monitor index out of range");
  const nssl::MonitorReport& m = run->manifest.monitors[i];
  out->id = m.id.c_str();
  out->anchor = m.anchor.c_str();
  out->note = m.note.c_str();
  out->lhs = m.lhs;
  out->rhs = m.rhs;
  out->ratio = m.ratio;
  out->verdict = m.verdict == nssl::Verdict::kPass   ? NSSL_PASS
                 : m.verdict == nssl::Verdict::kFail ? NSSL_FAIL
                                                     : NSSL_REPORT_ONLY;
  out->lower_bound = m.lower_bound ? 1 : 0;
  last_error.clear();
  return NSSL_OK;
}

int nssl_report(const char* dir, char** text) {
  if (!dir) return null_arg("dir");
  if (!text) return null_arg("text");
  *text = nullptr;
  return guarded([&] {
    const std::string s = nssl::report_dir(dir);
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    *text = p;
    return NSSL_OK;
  });
}

int nssl_verify(const char* dir, size_t* mismatches) {
  if (!dir) return null_arg("dir");
  if (!mismatches) return null_arg("mismatches");
  return guarded([&] {
    *mismatches = nssl::verify_manifest(dir).size();
    return NSSL_OK;
  });
}

void nssl_string_free(char* s) { std::free(s); }

int nssl_fit_csv(const char* csv, double t0, double t1, const char* name, nssl_fit_set** fits) {
  if (!csv) return null_arg("csv");
  if (!fits) return null_arg("fits");
  *fits = nullptr;
  return guarded([&] {
    auto set = std::make_unique<nssl_fit_set>();
    for (const auto& [n, f] : nssl::fit_series(csv, t0, t1, name ? name : "")) {
      set->names.push_back(n);
      set->fits.push_back(f);
    }
    *fits = set.release();
    return NSSL_OK;
  });
}

size_t nssl_fit_count(const nssl_fit_set* fits) { return fits ? fits->fits.size() : 0; }

int nssl_fit_get(const nssl_fit_set* fits, size_t i, nssl_fit* out) {
  if (!fits) return null_arg("fits");
  if (!out) return null_arg("out");
  if (i >= fits->fits.size()) return fail(NSSL_CONFIG_ERROR, "fit index out of range");
  const nssl::DecayFit& f = fits->fits[i];
  *out = {fits->names[i].c_str(), f.slope, f.intercept, f.r2, f.t0, f.t1, f.samples};
  last_error.clear();
  return NSSL_OK;
}

void nssl_fit_free(nssl_fit_set* fits) { delete fits; }

int nssl_snapshot_open(const char* path, nssl_snapshot** snap) {
  if (!path) return null_arg("path");
  if (!snap) return null_arg("snap");
  *snap = nullptr;
  return guarded([&] {
    nssl::SnapshotHeader h = nssl::read_snapshot_header(path);
    *snap = new nssl_snapshot{std::move(h), nssl::read_snapshot(path)};
    return NSSL_OK;
  });
}

int nssl_snapshot_get_info(const nssl_snapshot* snap, nssl_snapshot_info* out) {
  if (!snap) return null_arg("snap");
  if (!out) return null_arg("out");
  const nssl::SnapshotHeader& h = snap->header;
  *out = {};
  out->version = h.version;
  out->ndim = static_cast<int>(h.dims.size());
  for (std::size_t a = 0; a < h.dims.size() && a < 3; ++a) {
    out->dims[a] = h.dims[a];
    out->lengths[a] = h.lengths[a];
  }
  out->ncomp = h.ncomp;
  out->points = snap->field.points();
  last_error.clear();
  return NSSL_OK;
}

int nssl_snapshot_component(const nssl_snapshot* snap, int c, const double** data) {
  if (!snap) return null_arg("snap");
  if (!data) return null_arg("data");
  if (c < 0 || c >= snap->field.ncomp()) return fail(NSSL_CONFIG_ERROR, "component out of range");
  *data = snap->field.component(c).data();
  last_error.clear();
  return NSSL_OK;
}

void nssl_snapshot_free(nssl_snapshot* snap) { delete snap; }

}  // extern "C"
