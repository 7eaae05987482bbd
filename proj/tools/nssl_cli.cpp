#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nssl/nssl.h"

namespace {

const char* verdict_label(int v) {
  switch (v) {
    case NSSL_PASS: return "PASS";
    case NSSL_FAIL: return "FAIL";
    default: return "REPORT";
  }
}

// Exit codes are capped at the documented range.
int exit_of(int status) { return status == NSSL_INTERNAL ? NSSL_NUMERICAL_ERROR : status; }

int error(int status) {
  std::fprintf(stderr, "nssl: error: %s\n", nssl_last_error());
  return exit_of(status);
}

int run_one(const std::string& config, const std::string& out) {
  nssl_run* run = nullptr;
  const int status = nssl_run_file(config.c_str(), out.empty() ? nullptr : out.c_str(), &run);
  if (!run) return error(status);
  std::string text = config + ": " + nssl_run_kind(run) + "\n";
  char buf[512];
  for (size_t i = 0; i < nssl_run_monitor_count(run); ++i) {
    nssl_monitor m;
    nssl_run_monitor(run, i, &m);
    std::snprintf(buf, sizeof buf, "  %-6s %-36s lhs %-12.6g %s %-12.6g\n", verdict_label(m.verdict),
                  m.id, m.lhs, m.lower_bound ? ">=" : "<=", m.rhs);
    text += buf;
  }
  std::snprintf(buf, sizeof buf, "  config %.12s  wall %.2fs  exit %d\n", nssl_run_config_hash(run),
                nssl_run_wall_clock(run), status);
  text += buf;
  std::fputs(text.c_str(), stdout);
  std::fflush(stdout);
  nssl_run_free(run);
  return status;
}

int workers() {
  const char* t = std::getenv("NSSL_THREADS");
  const int n = t ? std::atoi(t) : 1;
  return std::max(1, n);
}

int run_batch(const std::vector<std::string>& configs, const std::string& out) {
  auto out_for = [&](const std::string& c) {
    if (out.empty() || configs.size() == 1) return out;
    return (std::filesystem::path(out) / std::filesystem::path(c).stem()).string();
  };
  const int jobs = workers();
  if (configs.size() == 1 || jobs == 1) {
    int worst = 0;
    for (const auto& c : configs) worst = std::max(worst, run_one(c, out_for(c)));
    return worst;
  }
  std::fflush(stdout);
  std::map<pid_t, std::string> live;
  int worst = 0;
  auto reap = [&] {
    int st = 0;
    const pid_t pid = ::wait(&st);
    if (pid <= 0) return;
    const int code = WIFEXITED(st) ? WEXITSTATUS(st) : NSSL_NUMERICAL_ERROR;
    if (!WIFEXITED(st)) std::fprintf(stderr, "nssl: error: %s: worker terminated\n", live[pid].c_str());
    worst = std::max(worst, code);
    live.erase(pid);
  };
  for (const auto& c : configs) {
    while (static_cast<int>(live.size()) >= jobs) reap();
    const pid_t pid = ::fork();
    if (pid < 0) {
      std::fprintf(stderr, "nssl: error: fork failed\n");
      worst = std::max(worst, static_cast<int>(NSSL_NUMERICAL_ERROR));
      break;
    }
    if (pid == 0) std::_Exit(exit_of(run_one(c, out_for(c))));
    live[pid] = c;
  }
  while (!live.empty()) reap();
  return worst;
}

int fit(const std::string& csv, const std::vector<double>& window, const std::string& name) {
  nssl_fit_set* fits = nullptr;
  const int status = nssl_fit_csv(csv.c_str(), window[0], window[1], name.empty() ? nullptr : name.c_str(), &fits);
  if (status != NSSL_OK) return error(status);
  std::printf("%-36s %12s %12s %8s %6s\n", "series", "slope", "intercept", "r2", "n");
  for (size_t i = 0; i < nssl_fit_count(fits); ++i) {
    nssl_fit f;
    nssl_fit_get(fits, i, &f);
    std::printf("%-36s %12.6f %12.6f %8.5f %6d\n", f.name, f.slope, f.intercept, f.r2, f.samples);
  }
  nssl_fit_free(fits);
  return 0;
}

int report(const std::string& dir) {
  char* text = nullptr;
  const int status = nssl_report(dir.c_str(), &text);
  if (status != NSSL_OK) return error(status);
  std::fputs(text, stdout);
  nssl_string_free(text);
  size_t bad = 0;
  nssl_verify(dir.c_str(), &bad);
  return bad ? NSSL_MONITOR_FAILURE : 0;
}

int snapshot(const std::string& mode, const std::string& file, int component, long limit) {
  nssl_snapshot* snap = nullptr;
  int status = nssl_snapshot_open(file.c_str(), &snap);
  if (status != NSSL_OK) return error(status);
  nssl_snapshot_info info;
  nssl_snapshot_get_info(snap, &info);
  std::printf("# version %u ndim %d ncomp %d dims", info.version, info.ndim, info.ncomp);
  for (int a = 0; a < info.ndim; ++a) std::printf(" %d", info.dims[a]);
  std::printf(" lengths");
  for (int a = 0; a < info.ndim; ++a) std::printf(" %.17g", info.lengths[a]);
  std::printf("\n");
  std::vector<const double*> comps(info.ncomp);
  for (int c = 0; c < info.ncomp; ++c) nssl_snapshot_component(snap, c, &comps[c]);
  if (mode == "info") {
    for (int c = 0; c < info.ncomp; ++c) {
      double lo = comps[c][0], hi = comps[c][0], sq = 0.0, sum = 0.0;
      for (size_t p = 0; p < info.points; ++p) {
        lo = std::min(lo, comps[c][p]);
        hi = std::max(hi, comps[c][p]);
        sum += comps[c][p];
        sq += comps[c][p] * comps[c][p];
      }
      std::printf("component %d: min %.6g max %.6g mean %.6g rms %.6g\n", c, lo, hi,
                  sum / info.points, std::sqrt(sq / info.points));
    }
  } else {
    if (component >= info.ncomp) {
      nssl_snapshot_free(snap);
      std::fprintf(stderr, "nssl: error: component %d out of range (ncomp %d)\n", component, info.ncomp);
      return NSSL_CONFIG_ERROR;
    }
    std::printf("index");
    for (int a = 0; a < info.ndim; ++a) std::printf(",x%d", a + 1);
    for (int c = 0; c < info.ncomp; ++c)
      if (component < 0 || c == component) std::printf(",c%d", c);
    std::printf("\n");
    const size_t n = limit > 0 ? std::min<size_t>(info.points, limit) : info.points;
    for (size_t p = 0; p < n; ++p) {
      std::printf("%zu", p);
      size_t rest = p, stride = info.points;
      for (int a = 0; a < info.ndim; ++a) {
        stride /= info.dims[a];
        const size_t i = rest / stride;
        rest %= stride;
        std::printf(",%.17g", info.lengths[a] * i / info.dims[a]);
      }
      for (int c = 0; c < info.ncomp; ++c)
        if (component < 0 || c == component) std::printf(",%.17g", comps[c][p]);
      std::printf("\n");
    }
  }
  nssl_snapshot_free(snap);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navier-Stokes stability laboratory"};
  app.set_version_flag("--version", nssl_version());
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out;
  auto* run = app.add_subcommand("run", "run experiment configs (NSSL_THREADS workers in batch)");
  run->add_option("config", configs, "config files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (one subdirectory per config in batch)");

  std::string csv, name;
  std::vector<double> window;
  auto* fitc = app.add_subcommand("fit", "log-log slope fits of series over a time window");
  fitc->add_option("--series", csv, "series CSV")->required()->check(CLI::ExistingFile);
  fitc->add_option("--window", window, "t0,t1")->required()->delimiter(',')->expected(2);
  fitc->add_option("--name", name, "fit only this series");

  std::string dir;
  auto* rep = app.add_subcommand("report", "summarize a run directory and verify checksums");
  rep->add_option("dir", dir)->required()->check(CLI::ExistingDirectory);

  std::string mode, file;
  int component = -1;
  long limit = 0;
  auto* snap = app.add_subcommand("snapshot", "inspect a field snapshot");
  snap->add_option("mode", mode)->required()->check(CLI::IsMember({"dump", "info"}));
  snap->add_option("file", file)->required()->check(CLI::ExistingFile);
  snap->add_option("--component", component, "dump a single component");
  snap->add_option("--limit", limit, "dump at most this many points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : NSSL_CONFIG_ERROR;
  }

  if (*run) return run_batch(configs, out);
  if (*fitc) {
    if (window[0] >= window[1]) {
      std::fprintf(stderr, "nssl: error: --window needs t0 < t1\n");
      return NSSL_CONFIG_ERROR;
    }
    return fit(csv, window, name);
  }
  if (*rep) return report(dir);
  return snapshot(mode, file, component, limit);
}
