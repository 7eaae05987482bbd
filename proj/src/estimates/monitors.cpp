#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nssl/estimates.hpp"

namespace nssl {

MonitorReport conservation_monitor(std::string id, std::string anchor,
                                   const std::vector<double>& v, double tol) {
  double drift = 0.0;
  if (!v.empty() && v.front() != 0.0)
    for (double x : v) drift = std::max(drift, std::abs(x - v.front()) / std::abs(v.front()));
  return bound_monitor(std::move(id), std::move(anchor), drift, tol);
}

MonitorReport monotone_monitor(std::string id, std::string anchor, const std::vector<double>& v,
                               double tol) {
  double rise = 0.0;
  if (!v.empty() && v.front() != 0.0) {
    double lo = v.front();
    for (double x : v) {
      rise = std::max(rise, (x - lo) / std::abs(v.front()));
      lo = std::min(lo, x);
    }
  }
  return bound_monitor(std::move(id), std::move(anchor), rise, tol);
}

std::vector<MonitorReport> hns2d_monitors(const NormSeries& s, const InequalityTolerances& tol) {
  std::vector<MonitorReport> out;
  if (s.has("energy_ledger"))
    out.push_back(conservation_monitor("energy-inequality",
                                       "||v(t)||^2 + 2 int_0^t ||grad v||^2 = ||v0||^2",
                                       s.values("energy_ledger"), tol.energy));
  for (const std::string& name : s.names()) {
    if (name.rfind("vorticity:Lp:", 0) != 0) continue;
    const std::string p = name.substr(13);
    out.push_back(monotone_monitor("vorticity-Lp:" + p, "||omega(t)||_Lp <= ||omega0||_Lp, p = " + p,
                                   s.values(name), tol.monotone));
  }
  if (s.has("v3:Linf"))
    out.push_back(monotone_monitor("v3-maximum-principle", "||v3(t)||_Linf <= ||v3(0)||_Linf",
                                   s.values("v3:Linf"), tol.monotone));
  return out;
}

std::vector<MonitorReport> weighted_monitors(const NormSeries& s, double transient) {
  std::vector<MonitorReport> out;
  for (const std::string& name : s.names()) {
    if (name.rfind("weighted:", 0) != 0) continue;
    const std::vector<double> v = s.values(name);
    const bool cumulative = name.find("int_t") != std::string::npos;
    const std::size_t head = v.size() - std::max<std::size_t>(1, v.size() / 10);
    const double all = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    const double early = head == 0 ? 0.0 : *std::max_element(v.begin(), v.begin() + head);
    MonitorReport m = report_only(name, "time-weighted bound on " + name.substr(9), all, early);
    const bool finite = std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    const bool settled = !v.empty() && s.times(name).back() > transient;
    if (!finite || settled) m.verdict = bounded_series(v, cumulative) ? Verdict::kPass : Verdict::kFail;
    char buf[128];
    std::snprintf(buf, sizeof buf, "running max %.6g, final %.6g%s", all, v.empty() ? 0.0 : v.back(),
                  settled ? "" : "; run ends inside the initial transient");
    m.note = buf;
    out.push_back(m);
  }
  return out;
}

}  // namespace nssl
