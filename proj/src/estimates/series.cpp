#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nssl/error.hpp"
#include "nssl/estimates.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

void NormSeries::add(double t, const std::string& name, double value) {
  if (!std::isfinite(value))
    throw NumericalError("series " + name + ": non-finite value at t = " + std::to_string(t));
  auto& s = series_[name];
  if (!s.empty() && !(t > s.back().first))
    throw ConfigError("series " + name + ": time " + std::to_string(t) + " does not increase");
  s.emplace_back(t, value);
  order_.emplace_back(name, s.size() - 1);
}

const std::vector<std::pair<double, double>>& NormSeries::get(const std::string& name) const {
  auto it = series_.find(name);
  if (it == series_.end()) throw ConfigError("series: no records named " + name);
  return it->second;
}

std::vector<std::string> NormSeries::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : series_) out.push_back(k);
  return out;
}

std::vector<double> NormSeries::times(const std::string& name) const {
  std::vector<double> out;
  for (const auto& [t, v] : get(name)) out.push_back(t);
  return out;
}

std::vector<double> NormSeries::values(const std::string& name) const {
  std::vector<double> out;
  for (const auto& [t, v] : get(name)) out.push_back(v);
  return out;
}

void NormSeries::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot write " + path);
  std::fputs("t,name,value\n", f);
  for (const auto& [name, i] : order_) {
    const auto& rec = series_.at(name)[i];
    std::fprintf(f, "%.17g,%s,%.17g\n", rec.first, name.c_str(), rec.second);
  }
  std::fclose(f);
}

NormSeries NormSeries::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open series " + path);
  std::string line;
  int lineno = 0;
  NormSeries s;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != "t,name,value") throw ConfigError(path + ":1: expected header t,name,value");
      continue;
    }
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed record");
    try {
      s.add(std::stod(line.substr(0, a)), line.substr(a + 1, b - a - 1), std::stod(line.substr(b + 1)));
    } catch (const std::invalid_argument&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return s;
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& v, double t0,
                   double t1, bool contaminated) {
  if (t.size() != v.size()) throw ConfigError("decay_fit: size mismatch");
  if (!(t1 > t0) || !(t0 > 0.0)) throw ConfigError("decay_fit: window must satisfy 0 < t0 < t1");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0 && t[i] <= t1 && v[i] > 0.0) {
      x.push_back(std::log(t[i]));
      y.push_back(std::log(v[i]));
    }
  if (x.size() < 8)
    throw ConfigError("decay_fit: window [" + std::to_string(t0) + ", " + std::to_string(t1) +
                      "] holds " + std::to_string(x.size()) + " samples, need >= 8");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.t0 = t0;
  fit.t1 = t1;
  fit.samples = static_cast<int>(x.size());
  fit.contaminated = contaminated;
  return fit;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kReportOnly: return "report-only";
  }
  return "?";
}

std::string MonitorReport::format() const {
  char buf[64];
  std::ostringstream os;
  os << "monitor: " << id << "\n";
  os << "anchor: " << anchor << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", lhs);
  os << "lhs: " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", rhs);
  os << "rhs: " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", ratio);
  os << "ratio: " << buf << "\n";
  os << "verdict: " << verdict_name(verdict) << "\n";
  if (lower_bound) os << "bound: lower\n";
  if (!note.empty()) os << "note: " << note << "\n";
  return os.str();
}

namespace {

double safe_ratio(double lhs, double rhs) {
  if (rhs == 0.0) return lhs == 0.0 ? 0.0 : kInf;
  return lhs / rhs;
}

}  // namespace

MonitorReport bound_monitor(std::string id, std::string anchor, double lhs, double rhs) {
  MonitorReport r{std::move(id), std::move(anchor), lhs, rhs, safe_ratio(lhs, rhs), Verdict::kReportOnly, {}};
  r.verdict = lhs <= rhs ? Verdict::kPass : Verdict::kFail;
  return r;
}

MonitorReport floor_monitor(std::string id, std::string anchor, double lhs, double rhs) {
  MonitorReport r = bound_monitor(std::move(id), std::move(anchor), lhs, rhs);
  r.lower_bound = true;
  r.verdict = lhs >= rhs ? Verdict::kPass : Verdict::kFail;
  return r;
}

void MonitorReport::rebound(double new_rhs) {
  rhs = new_rhs;
  ratio = safe_ratio(lhs, rhs);
  if (verdict == Verdict::kReportOnly) return;
  verdict = (lower_bound ? lhs >= rhs : lhs <= rhs) ? Verdict::kPass : Verdict::kFail;
}

MonitorReport report_only(std::string id, std::string anchor, double lhs, double rhs) {
  MonitorReport r{std::move(id), std::move(anchor), lhs, rhs, safe_ratio(lhs, rhs), Verdict::kReportOnly, {}};
  r.verdict = Verdict::kReportOnly;
  return r;
}

MaxRegParts maxreg_parts(const StokesTrajectory& traj, double p) {
  if (traj.steps.empty()) throw ConfigError("maxreg: empty trajectory");
  const double s = 2.0 - 2.0 / p;
  std::vector<double> t, ut, hess, gq, fo;
  MaxRegParts parts;
  for (const auto& st : traj.steps) {
    t.push_back(st.t);
    parts.sup_besov = std::max(parts.sup_besov, besov_norm(st.u, s, p));
    ut.push_back(lp_norm(st.u_t, p));
    hess.push_back(gradient_lp_norm(st.u, 2, p));
    gq.push_back(lp_norm(st.gradQ, p));
    SpectralField f = st.u_t;
    f += st.gradQ;
    f -= laplacian(st.u);
    fo.push_back(lp_norm(f, p));
  }
  parts.ut = time_norm(t, ut, p);
  parts.hess = time_norm(t, hess, p);
  parts.gradq = time_norm(t, gq, p);
  parts.forcing = time_norm(t, fo, p);
  parts.data = besov_norm(traj.steps.front().u, s, p);
  if (parts.rhs() == 0.0) throw InconsistentDataError("maxreg: degenerate input (u0 = 0 and f = 0)");
  return parts;
}

MonitorReport maxreg_ratio(const StokesTrajectory& traj, double p) {
  const MaxRegParts m = maxreg_parts(traj, p);
  MonitorReport r = report_only("stokes-maximal-regularity",
                                "Stokes maximal regularity: sup Besov(2-2/p,p,p) + ||u_t, D^2 u, grad Q||_{Lp(Lp)} "
                                "<= C (||f||_{Lp(Lp)} + ||u0||_Besov), C independent of T",
                                m.lhs(), m.rhs());
  return r;
}

bool bounded_series(const std::vector<double>& v, bool cumulative, double tail, double rel_slack) {
  if (v.empty()) return true;
  for (double x : v)
    if (!std::isfinite(x)) return false;
  const std::size_t n = v.size();
  const std::size_t start = n - std::max<std::size_t>(1, static_cast<std::size_t>(tail * n));
  if (cumulative) {
    // Saturation: the tail grows at most half as fast as the run average.
    const double total = v.back() - v.front();
    const double frac = static_cast<double>(n - 1 - start) / static_cast<double>(n - 1);
    return total == 0.0 || v.back() - v[start] <= 0.5 * frac * total;
  }
  double head_max = 0.0, tail_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double& m = i < start ? head_max : tail_max;
    m = std::max(m, v[i]);
  }
  return tail_max <= (1.0 + rel_slack) * head_max || tail_max == 0.0;
}

}  // namespace nssl
