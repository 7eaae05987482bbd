#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nssl/field.hpp"
#include "nssl/stokes.hpp"

namespace nssl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- norms ---------------------------------------------------------------

/// Lp norm with uniform quadrature weights; vector fields use the pointwise
/// Euclidean magnitude. p = kInf gives the max.
double lp_norm(const PhysicalField& f, double p);
double lp_norm(const SpectralField& f, double p);

/// ||grad^order f||_{Lp} with the pointwise Frobenius norm of the tensor.
double gradient_lp_norm(const SpectralField& f, int order, double p);

/// sum_{j=0..order} ||grad^j f||_{Lp}
double sobolev_norm(const SpectralField& f, int order, double p);

/// Homogeneous Besov norm over sharp dyadic shells 2^j <= |k| < 2^{j+1},
/// weighted by 2^{js}; the mean mode is excluded. Requires p in (1, inf)
/// and |s| <= 4.
double besov_norm(const SpectralField& f, double s, double p);

/// (int_0^T g(t)^r dt)^{1/r} by the trapezoid rule; r = kInf gives the max.
double time_norm(const std::vector<double>& t, const std::vector<double>& g, double r);

/// ||a||_{L_{2p/(2p-n)}(0,T; L_{2p/(p+2)})} + ||b||_{L2(0,T;L2)}, n the grid
/// dimension. Either list may be empty (treated as zero).
double sumspace_norm(const std::vector<double>& t, const std::vector<SpectralField>& a,
                     const std::vector<SpectralField>& b, double p);

// ---- series and fits -----------------------------------------------------

class NormSeries {
 public:
  /// Appends (t, value) to series `name`. Throws NumericalError on a
  /// non-finite value and ConfigError if t does not increase.
  void add(double t, const std::string& name, double value);

  bool has(const std::string& name) const { return series_.count(name) != 0; }
  const std::vector<std::pair<double, double>>& get(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<double> times(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
  std::size_t records() const { return order_.size(); }

  /// CSV with header `t,name,value`, values printed with %.17g, in insertion
  /// order.
  void write_csv(const std::string& path) const;
  static NormSeries read_csv(const std::string& path);

 private:
  std::map<std::string, std::vector<std::pair<double, double>>> series_;
  std::vector<std::pair<std::string, std::size_t>> order_;
};

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double t0 = 0.0, t1 = 0.0;
  int samples = 0;
  bool contaminated = false;
};

/// Least squares of log(value) against log(t) over samples with t0 <= t <= t1.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& v, double t0,
                   double t1, bool contaminated = false);

// ---- monitor reports -----------------------------------------------------

enum class Verdict { kPass, kFail, kReportOnly };
const char* verdict_name(Verdict v);

struct MonitorReport {
  std::string id;
  std::string anchor;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  Verdict verdict = Verdict::kReportOnly;
  std::string note;
  bool lower_bound = false;  // passes when lhs >= rhs

  /// Replaces rhs and re-derives ratio and verdict (report-only stays so).
  void rebound(double new_rhs);

  /// monitor:/anchor:/lhs:/rhs:/ratio:/verdict: lines (plus note: if set).
  std::string format() const;
};

/// Pass iff lhs <= rhs; ratio = lhs / rhs (0 when both vanish).
MonitorReport bound_monitor(std::string id, std::string anchor, double lhs, double rhs);
MonitorReport report_only(std::string id, std::string anchor, double lhs, double rhs);
/// Pass iff lhs >= rhs.
MonitorReport floor_monitor(std::string id, std::string anchor, double lhs, double rhs);

// ---- inequality monitors -------------------------------------------------

/// max_t |g(t) - g(0)| / g(0) against tol (0 when g(0) = 0).
MonitorReport conservation_monitor(std::string id, std::string anchor,
                                   const std::vector<double>& v, double tol);
/// Largest rise above the running minimum, relative to g(0), against tol.
MonitorReport monotone_monitor(std::string id, std::string anchor, const std::vector<double>& v,
                               double tol);

struct InequalityTolerances {
  double energy = 1e-6;     // relative drift of ||v||^2 + 2 int ||grad v||^2
  double monotone = 1e-3;   // vorticity Lp and v3 Linf
};

/// Energy ledger, vorticity Lp monotonicity for every recorded p and the v3
/// maximum principle from an hns2d series.
std::vector<MonitorReport> hns2d_monitors(const NormSeries& s, const InequalityTolerances& tol = {});

/// One monitor per recorded weighted:* series: lhs its running maximum,
/// rhs the maximum before the final tenth; fails only when bounded_series
/// rejects the series. Runs ending before `transient` (t^a e^{-2|k|^2 t}
/// peaks at a / (2|k|^2)) are report-only.
std::vector<MonitorReport> weighted_monitors(const NormSeries& s, double transient = 2.0);

// ---- maximal regularity --------------------------------------------------

struct MaxRegParts {
  double sup_besov = 0.0;
  double ut = 0.0, hess = 0.0, gradq = 0.0;  // Lp(0,T;Lp) norms
  double forcing = 0.0, data = 0.0;
  double lhs() const { return sup_besov + ut + hess + gradq; }
  double rhs() const { return forcing + data; }
  double ratio() const { return lhs() / rhs(); }
};

/// Maximal-regularity ratio of a Stokes trajectory with Besov index 2-2/p.
/// The forcing is recovered from the trajectory as u_t + grad Q - Lap u.
/// Throws InconsistentDataError when u0 = 0 and f = 0.
MaxRegParts maxreg_parts(const StokesTrajectory& traj, double p);
MonitorReport maxreg_ratio(const StokesTrajectory& traj, double p);

// ---- time-weighted quantities --------------------------------------------

/// Pass when a series shows no sustained growth: the maximum over the last
/// `tail` fraction of samples stays within rel_slack of the earlier maximum.
/// Cumulative series pass when they grow over the tail at most half as fast
/// as their average rate.
bool bounded_series(const std::vector<double>& v, bool cumulative, double tail = 0.1,
                    double rel_slack = 0.1);

/// Measured constants of interpolation inequalities on a random ensemble
/// (report-only): Ladyzhenskaya ||u||_4^2 / (||u||_2 ||grad u||_2) in 2D and
/// ||u||_3 / (||u||_2^{1/2} ||grad u||_2^{1/2}) in 3D; returns the maximum.
double interpolation_constant(const Grid& grid, int samples, unsigned seed);

}  // namespace nssl
