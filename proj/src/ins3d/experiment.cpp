#include <cmath>
#include <string>

#include "momentum.hpp"
#include "nssl/error.hpp"
#include "nssl/ins3d.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

namespace {

// Max over points of the Frobenius norm of grad(v2d + w).
double velocity_lipschitz(const BackgroundSamples& b, const SpectralField& w, bool da) {
  const Grid& g = w.grid();
  const PhysicalField gw = inverse(gradient_tensor(da ? dealias(w) : w));
  const std::size_t n = g.size(), n2 = g.dim(2);
  double m = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t q = p / n2;
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double d = gw.component(3 * i + j)[p];
        if (j < 2) d += b.grad.component(2 * i + j)[q];
        s += d * d;
      }
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

}  // namespace

StabilityReport stability_experiment(std::shared_ptr<Background> bg, const PhysicalField& h0,
                                     const SpectralField& w0, const Ins3dOptions& opt,
                                     const StabilityConfig& cfg) {
  if (cfg.cadence < 1) throw ConfigError("stability: cadence must be >= 1");
  if (!(cfg.p > 1.0)) throw ConfigError("stability: p must exceed 1");
  const long nsteps = std::lround(cfg.T / opt.dt);
  if (nsteps < 1 || std::abs(nsteps * opt.dt - cfg.T) > 1e-9 * cfg.T)
    throw ConfigError("stability: T must be a positive multiple of dt");

  PerturbationSolver s(bg, h0, w0, opt);
  StabilityReport rep;
  const double s_besov = 2.0 - 2.0 / cfg.p;

  const double h0_2 = lp_norm(h0, 2.0), h0_inf = lp_norm(h0, kInf);
  const double w0_2 = std::sqrt(l2_norm_sq(s.state().w));
  const double w0_b = besov_norm(s.state().w, s_besov, cfg.p);
  const double data_l2 = std::sqrt(w0_2 * w0_2 + h0_2 * h0_2);
  const double gradh0_3 = gradient_lp_norm(forward(h0), 1, 3.0);

  double sup_h = 0.0, sup_w = 0.0, sup_gradh = 0.0, max_div = 0.0, max_excess = 0.0;
  double lip_int = 0.0, lip_prev = 0.0;
  std::vector<double> grad_w_sq;

  auto record = [&] {
    const PerturbationState& st = s.state();
    const double t = st.t;
    const double h2 = lp_norm(st.h, 2.0), hinf = lp_norm(st.h, kInf);
    const double w2 = std::sqrt(l2_norm_sq(st.w));
    const double gh = gradient_lp_norm(forward(st.h), 1, 3.0);
    const double div = max_divergence(st.w);
    sup_h = std::max(sup_h, h2 + hinf);
    sup_w = std::max(sup_w, w2);
    sup_gradh = std::max(sup_gradh, gh);
    max_div = std::max(max_div, div);
    NormSeries& ser = rep.series;
    ser.add(t, "h:L2", h2);
    ser.add(t, "h:Linf", hinf);
    ser.add(t, "w:L2", w2);
    ser.add(t, "grad_w:int_sq", simpson(grad_w_sq, opt.dt));
    ser.add(t, "grad_h:L3", gh);
    ser.add(t, "grad_v:Linf_int", lip_int);
    ser.add(t, "div_w:max", div);
    ser.add(t, "inner:ratio", s.inner_stats().max_ratio);
    if (cfg.on_record) cfg.on_record(s);
  };
  auto accumulate = [&](bool first) {
    const PerturbationState& st = s.state();
    grad_w_sq.push_back(gradient_l2_norm_sq(st.w, 1));
    const double lip = velocity_lipschitz(bg->samples(st.step), st.w, opt.dealias);
    if (!first) lip_int += 0.5 * opt.dt * (lip + lip_prev);
    lip_prev = lip;
    const InnerStats& is = s.inner_stats();
    max_excess = std::max(max_excess, is.max_ratio - is.h_inf);
  };

  accumulate(true);
  record();
  try {
    for (long n = 1; n <= nsteps; ++n) {
      s.step();
      accumulate(false);
      if (n % cfg.cadence == 0 || n == nsteps) record();
    }
  } catch (const NumericalError& e) {
    rep.failed = true;
    rep.failure_time = s.state().t + opt.dt;
    MonitorReport m = bound_monitor("solver", "time stepping completes", rep.failure_time, cfg.T);
    m.verdict = Verdict::kFail;
    m.note = e.what();
    rep.monitors.push_back(m);
  }

  const double dissip = std::sqrt(simpson(grad_w_sq, opt.dt));
  const double h0_sum = h0_2 + h0_inf;
  rep.density_ratio = h0_sum > 0.0 ? sup_h / h0_sum : 0.0;
  rep.amplification = data_l2 > 0.0 ? (sup_w + dissip) / data_l2 : 0.0;

  rep.monitors.push_back(bound_monitor("density-bound",
                                       "transport keeps ||h||_L2 + ||h||_Linf at its initial value",
                                       sup_h, h0_sum * (1.0 + cfg.tol)));
  rep.monitors.back().ratio = rep.density_ratio;
  rep.monitors.push_back(report_only("energy-amplification",
                                     "sup ||w||_L2 + (int ||grad w||^2)^1/2 against ||(w0, h0)||_L2",
                                     sup_w + dissip, data_l2));
  rep.monitors.push_back(bound_monitor(
      "density-gradient-growth", "sup ||grad h||_L3 <= ||grad h0||_L3 exp(int ||grad v||_Linf)",
      sup_gradh, gradh0_3 * std::exp(lip_int)));
  rep.monitors.back().note = "int ||grad v||_Linf = " + std::to_string(lip_int);

  {
    const SpectralField& v2d0 = bg->v(0);
    const double v_l2 = std::sqrt(l2_norm_sq(v2d0));
    const double v_b = besov_norm(v2d0, s_besov, cfg.p);
    const double lhs = h0_2 + h0_inf + w0_2 + w0_b;
    const double inner = std::pow(v_l2 + v_b, 4.0 * cfg.p) + 1.0;
    const double rhs = cfg.c0 * std::exp(-cfg.c_prime * inner *
                                         std::exp(cfg.c_prime * (1.0 + std::pow(v_l2, 4.0))));
    MonitorReport m = report_only("smallness",
                                  "data size against c0 exp(-C'(|v2d0|^4p + 1) e^{C'(1 + |v2d0|_L2^4)})",
                                  lhs, rhs);
    char buf[160];
    std::snprintf(buf, sizeof buf, "||v2d0||_L2 = %.6g, ||v2d0||_B = %.6g, c0 = %g, C' = %g", v_l2,
                  v_b, cfg.c0, cfg.c_prime);
    m.note = buf;
    rep.monitors.push_back(m);
  }
  rep.monitors.push_back(bound_monitor("divergence", "max |div w| at recorded times", max_div, 1e-11));
  rep.monitors.push_back(bound_monitor("inner-contraction",
                                       "fixed-point ratio minus ||h||_Linf per sweep", max_excess,
                                       0.05));
  return rep;
}

}  // namespace nssl
