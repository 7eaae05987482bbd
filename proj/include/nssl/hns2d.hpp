#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nssl/estimates.hpp"
#include "nssl/field.hpp"

// Three-component 2D homogeneous Navier-Stokes: the horizontal field
// (v1, v2) is incompressible and advects all three components.

namespace nssl {

enum class Hns2dScheme { kExpAB2, kLawsonRK4 };

struct Hns2dOptions {
  double dt = 1e-3;
  Hns2dScheme scheme = Hns2dScheme::kExpAB2;
  double cfl_limit = 0.5;
  bool dealias = true;
};

class Hns2dSolver {
 public:
  /// v0: three components on a 2D grid; it is horizontally projected.
  Hns2dSolver(const SpectralField& v0, Hns2dOptions opt);

  const SpectralField& v() const { return v_; }
  double t() const { return t_; }
  long steps() const { return steps_; }
  const Hns2dOptions& options() const { return opt_; }
  const Grid& grid() const { return v_.grid(); }

  /// Advances one step of size options().dt. Throws StabilityError when the
  /// advective CFL number exceeds the limit.
  void step();

  /// -P_h[v_h . grad_h v] with the mean mode zeroed (dealiased).
  SpectralField nonlinear(const SpectralField& v) const;
  /// Lap v + nonlinear(v): the time derivative from the right side.
  SpectralField rhs(const SpectralField& v) const;
  /// Zero-mean pressure with grad p = -(I - P_h)(v_h . grad_h v).
  SpectralField pressure(const SpectralField& v) const;
  /// max(|v1|/dx1 + |v2|/dx2) dt
  double cfl(const SpectralField& v) const;

  /// N(v) of the current state (cached from the last step).
  const SpectralField& current_nonlinear() const;

 private:
  SpectralField advective(const SpectralField& v, double* cfl_out) const;

  Hns2dOptions opt_;
  SpectralField v_;
  double t_ = 0.0;
  long steps_ = 0;
  std::optional<SpectralField> n_prev_;
  mutable std::optional<SpectralField> n_cur_;
  mutable double cfl_cur_ = 0.0;
  std::vector<double> e_, p1_, p2_, ehalf_;
};

struct Hns2dRecordOptions {
  double T = 1.0;
  int cadence = 1;                 // record every `cadence` steps
  std::vector<double> vorticity_p{2.0, 4.0, 6.0};
  std::vector<double> cz_p{4.0};   // Calderon-Zygmund ratio exponents
  bool weighted = true;
  bool decay = false;              // L-inf decay norms and contamination
  double contamination_radius = 0.0;  // about the box centre; 0 = L/4
  /// Called after every recorded time with the current solver.
  std::function<void(const Hns2dSolver&)> on_record;
};

struct Hns2dRun {
  NormSeries series;
  SpectralField final_v;
  double initial_energy = 0.0;
  std::vector<double> mean_drift;  // max |mean(v_h)(t) - mean(v_h)(0)| per record
};

/// Time-steps to T recording diagnostics at the cadence:
/// energy, dissipation (int ||grad v||^2), energy_ledger, vorticity_Lp:p,
/// v3_Linf, weighted:* monitors, v_L2Linf_sq, cz_ratio:p, and with
/// decay = true v_Linf, grad_v_Linf, dtv_Linf and contamination.
Hns2dRun hns2d_solve(const SpectralField& v0, const Hns2dOptions& opt,
                     const Hns2dRecordOptions& rec);

/// Composite Simpson on uniformly spaced samples (3/8 rule closes an odd
/// count of intervals; trapezoid for a single interval).
double simpson(const std::vector<double>& g, double h);

/// Energy fraction of `v` outside a disc of the given radius about the box
/// centre.
double contamination(const SpectralField& v, double radius);

struct DecayProbeResult {
  DecayFit v_linf, grad_v_linf, dtv_linf;
  DecayFit oracle_v_linf, oracle_grad_v_linf, oracle_dtv_linf;
  double t0 = 0.0, t1 = 0.0;
  bool contaminated = false;
  NormSeries series;
};

/// Runs the nonlinear solver from v0 and the spectral heat oracle e^{t Lap} v0
/// side by side, fitting log-log slopes of ||v||_inf, ||grad v||_inf and
/// ||v_t||_inf over [t0, t1]. t1 is cut where the contamination monitor
/// exceeds contamination_tol (flagged).
DecayProbeResult hns2d_decay_probe(const SpectralField& v0, const Hns2dOptions& opt, double t0,
                                   double t1, int samples, double contamination_tol = 1e-6);

}  // namespace nssl
