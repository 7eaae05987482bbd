#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nssl/estimates.hpp"
#include "nssl/field.hpp"
#include "nssl/hns2d.hpp"

// 3D variable-density perturbation around a three-component 2D background:
// h = rho - 1, w = v - v2d, q = p - p2d, with
//   h_t + v.grad h = 0,
//   w_t + v.grad w - Lap w + grad q = F,  div w = 0,
//   F = -h v2d_t - h w_t - h v.grad w - (1+h) w_h.grad_h v2d - h v2d_h.grad_h v2d.

namespace nssl {

/// Physical 2D samples of the background at one time, built from dealiased
/// coefficients. A 3D point with linear index p reads entry p / n3.
struct BackgroundSamples {
  PhysicalField v;     // v2d, 3 components
  PhysicalField grad;  // d_a v2d_i at component 2*i + a, a in {0, 1}
  PhysicalField vt;    // d/dt v2d
  PhysicalField adv;   // v2d_h . grad_h v2d
};

/// The 2D trajectory at multiples of dt, advanced on demand and cached.
class Background {
 public:
  Background(const SpectralField& v2d0, Grid grid3d, Hns2dOptions opt);

  const Grid& grid2d() const { return solver_.grid(); }
  const Grid& grid3d() const { return grid3d_; }
  double dt() const { return solver_.options().dt; }
  const Hns2dOptions& options() const { return solver_.options(); }

  /// v2d at t = j dt.
  const SpectralField& v(long j);
  /// Lap v + nonlinear(v) at t = j dt.
  SpectralField v_t(long j);
  BackgroundSamples samples(long j);

 private:
  Grid grid3d_;
  Hns2dSolver solver_;
  std::vector<SpectralField> traj_;
};

enum class DensityScheme { kSemiLagrangian, kSpectral };

struct DensityOptions {
  DensityScheme scheme = DensityScheme::kSemiLagrangian;
  bool clip = false;              // clamp to the local min/max of the cell
  double max_displacement = 2.0;  // back-trace length limit in cells
};

/// One transport step of h_t + v.grad h = 0 with v sampled at the half step.
/// Semi-Lagrangian: midpoint back-trace and cubic interpolation. Spectral:
/// SSP-RK3 with frozen v. Throws StabilityError when the back-trace leaves
/// the displacement envelope.
PhysicalField density_advect(const PhysicalField& h, const PhysicalField& v, double dt,
                             const DensityOptions& opt = {});

struct Ins3dOptions {
  double dt = 1e-2;
  double inner_tol = 1e-13;  // successive L2 difference of w_t, times max(1, ||w_t||)
  int max_inner = 60;
  double cfl_limit = 0.5;
  bool dealias = true;
  double h_gate = 0.5;       // required bound on ||h0||_inf
  DensityOptions density;
};

struct PerturbationState {
  PhysicalField h;
  SpectralField w;
  SpectralField q;
  double t = 0.0;
  long step = 0;
};

struct InnerStats {
  int sweeps = 0;
  double max_ratio = 0.0;  // largest successive-difference ratio
  double h_inf = 0.0;
};

/// Physical 3-component fields at one time. total is F; the parts are
/// F1 = rho v2d.grad w, F2 = rho w.grad w, F3 = h v2d_t, F4 = h w_t,
/// F5 = rho w_h.grad_h v2d, F6 = h v2d_h.grad_h v2d, and advection = v.grad w,
/// so that total - advection = -(F1 + ... + F6).
struct ForcingBreakdown {
  PhysicalField total;
  std::vector<PhysicalField> parts;
  PhysicalField advection;
};

ForcingBreakdown assemble_forcing(const PerturbationState& state, Background& bg,
                                  const SpectralField& w_t_guess, bool dealias = true);

class PerturbationSolver {
 public:
  /// w0 is projected. Throws ConfigError when ||h0||_inf exceeds
  /// options.h_gate or dt differs from the background's.
  PerturbationSolver(std::shared_ptr<Background> bg, const PhysicalField& h0,
                     const SpectralField& w0, Ins3dOptions opt);

  const PerturbationState& state() const { return state_; }
  const Ins3dOptions& options() const { return opt_; }
  Background& background() { return *bg_; }

  /// Exponential AB2 for w (exponential Euler on the first step) with the
  /// implicit h w_t resolved by fixed-point sweeps, then one density step
  /// with the time-centred velocity.
  void step();

  /// Quantities at the current state.
  const SpectralField& w_t() const { return w_t_; }
  const SpectralField& grad_q() const { return grad_q_; }
  const InnerStats& inner_stats() const { return stats_; }
  double cfl() const { return cfl_; }
  ForcingBreakdown forcing() { return assemble_forcing(state_, *bg_, w_t_, opt_.dealias); }
  /// Full velocity v2d + w as 3D physical samples.
  PhysicalField velocity();

 private:
  void evaluate();

  std::shared_ptr<Background> bg_;
  Ins3dOptions opt_;
  PerturbationState state_;
  SpectralField w_t_, grad_q_, r_;
  std::optional<SpectralField> r_prev_;
  InnerStats stats_;
  double cfl_ = 0.0;
  std::vector<double> e_, p1_, p2_;
};

/// Constant-density 3D Navier-Stokes V_t = Lap V - P(V.grad V) with the same
/// exponential AB2 scheme; the h = 0 oracle for the perturbation solver.
class Ns3dSolver {
 public:
  Ns3dSolver(const SpectralField& v0, double dt, bool dealias = true);
  const SpectralField& v() const { return v_; }
  double t() const { return t_; }
  void step();

 private:
  SpectralField v_;
  double dt_, t_ = 0.0;
  bool dealias_;
  std::optional<SpectralField> n_prev_;
  std::vector<double> e_, p1_, p2_;
};

struct Ins3dTrajectory {
  std::vector<double> t;
  std::vector<PhysicalField> h;
  std::vector<SpectralField> w;
};

/// Direct solve to T (a multiple of dt) keeping every step.
Ins3dTrajectory ins3d_trajectory(std::shared_ptr<Background> bg, const PhysicalField& h0,
                                 const SpectralField& w0, const Ins3dOptions& opt, double T);

/// sup over common steps of (||dh||^2 + ||dw||^2)^{1/2}.
double trajectory_gap(const Ins3dTrajectory& a, const Ins3dTrajectory& b);

struct PicardLevel {
  int n = 0;
  double I = 0.0;  // distance to level n-1
  double dh_sup_sq = 0.0, dw_sup_sq = 0.0, dgradw_int = 0.0;
  int max_sweeps = 0;
};

struct PicardResult {
  std::vector<PicardLevel> levels;  // levels[0] is the seed with I = 0
  Ins3dTrajectory last;
  bool converged = false;
};

/// Iterates the frozen-coefficient approximate system from the seeds
/// w^0 = w0, h^0 = h0, v^0 = w0 + v2d(0), v^{-1} = 0. Level n+1 transports
/// h^{n+1} by v^n and solves
///   w_t + v^n.grad w - Lap w + grad p
///     = -h^n (w_t + v^{n-1}.grad w) - (1+h^n) w_h.grad_h v2d - h^n v2d_t - h^n v2d_h.grad_h v2d
/// with the direct solver's discretization. Stops when I_n <= tol or
/// n = n_max; throws NonContractionError when I_n fails to decrease over
/// three consecutive levels.
PicardResult picard_solve(std::shared_ptr<Background> bg, const PhysicalField& h0,
                          const SpectralField& w0, const Ins3dOptions& opt, double T,
                          int n_max, double tol);

struct StabilityConfig {
  double T = 10.0;
  int cadence = 10;
  double p = 4.0;      // Besov index 2 - 2/p for the data sizes
  double tol = 1e-2;   // density bound slack
  double c0 = 1.0;     // user constants of the smallness condition
  double c_prime = 1.0;
  std::function<void(const PerturbationSolver&)> on_record;
};

struct StabilityReport {
  std::vector<MonitorReport> monitors;
  NormSeries series;
  double amplification = 0.0;  // (sup ||w|| + (int ||grad w||^2)^{1/2}) / ||(w0, h0)||
  double density_ratio = 0.0;  // sup (||h||_2 + ||h||_inf) / (||h0||_2 + ||h0||_inf)
  bool failed = false;
  double failure_time = 0.0;
};

/// Runs the perturbation to cfg.T and reports: the density bound, energy
/// amplification, density-gradient growth against exp(int ||grad v||_inf),
/// the smallness tuple, divergence and inner-contraction checks.
StabilityReport stability_experiment(std::shared_ptr<Background> bg, const PhysicalField& h0,
                                     const SpectralField& w0, const Ins3dOptions& opt,
                                     const StabilityConfig& cfg);

}  // namespace nssl
