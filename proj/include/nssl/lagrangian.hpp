#pragma once

#include <array>
#include <functional>
#include <vector>

#include "nssl/estimates.hpp"
#include "nssl/field.hpp"
#include "nssl/ins3d.hpp"

// Flow maps X(t, y) with dX/dt = v(t, X), their Jacobians and inverses,
// pullbacks of Eulerian fields, and marker-curve tracking.
// Matrix fields store entry (i, j) = d_j X_i at component i*ndim + j.

namespace nssl {

/// v(t, x) and its gradient (entry i*ndim + j = d_j v_i) at a point.
using PointVelocity = std::function<void(double t, const double* x, double* v, double* grad)>;

/// Velocity and gradient samples on a periodic grid at one time.
struct VelocitySlice {
  double t = 0.0;
  PhysicalField v;
  PhysicalField grad;
};

/// Samples v (ndim components) and its spectral gradient.
VelocitySlice make_slice(double t, const SpectralField& v);

struct FlowMapState {
  PhysicalField displacement;  // X(t, y) - y
  PhysicalField grad_x;        // grad_y X
  PhysicalField a;             // (grad_y X)^{-1}, exact pointwise inverse
  PhysicalField det;           // det grad_y X
  double t = 0.0;
  double lip_budget = 0.0;     // int_0^t ||grad_y vbar||_inf (Frobenius)
  double eulerian_lip = 0.0;   // int_0^t ||grad_x v||_inf (operator 2-norm)
  double gradx_norm = 1.0;     // max over labels of ||grad_y X|| (operator 2-norm)
  bool certified = true;       // lip_budget <= 1/2 so far
};

/// Labels are the points of a grid; displacement is stored so periodic
/// velocities keep exact periodicity.
class FlowMap {
 public:
  explicit FlowMap(Grid labels);

  const FlowMapState& state() const { return s_; }
  const Grid& labels() const { return labels_; }

  /// RK4 over [a.t, b.t] with cubic interpolation in space and linear
  /// interpolation in time between the slices.
  void step(const VelocitySlice& a, const VelocitySlice& b);
  /// RK4 with an analytic velocity.
  void step(const PointVelocity& v, double dt);

 private:
  template <class Eval>
  void rk4(const Eval& eval, double dt);
  void finish_step();

  Grid labels_;
  FlowMapState s_;
};

/// Integrates from t = 0 to T (a multiple of dt) with an analytic velocity.
FlowMapState integrate_flow(const PointVelocity& v, const Grid& labels, double dt, double T);

struct JacobianInverse {
  PhysicalField a;
  double e_max = 0.0;         // max ||grad X - Id|| (Frobenius)
  double tail_bound = 0.0;    // 2 e_max^{terms+1}
  double bound_ratio = 0.0;   // max ||A - Id|| / (2 ||grad X - Id||) over points
};

/// Truncated Neumann series sum_{k<=terms} (-(grad X - Id))^k. Throws
/// CertifiedRegionError when ||grad X - Id||_inf > 1/2.
JacobianInverse invert_jacobian(const PhysicalField& grad_x, int terms);

/// Pointwise exact inverse (validation path).
PhysicalField exact_inverse(const PhysicalField& m);
PhysicalField determinant(const PhysicalField& m);
/// max over points of ||m1 m2 - Id|| (Frobenius).
double product_identity_error(const PhysicalField& m1, const PhysicalField& m2);

/// f(X(t, y)) on the label grid by cubic interpolation.
PhysicalField pull_back(const PhysicalField& f, const FlowMapState& flow);

struct EulerLagrangeOptions {
  double div_tol = 1e-3;  // relative to ||grad_y wbar||_L2
  int cadence = 1;
  // The momentum residual sup is taken over t >= settle * nsteps * dt, past
  // the start-up layer of the multistep scheme.
  double settle = 0.5;
};

struct EulerLagrangeReport {
  std::vector<MonitorReport> monitors;
  NormSeries series;
  double density_gap = 0.0;      // sup_t ||h(t, X) - h0||_L2
  double momentum_residual = 0.0;  // sup over the settled window of the L2 residual
  double divergence = 0.0;       // sup_t ||div_y(A wbar)|| / ||grad_y wbar||
  double lip_budget = 0.0;
  double t_end = 0.0;            // end of the certified window
  bool truncated = false;
};

/// Steps the perturbation solver and the flow map of v = v2d + w together
/// for nsteps and compares the two descriptions: the frozen Lagrangian
/// density, the residual of
///   wbar_t - div_y(A A^T grad_y wbar) + A^T grad_y qbar = Fbar
/// with Fbar = -h0 v2d_t(X_h) - h0 wbar_t - h0 (v2d_h.grad_h v2d)(X_h) - rho0 wbar_h.grad_h v2d(X_h)
/// (time derivatives by central differences), and div_y(A wbar). Stops early
/// (truncated) once the lip budget exceeds 1/2.
EulerLagrangeReport euler_lagrange_consistency(PerturbationSolver& solver, long nsteps,
                                               const EulerLagrangeOptions& opt = {});

// ---- marker curves -------------------------------------------------------

class MarkerCurve {
 public:
  using Point = std::array<double, 3>;

  explicit MarkerCurve(std::vector<Point> points);
  /// Circle of the given radius in the plane x3 = centre[2].
  static MarkerCurve circle(const Point& centre, double radius, int markers);

  const std::vector<Point>& points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }

  double min_spacing() const;
  double max_spacing() const;
  /// Largest three-point circumradius curvature.
  double max_curvature() const;
  /// Sum of turning angles between consecutive segments.
  double tangent_variation() const;
  /// Shoelace area of the projection on the (x1, x2) plane.
  double area() const;
  /// Whether two non-adjacent segments of the (x1, x2) projection cross.
  bool self_intersects() const;
  /// Catmull-Rom resampling to n markers equally spaced in chord length.
  MarkerCurve resampled(int n) const;

  /// RK4 step of every marker with an analytic velocity.
  void advect(const PointVelocity& v, double t, double dt);
  /// RK4 step through interpolated velocity slices.
  void advect(const VelocitySlice& a, const VelocitySlice& b);

 private:
  std::vector<Point> pts_;
};

struct PatchReport {
  NormSeries series;  // curvature:max, tangent:variation, spacing:min, area, markers
  double initial_curvature = 0.0;
  double max_curvature = 0.0;
  double area0 = 0.0, area1 = 0.0;
  int resamples = 0;
};

/// Tracks a marker curve, resampling whenever max/min spacing exceeds 2.
/// Throws TopologyError with the time stamp on self-intersection.
class CurveTracker {
 public:
  explicit CurveTracker(MarkerCurve c);
  const MarkerCurve& curve() const { return c_; }
  const PatchReport& report() const { return rep_; }
  void step(const VelocitySlice& a, const VelocitySlice& b, bool record);
  void step(const PointVelocity& v, double t, double dt, bool record);

 private:
  void after_step(double t, bool record);
  void record(double t);

  MarkerCurve c_;
  PatchReport rep_;
  double spacing_;  // mean initial marker spacing, the resampling target
};

PatchReport patch_track(const MarkerCurve& c0, const PointVelocity& v, double dt, double T,
                        int cadence = 1);

}  // namespace nssl
