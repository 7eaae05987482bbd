#include <algorithm>
#include <cmath>
#include <string>

#include "nssl/error.hpp"
#include "nssl/interp.hpp"
#include "nssl/lagrangian.hpp"

namespace nssl {

namespace {

using Point = MarkerCurve::Point;

double dist(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double norm(const Point& a) { return std::hypot(a[0], a[1], a[2]); }

double orient(const Point& a, const Point& b, const Point& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

bool segments_cross(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

// Velocity of a slice pair at fraction theta of the step.
void slice_velocity(const CubicInterpolator& ip, const VelocitySlice& a, const VelocitySlice& b,
                    double theta, const double* x, double* v) {
  const int nc = std::min(a.v.ncomp(), 3);
  const auto sa = component_spans(a.v.data(), a.v.points(), a.v.ncomp());
  const auto sb = component_spans(b.v.data(), b.v.points(), b.v.ncomp());
  double va[3] = {0, 0, 0}, vb[3] = {0, 0, 0};
  ip.eval(std::span(sa).first(nc), x, va);
  ip.eval(std::span(sb).first(nc), x, vb);
  for (int i = 0; i < 3; ++i) v[i] = i < nc ? (1.0 - theta) * va[i] + theta * vb[i] : 0.0;
}

template <class F>
void rk4_points(std::vector<Point>& pts, double dt, const F& vel) {
  for (Point& p : pts) {
    Point k[4];
    Point x = p;
    for (int st = 0; st < 4; ++st) {
      const double f = st == 0 ? 0.0 : (st == 3 ? 1.0 : 0.5);
      if (st > 0)
        for (int i = 0; i < 3; ++i) x[i] = p[i] + f * dt * k[st - 1][i];
      vel(f, x.data(), k[st].data());
    }
    for (int i = 0; i < 3; ++i)
      p[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
  }
}

std::vector<Point> resample_pass(const std::vector<Point>& pts, int count) {
  const std::size_t n = pts.size();
  std::vector<double> s(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1] = s[i] + dist(pts[i], pts[(i + 1) % n]);
  const double total = s[n];
  std::vector<Point> out;
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    const double target = total * k / count;
    while (seg + 1 < n && s[seg + 1] <= target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double u = len > 0.0 ? (target - s[seg]) / len : 0.0;
    const Point& p0 = pts[(seg + n - 1) % n];
    const Point& p1 = pts[seg];
    const Point& p2 = pts[(seg + 1) % n];
    const Point& p3 = pts[(seg + 2) % n];
    Point q;
    for (int i = 0; i < 3; ++i)
      q[i] = 0.5 * (2.0 * p1[i] + (p2[i] - p0[i]) * u +
                    (2.0 * p0[i] - 5.0 * p1[i] + 4.0 * p2[i] - p3[i]) * u * u +
                    (3.0 * p1[i] - p0[i] - 3.0 * p2[i] + p3[i]) * u * u * u);
    out.push_back(q);
  }
  return out;
}

}  // namespace

MarkerCurve::MarkerCurve(std::vector<Point> points) : pts_(std::move(points)) {
  if (pts_.size() < 3) throw ConfigError("marker curve: at least three markers are required");
}

MarkerCurve MarkerCurve::circle(const Point& centre, double radius, int markers) {
  if (markers < 3 || !(radius > 0.0)) throw ConfigError("marker curve: bad circle parameters");
  std::vector<Point> pts;
  for (int i = 0; i < markers; ++i) {
    const double th = kTwoPi * i / markers;
    pts.push_back({centre[0] + radius * std::cos(th), centre[1] + radius * std::sin(th), centre[2]});
  }
  return MarkerCurve(std::move(pts));
}

double MarkerCurve::min_spacing() const {
  double m = INFINITY;
  for (std::size_t i = 0; i < pts_.size(); ++i) m = std::min(m, dist(pts_[i], pts_[(i + 1) % pts_.size()]));
  return m;
}

double MarkerCurve::max_spacing() const {
  double m = 0.0;
  for (std::size_t i = 0; i < pts_.size(); ++i) m = std::max(m, dist(pts_[i], pts_[(i + 1) % pts_.size()]));
  return m;
}

double MarkerCurve::max_curvature() const {
  const std::size_t n = pts_.size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts_[(i + n - 1) % n];
    const Point& b = pts_[i];
    const Point& c = pts_[(i + 1) % n];
    const Point u = sub(b, a), w = sub(c, a);
    const Point cr = {u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]};
    const double den = dist(a, b) * dist(b, c) * dist(a, c);
    if (den > 0.0) m = std::max(m, 2.0 * norm(cr) / den);
  }
  return m;
}

double MarkerCurve::tangent_variation() const {
  const std::size_t n = pts_.size();
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point s0 = sub(pts_[i], pts_[(i + n - 1) % n]);
    const Point s1 = sub(pts_[(i + 1) % n], pts_[i]);
    const double d = norm(s0) * norm(s1);
    if (d == 0.0) continue;
    const double c = (s0[0] * s1[0] + s0[1] * s1[1] + s0[2] * s1[2]) / d;
    tv += std::acos(std::clamp(c, -1.0, 1.0));
  }
  return tv;
}

double MarkerCurve::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    const Point& p = pts_[i];
    const Point& q = pts_[(i + 1) % pts_.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

bool MarkerCurve::self_intersects() const {
  const std::size_t n = pts_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(pts_[i], pts_[(i + 1) % n], pts_[j], pts_[(j + 1) % n])) return true;
    }
  return false;
}

MarkerCurve MarkerCurve::resampled(int count) const {
  if (count < 3) throw ConfigError("marker curve: resampling needs at least three markers");
  // a second pass corrects the chord-length parameter of the first
  return MarkerCurve(resample_pass(resample_pass(pts_, count), count));
}

void MarkerCurve::advect(const PointVelocity& v, double t, double dt) {
  rk4_points(pts_, dt, [&](double f, const double* x, double* u) {
    double g[9];
    u[0] = u[1] = u[2] = 0.0;
    v(t + f * dt, x, u, g);
  });
}

void MarkerCurve::advect(const VelocitySlice& a, const VelocitySlice& b) {
  if (!(a.v.grid() == b.v.grid()) || a.v.ncomp() != b.v.ncomp() || a.v.grid().ndim() > 3)
    throw ConfigError("marker curve: velocity slices differ in shape");
  if (!(b.t > a.t)) throw ConfigError("marker curve: slice times must increase");
  const CubicInterpolator ip(a.v.grid());
  rk4_points(pts_, b.t - a.t,
             [&](double f, const double* x, double* u) { slice_velocity(ip, a, b, f, x, u); });
}

CurveTracker::CurveTracker(MarkerCurve c) : c_(std::move(c)) {
  double len = 0.0;
  const auto& p = c_.points();
  for (std::size_t i = 0; i < p.size(); ++i) len += dist(p[i], p[(i + 1) % p.size()]);
  spacing_ = len / p.size();
  rep_.initial_curvature = rep_.max_curvature = c_.max_curvature();
  rep_.area0 = rep_.area1 = c_.area();
  record(0.0);
}

void CurveTracker::record(double t) {
  const double k = c_.max_curvature();
  rep_.series.add(t, "curvature:max", k);
  rep_.series.add(t, "tangent:variation", c_.tangent_variation());
  rep_.series.add(t, "spacing:min", c_.min_spacing());
  rep_.series.add(t, "area", c_.area());
  rep_.series.add(t, "markers", static_cast<double>(c_.size()));
}

void CurveTracker::after_step(double t, bool rec) {
  if (c_.max_spacing() > 2.0 * c_.min_spacing()) {
    double len = 0.0;
    const auto& p = c_.points();
    for (std::size_t i = 0; i < p.size(); ++i) len += dist(p[i], p[(i + 1) % p.size()]);
    const int n = std::max<int>(static_cast<int>(p.size()), static_cast<int>(std::ceil(len / spacing_)));
    c_ = c_.resampled(n);
    ++rep_.resamples;
  }
  if (c_.self_intersects())
    throw TopologyError("marker curve self-intersects at t = " + std::to_string(t), t);
  rep_.max_curvature = std::max(rep_.max_curvature, c_.max_curvature());
  rep_.area1 = c_.area();
  if (rec) record(t);
}

void CurveTracker::step(const VelocitySlice& a, const VelocitySlice& b, bool rec) {
  c_.advect(a, b);
  after_step(b.t, rec);
}

void CurveTracker::step(const PointVelocity& v, double t, double dt, bool rec) {
  c_.advect(v, t, dt);
  after_step(t + dt, rec);
}

PatchReport patch_track(const MarkerCurve& c0, const PointVelocity& v, double dt, double T,
                        int cadence) {
  const long nsteps = std::lround(T / dt);
  if (!(dt > 0.0) || nsteps < 1 || std::abs(nsteps * dt - T) > 1e-9 * T || cadence < 1)
    throw ConfigError("patch_track: T must be a positive multiple of dt and cadence >= 1");
  CurveTracker tr(c0);
  for (long n = 0; n < nsteps; ++n)
    tr.step(v, n * dt, dt, (n + 1) % cadence == 0 || n + 1 == nsteps);
  return tr.report();
}

}  // namespace nssl
