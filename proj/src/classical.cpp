#include "borelq/classical.hpp"

#include <algorithm>
#include <cmath>

#include "borelq/error.hpp"

namespace borelq {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("classical", message);
}

double partial_x(const ClassicalObservable& obs, PhasePoint alpha, std::size_t d, double rel_step) {
  const double x0 = alpha.x[d];
  const double h = rel_step * std::max(1.0, std::abs(x0));
  alpha.x[d] = x0 + h;
  const double up = eval_observable(obs, alpha);
  alpha.x[d] = x0 - h;
  const double down = eval_observable(obs, alpha);
  return (up - down) / (2.0 * h);
}

double partial_p(const ClassicalObservable& obs, PhasePoint alpha, std::size_t d, double rel_step) {
  const double p0 = alpha.p[d];
  const double h = rel_step * std::max(1.0, std::abs(p0));
  alpha.p[d] = p0 + h;
  const double up = eval_observable(obs, alpha);
  alpha.p[d] = p0 - h;
  const double down = eval_observable(obs, alpha);
  return (up - down) / (2.0 * h);
}

bool finite(const PhasePoint& a) {
  for (double v : a.x)
    if (!std::isfinite(v)) return false;
  for (double v : a.p)
    if (!std::isfinite(v)) return false;
  return true;
}

void reduce(PhasePoint& a, const ManifoldSpec& manifold) {
  if (!manifold.is_closed()) return;
  for (std::size_t d = 0; d < a.x.size(); ++d) {
    const double l = manifold.extents[d];
    double r = std::fmod(a.x[d], l);
    if (r < 0.0) r += l;
    if (r >= l) r -= l;
    a.x[d] = r;
  }
}

}  // namespace

ClassicalObservable make_qf(TrigPoly f, const ManifoldSpec& manifold) {
  ClassicalObservable obs;
  obs.tag = ClassicalObservable::Tag::Qf;
  obs.f = std::move(f);
  obs.extents = manifold.extents;
  return obs;
}

ClassicalObservable make_px(VectorFieldSpec x, const ManifoldSpec& manifold) {
  require(x.components.size() == manifold.dims(), "vector field has the wrong number of components");
  ClassicalObservable obs;
  obs.tag = ClassicalObservable::Tag::PX;
  obs.x_field = std::move(x);
  obs.extents = manifold.extents;
  return obs;
}

ClassicalObservable make_general(std::function<double(const PhasePoint&)> fn) {
  ClassicalObservable obs;
  obs.tag = ClassicalObservable::Tag::General;
  obs.general = std::move(fn);
  return obs;
}

double eval_observable(const ClassicalObservable& obs, const PhasePoint& alpha) {
  switch (obs.tag) {
    case ClassicalObservable::Tag::Qf:
      return obs.f(alpha.x, obs.extents);
    case ClassicalObservable::Tag::PX: {
      double v = 0.0;
      for (std::size_t d = 0; d < obs.x_field.components.size(); ++d)
        v += alpha.p[d] * obs.x_field.components[d](alpha.x, obs.extents);
      return v;
    }
    case ClassicalObservable::Tag::General:
      return obs.general(alpha);
  }
  return 0.0;
}

double PointTwoForm::component(std::size_t a, std::size_t b) const {
  if (a == b) return 0.0;
  return a < b ? phi01 : -phi01;
}

double poisson_bracket(const ClassicalObservable& f, const ClassicalObservable& g, const PhasePoint& alpha,
                       double e, PointTwoForm phi, double rel_step) {
  require(alpha.x.size() == alpha.p.size(), "phase point has mismatched x and p dimensions");
  const std::size_t dims = alpha.x.size();
  std::vector<double> fp(dims);
  std::vector<double> gp(dims);
  double v = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    fp[d] = partial_p(f, alpha, d, rel_step);
    gp[d] = partial_p(g, alpha, d, rel_step);
    v += fp[d] * partial_x(g, alpha, d, rel_step) - partial_x(f, alpha, d, rel_step) * gp[d];
  }
  if (e != 0.0)
    for (std::size_t a = 0; a < dims; ++a)
      for (std::size_t b = 0; b < dims; ++b) v += e * phi.component(a, b) * fp[a] * gp[b];
  return v;
}

ClassicalObservable bracket_observable(ClassicalObservable f, ClassicalObservable g, double e,
                                       PointTwoForm phi, double rel_step) {
  return make_general([f = std::move(f), g = std::move(g), e, phi, rel_step](const PhasePoint& a) {
    return poisson_bracket(f, g, a, e, phi, rel_step);
  });
}

Force zero_force(std::size_t dims) {
  return [dims](std::span<const double>, std::span<const double>) { return std::vector<double>(dims, 0.0); };
}

Force harmonic_force(double k, std::vector<double> center) {
  return [k, center = std::move(center)](std::span<const double> x, std::span<const double>) {
    std::vector<double> f(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) f[d] = -k * (x[d] - center[d]);
    return f;
  };
}

Trajectory integrate_trajectory(const Force& force, const PhasePoint& alpha0, double dt, double t_end,
                                const ManifoldSpec& manifold) {
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  require(t_end >= 0.0 && std::isfinite(t_end), "T must be non-negative");
  const std::size_t dims = manifold.dims();
  require(alpha0.x.size() == dims && alpha0.p.size() == dims, "initial phase point has the wrong dimension");
  require(finite(alpha0), "initial phase point is not finite");

  const auto steps = t_end == 0.0 ? std::size_t{0}
                                   : static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = steps == 0 ? dt : t_end / static_cast<double>(steps);

  Trajectory traj;
  traj.dt = h;
  traj.states.reserve(steps + 1);
  PhasePoint a = alpha0;
  reduce(a, manifold);
  traj.states.push_back(a);

  std::vector<double> p_half(dims);
  for (std::size_t n = 0; n < steps; ++n) {
    // Implicit half kick; one pass is exact for p-independent forces.
    p_half = a.p;
    for (int iter = 0; iter < 100; ++iter) {
      const auto f = force(a.x, p_half);
      double change = 0.0;
      double scale = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        const double next = a.p[d] + 0.5 * h * f[d];
        change = std::max(change, std::abs(next - p_half[d]));
        scale = std::max(scale, std::abs(next));
        p_half[d] = next;
      }
      if (change <= 1e-15 * std::max(1.0, scale)) break;
    }
    for (std::size_t d = 0; d < dims; ++d) a.x[d] += h * p_half[d] / manifold.metric_diag[d];
    const auto f = force(a.x, p_half);
    for (std::size_t d = 0; d < dims; ++d) a.p[d] = p_half[d] + 0.5 * h * f[d];
    if (!finite(a))
      throw NumericalError("integrate_trajectory: non-finite state at step " + std::to_string(n + 1) +
                           " (t = " + std::to_string(static_cast<double>(n + 1) * h) + ")");
    reduce(a, manifold);
    traj.states.push_back(a);
  }
  return traj;
}

ScalarFunction scalar_function(const TrigPoly& f, const ManifoldSpec& manifold) {
  std::vector<TrigPoly> grads;
  for (std::size_t d = 0; d < manifold.dims(); ++d) grads.push_back(f.derivative(d, manifold.extents));
  const std::vector<double> ext = manifold.extents;
  ScalarFunction out;
  out.value = [f, ext](std::span<const double> x) { return f(x, ext); };
  out.gradient = [grads, ext](std::span<const double> x) {
    std::vector<double> g;
    for (const auto& gd : grads) g.push_back(gd(x, ext));
    return g;
  };
  return out;
}

ScalarFunction coordinate_function(std::size_t d, std::size_t dims) {
  ScalarFunction out;
  out.value = [d](std::span<const double> x) { return x[d]; };
  out.gradient = [d, dims](std::span<const double>) {
    std::vector<double> g(dims, 0.0);
    g[d] = 1.0;
    return g;
  };
  return out;
}

double classical_ehrenfest_residual(const ScalarFunction& f, const Trajectory& trajectory,
                                    const ManifoldSpec& manifold) {
  const auto& s = trajectory.states;
  require(s.size() >= 3, "Ehrenfest residual needs at least three trajectory samples");
  double worst = 0.0;
  for (std::size_t n = 1; n + 1 < s.size(); ++n) {
    const double lhs = (f.value(s[n + 1].x) - f.value(s[n - 1].x)) / (2.0 * trajectory.dt);
    const auto grad = f.gradient(s[n].x);
    double rhs = 0.0;
    for (std::size_t d = 0; d < grad.size(); ++d) rhs += s[n].p[d] * grad[d] / manifold.metric_diag[d];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double classical_ehrenfest_residual(const TrigPoly& f, const Trajectory& trajectory,
                                    const ManifoldSpec& manifold) {
  return classical_ehrenfest_residual(scalar_function(f, manifold), trajectory, manifold);
}

double classical_energy(const PhasePoint& alpha, const ManifoldSpec& manifold,
                        const std::function<double(std::span<const double>)>& potential) {
  double kinetic = 0.0;
  for (std::size_t d = 0; d < alpha.p.size(); ++d)
    kinetic += 0.5 * alpha.p[d] * alpha.p[d] / manifold.metric_diag[d];
  return kinetic + (potential ? potential(alpha.x) : 0.0);
}

}  // namespace borelq
