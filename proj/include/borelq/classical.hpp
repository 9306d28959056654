#pragma once

#include <functional>
#include <span>
#include <vector>

#include "borelq/geometry.hpp"
#include "borelq/trig.hpp"

namespace borelq {

/// A point of T*M: coordinates x (reduced into the fundamental domain on
/// closed manifolds) and covector components p.
struct PhasePoint {
  std::vector<double> x;
  std::vector<double> p;
};

/// Real function on phase space.
struct ClassicalObservable {
  enum class Tag { Qf, PX, General };
  Tag tag = Tag::General;
  TrigPoly f;
  VectorFieldSpec x_field;
  std::vector<double> extents;
  std::function<double(const PhasePoint&)> general;
};

/// Q_f(x, p) = f(x).
ClassicalObservable make_qf(TrigPoly f, const ManifoldSpec& manifold);
/// P_X(x, p) = p_d X^d(x).
ClassicalObservable make_px(VectorFieldSpec x, const ManifoldSpec& manifold);
ClassicalObservable make_general(std::function<double(const PhasePoint&)> fn);

double eval_observable(const ClassicalObservable& obs, const PhasePoint& alpha);

/// Two-form phi_ab at a single point, phi_ab = -phi_ba. On one-dimensional
/// manifolds it is identically zero.
struct PointTwoForm {
  double phi01 = 0.0;
  double component(std::size_t a, std::size_t b) const;
};

/// {F, G}_e = sum_d (dF/dp_d dG/dx^d - dF/dx^d dG/dp_d) + e phi_ab dF/dp_a dG/dp_b.
/// Partials by central differences with step rel_step * max(1, |coordinate|).
/// With this orientation {P_X, Q_f} = Q_{X f} and {P_X, P_Y} = P_{[X,Y]} + e Q_{phi(X,Y)}.
double poisson_bracket(const ClassicalObservable& f, const ClassicalObservable& g, const PhasePoint& alpha,
                       double e = 0.0, PointTwoForm phi = {}, double rel_step = 1e-5);

/// The bracket {F, G}_e as an observable (for nested brackets).
ClassicalObservable bracket_observable(ClassicalObservable f, ClassicalObservable g, double e,
                                       PointTwoForm phi, double rel_step);

/// dp/dt as a function of (x, p).
using Force = std::function<std::vector<double>(std::span<const double> x, std::span<const double> p)>;

Force zero_force(std::size_t dims);
/// -dV/dx for V = k/2 sum_d (x^d - center_d)^2.
Force harmonic_force(double k, std::vector<double> center);

struct Trajectory {
  double dt = 0.0;
  std::vector<PhasePoint> states;
};

/// Generalized leapfrog: half kick (implicit in p when the force depends on
/// p), drift x += dt g#p, half kick. dx/dt = g#p holds by construction.
/// Uses n = ceil(T/dt) steps of size T/n. Throws NumericalError on non-finite states.
Trajectory integrate_trajectory(const Force& force, const PhasePoint& alpha0, double dt, double t_end,
                                const ManifoldSpec& manifold);

/// Scalar function on M with its coordinate gradient.
struct ScalarFunction {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

ScalarFunction scalar_function(const TrigPoly& f, const ManifoldSpec& manifold);
/// f(x) = x^d (non-periodic; for line segments).
ScalarFunction coordinate_function(std::size_t d, std::size_t dims);

/// max over interior samples of |d/dt Q_f(alpha_t) - P_{grad_g f}(alpha_t)|,
/// d/dt by central differences.
double classical_ehrenfest_residual(const ScalarFunction& f, const Trajectory& trajectory,
                                    const ManifoldSpec& manifold);
double classical_ehrenfest_residual(const TrigPoly& f, const Trajectory& trajectory,
                                    const ManifoldSpec& manifold);

/// p_d g^{dd} p_d / 2 + V(x).
double classical_energy(const PhasePoint& alpha, const ManifoldSpec& manifold,
                        const std::function<double(std::span<const double>)>& potential);

}  // namespace borelq
