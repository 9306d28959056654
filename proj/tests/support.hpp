#pragma once

// Hand-rolled generators and comparison helpers shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "borelq/dynamics.hpp"
#include "borelq/geometry.hpp"
#include "borelq/trig.hpp"

namespace borelq::testkit {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Random real trigonometric polynomial with modes |m_d| <= degree.
inline TrigPoly random_trig(Rng& rng, std::size_t dims, int degree, int terms = 4) {
  std::vector<TrigTerm> out;
  out.push_back({TrigTerm::Kind::Const, {0, 0}, uniform(rng, -1.0, 1.0)});
  for (int t = 0; t < terms; ++t) {
    TrigTerm term;
    term.kind = uniform_int(rng, 0, 1) == 0 ? TrigTerm::Kind::Cos : TrigTerm::Kind::Sin;
    term.modes[0] = uniform_int(rng, -degree, degree);
    term.modes[1] = dims == 2 ? uniform_int(rng, -degree, degree) : 0;
    term.coef = uniform(rng, -1.0, 1.0);
    out.push_back(term);
  }
  return TrigPoly(std::move(out));
}

inline VectorFieldSpec random_vector_field(Rng& rng, std::size_t dims, int degree, int terms = 3) {
  VectorFieldSpec x;
  for (std::size_t d = 0; d < dims; ++d) x.components.push_back(random_trig(rng, dims, degree, terms));
  return x;
}

/// Value of a trig polynomial, evaluated term by term from its definition.
inline double trig_value(const TrigPoly& p, std::span<const double> x, std::span<const double> extents) {
  double s = 0.0;
  for (const auto& t : p.terms()) {
    double arg = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) arg += kTwoPi * t.modes[d] * x[d] / extents[d];
    if (t.kind == TrigTerm::Kind::Const) s += t.coef;
    else if (t.kind == TrigTerm::Kind::Cos) s += t.coef * std::cos(arg);
    else s += t.coef * std::sin(arg);
  }
  return s;
}

/// d/dx_d of a trig polynomial, by the chain rule on each term.
inline double trig_partial(const TrigPoly& p, std::size_t dd, std::span<const double> x,
                           std::span<const double> extents) {
  double s = 0.0;
  for (const auto& t : p.terms()) {
    if (t.kind == TrigTerm::Kind::Const) continue;
    double arg = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) arg += kTwoPi * t.modes[d] * x[d] / extents[d];
    const double k = kTwoPi * t.modes[dd] / extents[dd];
    if (t.kind == TrigTerm::Kind::Cos) s -= t.coef * k * std::sin(arg);
    else s += t.coef * k * std::cos(arg);
  }
  return s;
}

/// Random band-limited complex field exp(a(x) + i b(x)) with small a: nodeless.
/// `phase_scale` scales b; mild phases keep the state away from nodes under evolution.
inline CField random_nodeless(Rng& rng, const Grid& grid, int degree = 2, double phase_scale = 1.0) {
  const TrigPoly a = 0.3 * random_trig(rng, grid.dims(), degree, 2);
  const TrigPoly b = phase_scale * random_trig(rng, grid.dims(), degree, 2);
  CField psi = grid.sample_complex([&](std::span<const double> x) {
    return std::exp(cplx(a(x, grid.manifold().extents), b(x, grid.manifold().extents)));
  });
  normalize(psi, grid);
  return psi;
}

/// Random band-limited complex field (may have nodes).
inline CField random_field(Rng& rng, const Grid& grid, int degree) {
  const TrigPoly re = random_trig(rng, grid.dims(), degree);
  const TrigPoly im = random_trig(rng, grid.dims(), degree);
  return grid.sample_complex([&](std::span<const double> x) {
    return cplx(re(x, grid.manifold().extents), im(x, grid.manifold().extents));
  });
}

inline double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// max |a - e^{i phase} b| with the global phase fitted from the overlap.
inline double max_diff_mod_phase(std::span<const cplx> a, std::span<const cplx> b) {
  cplx overlap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) overlap += std::conj(b[i]) * a[i];
  const cplx u = overlap / std::abs(overlap);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - u * b[i]));
  return m;
}

}  // namespace borelq::testkit
