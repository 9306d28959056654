#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "borelq/geometry.hpp"

namespace borelq {

/// coef * cos(sum_d 2 pi m_d x_d / L_d), coef * sin(...), or a constant.
struct TrigTerm {
  enum class Kind { Const, Cos, Sin };
  Kind kind = Kind::Const;
  std::array<int, 2> modes{0, 0};
  double coef = 0.0;
};

/// Real trigonometric polynomial on a flat torus of given extents. Used for
/// test functions f, vector-field components and potentials; derivatives are
/// exact.
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {}

  static TrigPoly constant(double c);
  static TrigPoly cosine(std::array<int, 2> modes, double coef = 1.0);
  static TrigPoly sine(std::array<int, 2> modes, double coef = 1.0);

  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Largest |m_d| over all terms and dimensions.
  int degree() const;
  int degree(std::size_t d) const;

  double operator()(std::span<const double> x, std::span<const double> extents) const;
  RField sample(const Grid& grid) const;
  /// Exact partial derivative d/dx_d.
  TrigPoly derivative(std::size_t d, std::span<const double> extents) const;

  TrigPoly& operator+=(const TrigPoly& other);
  TrigPoly& operator*=(double s);

  /// Parses "cos 1 0 0.5; sin 0 2 1.0; const 0.3". Each term is a kind,
  /// `dims` integer modes (none for const) and a coefficient.
  static TrigPoly parse(std::string_view text, std::size_t dims);
  std::string to_string(std::size_t dims) const;

 private:
  std::vector<TrigTerm> terms_;
};

TrigPoly operator+(TrigPoly a, const TrigPoly& b);
TrigPoly operator*(double s, TrigPoly a);

/// Vector field X = X^d d/dx^d with trigonometric components. Complete on
/// compact manifolds.
struct VectorFieldSpec {
  std::vector<TrigPoly> components;
  bool complete = true;

  static VectorFieldSpec zero(std::size_t dims);
  /// The coordinate field d/dx^d.
  static VectorFieldSpec coordinate(std::size_t dims, std::size_t d, double scale = 1.0);

  int degree() const;
  bool is_constant() const;
  std::vector<RField> sample(const Grid& grid) const;
  /// Exact coordinate divergence sum_d d_d X^d, sampled.
  RField sample_divergence(const Grid& grid) const;
  /// X(f) = X^d d_d f, sampled exactly.
  RField lie_derivative(const TrigPoly& f, const Grid& grid) const;
};

/// Metric gradient grad_g f = g^{dd} d_d f as a vector field.
VectorFieldSpec metric_gradient(const TrigPoly& f, const ManifoldSpec& manifold);

}  // namespace borelq
