#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "borelq/geometry.hpp"
#include "borelq/trig.hpp"

namespace borelq {

/// Classification data of a Borel quantization on a trivial bundle: hbar, the
/// real parameter c and a closed one-form omega whose constant part is the
/// character (theta) of the fundamental group.
struct KinematicsParams {
  double hbar = 1.0;
  double c = 0.0;
  OneForm omega;

  static KinematicsParams untwisted(const Grid& grid, double hbar = 1.0, double c = 0.0);
  static KinematicsParams with_theta(const Grid& grid, std::span<const double> theta,
                                     double hbar = 1.0, double c = 0.0);

  void validate(const Grid& grid) const;
  std::vector<double> theta() const { return omega.constant_part(); }
  /// theta reduced into [0, 2 pi hbar / L_d); equal reductions label
  /// unitarily equivalent representations.
  std::vector<double> reduced_theta(const Grid& grid) const;
};

/// 2 pi hbar / L_d: the period of theta_d under integer character relabeling.
double theta_lattice_unit(const Grid& grid, std::size_t d, double hbar);

/// Half-open range of grid indices [begin, end), 0 <= begin < end <= N.
struct IndexInterval {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const IndexInterval&, const IndexInterval&) = default;
};

/// Product of per-dimension unions of grid-aligned half-open intervals.
class BorelSet {
 public:
  static BorelSet full(const Grid& grid);
  static BorelSet empty(const Grid& grid);
  /// Intervals in index units per dimension; normalized (sorted, merged).
  static BorelSet from_indices(const Grid& grid, std::vector<std::vector<IndexInterval>> intervals);
  /// Coordinate intervals [lo, hi) per dimension; endpoints must sit on grid points.
  static BorelSet from_coordinates(const Grid& grid,
                                   const std::vector<std::vector<std::pair<double, double>>>& intervals);

  /// Image under the translation by `steps[d]` grid cells (periodic).
  BorelSet shifted(std::span<const long> steps) const;
  bool contains(std::span<const std::size_t> index) const;
  RField indicator(const Grid& grid) const;
  const std::vector<std::vector<IndexInterval>>& intervals() const { return intervals_; }

  friend bool operator==(const BorelSet&, const BorelSet&) = default;

 private:
  std::vector<std::size_t> points_;
  std::vector<std::vector<IndexInterval>> intervals_;
};

/// E(B) psi = chi_B psi.
CField apply_e(const BorelSet& set, std::span<const cplx> psi, const Grid& grid);
/// Q(f) psi = f psi.
CField apply_q(std::span<const double> f, std::span<const cplx> psi);
CField apply_q(std::span<const cplx> f, std::span<const cplx> psi);

/// P(X) psi = (hbar/i) X^d d_d psi + w(X) psi + (c + hbar/2i) div X psi.
/// Rejects components of degree above N/4.
CField apply_p(const VectorFieldSpec& x, std::span<const cplx> psi, const KinematicsParams& params,
               const Grid& grid);

/// P(X) on sampled data. `extra_form` (optional, not necessarily closed) is
/// added to omega; it carries a magnetic vector potential.
CField apply_p_sampled(std::span<const RField> x, std::span<const double> div_x,
                       std::span<const cplx> psi, const KinematicsParams& params, const Grid& grid,
                       std::span<const RField> extra_form = {});

struct FlowOptions {
  /// Numeric path: substep so that ds * (spectral radius bound) <= step_scale.
  double step_scale = 0.05;
  /// Numeric path: relative norm drift above this aborts.
  double max_norm_drift = 1e-8;
};

/// True when V_s has a closed form: constant X and constant omega.
bool has_exact_flow(const VectorFieldSpec& x, const KinematicsParams& params);

/// V_s psi = exp(i s P(X) / hbar) psi. For constant X this is the translation
/// psi(x + s X) times exp(i s w(X) / hbar); grid-multiple shifts are exact
/// sample permutations.
CField flow_unitary(const VectorFieldSpec& x, double s, std::span<const cplx> psi,
                    const KinematicsParams& params, const Grid& grid, const FlowOptions& options = {});

enum class CommutatorKind { QQ, PQ, PP, PPMagnetic };

struct CommutatorArgs {
  TrigPoly f;
  TrigPoly g;
  VectorFieldSpec x;
  VectorFieldSpec y;
  TwoForm phi;  // PPMagnetic only
  double e = 0.0;
};

struct ResidualOptions {
  std::size_t vectors = 8;
  std::uint64_t seed = 0x5eedULL;
  /// Mode cutoff for the random test vectors; 0 selects N/8.
  int degree = 0;
};

/// Random complex trigonometric polynomials with modes |m_d| <= degree.
std::vector<CField> random_test_vectors(const Grid& grid, std::size_t count, int degree,
                                        std::uint64_t seed);

/// sup over test vectors of ||(LHS - RHS) psi|| / ||psi|| for
///   QQ:  [Q(f), Q(g)] = 0
///   PQ:  [P(X), Q(f)] = (hbar/i) Q(X f)
///   PP:  [P(X), P(Y)] = (hbar/i) P([X, Y])
///   PPMagnetic: same with a vector potential dA = e phi added to P, and
///               RHS (hbar/i) (P([X,Y]) + e Q(phi(X, Y))).
/// Data degrees must be <= N/8.
double commutator_residual(CommutatorKind kind, const CommutatorArgs& args,
                           const KinematicsParams& params, const Grid& grid,
                           const ResidualOptions& options = {});

/// [P(X), Q(f)] residual with sampled data; `x_of_f` = X^d d_d f supplied by the caller.
double pq_residual_sampled(std::span<const double> f, std::span<const double> x_of_f,
                           std::span<const RField> x, std::span<const double> div_x,
                           const KinematicsParams& params, const Grid& grid,
                           std::span<const CField> vectors);

/// Vector potential A (Coulomb gauge) with d_0 A_1 - d_1 A_0 = e phi_01 on the
/// torus. phi must have zero net flux (trivial bundle).
std::vector<RField> vector_potential(const TwoForm& phi, double e, const Grid& grid);

/// sup over `vectors` of ||V_{-s} E(B) V_s psi - E(Phi_s B) psi|| / ||psi||
/// with Phi_s the forward flow of the constant field X. s X_d must be a
/// multiple of the grid spacing.
double imprimitivity_residual(const VectorFieldSpec& x, double s, const BorelSet& set,
                              std::span<const CField> vectors, const KinematicsParams& params,
                              const Grid& grid);

/// Eigenvalues of J_d = P(d/dx^d) on the plane-wave basis,
/// hbar k (2 pi / L_d) + theta_d for |k| < N_d / 2, ascending.
std::vector<double> momentum_spectrum(const KinematicsParams& params, std::size_t d, const Grid& grid);

/// <e_k | J_d e_k> computed by applying P to the normalized plane wave of mode k.
double momentum_rayleigh_quotient(const KinematicsParams& params, std::size_t d, long k, const Grid& grid);

}  // namespace borelq
