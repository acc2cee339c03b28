#pragma once

// Block decomposition L2(R^d)^d = H0 + H1 with H0 = ran(grad^s_Omega) and the
// four Schur maps
//   Psi00(a) = a00^-1,          Psi10(a) = a10 a00^-1,
//   Psi01(a) = a00^-1 a01,      Psi11(a) = a11 - a10 a00^-1 a01.
// Vector fields are flattened component-major and scaled by sqrt(h^d), so
// the Euclidean inner product equals the L2 inner product on the grid. H1 is
// never stored; it is reached through I - P0.

#include "fraqhom/fracops.hpp"
#include "fraqhom/homog.hpp"
#include "fraqhom/lattice.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>

namespace fraqhom {

using DenseVector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Bounded operator on the flattened full space.
struct LinearOperator {
  std::size_t size = 0;
  std::function<DenseVector(const DenseVector&)> apply;
  std::function<DenseVector(const DenseVector&)> apply_transpose;
};

/// Pointwise multiplication by A(x).
LinearOperator multiplication_operator(const Coefficient& coeff);
LinearOperator dense_operator(DenseMatrix matrix);

DenseVector to_vector(const VectorField& g);
VectorField to_field(const DenseVector& v, const Grid& grid);

/// Orthonormal basis of the column span; singular values below
/// rank_tol * sigma_max are dropped. Column order follows the SVD.
DenseMatrix orthonormal_basis(const DenseMatrix& columns, double rank_tol = 1e-10,
                              std::vector<double>* singular_values = nullptr);

class BlockDecomposition {
public:
  BlockDecomposition(OmegaMask mask, FracOrder order, DenseMatrix basis, std::vector<double> singular_values);

  const OmegaMask& mask() const { return mask_; }
  const FracOrder& order() const { return order_; }
  const DenseMatrix& basis() const { return basis_; }
  const std::vector<double>& singular_values() const { return singular_values_; }
  int rank() const { return static_cast<int>(basis_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(basis_.rows()); }

  DenseVector project(const DenseVector& v) const;
  DenseVector project_complement(const DenseVector& v) const;

private:
  OmegaMask mask_;
  FracOrder order_;
  DenseMatrix basis_;
  std::vector<double> singular_values_;
};

/// Applies grad^s to every nodal Omega field and orthonormalises the result.
/// Throws InvalidArgument for fewer than 4 Omega cells and NumericalError
/// when the rank is 0.
BlockDecomposition build_decomposition(const OmegaMask& mask, const FracOrder& order, double rank_tol = 1e-10);

class PsiMaps {
public:
  PsiMaps(const BlockDecomposition& decomposition, LinearOperator a);

  /// Arguments must lie in the stated domain (H0 for psi00/psi10, H1 for
  /// psi01/psi11); results are full vectors in the codomain.
  DenseVector psi00(const DenseVector& v) const;
  DenseVector psi10(const DenseVector& v) const;
  DenseVector psi01(const DenseVector& z) const;
  DenseVector psi11(const DenseVector& z) const;

  /// a00 in the H0 basis, r x r.
  const DenseMatrix& a00() const { return a00_; }
  const BlockDecomposition& decomposition() const { return *decomposition_; }
  const LinearOperator& op() const { return a_; }

private:
  DenseVector solve00(const DenseVector& coords) const;

  const BlockDecomposition* decomposition_;
  LinearOperator a_;
  DenseMatrix a00_;
  Eigen::PartialPivLU<DenseMatrix> lu_;
};

/// Throws NumericalError when a00 is numerically singular.
PsiMaps psi_maps(const Coefficient& coeff, const BlockDecomposition& decomposition);

struct Gamma {
  double g00 = 1.0, g01 = 1.0, g10 = 1.0, g11 = 1.0;
  /// (alpha, beta/alpha; beta/alpha, beta).
  static Gamma canonical(double alpha, double beta) { return {alpha, beta / alpha, beta / alpha, beta}; }
};

struct MembershipCondition {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  /// Positive when the condition holds.
  double margin = 0.0;
  /// True when the value is a probe estimate rather than an exact block computation.
  bool estimated = false;
  bool pass = false;
};

struct MembershipReport {
  std::vector<MembershipCondition> conditions;
  bool pass = false;
};

/// H0 conditions and the off-diagonal norms are computed exactly from the
/// r-column blocks; the two H1 conditions are Rayleigh-quotient minima over
/// `probe_count` seeded smooth probes. A condition passes with margin >= -1e-8.
MembershipReport membership_check(const PsiMaps& maps, const Gamma& gamma, int probe_count = 64,
                                  std::uint64_t seed = 1);
MembershipReport membership_check(const Coefficient& coeff, const BlockDecomposition& decomposition,
                                  const Gamma& gamma, int probe_count = 64, std::uint64_t seed = 1);

/// Unit-norm smooth probes: random combinations of low box modes in each
/// component, projected onto H0 or H1.
struct SchurProbes {
  std::vector<DenseVector> h0_domain, h0_test;
  std::vector<DenseVector> h1_domain, h1_test;
};

SchurProbes make_schur_probes(const BlockDecomposition& decomposition, int count = 16, std::uint64_t seed = 1);

inline constexpr std::array<const char*, 4> kPsiMapNames{"psi00", "psi10", "psi01", "psi11"};

struct SchurProbeRow {
  int n = 0;
  int map = 0;
  int probe_id = 0;
  double discrepancy = 0.0;
};

struct SchurProbeReport {
  std::vector<int> n_values;
  std::vector<SchurProbeRow> rows;
  /// Largest probe discrepancy per map and n.
  std::array<std::vector<double>, 4> max_discrepancy;
  /// Strictly decreasing over n, per map.
  std::array<bool, 4> decreasing{};
  bool all_decreasing() const { return decreasing[0] && decreasing[1] && decreasing[2] && decreasing[3]; }
  /// Psi00 non-increasing over the last three n.
  bool psi00_trend = false;
};

/// |<w, Psi_ij(A_n) v> - <w, Psi_ij(A) v>| for every probe pair, map and n.
SchurProbeReport schur_convergence_probe(const CoefficientSequence& sequence, const Coefficient& limit,
                                         const BlockDecomposition& decomposition, const SchurProbes& probes,
                                         const std::vector<int>& n_list);

/// CSV `n,map,probe_id,discrepancy`.
void write_probe_csv(std::ostream& os, const SchurProbeReport& report);

} // namespace fraqhom
