#pragma once

// Variational solver for
//   -div^s(A (grad^s u + v)) = f  in Omega,   u = 0 outside Omega,
// with nodal unknowns on the Omega cells. The Galerkin system is
//   K u = F,  K = R (-div^s) A grad^s E,
// where E extends by zero and R restricts to Omega; the h^d mass weight
// cancels on both sides, so F is f (plus div^s g and div^s(A v) when given)
// sampled on Omega.

#include "fraqhom/fracops.hpp"
#include "fraqhom/lattice.hpp"

#include <iosfwd>
#include <optional>

namespace fraqhom {

struct DirichletProblem {
  OmegaMask mask;
  Coefficient coeff;
  FracOrder order{0.5, 1};
  /// f in L2(Omega); values outside the mask must be zero.
  ScalarField rhs;
  /// Optional g with an additional right-hand side div^s g.
  std::optional<VectorField> rhs_flux;
  /// Optional affine offset v of the flux A (grad^s u + v).
  std::optional<VectorField> affine;
};

struct SolveOptions {
  double tol = 1e-10;
  /// 0 selects 10 * (number of Omega cells).
  int max_iter = 0;
  /// Computes the a-priori ratio alpha ||grad^s u|| / ||F||_{H^-s}, which costs
  /// one extra unit-coefficient solve.
  bool apriori = true;
};

struct DirichletSolution {
  ScalarField u;
  /// A (grad^s u + v) on the whole box.
  VectorField flux;
  VectorField grad_u;
  /// <A grad^s u, grad^s u>.
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  /// alpha ||grad^s u|| / ||F||_{H^-s(Omega)}; at most 1 by the a-priori estimate.
  double apriori_ratio = 0.0;
  std::string method;
  /// Folded right-hand side F restricted to Omega (full-box field).
  ScalarField folded_rhs;
};

/// Restricted stiffness application y = R (-div^s) A grad^s E x on Omega values.
std::vector<double> apply_stiffness(const Coefficient& coeff, const FracOrder& order, const OmegaMask& mask,
                                    std::span<const double> inside_values);

/// Throws ValidationError for an invalid coefficient, NumericalError when
/// the Krylov solve does not reach tol within max_iter.
DirichletSolution solve(const DirichletProblem& problem, const SolveOptions& options = {});

/// Convenience wrapper for -div^s(A grad^s u) = f.
DirichletSolution solve(const OmegaMask& mask, const Coefficient& coeff, const FracOrder& order,
                        const ScalarField& rhs, const SolveOptions& options = {});

/// ||f||_{H^-s(Omega)} = ||grad^s w|| where -div^s grad^s w = f, w in H^s_0(Omega).
double hminus_norm(const ScalarField& f, const FracOrder& order, const OmegaMask& mask, double tol = 1e-10);
/// Vector version: each component restricted to Omega, combined in l2.
double hminus_norm(const VectorField& g, const FracOrder& order, const OmegaMask& mask, double tol = 1e-10);

/// h^d sum of A grad^s u . grad^s u over the box.
double energy(const DirichletSolution& solution, const Coefficient& coeff);
const VectorField& flux(const DirichletSolution& solution);

Coefficient identity_coefficient(const Grid& grid);

/// CSV summary `energy,residual,iterations,apriori_ratio`.
void write_summary_csv(std::ostream& os, const DirichletSolution& solution);

} // namespace fraqhom
