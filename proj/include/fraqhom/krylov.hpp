#pragma once

// Matrix-free Krylov solvers on plain vectors.

#include <functional>
#include <span>
#include <vector>

namespace fraqhom::krylov {

using Operator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct Result {
  std::vector<double> x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// "cg", "gmres" or "cgnr".
  const char* method = "";
};

/// Conjugate gradients for symmetric positive definite op.
Result conjugate_gradient(const Operator& op, std::span<const double> rhs, double tol, int max_iter);

/// Restarted GMRES; when the residual drops by less than 1% over 100
/// iterations it switches to CG on the normal equations, which needs the
/// adjoint operator.
Result gmres(const Operator& op, const Operator& adjoint, std::span<const double> rhs, double tol, int max_iter,
             int restart = 50);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace fraqhom::krylov
