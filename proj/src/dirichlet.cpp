#include "fraqhom/dirichlet.hpp"

#include "fraqhom/errors.hpp"
#include "fraqhom/field_io.hpp"
#include "fraqhom/krylov.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace fraqhom {

std::vector<double> apply_stiffness(const Coefficient& coeff, const FracOrder& order, const OmegaMask& mask,
                                    std::span<const double> inside_values) {
  require_same_grid(coeff.grid(), mask.grid(), "apply_stiffness");
  const ScalarField u = extend_by_zero(inside_values, mask);
  const VectorField flux = coeff.apply(grad_s_spectral(u, order));
  const ScalarField div = div_s_spectral(flux, order);
  std::vector<double> out = gather_inside(div, mask);
  for (double& v : out) v = -v;
  return out;
}

Coefficient identity_coefficient(const Grid& grid) {
  return Coefficient(grid, std::vector<Mat2>(grid.size(), Mat2::scalar(1.0)), 1.0, 1.0);
}

namespace {

krylov::Operator stiffness_operator(const Coefficient& coeff, const FracOrder& order, const OmegaMask& mask) {
  return [&coeff, &order, &mask](std::span<const double> x, std::span<double> y) {
    const auto r = apply_stiffness(coeff, order, mask, x);
    std::copy(r.begin(), r.end(), y.begin());
  };
}

void check_problem(const DirichletProblem& p) {
  require_same_grid(p.mask.grid(), p.coeff.grid(), "solve");
  require_same_grid(p.mask.grid(), p.rhs.grid(), "solve");
  if (p.order.dim() != p.mask.grid().dim()) throw InvalidArgument("solve: order dimension mismatch");
  for (std::size_t i = 0; i < p.rhs.size(); ++i)
    if (p.rhs[i] != 0.0 && !p.mask.contains(i)) throw InvalidArgument("solve: rhs must vanish outside Omega");
  if (!all_finite(p.rhs.values())) throw NumericalError("solve: non-finite rhs");
  const auto report = validate_coefficient(p.coeff);
  if (!report.valid) {
    std::ostringstream os;
    os << "solve: coefficient outside M(alpha, beta) (first violation at grid point " << report.first_violation << ")";
    throw ValidationError(os.str());
  }
}

} // namespace

DirichletSolution solve(const DirichletProblem& problem, const SolveOptions& options) {
  check_problem(problem);
  const auto& mask = problem.mask;
  const auto& coeff = problem.coeff;
  const auto& order = problem.order;

  // Fold the flux right-hand side and the affine term into F.
  ScalarField folded = problem.rhs;
  if (problem.rhs_flux) folded += restrict_to_mask(div_s_spectral(*problem.rhs_flux, order), mask);
  if (problem.affine) folded += restrict_to_mask(div_s_spectral(coeff.apply(*problem.affine), order), mask);

  const std::vector<double> rhs = gather_inside(folded, mask);
  const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(10 * mask.count());
  const auto op = stiffness_operator(coeff, order, mask);
  krylov::Result result;
  if (coeff.is_symmetric()) {
    result = krylov::conjugate_gradient(op, rhs, options.tol, max_iter);
  } else {
    const Coefficient transposed = coeff.transposed();
    result = krylov::gmres(op, stiffness_operator(transposed, order, mask), rhs, options.tol, max_iter);
  }
  if (!result.converged) {
    std::ostringstream os;
    os << "solve: " << result.method << " did not converge in " << result.iterations
       << " iterations (relative residual " << result.relative_residual << ")";
    throw NumericalError(os.str());
  }

  DirichletSolution sol;
  sol.u = extend_by_zero(result.x, mask);
  sol.grad_u = grad_s_spectral(sol.u, order);
  sol.flux = problem.affine ? coeff.apply(sol.grad_u + *problem.affine) : coeff.apply(sol.grad_u);
  sol.energy = inner(coeff.apply(sol.grad_u), sol.grad_u);
  sol.residual = result.relative_residual;
  sol.iterations = result.iterations;
  sol.method = result.method;
  sol.folded_rhs = folded;
  if (options.apriori) {
    const double fnorm = hminus_norm(folded, order, mask);
    sol.apriori_ratio = fnorm > 0.0 ? coeff.alpha() * norm(sol.grad_u) / fnorm : 0.0;
  }
  return sol;
}

DirichletSolution solve(const OmegaMask& mask, const Coefficient& coeff, const FracOrder& order,
                        const ScalarField& rhs, const SolveOptions& options) {
  DirichletProblem p{mask, coeff, order, rhs, std::nullopt, std::nullopt};
  return solve(p, options);
}

double hminus_norm(const ScalarField& f, const FracOrder& order, const OmegaMask& mask, double tol) {
  require_same_grid(f.grid(), mask.grid(), "hminus_norm");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0 && !mask.contains(i)) throw InvalidArgument("hminus_norm: f must vanish outside Omega");
  const std::vector<double> rhs = gather_inside(f, mask);
  if (krylov::norm2(rhs) == 0.0) return 0.0;
  const Coefficient unit = identity_coefficient(mask.grid());
  const auto result = krylov::conjugate_gradient(stiffness_operator(unit, order, mask), rhs, tol,
                                                 static_cast<int>(10 * mask.count()));
  if (!result.converged) throw NumericalError("hminus_norm: unit-coefficient solve did not converge");
  return norm(grad_s_spectral(extend_by_zero(result.x, mask), order));
}

double hminus_norm(const VectorField& g, const FracOrder& order, const OmegaMask& mask, double tol) {
  double sum = 0.0;
  for (int j = 0; j < g.components(); ++j) {
    const double c = hminus_norm(restrict_to_mask(g.component(j), mask), order, mask, tol);
    sum += c * c;
  }
  return std::sqrt(sum);
}

double energy(const DirichletSolution& solution, const Coefficient& coeff) {
  return inner(coeff.apply(solution.grad_u), solution.grad_u);
}

const VectorField& flux(const DirichletSolution& solution) { return solution.flux; }

void write_summary_csv(std::ostream& os, const DirichletSolution& solution) {
  os << "energy,residual,iterations,apriori_ratio\n"
     << io::format_double(solution.energy) << ',' << io::format_double(solution.residual) << ','
     << solution.iterations << ',' << io::format_double(solution.apriori_ratio) << '\n';
}

} // namespace fraqhom
