#include "fraqhom/identities.hpp"

#include "fraqhom/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace fraqhom {

namespace {

ScalarField noise(const Grid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  ScalarField u(grid);
  for (double& v : u.values()) v = uniform(rng);
  return u;
}

VectorField noise_vector(const Grid& grid, std::mt19937_64& rng) {
  VectorField g(grid);
  for (int j = 0; j < grid.dim(); ++j) g.component(j) = noise(grid, rng);
  return g;
}

double relative(const VectorField& a, const VectorField& b) {
  const double nb = norm(b);
  return norm(a - b) / (nb > 0.0 ? nb : 1.0);
}

double relative(const ScalarField& a, const ScalarField& b) {
  const double nb = norm(b);
  return norm(a - b) / (nb > 0.0 ? nb : 1.0);
}

IdentityResult make_result(const char* name, const Grid& grid, const FracOrder& order) {
  IdentityResult r;
  r.name = name;
  r.dim = grid.dim();
  r.points_per_axis = grid.points_per_axis();
  r.s = order.s();
  return r;
}

} // namespace

IdentityResult check_adjointness(const Grid& grid, const FracOrder& order, int fields, std::uint64_t seed,
                                 double tol) {
  std::mt19937_64 rng(seed);
  IdentityResult r = make_result("adjointness", grid, order);
  for (int k = 0; k < fields; ++k) {
    const ScalarField u = noise(grid, rng);
    const VectorField g = noise_vector(grid, rng);
    const VectorField gu = grad_s_spectral(u, order);
    const ScalarField dg = div_s_spectral(g, order);
    const double lhs = inner(gu, g);
    const double rhs = -inner(u, dg);
    const double scale = norm(gu) * norm(g) + norm(u) * norm(dg);
    r.max_relative_error = std::max(r.max_relative_error, std::abs(lhs - rhs) / (scale > 0.0 ? scale : 1.0));
  }
  r.pass = r.max_relative_error <= tol;
  return r;
}

std::vector<IdentityResult> operator_identity_suite(const Grid& grid, const FracOrder& order, int fields,
                                                    std::uint64_t seed, double tol) {
  std::vector<IdentityResult> out;
  out.push_back(check_adjointness(grid, order, fields, seed, tol));

  std::mt19937_64 rng(seed + 1);
  IdentityResult lap = make_result("laplacian", grid, order);
  IdentityResult riesz = make_result("riesz-gradient", grid, order);
  IdentityResult pot = make_result("potential", grid, order);
  for (int k = 0; k < fields; ++k) {
    const ScalarField u = noise(grid, rng);
    const VectorField gu = grad_s_spectral(u, order);
    ScalarField neg_div = div_s_spectral(gu, order);
    neg_div *= -1.0;
    lap.max_relative_error = std::max(lap.max_relative_error, relative(neg_div, frac_laplacian(u, 2.0 * order.s())));

    VectorField lifted(grid);
    for (int j = 0; j < grid.dim(); ++j) lifted.component(j) = frac_laplacian(gu.component(j), 1.0 - order.s());
    riesz.max_relative_error = std::max(riesz.max_relative_error, relative(lifted, spectral_gradient(u)));

    const VectorField via_potential = spectral_gradient(riesz_potential(u, 1.0 - order.s()));
    pot.max_relative_error = std::max(pot.max_relative_error, relative(via_potential, gu));
  }
  for (auto* r : {&lap, &riesz, &pot}) {
    r->pass = r->max_relative_error <= tol;
    out.push_back(*r);
  }
  return out;
}

void write_identity_csv(std::ostream& os, const std::vector<IdentityResult>& results) {
  os << "identity,dim,N,s,max_relative_error,pass\n";
  for (const auto& r : results)
    os << r.name << ',' << r.dim << ',' << r.points_per_axis << ',' << io::format_double(r.s) << ','
       << io::format_double(r.max_relative_error) << ',' << (r.pass ? "pass" : "fail") << '\n';
}

} // namespace fraqhom
