#include <doctest.h>

#include "fraqhom/dirichlet.hpp"
#include "fraqhom/errors.hpp"
#include "fraqhom/homog.hpp"
#include "fraqhom/krylov.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace fraqhom;

namespace {

struct Setup1D {
  Grid grid = build_grid(1, 8.0, 2048);
  OmegaMask mask = interval_mask(grid, -1.0, 1.0);
  FracOrder order{0.5, 1};
};

ScalarField ones_on(const OmegaMask& mask) {
  ScalarField f(mask.grid());
  for (std::size_t i : mask.indices()) f[i] = 1.0;
  return f;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

/// Smooth random field on Omega: sum of a few sine modes on the bounding box.
ScalarField smooth_random(const OmegaMask& mask, std::mt19937_64& rng, int modes = 6) {
  std::normal_distribution<double> normal;
  ScalarField f(mask.grid());
  const auto lo = mask.lower_corner(), hi = mask.upper_corner();
  std::vector<double> c(static_cast<std::size_t>(modes * modes));
  for (double& x : c) x = normal(rng);
  for (std::size_t i : mask.indices()) {
    const Point p = mask.grid().point(i);
    double v = 0.0;
    for (int a = 1; a <= modes; ++a) {
      const double sa = std::sin(a * std::numbers::pi * (p[0] - lo[0]) / (hi[0] - lo[0]));
      if (mask.grid().dim() == 1) {
        v += c[static_cast<std::size_t>(a - 1)] * sa / a;
        continue;
      }
      for (int b = 1; b <= modes; ++b)
        v += c[static_cast<std::size_t>((a - 1) * modes + b - 1)] * sa *
             std::sin(b * std::numbers::pi * (p[1] - lo[1]) / (hi[1] - lo[1])) / (a * b);
    }
    f[i] = v;
  }
  return f;
}

Coefficient sine_coefficient(const Grid& g) {
  return scalar_coefficient(
      g, [](const Point& p) { return 2.0 + std::sin(2.0 * std::numbers::pi * 3.0 * p[0]); }, 1.0, 3.0);
}

} // namespace

TEST_CASE("stiffness: zero, symmetry and coercivity") {
  const Setup1D s;
  const Coefficient id = identity_coefficient(s.grid);
  const Coefficient a = sine_coefficient(s.grid);
  std::mt19937_64 rng(5);
  const std::size_t n = s.mask.count();
  const auto zero = apply_stiffness(id, s.order, s.mask, std::vector<double>(n, 0.0));
  CHECK(krylov::norm2(zero) == 0.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_vector(n, rng), y = random_vector(n, rng);
    for (const Coefficient* c : {&id, &a}) {
      const double xky = krylov::dot(x, apply_stiffness(*c, s.order, s.mask, y));
      const double ykx = krylov::dot(y, apply_stiffness(*c, s.order, s.mask, x));
      CHECK(std::abs(xky - ykx) <= 1e-12 * std::max(std::abs(xky), 1.0) * 10);
    }
    // coercivity against an independently computed grad^s
    const auto kx = apply_stiffness(a, s.order, s.mask, x);
    const double form = krylov::dot(x, kx) * s.grid.cell_volume();
    const VectorField gx = grad_s_spectral(extend_by_zero(x, s.mask), s.order);
    CHECK(form >= a.alpha() * inner(gx, gx) * (1.0 - 1e-12));
    const double exact_form = inner(a.apply(gx), gx);
    CHECK(form == doctest::Approx(exact_form).epsilon(1e-10));
  }
  const Grid g2 = build_grid(2, 2.0, 32);
  const OmegaMask m2 = ball_mask(g2, {0.0, 0.0}, 1.0);
  const Coefficient rot(g2, std::vector<Mat2>(g2.size(), Mat2{{2.0, 1.0, -1.0, 2.0}}), 1.9, 3.0);
  const FracOrder o2(0.5, 2);
  for (int trial = 0; trial < 3; ++trial) {
    const auto x = random_vector(m2.count(), rng);
    const VectorField gx = grad_s_spectral(extend_by_zero(x, m2), o2);
    const double form = krylov::dot(x, apply_stiffness(rot, o2, m2, x)) * g2.cell_volume();
    CHECK(form >= 1.9 * inner(gx, gx) * (1.0 - 1e-12));
  }
}

TEST_CASE("trivial solves") {
  const Setup1D s;
  const auto sol = solve(s.mask, identity_coefficient(s.grid), s.order, ScalarField(s.grid));
  CHECK(norm(sol.u) == 0.0);
  CHECK(sol.energy == 0.0);
  CHECK(hminus_norm(ScalarField(s.grid), s.order, s.mask) == 0.0);
}

TEST_CASE("unit coefficient, f = 1: residual, a-priori bound and 4x refinement") {
  const Setup1D s;
  const auto coarse = solve(s.mask, identity_coefficient(s.grid), s.order, ones_on(s.mask));
  CHECK(coarse.residual <= 1e-10);
  CHECK(coarse.apriori_ratio <= 1.01);
  CHECK(coarse.apriori_ratio > 0.5);
  for (std::size_t i = 0; i < s.grid.size(); ++i)
    if (!s.mask.contains(i)) CHECK(coarse.u[i] == 0.0);
  const VectorField gu = grad_s_spectral(coarse.u, s.order);
  CHECK(norm(gu) <= 1.01 * hminus_norm(ones_on(s.mask), s.order, s.mask));

  const Grid fine_grid = build_grid(1, 8.0, 8192);
  const OmegaMask fine_mask = interval_mask(fine_grid, -1.0, 1.0);
  const auto fine = solve(fine_mask, identity_coefficient(fine_grid), s.order, ones_on(fine_mask), {1e-10, 0, false});
  double diff = 0.0, ref = 0.0;
  for (std::size_t i : s.mask.indices()) {
    const double avg = 0.5 * (fine.u[4 * i + 1] + fine.u[4 * i + 2]);
    diff += (coarse.u[i] - avg) * (coarse.u[i] - avg);
    ref += avg * avg;
  }
  INFO("relative difference " << std::sqrt(diff / ref));
  CHECK(std::sqrt(diff / ref) < 2e-2);
}

TEST_CASE("closed-form profile c (1 - x^2)^s and its weak-form residual") {
  const Setup1D s;
  const double sv = s.order.s();
  const double c = std::tgamma(0.5) / (std::pow(4.0, sv) * std::tgamma(1.0 + sv) * std::tgamma(0.5 + sv));
  const auto candidate = [&](double scale) {
    ScalarField u(s.grid);
    for (std::size_t i : s.mask.indices()) {
      const double x = s.grid.point(i)[0];
      u[i] = scale * c * std::pow(1.0 - x * x, sv);
    }
    return u;
  };
  const ScalarField f = ones_on(s.mask);
  const auto sol = solve(s.mask, identity_coefficient(s.grid), s.order, f);
  const Coefficient id = identity_coefficient(s.grid);
  const auto residual = [&](const ScalarField& u) {
    const auto ku = apply_stiffness(id, s.order, s.mask, gather_inside(u, s.mask));
    const auto fi = gather_inside(f, s.mask);
    std::vector<double> r(ku.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = ku[i] - fi[i];
    return krylov::norm2(r) / krylov::norm2(fi);
  };
  const double r_solver = residual(sol.u);
  const double r_perturbed = residual(candidate(1.05));
  INFO("solver " << r_solver << " perturbed " << r_perturbed << " exact " << residual(candidate(1.0)));
  CHECK(r_solver * 10.0 <= r_perturbed);
  // the discrete solution is close to the closed form in L2(Omega)
  const double rel = norm_on(sol.u - candidate(1.0), s.mask) / norm_on(candidate(1.0), s.mask);
  INFO("L2 distance to closed form " << rel);
  CHECK(rel < 2e-2);
}

TEST_CASE("H^-s norm") {
  const Setup1D s;
  std::mt19937_64 rng(9);
  const ScalarField f = smooth_random(s.mask, rng);
  const double nf = hminus_norm(f, s.order, s.mask);
  CHECK(nf > 0.0);
  CHECK(hminus_norm(2.0 * f, s.order, s.mask) == doctest::Approx(2.0 * nf).epsilon(1e-8));

  // forward application then inversion
  const ScalarField w = smooth_random(s.mask, rng);
  const auto kw = apply_stiffness(identity_coefficient(s.grid), s.order, s.mask, gather_inside(w, s.mask));
  const ScalarField fw = extend_by_zero(kw, s.mask);
  const double expected = norm(grad_s_spectral(w, s.order));
  CHECK(hminus_norm(fw, s.order, s.mask) == doctest::Approx(expected).epsilon(1e-6));

  VectorField g(s.grid);
  g.component(0) = f;
  CHECK(hminus_norm(g, s.order, s.mask) == doctest::Approx(nf).epsilon(1e-12));
}

TEST_CASE("energy identity and coefficient scaling") {
  const Setup1D s;
  std::mt19937_64 rng(13);
  const Coefficient a = sine_coefficient(s.grid);
  for (int trial = 0; trial < 3; ++trial) {
    const ScalarField f = smooth_random(s.mask, rng);
    const auto sol = solve(s.mask, a, s.order, f);
    CHECK(energy(sol, a) == doctest::Approx(inner(f, sol.u)).epsilon(1e-8));
    CHECK(sol.apriori_ratio <= 1.01);
    const auto sol2 = solve(s.mask, a.scaled(2.0), s.order, f);
    CHECK(norm(sol2.u - 0.5 * sol.u) <= 1e-8 * norm(sol.u));
    CHECK(sol2.energy == doctest::Approx(0.5 * sol.energy).epsilon(1e-8));
    const VectorField& fl = flux(sol);
    CHECK(norm(fl - a.apply(sol.grad_u)) <= 1e-14 * norm(fl));
  }
}

TEST_CASE("discrete Poincare ratio is stable under refinement") {
  double previous = 0.0;
  for (int n : {1024, 2048}) {
    const Grid g = build_grid(1, 8.0, n);
    const OmegaMask m = interval_mask(g, -1.0, 1.0);
    const FracOrder o(0.5, 1);
    std::mt19937_64 rng(21);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const ScalarField u = smooth_random(m, rng, 8);
      worst = std::max(worst, norm_on(u, m) / norm(grad_s_spectral(u, o)));
    }
    CHECK(worst < 1.0);
    if (previous > 0.0) CHECK(std::abs(worst - previous) / previous < 0.2);
    previous = worst;
  }
}

TEST_CASE("transposition identity in 2D") {
  const Grid g = build_grid(2, 2.0, 32);
  const OmegaMask m = ball_mask(g, {0.0, 0.0}, 1.0);
  const FracOrder o(0.5, 2);
  const Coefficient a = coefficient_from_function(
      g, [](const Point& p) { return Mat2{{2.0 + 0.5 * std::sin(3 * p[0]), 1.0, -1.0, 2.0}}; }, 1.4, 4.0);
  std::mt19937_64 rng(17);
  const ScalarField f = smooth_random(m, rng, 4), h = smooth_random(m, rng, 4);
  const auto uf = solve(m, a, o, f, {1e-12, 0, false});
  const auto uh = solve(m, a.transposed(), o, h, {1e-12, 0, false});
  CHECK(inner(f, uh.u) == doctest::Approx(inner(h, uf.u)).epsilon(1e-8));
}

TEST_CASE("affine offset folds into the right-hand side") {
  const Setup1D s;
  const Coefficient a = sine_coefficient(s.grid);
  std::mt19937_64 rng(23);
  const ScalarField f = smooth_random(s.mask, rng);
  VectorField v(s.grid);
  v.component(0) = ScalarField::from_function(s.grid, [](const Point& p) { return std::exp(-p[0] * p[0]) * p[0]; });

  DirichletProblem with_offset{s.mask, a, s.order, f, std::nullopt, v};
  const auto sol_v = solve(with_offset);
  DirichletProblem folded{s.mask, a, s.order, f + restrict_to_mask(div_s_spectral(a.apply(v), s.order), s.mask),
                          std::nullopt, std::nullopt};
  const auto sol_f = solve(folded);
  CHECK(norm(sol_v.u - sol_f.u) <= 1e-8 * norm(sol_f.u));
  CHECK(norm(sol_v.flux - a.apply(sol_v.grad_u + v)) <= 1e-14 * norm(sol_v.flux));

  DirichletProblem as_flux{s.mask, a, s.order, f, a.apply(v), std::nullopt};
  CHECK(norm(solve(as_flux).u - sol_f.u) <= 1e-8 * norm(sol_f.u));
}

TEST_CASE("nonsymmetric coefficient solves through GMRES") {
  const Grid g = build_grid(2, 2.0, 32);
  const OmegaMask m = ball_mask(g, {0.0, 0.0}, 1.0);
  const FracOrder o(0.5, 2);
  const Coefficient rot(g, std::vector<Mat2>(g.size(), Mat2{{2.0, 1.0, -1.0, 2.0}}), 1.9, 3.0);
  const auto sol = solve(m, rot, o, ones_on(m));
  CHECK(sol.method != "cg");
  CHECK(sol.residual <= 1e-10);
  // antisymmetric part is invisible in the quadratic form, but the solve uses the full matrix
  const Coefficient sym(g, std::vector<Mat2>(g.size(), Mat2::scalar(2.0)), 1.9, 3.0);
  CHECK(sol.energy == doctest::Approx(energy(sol, sym)).epsilon(1e-12));
}

TEST_CASE("invalid coefficient and non-convergence") {
  const Setup1D s;
  const Coefficient bad(s.grid, std::vector<Mat2>(s.grid.size(), Mat2::scalar(3.0)), 1.0, 2.0);
  CHECK_THROWS_AS(solve(s.mask, bad, s.order, ones_on(s.mask)), ValidationError);
  CHECK_THROWS_AS(solve(s.mask, identity_coefficient(s.grid), s.order, ones_on(s.mask), {1e-14, 2, false}),
                  NumericalError);
  ScalarField outside(s.grid);
  outside[0] = 1.0;
  CHECK_THROWS_AS(solve(s.mask, identity_coefficient(s.grid), s.order, outside), InvalidArgument);
}

TEST_CASE("Krylov solvers against a dense solve") {
  std::mt19937_64 rng(31);
  const int n = 60;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  std::normal_distribution<double> normal;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = normal(rng);
  const Eigen::MatrixXd spd = b * b.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd nonsym = spd + 0.5 * (b - b.transpose());
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = normal(rng);
  const std::vector<double> r(rhs.data(), rhs.data() + n);

  auto as_op = [](const Eigen::MatrixXd& m) {
    return krylov::Operator([&m](std::span<const double> x, std::span<double> y) {
      Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) =
          m * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    });
  };
  const Eigen::MatrixXd nonsym_t = nonsym.transpose();
  const auto cg = krylov::conjugate_gradient(as_op(spd), r, 1e-12, 1000);
  CHECK(cg.converged);
  const Eigen::VectorXd x_cg = Eigen::Map<const Eigen::VectorXd>(cg.x.data(), n);
  CHECK((x_cg - spd.partialPivLu().solve(rhs)).norm() <= 1e-9 * x_cg.norm());

  const auto gm = krylov::gmres(as_op(nonsym), as_op(nonsym_t), r, 1e-12, 2000, 10);
  CHECK(gm.converged);
  const Eigen::VectorXd x_gm = Eigen::Map<const Eigen::VectorXd>(gm.x.data(), n);
  CHECK((x_gm - nonsym.partialPivLu().solve(rhs)).norm() <= 1e-9 * x_gm.norm());
}

TEST_CASE("summary CSV") {
  const Setup1D s;
  const auto sol = solve(s.mask, identity_coefficient(s.grid), s.order, ones_on(s.mask));
  std::ostringstream os;
  write_summary_csv(os, sol);
  CHECK(os.str().rfind("energy,residual,iterations,apriori_ratio\n", 0) == 0);
}
