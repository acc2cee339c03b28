#include <doctest.h>

#include "fraqhom/errors.hpp"
#include "fraqhom/heat.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace fraqhom;

namespace {

const Profile sine_profile = [](double y) { return 2.0 + std::sin(2.0 * std::numbers::pi * y); };

struct Setup {
  Grid grid = build_grid(1, 8.0, 1024);
  OmegaMask mask = interval_mask(grid, -1.0, 1.0);
  FracOrder order{0.5, 1};
  ScalarField ones;
  Setup() : ones(grid) {
    for (std::size_t i : mask.indices()) ones[i] = 1.0;
  }
};

HeatProblem problem(const Setup& s, const Coefficient& c, double T, double dt,
                    TimeScheme scheme = TimeScheme::ImplicitEuler) {
  return HeatProblem{s.mask, c, s.order, T, dt, constant_forcing(s.ones), scheme, 1, 1e-12};
}

} // namespace

TEST_CASE("trivial steps and trajectories") {
  const Setup s;
  const auto id = identity_coefficient(s.grid);
  const ScalarField zero(s.grid);
  CHECK(norm(step(zero, zero, id, s.order, s.mask, 0.1)) == 0.0);
  HeatProblem p = problem(s, id, 0.5, 0.1);
  p.forcing = constant_forcing(zero);
  const auto tr = solve_heat(p);
  CHECK(tr.snapshots.size() == 6);
  for (const auto& u : tr.snapshots) CHECK(norm(u) == 0.0);
  CHECK(tr.spacetime_norm == 0.0);
}

TEST_CASE("huge step approaches the steady state") {
  const Setup s;
  const auto a = periodic_sequence_1d(s.grid, sine_profile, 1.0, 3.0)(4);
  const auto steady = solve(s.mask, a, s.order, s.ones, {1e-12, 0, false});
  const double dt = 1e6;
  const auto u1 = step(ScalarField(s.grid), s.ones, a, s.order, s.mask, dt, TimeScheme::ImplicitEuler, nullptr, 1e-12);
  CHECK(norm(u1 - steady.u) / norm(steady.u) < 2.0 / dt * 10.0);
}

TEST_CASE("free evolution contracts and respects the energy inequality") {
  const Setup s;
  const auto a = periodic_sequence_1d(s.grid, sine_profile, 1.0, 3.0)(4);
  ScalarField u(s.grid);
  for (std::size_t i : s.mask.indices()) u[i] = std::cos(0.5 * std::numbers::pi * s.grid.point(i)[0]);
  const ScalarField zero(s.grid);
  for (int k = 0; k < 5; ++k) {
    const ScalarField next = step(u, zero, a, s.order, s.mask, 0.05);
    CHECK(norm(next) < norm(u));
    u = next;
  }

  const double dt = 0.05;
  ScalarField w(s.grid);
  for (int k = 0; k < 10; ++k) {
    const ScalarField next = step(w, s.ones, a, s.order, s.mask, dt);
    const double gn = norm(grad_s_spectral(next, s.order));
    const double lhs = norm(next) * norm(next) + 2.0 * dt * a.alpha() * gn * gn;
    const double rhs = norm(w) * norm(w) + 2.0 * dt * inner(s.ones, next);
    CHECK(lhs <= rhs + 1e-8);
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      if (!s.mask.contains(i)) CHECK(next[i] == 0.0);
    w = next;
  }
}

TEST_CASE("long-time limit is the stationary solution") {
  const Setup s;
  const auto id = identity_coefficient(s.grid);
  const auto steady = solve(s.mask, id, s.order, s.ones, {1e-12, 0, false});
  const auto tr = solve_heat(problem(s, id, 8.0, 0.05));
  CHECK(norm(tr.snapshots.back() - steady.u) / norm(steady.u) < 1e-2);
  CHECK(tr.snapshots.front().values()[0] == 0.0);
  CHECK(norm(tr.snapshots.front()) == 0.0);
}

TEST_CASE("implicit Euler is first order and Crank-Nicolson more accurate") {
  const Setup s;
  const auto a = periodic_sequence_1d(s.grid, sine_profile, 1.0, 3.0)(4);
  const auto t16 = solve_heat(problem(s, a, 1.0, 1.0 / 16));
  const auto t32 = solve_heat(problem(s, a, 1.0, 1.0 / 32));
  const auto t64 = solve_heat(problem(s, a, 1.0, 1.0 / 64));
  const double d1 = spacetime_distance(t16, t32, s.mask);
  const double d2 = spacetime_distance(t32, t64, s.mask);
  INFO("ratio " << d1 / d2);
  CHECK(d1 / d2 > 1.6);
  CHECK(d1 / d2 < 2.4);

  const auto ref = solve_heat(problem(s, a, 1.0, 1.0 / 256, TimeScheme::CrankNicolson));
  const auto cn = solve_heat(problem(s, a, 1.0, 1.0 / 32, TimeScheme::CrankNicolson));
  CHECK(spacetime_distance(cn, ref, s.mask) < spacetime_distance(t32, ref, s.mask));
  CHECK(to_string(TimeScheme::CrankNicolson) == "crank-nicolson");
}

TEST_CASE("implicit Euler is stable on a stiff coefficient") {
  const Setup s;
  const auto stiff = periodic_sequence_1d(s.grid, [](double y) { return y < 0.5 ? 1.0 : 100.0; }, 1.0, 100.0)(8);
  const double bound = hminus_norm(s.ones, s.order, s.mask); // ||u(t)|| stays below the steady-state scale
  for (double dt : {1.0, 0.1, 0.01}) {
    HeatProblem p = problem(s, stiff, 1.0, dt);
    p.tol = 1e-10;
    const auto tr = solve_heat(p);
    for (double n : tr.step_norms) {
      CHECK(std::isfinite(n));
      CHECK(n <= 10.0 * bound);
    }
  }
}

TEST_CASE("invalid heat problems") {
  const Setup s;
  const auto id = identity_coefficient(s.grid);
  CHECK_THROWS_AS(solve_heat(problem(s, id, 1.0, 3.0)), InvalidArgument);
  CHECK_THROWS_AS(step(ScalarField(s.grid), s.ones, id, s.order, s.mask, 0.0), InvalidArgument);
  CHECK_THROWS_AS(solve_heat(problem(s, id, 1.0, -0.1)), InvalidArgument);
  HeatProblem p = problem(s, id, 1.0, 0.5);
  ScalarField outside(s.grid);
  outside[0] = 1.0;
  p.forcing = constant_forcing(outside);
  CHECK_THROWS_AS(solve_heat(p), InvalidArgument);
}

TEST_CASE("constant sequence heat experiment") {
  const Setup s;
  const auto a = periodic_sequence_1d(s.grid, sine_profile, 1.0, 3.0)(3);
  const auto r = heat_homog_experiment(constant_sequence(a), s.mask, s.order, constant_forcing(s.ones), 0.5, 0.125,
                                       {1, 2, 3}, a);
  for (const auto& row : r.rows) {
    CHECK(row.solved);
    CHECK(row.relative < 1e-12);
  }
  std::ostringstream os;
  write_heat_report_csv(os, r);
  CHECK(os.str().rfind("n,solved,discrepancy,relative,iterations\n", 0) == 0);
  std::ostringstream ts;
  write_trajectory_csv(ts, r.reference);
  CHECK(ts.str().rfind("t,norm\n0,0\n", 0) == 0);
}

TEST_CASE("flagship family with a time-dependent bump forcing") {
  const Grid g = build_grid(1, 8.0, 4096);
  const OmegaMask m = interval_mask(g, -1.0, 1.0);
  const FracOrder o(0.5, 1);
  const ScalarField bump = restrict_to_mask(bump_field(g, {0.0, 0.0}, 0.8), m);
  const Forcing f = [bump](double t) { return std::sin(std::numbers::pi * t) * bump; };
  const auto seq = periodic_sequence_1d(g, sine_profile, 1.0, 3.0);
  const auto r = heat_homog_experiment(seq, m, o, f, 1.0, 1.0 / 32, {8, 16, 32, 64}, predicted_limit_1d(seq, m));
  for (const auto& row : r.rows) INFO("n=" << row.n << " rel " << row.relative);
  CHECK(r.strictly_decreasing);
  CHECK(r.verdict.pass);
}
