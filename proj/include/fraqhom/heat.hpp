#pragma once

// Fractional heat problem  u' - div^s(A grad^s u) = f,  u(0) = 0,  u = 0
// outside Omega, discretised in space by the Dirichlet stiffness K and in
// time by implicit Euler or Crank-Nicolson.

#include "fraqhom/dirichlet.hpp"
#include "fraqhom/homog.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace fraqhom {

enum class TimeScheme { ImplicitEuler, CrankNicolson };

std::string to_string(TimeScheme scheme);

/// Forcing at time t; must vanish outside Omega.
using Forcing = std::function<ScalarField(double t)>;

/// Time-independent forcing.
Forcing constant_forcing(const ScalarField& f);

struct HeatProblem {
  OmegaMask mask;
  Coefficient coeff;
  FracOrder order{0.5, 1};
  double T = 1.0;
  double dt = 1.0 / 64.0;
  Forcing forcing;
  TimeScheme scheme = TimeScheme::ImplicitEuler;
  /// Keep every k-th snapshot (the final one is always kept).
  int snapshot_stride = 1;
  double tol = 1e-10;
};

struct HeatTrajectory {
  std::vector<double> times;
  std::vector<ScalarField> snapshots;
  /// ||u(t_k)||_{L2(Omega)} at every step, including t = 0.
  std::vector<double> step_times;
  std::vector<double> step_norms;
  /// ||u||_{L2(0,T;L2(Omega))} by the trapezoid rule over all steps.
  double spacetime_norm = 0.0;
  int iterations = 0;
};

/// One step of (I + dt K) u_{k+1} = u_k + dt f_{k+1} (implicit Euler) or
/// (I + dt/2 K) u_{k+1} = (I - dt/2 K) u_k + dt/2 (f_k + f_{k+1}).
/// f_now is only used by Crank-Nicolson and defaults to f_next.
/// Throws NumericalError when the Krylov solve does not converge.
ScalarField step(const ScalarField& u, const ScalarField& f_next, const Coefficient& coeff, const FracOrder& order,
                 const OmegaMask& mask, double dt, TimeScheme scheme = TimeScheme::ImplicitEuler,
                 const ScalarField* f_now = nullptr, double tol = 1e-10, int* iterations = nullptr);

/// Marches from u(0) = 0. Throws InvalidArgument for a bad problem and
/// NumericalError naming the failing step.
HeatTrajectory solve_heat(const HeatProblem& problem);

/// ||a - b||_{L2(0,T;L2(Omega))} by the trapezoid rule on the snapshot times
/// of `a`; every time of `a` must also be a snapshot time of `b`.
double spacetime_distance(const HeatTrajectory& a, const HeatTrajectory& b, const OmegaMask& mask);

struct HeatRow {
  int n = 0;
  bool solved = false;
  std::string error;
  double discrepancy = 0.0;
  double relative = 0.0;
  int iterations = 0;
};

struct HeatReport {
  std::vector<HeatRow> rows;
  double reference_norm = 0.0;
  Verdict verdict;
  bool strictly_decreasing = false;
  HeatTrajectory reference;
};

struct HeatExperimentOptions {
  TimeScheme scheme = TimeScheme::ImplicitEuler;
  double tol = 1e-10;
  double tolerance = 0.05;
};

/// Trajectories for every n against the trajectory of the limit (or of the
/// largest n when no limit is given); per-n failures are recorded.
HeatReport heat_homog_experiment(const CoefficientSequence& sequence, const OmegaMask& mask, const FracOrder& order,
                                 const Forcing& forcing, double T, double dt, const std::vector<int>& n_list,
                                 const std::optional<Coefficient>& limit, const HeatExperimentOptions& options = {});

/// CSV `t,norm`.
void write_trajectory_csv(std::ostream& os, const HeatTrajectory& trajectory);
/// CSV `n,solved,discrepancy,relative,iterations`.
void write_heat_report_csv(std::ostream& os, const HeatReport& report);

} // namespace fraqhom
