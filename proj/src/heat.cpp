#include "fraqhom/heat.hpp"

#include "fraqhom/errors.hpp"
#include "fraqhom/field_io.hpp"
#include "fraqhom/krylov.hpp"
#include "fraqhom/parallel.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace fraqhom {

std::string to_string(TimeScheme scheme) {
  return scheme == TimeScheme::CrankNicolson ? "crank-nicolson" : "implicit-euler";
}

Forcing constant_forcing(const ScalarField& f) {
  return [f](double) { return f; };
}

namespace {

krylov::Operator shifted_operator(const Coefficient& coeff, const FracOrder& order, const OmegaMask& mask,
                                  double weight) {
  return [&coeff, &order, &mask, weight](std::span<const double> x, std::span<double> y) {
    const auto kx = apply_stiffness(coeff, order, mask, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + weight * kx[i];
  };
}

void check_inside(const ScalarField& f, const OmegaMask& mask, const char* what) {
  require_same_grid(f.grid(), mask.grid(), what);
  if (!all_finite(f.values())) throw NumericalError(std::string(what) + ": non-finite values");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0 && !mask.contains(i)) throw InvalidArgument(std::string(what) + ": field must vanish outside Omega");
}

} // namespace

ScalarField step(const ScalarField& u, const ScalarField& f_next, const Coefficient& coeff, const FracOrder& order,
                 const OmegaMask& mask, double dt, TimeScheme scheme, const ScalarField* f_now, double tol,
                 int* iterations) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  require_same_grid(coeff.grid(), mask.grid(), "step");
  check_inside(u, mask, "step");
  check_inside(f_next, mask, "step");

  const std::vector<double> uk = gather_inside(u, mask);
  const std::vector<double> fn = gather_inside(f_next, mask);
  std::vector<double> rhs(uk.size());
  double weight = dt;
  if (scheme == TimeScheme::ImplicitEuler) {
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = uk[i] + dt * fn[i];
  } else {
    weight = 0.5 * dt;
    const std::vector<double> fk = f_now ? gather_inside(*f_now, mask) : fn;
    const auto ku = apply_stiffness(coeff, order, mask, uk);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = uk[i] - weight * ku[i] + weight * (fk[i] + fn[i]);
  }

  const int max_iter = static_cast<int>(10 * mask.count());
  const auto op = shifted_operator(coeff, order, mask, weight);
  krylov::Result result;
  if (coeff.is_symmetric()) {
    result = krylov::conjugate_gradient(op, rhs, tol, max_iter);
  } else {
    const Coefficient transposed = coeff.transposed();
    result = krylov::gmres(op, shifted_operator(transposed, order, mask, weight), rhs, tol, max_iter);
  }
  if (!result.converged) {
    std::ostringstream os;
    os << "step: " << result.method << " did not converge (relative residual " << result.relative_residual << ")";
    throw NumericalError(os.str());
  }
  if (iterations) *iterations += result.iterations;
  return extend_by_zero(result.x, mask);
}

HeatTrajectory solve_heat(const HeatProblem& p) {
  if (!(p.T > 0.0) || !(p.dt > 0.0)) throw InvalidArgument("solve_heat: T and dt must be positive");
  if (!p.forcing) throw InvalidArgument("solve_heat: missing forcing");
  if (p.snapshot_stride < 1) throw InvalidArgument("solve_heat: snapshot stride must be at least 1");
  const long steps = std::lround(p.T / p.dt);
  if (steps < 1 || std::abs(steps * p.dt - p.T) > 0.5 * p.dt)
    throw InvalidArgument("solve_heat: dt must divide T");
  const Grid& grid = p.mask.grid();

  HeatTrajectory tr;
  ScalarField u(grid);
  ScalarField f_now = p.forcing(0.0);
  check_inside(f_now, p.mask, "solve_heat forcing");
  tr.times.push_back(0.0);
  tr.snapshots.push_back(u);
  tr.step_times.push_back(0.0);
  tr.step_norms.push_back(0.0);

  for (long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * p.dt;
    const ScalarField f_next = p.forcing(t);
    try {
      u = step(u, f_next, p.coeff, p.order, p.mask, p.dt, p.scheme, &f_now, p.tol, &tr.iterations);
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "solve_heat: step " << k << " (t = " << t << "): " << e.what();
      throw NumericalError(os.str());
    }
    f_now = f_next;
    tr.step_times.push_back(t);
    tr.step_norms.push_back(norm_on(u, p.mask));
    if (k % p.snapshot_stride == 0 || k == steps) {
      tr.times.push_back(t);
      tr.snapshots.push_back(u);
    }
  }

  double integral = 0.0;
  for (std::size_t k = 1; k < tr.step_times.size(); ++k) {
    const double a = tr.step_norms[k - 1], b = tr.step_norms[k];
    integral += 0.5 * (tr.step_times[k] - tr.step_times[k - 1]) * (a * a + b * b);
  }
  tr.spacetime_norm = std::sqrt(integral);
  return tr;
}

double spacetime_distance(const HeatTrajectory& a, const HeatTrajectory& b, const OmegaMask& mask) {
  if (a.times.empty()) throw InvalidArgument("spacetime_distance: empty trajectory");
  std::vector<double> d(a.times.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const double t = a.times[i];
    const double match = 1e-9 * std::max(1.0, std::abs(t));
    while (j < b.times.size() && b.times[j] < t - match) ++j;
    if (j == b.times.size() || std::abs(b.times[j] - t) > match)
      throw InvalidArgument("spacetime_distance: snapshot times do not match");
    d[i] = norm_on(a.snapshots[i] - b.snapshots[j], mask);
  }
  double integral = 0.0;
  for (std::size_t i = 1; i < d.size(); ++i)
    integral += 0.5 * (a.times[i] - a.times[i - 1]) * (d[i - 1] * d[i - 1] + d[i] * d[i]);
  return std::sqrt(integral);
}

HeatReport heat_homog_experiment(const CoefficientSequence& sequence, const OmegaMask& mask, const FracOrder& order,
                                 const Forcing& forcing, double T, double dt, const std::vector<int>& n_list,
                                 const std::optional<Coefficient>& limit, const HeatExperimentOptions& options) {
  if (n_list.empty()) throw InvalidArgument("heat_homog_experiment: empty n list");
  if (!std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end())
    throw InvalidArgument("heat_homog_experiment: n list must be strictly increasing");

  auto problem_for = [&](const Coefficient& c) {
    HeatProblem p{mask, c, order, T, dt, forcing, options.scheme, 1, options.tol};
    return p;
  };
  HeatReport report;
  report.reference = solve_heat(problem_for(limit ? *limit : sequence(n_list.back())));
  report.reference_norm = report.reference.spacetime_norm;

  report.rows.resize(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t i) {
    HeatRow& row = report.rows[i];
    row.n = n_list[i];
    try {
      const HeatTrajectory tr = solve_heat(problem_for(sequence(row.n)));
      row.discrepancy = spacetime_distance(tr, report.reference, mask);
      row.relative = report.reference_norm > 0.0 ? row.discrepancy / report.reference_norm : row.discrepancy;
      row.iterations = tr.iterations;
      row.solved = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  const std::size_t used = limit ? report.rows.size() : report.rows.size() - 1;
  std::vector<double> values;
  bool all_solved = true;
  for (std::size_t i = 0; i < used; ++i) {
    values.push_back(report.rows[i].relative);
    all_solved = all_solved && report.rows[i].solved;
  }
  report.verdict = trend_verdict(values, options.tolerance);
  report.strictly_decreasing = all_solved;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] < values[i - 1])) report.strictly_decreasing = false;
  if (!all_solved) report.verdict.pass = false;
  return report;
}

void write_trajectory_csv(std::ostream& os, const HeatTrajectory& trajectory) {
  os << "t,norm\n";
  for (std::size_t k = 0; k < trajectory.step_times.size(); ++k)
    os << io::format_double(trajectory.step_times[k]) << ',' << io::format_double(trajectory.step_norms[k]) << '\n';
}

void write_heat_report_csv(std::ostream& os, const HeatReport& report) {
  os << "n,solved,discrepancy,relative,iterations\n";
  for (const auto& r : report.rows)
    os << r.n << ',' << (r.solved ? 1 : 0) << ',' << io::format_double(r.discrepancy) << ','
       << io::format_double(r.relative) << ',' << r.iterations << '\n';
}

} // namespace fraqhom
