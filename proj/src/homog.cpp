#include "fraqhom/homog.hpp"

#include "fraqhom/errors.hpp"
#include "fraqhom/field_io.hpp"
#include "fraqhom/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fraqhom {

std::string to_string(SequenceFamily family) {
  switch (family) {
  case SequenceFamily::Periodic1D: return "periodic-1d";
  case SequenceFamily::Checkerboard2D: return "checkerboard-2d";
  case SequenceFamily::Layered2D: return "layered-2d";
  case SequenceFamily::Custom: return "custom";
  }
  return "custom";
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive_profile(const Profile& profile) {
  constexpr int samples = 4096;
  for (int i = 0; i < samples; ++i) {
    const double v = profile((i + 0.5) / samples);
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("profile must be positive and finite on [0, 1)");
  }
}

double integrate_period(const std::function<double(double)>& fn) {
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, 0.0, 1.0, 30, 1e-14, &error);
  if (!std::isfinite(value) || error > 1e-10) throw ValidationError("profile quadrature did not reach 1e-10");
  return value;
}

} // namespace

CoefficientSequence periodic_sequence_1d(const Grid& grid, Profile profile, double alpha, double beta,
                                         std::optional<std::pair<OmegaMask, double>> omega_only) {
  if (grid.dim() != 1) throw InvalidArgument("periodic_sequence_1d: grid must be one-dimensional");
  require_positive_profile(profile);
  CoefficientSequence seq;
  seq.family = SequenceFamily::Periodic1D;
  seq.alpha = alpha;
  seq.beta = beta;
  seq.profile = profile;
  if (omega_only) {
    require_same_grid(grid, omega_only->first.grid(), "periodic_sequence_1d");
    seq.oscillation_region = omega_only->first;
    seq.exterior = omega_only->second;
  }
  seq.generator = [grid, profile, alpha, beta, region = seq.oscillation_region, a0 = seq.exterior](int n) {
    if (n < 1) throw InvalidArgument("sequence index must be positive");
    std::vector<Mat2> mats(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.point(i)[0];
      const bool oscillating = !region || region->contains(i);
      const double y = n * x;
      mats[i] = Mat2::scalar(oscillating ? profile(y - std::floor(y)) : *a0);
    }
    Coefficient c(grid, std::move(mats), alpha, beta);
    const auto report = validate_coefficient(c);
    if (!report.valid) {
      std::ostringstream os;
      os << "sequence member n = " << n << " leaves M(" << alpha << ", " << beta << ") at grid point "
         << report.first_violation;
      throw ValidationError(os.str());
    }
    return c;
  };
  return seq;
}

CoefficientSequence layered_sequence_2d(const Grid& grid, Profile profile, double antisym, double alpha,
                                        double beta) {
  if (grid.dim() != 2) throw InvalidArgument("layered_sequence_2d: grid must be two-dimensional");
  require_positive_profile(profile);
  CoefficientSequence seq;
  seq.family = SequenceFamily::Layered2D;
  seq.alpha = alpha;
  seq.beta = beta;
  seq.profile = profile;
  seq.generator = [grid, profile, antisym, alpha, beta](int n) {
    return coefficient_from_function(
        grid,
        [&](const Point& p) {
          const double y = n * p[0];
          const double a = profile(y - std::floor(y));
          return Mat2{{a, antisym, -antisym, a}};
        },
        alpha, beta);
  };
  return seq;
}

CoefficientSequence transposed_sequence(const CoefficientSequence& sequence) {
  CoefficientSequence out = sequence;
  out.generator = [gen = sequence.generator](int n) { return gen(n).transposed(); };
  return out;
}

CoefficientSequence checkerboard_sequence_2d(const Grid& grid, double low, double high, double alpha,
                                             double beta) {
  if (grid.dim() != 2) throw InvalidArgument("checkerboard_sequence_2d: grid must be two-dimensional");
  CoefficientSequence seq;
  seq.family = SequenceFamily::Checkerboard2D;
  seq.alpha = alpha;
  seq.beta = beta;
  seq.generator = [grid, low, high, alpha, beta](int n) {
    return coefficient_from_function(
        grid,
        [&](const Point& p) {
          const auto parity = static_cast<long long>(std::floor(n * p[0]) + std::floor(n * p[1]));
          return Mat2::scalar(parity % 2 == 0 ? low : high);
        },
        alpha, beta);
  };
  return seq;
}

CoefficientSequence constant_sequence(const Coefficient& coeff) {
  CoefficientSequence seq;
  seq.family = SequenceFamily::Custom;
  seq.alpha = coeff.alpha();
  seq.beta = coeff.beta();
  seq.generator = [coeff](int) { return coeff; };
  return seq;
}

double harmonic_mean(const Profile& profile) {
  require_positive_profile(profile);
  return 1.0 / integrate_period([&](double y) { return 1.0 / profile(y); });
}

double arithmetic_mean(const Profile& profile) {
  require_positive_profile(profile);
  return integrate_period(profile);
}

Coefficient predicted_limit_1d(const CoefficientSequence& sequence, const OmegaMask& mask) {
  if (sequence.family != SequenceFamily::Periodic1D || !sequence.profile)
    throw InvalidArgument("predicted_limit_1d: needs a periodic-1d sequence");
  const Grid& grid = mask.grid();
  const double inside = harmonic_mean(sequence.profile);
  const double mean = arithmetic_mean(sequence.profile);
  const double outside = sequence.exterior ? *sequence.exterior : mean;
  std::vector<Mat2> mats(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // With an Omega-only oscillation the exterior stays A0 wherever the
    // generator put it; Omega itself carries the harmonic mean.
    const bool in_omega = mask.contains(i);
    const bool oscillating = !sequence.oscillation_region || sequence.oscillation_region->contains(i);
    mats[i] = Mat2::scalar(in_omega ? inside : (oscillating ? mean : outside));
  }
  return Coefficient(grid, std::move(mats), sequence.alpha, sequence.beta);
}

// ---------------------------------------------------------------------------

double smooth_bump(double r) {
  const double a = std::abs(r);
  if (a >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - a * a));
}

ScalarField bump_field(const Grid& grid, const Point& center, double radius) {
  return ScalarField::from_function(grid, [&](const Point& p) {
    const double dx = p[0] - center[0];
    const double dy = grid.dim() == 2 ? p[1] - center[1] : 0.0;
    return smooth_bump(std::hypot(dx, dy) / radius);
  });
}

namespace {

// 1D trigonometric mode on [lo, hi]: 1, cos 1, sin 1, cos 2, sin 2, ...
double mode_1d(int k, double x, double lo, double hi) {
  if (k == 0) return 1.0;
  const double t = (x - lo) / (hi - lo);
  const int freq = (k + 1) / 2;
  return (k % 2 == 1) ? std::cos(kTwoPi * freq * t) : std::sin(kTwoPi * freq * t);
}

int mode_frequency(int k) { return (k + 1) / 2; }

// k-th pair of 1D mode indices ordered by total frequency.
std::pair<int, int> mode_pair(int k) {
  const int span = 2 * (k + 2);
  std::vector<std::pair<int, int>> pairs;
  for (int p = 0; p <= span; ++p)
    for (int q = 0; q <= span; ++q) pairs.emplace_back(p, q);
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    const int fa = mode_frequency(a.first) + mode_frequency(a.second);
    const int fb = mode_frequency(b.first) + mode_frequency(b.second);
    if (fa != fb) return fa < fb;
    return a < b;
  });
  return pairs[static_cast<std::size_t>(k)];
}

ScalarField box_mode(const Grid& grid, int k, std::array<double, 2> lo, std::array<double, 2> hi) {
  if (grid.dim() == 1)
    return ScalarField::from_function(grid, [&](const Point& p) { return mode_1d(k, p[0], lo[0], hi[0]); });
  const auto [a, b] = mode_pair(k);
  return ScalarField::from_function(
      grid, [&](const Point& p) { return mode_1d(a, p[0], lo[0], hi[0]) * mode_1d(b, p[1], lo[1], hi[1]); });
}

} // namespace

ScalarField omega_mode(const OmegaMask& mask, int k) {
  return restrict_to_mask(box_mode(mask.grid(), k, mask.lower_corner(), mask.upper_corner()), mask);
}

ProbeSet make_probes(const OmegaMask& mask, int omega_count, int box_count, int exterior_count, int interior_count) {
  const Grid& grid = mask.grid();
  const double L = grid.half_width();
  const double h = grid.spacing();
  const auto lo = mask.lower_corner();
  const auto hi = mask.upper_corner();
  ProbeSet probes;
  for (int k = 0; k < omega_count; ++k) probes.omega_modes.push_back(omega_mode(mask, k));
  for (int k = 0; k < box_count; ++k) probes.box_modes.push_back(box_mode(grid, k, {-L, -L}, {L, L}));

  auto inside_only = [&](ScalarField f) {
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] != 0.0 && mask.contains(i)) throw InvalidArgument("make_probes: exterior probe meets Omega");
    return f;
  };

  if (grid.dim() == 1) {
    const int left = exterior_count / 2;
    const int right = exterior_count - left;
    auto place = [&](double a, double b, int count) {
      const double w = (b - a) / count;
      for (int j = 0; j < count; ++j)
        probes.exterior_bumps.push_back(inside_only(bump_field(grid, {a + (j + 0.5) * w, 0.0}, 0.45 * w)));
    };
    place(-L + 2.0 * h, lo[0] - 2.0 * h, left);
    place(hi[0] + 2.0 * h, L - 2.0 * h, right);
    const double w = (hi[0] - lo[0]) / interior_count;
    for (int j = 0; j < interior_count; ++j)
      probes.interior_bumps.push_back(
          restrict_to_mask(bump_field(grid, {lo[0] + (j + 0.5) * w, 0.0}, 0.45 * w), mask));
  } else {
    const Point c{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
    const double inner_radius = 0.5 * std::hypot(hi[0] - lo[0], hi[1] - lo[1]) + 2.0 * h;
    const double outer_radius = L - 2.0 * h - std::max(std::abs(c[0]), std::abs(c[1]));
    if (!(outer_radius > inner_radius)) throw InvalidArgument("make_probes: no room for exterior probes");
    const double ring = 0.5 * (inner_radius + outer_radius);
    const double radius = std::min(0.45 * (outer_radius - inner_radius),
                                   0.9 * ring * std::sin(std::numbers::pi / exterior_count));
    for (int k = 0; k < exterior_count; ++k) {
      const double theta = kTwoPi * k / exterior_count;
      probes.exterior_bumps.push_back(
          inside_only(bump_field(grid, {c[0] + ring * std::cos(theta), c[1] + ring * std::sin(theta)}, radius)));
    }
    const double half = 0.5 * std::min(hi[0] - lo[0], hi[1] - lo[1]);
    const double offset = half / 2.5;
    for (int k = 0; k < interior_count; ++k) {
      const double theta = kTwoPi * (k + 0.5) / interior_count;
      const Point p{c[0] + std::sqrt(2.0) * offset * std::cos(theta), c[1] + std::sqrt(2.0) * offset * std::sin(theta)};
      probes.interior_bumps.push_back(restrict_to_mask(bump_field(grid, p, 0.25 * half), mask));
    }
  }
  return probes;
}

// ---------------------------------------------------------------------------

Verdict trend_verdict(const std::vector<double>& values, double tolerance) {
  Verdict v;
  if (values.empty()) return v;
  v.final_value = values.back();
  v.trend_non_increasing = true;
  const std::size_t start = values.size() >= 3 ? values.size() - 3 : 0;
  for (std::size_t i = start + 1; i < values.size(); ++i)
    if (values[i] > values[i - 1]) v.trend_non_increasing = false;
  v.pass = v.trend_non_increasing && v.final_value < tolerance;
  return v;
}

namespace {

double max_abs_pairing(const ScalarField& g, const std::vector<ScalarField>& probes) {
  double m = 0.0;
  for (const auto& p : probes) m = std::max(m, std::abs(inner(g, p)));
  return m;
}

double max_abs_pairing(const VectorField& g, const std::vector<ScalarField>& probes) {
  double m = 0.0;
  for (int j = 0; j < g.components(); ++j) m = std::max(m, max_abs_pairing(g.component(j), probes));
  return m;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : num; }

ScalarField energy_density(const Coefficient& coeff, const VectorField& grad) {
  const VectorField flux = coeff.apply(grad);
  ScalarField e(grad.grid());
  for (int j = 0; j < grad.components(); ++j) e += multiply(flux.component(j), grad.component(j));
  return e;
}

double weakstar_discrepancy(const Coefficient& a, const Coefficient& b, const std::vector<ScalarField>& probes,
                            double* reference) {
  double m = 0.0, ref = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      const ScalarField bij = b.entry(i, j);
      m = std::max(m, max_abs_pairing(a.entry(i, j) - bij, probes));
      ref = std::max(ref, max_abs_pairing(bij, probes));
    }
  if (reference) *reference = ref;
  return m;
}

struct MetricTerms {
  std::vector<ScalarField> rhs;
  std::vector<double> rhs_norm;
};

MetricTerms metric_terms(const OmegaMask& mask, const FracOrder& order, int n_terms) {
  MetricTerms t;
  for (int k = 0; k < n_terms; ++k) {
    t.rhs.push_back(omega_mode(mask, k));
    t.rhs_norm.push_back(hminus_norm(t.rhs.back(), order, mask));
  }
  return t;
}

std::vector<DirichletSolution> metric_solutions(const Coefficient& coeff, const OmegaMask& mask,
                                                const FracOrder& order, const MetricTerms& terms,
                                                const SolveOptions& options) {
  SolveOptions opts = options;
  opts.apriori = false;
  std::vector<DirichletSolution> out;
  for (const auto& f : terms.rhs) out.push_back(solve(mask, coeff, order, f, opts));
  return out;
}

double metric_from_solutions(const std::vector<DirichletSolution>& a, const std::vector<DirichletSolution>& b,
                             const OmegaMask& mask, const FracOrder& order, const MetricTerms& terms) {
  double sum = 0.0;
  double weight = 1.0;
  for (std::size_t k = 0; k < terms.rhs.size(); ++k) {
    weight *= 0.5;
    if (terms.rhs_norm[k] == 0.0) continue;
    const double l2 = norm_on(a[k].u - b[k].u, mask);
    const double flux = hminus_norm(a[k].flux - b[k].flux, order, mask);
    sum += weight * (l2 + flux) / terms.rhs_norm[k];
  }
  return sum;
}

} // namespace

ConvergenceReport run_homog_experiment(const CoefficientSequence& sequence, const OmegaMask& mask,
                                       const FracOrder& order, const ScalarField& rhs, const std::vector<int>& n_list,
                                       const std::optional<Coefficient>& predicted_limit,
                                       const ExperimentOptions& options) {
  if (n_list.empty()) throw InvalidArgument("run_homog_experiment: empty n list");
  if (!std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end())
    throw InvalidArgument("run_homog_experiment: n list must be strictly increasing");

  ConvergenceReport report;
  report.tolerance = options.tolerance;
  report.oracle_reference = predicted_limit.has_value();
  const Coefficient reference = predicted_limit ? *predicted_limit : sequence(n_list.back());
  const DirichletSolution ref = solve(mask, reference, order, rhs, options.solve);
  report.reference_l2_norm = norm_on(ref.u, mask);
  report.reference_energy = ref.energy;

  const ProbeSet probes = make_probes(mask);
  const ScalarField ref_density = energy_density(reference, ref.grad_u);
  const double ref_weak = max_abs_pairing(restrict_to_mask(ref.u, mask), probes.omega_modes);
  const double ref_flux = max_abs_pairing(ref.flux, probes.box_modes);
  const double ref_density_pairing = max_abs_pairing(ref_density, probes.interior_bumps);

  std::optional<MetricTerms> terms;
  std::vector<DirichletSolution> ref_metric;
  if (options.ds_terms > 0) {
    terms = metric_terms(mask, order, options.ds_terms);
    ref_metric = metric_solutions(reference, mask, order, *terms, options.solve);
  }

  report.rows.resize(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t idx) {
    ConvergenceRow& row = report.rows[idx];
    row.n = n_list[idx];
    try {
      const Coefficient a = sequence(row.n);
      const DirichletSolution sol = solve(mask, a, order, rhs, options.solve);
      const ScalarField diff = sol.u - ref.u;
      row.l2_error = norm_on(diff, mask);
      row.l2_relative = ratio(row.l2_error, report.reference_l2_norm);
      row.weak_pairing = max_abs_pairing(restrict_to_mask(diff, mask), probes.omega_modes);
      row.weak_pairing_relative = ratio(row.weak_pairing, ref_weak);
      row.flux_pairing = max_abs_pairing(sol.flux - ref.flux, probes.box_modes);
      row.flux_pairing_relative = ratio(row.flux_pairing, ref_flux);
      row.energy = sol.energy;
      row.energy_relative_error = ratio(std::abs(sol.energy - ref.energy), std::abs(ref.energy));
      row.energy_identity_error = ratio(std::abs(sol.energy - inner_on(rhs, sol.u, mask)), std::abs(sol.energy));
      row.energy_density_pairing =
          max_abs_pairing(energy_density(a, sol.grad_u) - ref_density, probes.interior_bumps);
      row.energy_density_relative = ratio(row.energy_density_pairing, ref_density_pairing);
      double ws_ref = 0.0;
      row.weakstar_pairing = weakstar_discrepancy(a, reference, probes.exterior_bumps, &ws_ref);
      row.weakstar_relative = ratio(row.weakstar_pairing, ws_ref);
      if (terms) {
        const auto sols = metric_solutions(a, mask, order, *terms, options.solve);
        row.ds_estimate = metric_from_solutions(sols, ref_metric, mask, order, *terms);
      }
      row.iterations = sol.iterations;
      row.solved = true;
    } catch (const std::exception& e) {
      row.solved = false;
      row.error = e.what();
    }
  });

  // In Cauchy mode the last row is the reference itself and carries no information.
  const std::size_t used = report.oracle_reference ? report.rows.size() : report.rows.size() - 1;
  std::vector<double> l2, flux, energy;
  bool all_solved = true;
  for (std::size_t i = 0; i < used; ++i) {
    const auto& r = report.rows[i];
    all_solved = all_solved && r.solved;
    l2.push_back(r.l2_relative);
    flux.push_back(r.flux_pairing_relative);
    energy.push_back(r.energy_relative_error);
  }
  report.solution_verdict = trend_verdict(l2, options.tolerance);
  const Verdict flux_only = trend_verdict(flux, options.tolerance);
  report.flux_verdict = flux_only;
  report.flux_verdict.pass = report.solution_verdict.pass && flux_only.pass;
  report.energy_verdict = trend_verdict(energy, options.tolerance);
  if (!all_solved) {
    report.solution_verdict.pass = false;
    report.flux_verdict.pass = false;
    report.energy_verdict.pass = false;
  }
  return report;
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  using io::format_double;
  os << "n,solved,l2_error,l2_relative,weak_pairing,weak_pairing_relative,flux_pairing,flux_pairing_relative,"
        "energy,energy_relative_error,energy_identity_error,energy_density_pairing,energy_density_relative,"
        "weakstar_pairing,weakstar_relative,ds_estimate,iterations\n";
  for (const auto& r : report.rows) {
    os << r.n << ',' << (r.solved ? 1 : 0) << ',' << format_double(r.l2_error) << ',' << format_double(r.l2_relative)
       << ',' << format_double(r.weak_pairing) << ',' << format_double(r.weak_pairing_relative) << ','
       << format_double(r.flux_pairing) << ',' << format_double(r.flux_pairing_relative) << ','
       << format_double(r.energy) << ',' << format_double(r.energy_relative_error) << ','
       << format_double(r.energy_identity_error) << ',' << format_double(r.energy_density_pairing) << ','
       << format_double(r.energy_density_relative) << ',' << format_double(r.weakstar_pairing) << ','
       << format_double(r.weakstar_relative) << ',' << format_double(r.ds_estimate) << ',' << r.iterations << '\n';
  }
}

// ---------------------------------------------------------------------------

double ds_metric(const Coefficient& a, const Coefficient& b, const OmegaMask& mask, const FracOrder& order,
                 int n_terms, const SolveOptions& options) {
  if (n_terms < 1) throw InvalidArgument("ds_metric: need at least one term");
  const MetricTerms terms = metric_terms(mask, order, n_terms);
  const auto sa = metric_solutions(a, mask, order, terms, options);
  const auto sb = metric_solutions(b, mask, order, terms, options);
  return metric_from_solutions(sa, sb, mask, order, terms);
}

GlobalMetric global_metric(const Coefficient& a, const Coefficient& b, const OmegaMask& mask,
                           const FracOrder& order, int n_terms, const SolveOptions& options) {
  GlobalMetric m;
  m.omega_part = ds_metric(a, b, mask, order, n_terms, options);
  const ProbeSet probes = make_probes(mask);
  double weight = 1.0;
  for (const auto& chi : probes.exterior_bumps) {
    weight *= 0.5;
    double sum = 0.0;
    for (int i = 0; i < a.dim(); ++i)
      for (int j = 0; j < a.dim(); ++j) sum += std::abs(inner(a.entry(i, j) - b.entry(i, j), chi));
    m.exterior_part += weight * sum;
  }
  return m;
}

// ---------------------------------------------------------------------------

KernelFamily kernel_family_1d(const OmegaMask& mask, const FracOrder& order, const std::vector<double>& shifts,
                              double radius) {
  const Grid& grid = mask.grid();
  if (grid.dim() != 1) throw InvalidArgument("kernel_family_1d: grid must be one-dimensional");
  if (!(radius > 0.0)) throw InvalidArgument("kernel_family_1d: radius must be positive");
  const double M = std::max(std::abs(mask.lower_corner()[0]), std::abs(mask.upper_corner()[0]));
  const double room_end = grid.half_width() - 2.0;

  KernelFamily fam;
  fam.radius = radius;
  fam.base_center = M + 0.25 + radius;
  fam.shifts = shifts;
  for (double t : shifts) {
    const double lo = fam.base_center + t - radius;
    const double hi = fam.base_center + t + radius;
    if (!(lo > M) || !(hi < room_end)) {
      std::ostringstream os;
      os << "kernel_family_1d: shift " << t << " puts the generator at [" << lo << ", " << hi
         << "], outside (" << M << ", " << room_end << ")";
      throw InvalidArgument(os.str());
    }
  }

  // w = d/dx bump((x - c)/radius), so int w = 0.
  const ScalarField w = ScalarField::from_function(grid, [&](const Point& p) {
    const double r = (p[0] - fam.base_center) / radius;
    if (std::abs(r) >= 1.0) return 0.0;
    const double q = 1.0 - r * r;
    return smooth_bump(r) * (-2.0 * r / (q * q)) / radius;
  });
  const auto w_hat = forward_transform(grid, w.values());
  const auto table = symbol_table(grid, order.s());
  double scale = 0.0;
  for (double v : w.values()) scale = std::max(scale, std::abs(v));

  for (double t : shifts) {
    std::vector<std::complex<double>> f_hat(w_hat.size()), g_hat(w_hat.size());
    for (std::size_t k = 0; k < w_hat.size(); ++k) {
      if (!table->active(k)) continue;
      const double xi = table->xi(0, k);
      const std::complex<double> phase = std::polar(1.0, -t * xi);
      g_hat[k] = phase * w_hat[k];
      f_hat[k] = g_hat[k] / table->grad_multiplier(0, k);
    }
    fam.fields.emplace_back(grid, inverse_transform_real(grid, std::move(f_hat), scale));
    fam.generators.emplace_back(grid, inverse_transform_real(grid, std::move(g_hat), scale));
  }
  return fam;
}

std::vector<double> gram_matrix(const std::vector<ScalarField>& fields) {
  const std::size_t n = fields.size();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i * n + j] = inner(fields[i], fields[j]);
  return g;
}

} // namespace fraqhom
