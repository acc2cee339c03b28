#pragma once

// Homogenisation experiments: oscillating coefficient sequences, their
// closed-form 1D limits, convergence reports, the d_s metric and the kernel
// family of the one-dimensional fractional derivative.

#include "fraqhom/dirichlet.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace fraqhom {

enum class SequenceFamily { Periodic1D, Checkerboard2D, Layered2D, Custom };

std::string to_string(SequenceFamily family);

/// Profile of period 1 on the real line.
using Profile = std::function<double(double)>;

struct CoefficientSequence {
  SequenceFamily family = SequenceFamily::Custom;
  double alpha = 1.0;
  double beta = 1.0;
  std::function<Coefficient(int n)> generator;

  // Periodic-1D metadata, used by predicted_limit_1d.
  Profile profile;
  /// Fixed exterior value A0 when the oscillation is confined to Omega.
  std::optional<double> exterior;
  std::optional<OmegaMask> oscillation_region;

  Coefficient operator()(int n) const { return generator(n); }
};

/// A_n(x) = a(n x), on the whole line or (when exterior is given) only on
/// Omega with the constant A0 outside. Throws ValidationError when the
/// profile is not positive or a member leaves M(alpha, beta).
CoefficientSequence periodic_sequence_1d(const Grid& grid, Profile profile, double alpha, double beta,
                                         std::optional<std::pair<OmegaMask, double>> omega_only = std::nullopt);

/// A_n(x) = diag(a(n x_1), a(n x_1)) + antisym * [[0, 1], [-1, 0]] on a 2D grid.
CoefficientSequence layered_sequence_2d(const Grid& grid, Profile profile, double antisym, double alpha,
                                        double beta);
/// Same family with every member transposed.
CoefficientSequence transposed_sequence(const CoefficientSequence& sequence);
/// Scalar checkerboard: low on cells where floor(n x_1) + floor(n x_2) is even, high otherwise.
CoefficientSequence checkerboard_sequence_2d(const Grid& grid, double low, double high, double alpha,
                                             double beta);
/// n-independent sequence.
CoefficientSequence constant_sequence(const Coefficient& coeff);

/// 1 / int_0^1 1/a and int_0^1 a, by adaptive Gauss-Kronrod quadrature to
/// 1e-10 absolute; throws ValidationError when the profile is not positive
/// or the quadrature does not settle.
double harmonic_mean(const Profile& profile);
double arithmetic_mean(const Profile& profile);

/// Harmonic mean on Omega; arithmetic mean (whole line) or A0 outside.
Coefficient predicted_limit_1d(const CoefficientSequence& sequence, const OmegaMask& mask);

// ---------------------------------------------------------------------------

/// Deterministic probe sets shared by all diagnostics.
struct ProbeSet {
  /// Low Fourier modes on the bounding box of Omega, zero outside Omega.
  std::vector<ScalarField> omega_modes;
  /// Low Fourier modes on the whole box.
  std::vector<ScalarField> box_modes;
  /// Bumps in the complement with at least 2h clearance from Omega.
  std::vector<ScalarField> exterior_bumps;
  /// Bumps inside Omega for the energy density.
  std::vector<ScalarField> interior_bumps;
};

ProbeSet make_probes(const OmegaMask& mask, int omega_count = 8, int box_count = 8, int exterior_count = 8,
                     int interior_count = 4);

/// k-th trigonometric mode of the bounding box of Omega restricted to Omega,
/// enumerated by total frequency (k = 0 is the constant).
ScalarField omega_mode(const OmegaMask& mask, int k);

struct ConvergenceRow {
  int n = 0;
  bool solved = false;
  std::string error;
  double l2_error = 0.0;
  double l2_relative = 0.0;
  double weak_pairing = 0.0;
  double weak_pairing_relative = 0.0;
  double flux_pairing = 0.0;
  double flux_pairing_relative = 0.0;
  double energy = 0.0;
  double energy_relative_error = 0.0;
  double energy_identity_error = 0.0;
  double energy_density_pairing = 0.0;
  double energy_density_relative = 0.0;
  double weakstar_pairing = 0.0;
  double weakstar_relative = 0.0;
  double ds_estimate = 0.0;
  int iterations = 0;
};

struct Verdict {
  bool pass = false;
  double final_value = 0.0;
  bool trend_non_increasing = false;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  /// True when the reference is a predicted limit, false for the Cauchy
  /// mode that compares against the largest n.
  bool oracle_reference = true;
  double reference_l2_norm = 0.0;
  double reference_energy = 0.0;
  double tolerance = 0.05;
  /// Solution-only convergence (G^s).
  Verdict solution_verdict;
  /// Solutions and fluxes (H^s).
  Verdict flux_verdict;
  Verdict energy_verdict;
  bool verdicts_agree() const { return solution_verdict.pass == flux_verdict.pass; }
};

/// Pass iff the value at the largest n is below tolerance and the last three
/// values are non-increasing.
Verdict trend_verdict(const std::vector<double>& values, double tolerance);

struct ExperimentOptions {
  SolveOptions solve{};
  double tolerance = 0.05;
  /// Terms of the d_s series per n; 0 skips the column.
  int ds_terms = 16;
};

/// Solves the Dirichlet problem for every n and compares against the
/// predicted limit (or the largest n when none is given). Per-n solver
/// failures are recorded in the row and the experiment continues.
ConvergenceReport run_homog_experiment(const CoefficientSequence& sequence, const OmegaMask& mask,
                                       const FracOrder& order, const ScalarField& rhs, const std::vector<int>& n_list,
                                       const std::optional<Coefficient>& predicted_limit,
                                       const ExperimentOptions& options = {});

void write_report_csv(std::ostream& os, const ConvergenceReport& report);

// ---------------------------------------------------------------------------

/// Truncated d_s(A, B) series with f_k = omega_mode(mask, k - 1).
double ds_metric(const Coefficient& a, const Coefficient& b, const OmegaMask& mask, const FracOrder& order,
                 int n_terms = 16, const SolveOptions& options = {});

struct GlobalMetric {
  double omega_part = 0.0;
  double exterior_part = 0.0;
  double total() const { return omega_part + exterior_part; }
};

/// d_s on Omega plus sum_k 2^-k sum_ij |<(A - B)_ij, chi_k>| over the exterior bumps.
GlobalMetric global_metric(const Coefficient& a, const Coefficient& b, const OmegaMask& mask,
                           const FracOrder& order, int n_terms = 16, const SolveOptions& options = {});

// ---------------------------------------------------------------------------

struct KernelFamily {
  /// F_n with D^s F_n = w_n.
  std::vector<ScalarField> fields;
  /// Shifted generators w_n = w(. - t_n).
  std::vector<ScalarField> generators;
  std::vector<double> shifts;
  double base_center = 0.0;
  double radius = 0.0;
};

/// F_n = inverse transform of e^{-i t_n xi} w^(xi) / (i xi |xi|^(s-1)) for the
/// derivative w of a smooth bump placed right of Omega; throws
/// InvalidArgument if a shifted support leaves (M, L - 2).
KernelFamily kernel_family_1d(const OmegaMask& mask, const FracOrder& order, const std::vector<double>& shifts,
                              double radius = 0.5);

/// Gram matrix <F_m, F_n>, row-major.
std::vector<double> gram_matrix(const std::vector<ScalarField>& fields);

/// Smooth bump exp(-1 / (1 - r^2)) of |x - c| / radius, zero for r >= 1.
double smooth_bump(double r);
ScalarField bump_field(const Grid& grid, const Point& center, double radius);

} // namespace fraqhom
