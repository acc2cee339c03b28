#pragma once

// Experiment configuration: a line-oriented `key = value` file with
// `[section]` headers. See docs/config.md for the schema.

#include "fraqhom/heat.hpp"
#include "fraqhom/homog.hpp"
#include "fraqhom/lattice.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fraqhom {

struct GridConfig {
  int dim = 1;
  double L = 8.0;
  int N = 2048;
};

struct OmegaConfig {
  std::string shape = "interval";
  double a = -1.0;
  double b = 1.0;
  Point center{0.0, 0.0};
  double radius = 1.0;
};

struct CoefficientConfig {
  std::string family = "periodic-1d";
  std::string profile = "sine";
  double mean = 2.0;
  double amplitude = 1.0;
  double low = 1.0;
  double high = 3.0;
  double value = 1.0;
  double antisym = 0.0;
  double alpha = 1.0;
  double beta = 3.0;
  std::optional<double> exterior;
  bool transpose = false;
  int member = 8;
};

struct ForcingConfig {
  std::string type = "constant";
  double value = 1.0;
  Point center{0.0, 0.0};
  double radius = 0.5;
};

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 0;
};

struct ExperimentParams {
  std::vector<int> n_list{4, 8, 16, 32, 64};
  std::string limit = "predicted";
  double tolerance = 0.05;
  int n_terms = 16;
  int probes = 16;
  double T = 1.0;
  double dt = 1.0 / 64.0;
  std::string scheme = "implicit-euler";
  int snapshot_stride = 1;
  std::vector<double> shifts{0.0, 1.0, 2.0, 3.0};
  double kernel_radius = 0.5;
  int fields = 20;
};

struct ExperimentConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  GridConfig grid;
  OmegaConfig omega;
  double s = 0.5;
  CoefficientConfig coefficient;
  ForcingConfig forcing;
  SolverConfig solver;
  ExperimentParams experiment;
};

/// Throws ConfigError (with the line number) on syntax errors, unknown
/// sections or keys, duplicate keys and values that do not parse.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// Range checks that need no grid; throws ValidationError naming the field.
void validate_config(const ExperimentConfig& config);

/// Objects built from a validated configuration.
struct ExperimentPlan {
  Grid grid;
  OmegaMask mask;
  FracOrder order{0.5, 1};
  CoefficientSequence sequence;
  /// Predicted limit, impostor or none (Cauchy mode).
  std::optional<Coefficient> limit;
  ScalarField rhs;
  Forcing forcing;
};

/// Builds grid, mask, sequence and limit and validates every member in the
/// n list and the configured member. Throws ValidationError.
ExperimentPlan build_plan(const ExperimentConfig& config);

/// Profile a(y) named in the coefficient section.
Profile make_profile(const CoefficientConfig& c);

} // namespace fraqhom
