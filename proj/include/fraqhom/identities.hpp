#pragma once

// Randomised identity suite for the spectral operators.

#include "fraqhom/fracops.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fraqhom {

struct IdentityResult {
  std::string name;
  int dim = 1;
  int points_per_axis = 0;
  double s = 0.5;
  /// Worst relative error over all random fields.
  double max_relative_error = 0.0;
  bool pass = false;
};

/// Checks on `fields` seeded white-noise fields:
///   adjointness     <grad^s u, g> = -<u, div^s g>
///   laplacian       -div^s grad^s u = (-Delta)^s u   (multiplier |xi|^(2s))
///   riesz-gradient  (-Delta)^((1-s)/2) grad^s u = grad u
///   potential       grad^s u = grad I_(1-s) u
IdentityResult check_adjointness(const Grid& grid, const FracOrder& order, int fields, std::uint64_t seed,
                                 double tol = 1e-12);
std::vector<IdentityResult> operator_identity_suite(const Grid& grid, const FracOrder& order, int fields,
                                                    std::uint64_t seed, double tol = 1e-12);

/// CSV `identity,dim,N,s,max_relative_error,pass`.
void write_identity_csv(std::ostream& os, const std::vector<IdentityResult>& results);

} // namespace fraqhom
