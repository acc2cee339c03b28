#pragma once

// Riesz fractional calculus on grid fields.
//
// The spectral backend realises the operators as Fourier multipliers on the
// periodic box:
//   grad^s   i xi_j |xi|^(s-1)
//   div^s    i |xi|^(s-1) xi .
//   (-Lap)^t |xi|^t
//   I_alpha  |xi|^(-alpha)
// Every multiplier vanishes at xi = 0 and on frequencies that touch the
// Nyquist index along any axis, so real fields map to real fields and
// -div^s grad^s equals the |xi|^(2s) multiplier at every retained frequency.
//
// The quadrature backend evaluates the defining singular integral
//   mu_s * int (u(x) - u(y)) (x - y) / |x - y|^(d+s+1) dy
// by a lattice sum and is kept as an independent oracle.

#include "fraqhom/lattice.hpp"

#include <complex>
#include <memory>

namespace fraqhom {

class FracOrder {
public:
  /// Throws InvalidArgument unless 0 < s < 1 and dim in {1,2}.
  FracOrder(double s, int dim);

  double s() const { return s_; }
  int dim() const { return dim_; }
  /// 2^s pi^(-d/2) Gamma((d+s+1)/2) / Gamma((1-s)/2).
  double mu() const { return mu_; }

private:
  double s_;
  int dim_;
  double mu_;
};

double riesz_gradient_constant(double s, int dim);

/// Frequency geometry of a grid in FFT order (k = 0..N/2-1, -N/2..-1 per
/// axis, xi_k = pi k / L) together with the |xi|^(s-1) weights for one s.
class SymbolTable {
public:
  SymbolTable(const Grid& grid, double s);

  const Grid& grid() const { return grid_; }
  double s() const { return s_; }
  std::size_t size() const { return abs_xi_.size(); }
  double xi(int axis, std::size_t k) const { return xi_[static_cast<std::size_t>(axis)][k]; }
  double abs_xi(std::size_t k) const { return abs_xi_[k]; }
  /// False at the zero mode and on Nyquist-touching frequencies.
  bool active(std::size_t k) const { return active_[k] != 0; }

  std::complex<double> grad_multiplier(int axis, std::size_t k) const;
  std::complex<double> div_multiplier(int axis, std::size_t k) const;
  double laplacian_multiplier(std::size_t k) const;

private:
  Grid grid_;
  double s_;
  std::array<std::vector<double>, 2> xi_;
  std::vector<double> abs_xi_;
  std::vector<double> weight_; // |xi|^(s-1) on active frequencies
  std::vector<std::uint8_t> active_;
};

/// Cached table for (grid, s); safe for concurrent use.
std::shared_ptr<const SymbolTable> symbol_table(const Grid& grid, double s);

// Spectral backend -----------------------------------------------------------

VectorField grad_s_spectral(const ScalarField& u, const FracOrder& order);
ScalarField div_s_spectral(const VectorField& g, const FracOrder& order);
/// Multiplier |xi|^t, 0 < t < 2.
ScalarField frac_laplacian(const ScalarField& u, double t);
/// Multiplier |xi|^(-alpha) with the zero mode set to 0; 0 < alpha < max(d, 1).
ScalarField riesz_potential(const ScalarField& u, double alpha);
/// Classical gradient by the multiplier i xi_j (same frequency conventions).
VectorField spectral_gradient(const ScalarField& u);

/// Forward DFT (unnormalised, e^{-i k x} convention) and its normalised inverse,
/// exposed for constructions that need to work in frequency space directly.
std::vector<std::complex<double>> forward_transform(const Grid& grid, std::span<const double> values);
/// Inverse transform returning the real part; throws NumericalError when the
/// imaginary residue exceeds 1e-12 of the data scale.
std::vector<double> inverse_transform_real(const Grid& grid, std::vector<std::complex<double>> spectrum,
                                           double scale);

// Quadrature backend ---------------------------------------------------------

/// Lattice-sum evaluation of grad^s u at the given flat indices. The self
/// cell is skipped and replaced by the analytic lattice correction
/// -mu h^(1-s) (Z_d(d+s-1)/d) grad u(x), with Z_d the Epstein zeta function
/// of the integer lattice and grad u taken by central differences.
std::vector<Point> grad_s_quadrature(const ScalarField& u, const FracOrder& order,
                                     std::span<const std::size_t> eval_indices);

/// Nonlocal remainder of the product rule,
///   grad^s(phi u) - phi grad^s u - u grad^s phi
///     = -mu_s int (phi(x)-phi(y)) (u(x)-u(y)) (x-y) / |x-y|^(d+s+1) dy,
/// evaluated by a lattice sum at every grid point with the kernel summed over
/// periodic images, matching the periodic box of the spectral operators.
VectorField leibniz_remainder(const ScalarField& phi, const ScalarField& u, const FracOrder& order);

/// Z_d(sigma) = sum over nonzero integer lattice points of |m|^(-sigma),
/// analytically continued below sigma = d (2 zeta(sigma) in 1D,
/// 4 zeta(sigma/2) beta(sigma/2) in 2D).
double lattice_zeta(int dim, double sigma);
/// Dirichlet beta function for x > 0.
double dirichlet_beta(double x);

} // namespace fraqhom
