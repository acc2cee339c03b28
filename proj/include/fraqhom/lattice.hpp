#pragma once

// Discrete representation layer: a periodic cell-centred box [-L, L)^d with
// N points per axis, an Omega mask, scalar/vector fields and matrix-valued
// coefficients. Flat indices are row-major: index = i0 * N + i1 in 2D.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fraqhom {

using Point = std::array<double, 2>;

class Grid {
public:
  Grid() = default;

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points_per_axis() const { return n_; }
  double spacing() const { return spacing_; }
  std::size_t size() const;
  /// h^d, the quadrature weight of one cell.
  double cell_volume() const;

  /// Cell centre -L + (i + 1/2) h along one axis.
  double coordinate(int i) const { return -half_width_ + (i + 0.5) * spacing_; }
  Point point(std::size_t flat) const;
  std::array<int, 2> multi_index(std::size_t flat) const;
  /// Index of the cell whose centre is closest to p.
  std::size_t nearest_index(const Point& p) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

private:
  friend Grid build_grid(int dim, double half_width, int points_per_axis);
  int dim_ = 1;
  double half_width_ = 1.0;
  int n_ = 8;
  double spacing_ = 0.25;
};

/// Throws InvalidArgument for dim outside {1,2}, L <= 0, odd N or N < 8.
Grid build_grid(int dim, double half_width, int points_per_axis);

void require_same_grid(const Grid& a, const Grid& b, const char* where);

class OmegaMask {
public:
  OmegaMask() = default;
  /// Generic mask from per-point flags; margin is the distance from the
  /// outermost inside cell face to the box boundary.
  OmegaMask(Grid grid, std::vector<std::uint8_t> inside);

  const Grid& grid() const { return grid_; }
  double margin() const { return margin_; }
  bool contains(std::size_t flat) const { return inside_[flat] != 0; }
  std::span<const std::uint8_t> flags() const { return inside_; }
  /// Flat indices of the inside cells, increasing.
  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t count() const { return indices_.size(); }

  /// Axis-aligned bounding box of the inside cell centres, padded by h/2.
  std::array<double, 2> lower_corner() const { return lower_; }
  std::array<double, 2> upper_corner() const { return upper_; }

private:
  friend OmegaMask interval_mask(const Grid&, double, double);
  friend OmegaMask ball_mask(const Grid&, Point, double);
  void finish(double margin);

  Grid grid_;
  std::vector<std::uint8_t> inside_;
  std::vector<std::size_t> indices_;
  double margin_ = 0.0;
  std::array<double, 2> lower_{};
  std::array<double, 2> upper_{};
};

/// 1D interval a < x < b. Rejects an empty interior, an interval leaving the
/// box and margin <= 2h.
OmegaMask interval_mask(const Grid& grid, double a, double b);
/// 2D open ball |x - c| < r, with the same margin rule.
OmegaMask ball_mask(const Grid& grid, Point center, double radius);

class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(Grid grid);
  ScalarField(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  static ScalarField from_function(const Grid& grid, const std::function<double(const Point&)>& fn);

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double c);

private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double c, ScalarField a);
/// Pointwise product.
ScalarField multiply(const ScalarField& a, const ScalarField& b);

/// d components stored component-major.
class VectorField {
public:
  VectorField() = default;
  explicit VectorField(Grid grid);

  const Grid& grid() const { return grid_; }
  int components() const { return static_cast<int>(components_.size()); }
  ScalarField& component(int j) { return components_[static_cast<std::size_t>(j)]; }
  const ScalarField& component(int j) const { return components_[static_cast<std::size_t>(j)]; }

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double c);

private:
  Grid grid_;
  std::vector<ScalarField> components_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double c, VectorField a);
/// Scalar times vector, pointwise.
VectorField multiply(const ScalarField& a, const VectorField& g);

/// h^d sum of u v.
double inner(const ScalarField& u, const ScalarField& v);
double inner(const VectorField& u, const VectorField& v);
double norm(const ScalarField& u);
double norm(const VectorField& u);
/// L2 norm over the mask only.
double norm_on(const ScalarField& u, const OmegaMask& mask);
double inner_on(const ScalarField& u, const ScalarField& v, const OmegaMask& mask);

/// Zeroes values outside the mask.
ScalarField restrict_to_mask(const ScalarField& u, const OmegaMask& mask);
/// Values at the inside cells, in mask order.
std::vector<double> gather_inside(const ScalarField& u, const OmegaMask& mask);
/// Embeds inside values into a full-box field that is zero elsewhere.
ScalarField extend_by_zero(std::span<const double> inside_values, const OmegaMask& mask);

bool all_finite(std::span<const double> values);

struct Mat2 {
  // Row-major; for d = 1 only a[0] is meaningful.
  std::array<double, 4> a{};
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(2 * i + j)]; }
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(2 * i + j)]; }
  static Mat2 scalar(double c) { return Mat2{{c, 0.0, 0.0, c}}; }
};

struct CoefficientReport {
  bool valid = false;
  /// min over x of lambda_min(sym A(x)) - alpha.
  double coercivity_margin = 0.0;
  /// min over x and sampled unit xi of A xi.xi - |A xi|^2 / beta.
  double bound_margin = 0.0;
  /// First grid point violating either condition, or -1.
  long long first_violation = -1;
};

class Coefficient {
public:
  Coefficient() = default;
  /// Raw construction without validation; use coefficient_from_function or
  /// validate_coefficient for checked construction.
  Coefficient(Grid grid, std::vector<Mat2> matrices, double alpha, double beta);

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const Mat2& at(std::size_t flat) const { return matrices_[flat]; }
  std::span<const Mat2> matrices() const { return matrices_; }

  /// Pointwise A(x) g(x).
  VectorField apply(const VectorField& g) const;
  /// Pointwise A(x)^T g(x).
  VectorField apply_transpose(const VectorField& g) const;
  Coefficient transposed() const;
  /// c A with bounds (c alpha, c beta).
  Coefficient scaled(double c) const;
  bool is_symmetric(double tol = 0.0) const;
  /// Entry (i, j) as a scalar field.
  ScalarField entry(int i, int j) const;

private:
  Grid grid_;
  std::vector<Mat2> matrices_;
  double alpha_ = 1.0;
  double beta_ = 1.0;
};

CoefficientReport validate_coefficient(const Coefficient& coeff);

/// Samples fn at cell centres and validates; throws ValidationError naming
/// the first offending grid point.
Coefficient coefficient_from_function(const Grid& grid, const std::function<Mat2(const Point&)>& fn,
                                      double alpha, double beta);
/// Scalar coefficient c(x) I.
Coefficient scalar_coefficient(const Grid& grid, const std::function<double(const Point&)>& fn,
                               double alpha, double beta);

} // namespace fraqhom
