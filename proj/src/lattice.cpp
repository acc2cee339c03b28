#include "fraqhom/lattice.hpp"

#include "fraqhom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace fraqhom {

std::size_t Grid::size() const {
  const auto n = static_cast<std::size_t>(n_);
  return dim_ == 1 ? n : n * n;
}

double Grid::cell_volume() const { return dim_ == 1 ? spacing_ : spacing_ * spacing_; }

std::array<int, 2> Grid::multi_index(std::size_t flat) const {
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  const auto n = static_cast<std::size_t>(n_);
  return {static_cast<int>(flat / n), static_cast<int>(flat % n)};
}

Point Grid::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  if (dim_ == 1) return {coordinate(idx[0]), 0.0};
  return {coordinate(idx[0]), coordinate(idx[1])};
}

std::size_t Grid::nearest_index(const Point& p) const {
  auto axis = [&](double x) {
    const long long i = std::llround((x + half_width_) / spacing_ - 0.5);
    return static_cast<std::size_t>(std::clamp<long long>(i, 0, n_ - 1));
  };
  if (dim_ == 1) return axis(p[0]);
  return axis(p[0]) * static_cast<std::size_t>(n_) + axis(p[1]);
}

bool Grid::operator==(const Grid& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && half_width_ == other.half_width_;
}

Grid build_grid(int dim, double half_width, int points_per_axis) {
  if (dim != 1 && dim != 2) throw InvalidArgument("build_grid: dim must be 1 or 2");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw InvalidArgument("build_grid: half width must be positive");
  if (points_per_axis < 8) throw InvalidArgument("build_grid: need at least 8 points per axis");
  if (points_per_axis % 2 != 0) throw InvalidArgument("build_grid: points per axis must be even");
  Grid g;
  g.dim_ = dim;
  g.half_width_ = half_width;
  g.n_ = points_per_axis;
  g.spacing_ = 2.0 * half_width / points_per_axis;
  return g;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw InvalidArgument(std::string(where) + ": grid mismatch");
}

// ---------------------------------------------------------------------------

OmegaMask::OmegaMask(Grid grid, std::vector<std::uint8_t> inside)
    : grid_(std::move(grid)), inside_(std::move(inside)) {
  if (inside_.size() != grid_.size()) throw InvalidArgument("OmegaMask: flag count does not match grid");
  const double h = grid_.spacing();
  const double L = grid_.half_width();
  double margin = std::numeric_limits<double>::infinity();
  lower_ = {L, L};
  upper_ = {-L, -L};
  for (std::size_t i = 0; i < inside_.size(); ++i) {
    if (!inside_[i]) continue;
    const Point p = grid_.point(i);
    for (int a = 0; a < grid_.dim(); ++a) {
      const auto k = static_cast<std::size_t>(a);
      margin = std::min({margin, p[k] - 0.5 * h + L, L - p[k] - 0.5 * h});
      lower_[k] = std::min(lower_[k], p[k] - 0.5 * h);
      upper_[k] = std::max(upper_[k], p[k] + 0.5 * h);
    }
  }
  finish(margin);
}

void OmegaMask::finish(double margin) {
  indices_.clear();
  for (std::size_t i = 0; i < inside_.size(); ++i)
    if (inside_[i]) indices_.push_back(i);
  if (indices_.empty()) throw InvalidArgument("OmegaMask: empty interior");
  margin_ = margin;
  if (!(margin_ > 2.0 * grid_.spacing())) {
    std::ostringstream os;
    os << "OmegaMask: margin " << margin_ << " must exceed 2h = " << 2.0 * grid_.spacing();
    throw InvalidArgument(os.str());
  }
}

OmegaMask interval_mask(const Grid& grid, double a, double b) {
  if (grid.dim() != 1) throw InvalidArgument("interval_mask: grid must be one-dimensional");
  if (!(a < b)) throw InvalidArgument("interval_mask: need a < b");
  const double L = grid.half_width();
  if (a <= -L || b >= L) throw InvalidArgument("interval_mask: interval leaves the box");
  OmegaMask m;
  m.grid_ = grid;
  m.inside_.assign(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i)[0];
    m.inside_[i] = (a < x && x < b) ? 1 : 0;
  }
  m.lower_ = {a, 0.0};
  m.upper_ = {b, 0.0};
  m.finish(std::min(a + L, L - b));
  return m;
}

OmegaMask ball_mask(const Grid& grid, Point center, double radius) {
  if (grid.dim() != 2) throw InvalidArgument("ball_mask: grid must be two-dimensional");
  if (!(radius > 0.0)) throw InvalidArgument("ball_mask: radius must be positive");
  const double L = grid.half_width();
  double margin = std::numeric_limits<double>::infinity();
  for (double c : center) margin = std::min({margin, c - radius + L, L - c - radius});
  if (margin <= 0.0) throw InvalidArgument("ball_mask: ball leaves the box");
  OmegaMask m;
  m.grid_ = grid;
  m.inside_.assign(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.point(i);
    m.inside_[i] = std::hypot(p[0] - center[0], p[1] - center[1]) < radius ? 1 : 0;
  }
  m.lower_ = {center[0] - radius, center[1] - radius};
  m.upper_ = {center[0] + radius, center[1] + radius};
  m.finish(margin);
  return m;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("ScalarField: value count does not match grid");
}

ScalarField ScalarField::from_function(const Grid& grid, const std::function<double(const Point&)>& fn) {
  ScalarField u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u.values_[i] = fn(grid.point(i));
  return u;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "multiply");
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

VectorField::VectorField(Grid grid) : grid_(std::move(grid)) {
  components_.assign(static_cast<std::size_t>(grid_.dim()), ScalarField(grid_));
}

VectorField& VectorField::operator+=(const VectorField& other) {
  require_same_grid(grid_, other.grid_, "VectorField::operator+=");
  for (int j = 0; j < components(); ++j) component(j) += other.component(j);
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  require_same_grid(grid_, other.grid_, "VectorField::operator-=");
  for (int j = 0; j < components(); ++j) component(j) -= other.component(j);
  return *this;
}

VectorField& VectorField::operator*=(double c) {
  for (auto& comp : components_) comp *= c;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double c, VectorField a) { return a *= c; }

VectorField multiply(const ScalarField& a, const VectorField& g) {
  VectorField out(g.grid());
  for (int j = 0; j < g.components(); ++j) out.component(j) = multiply(a, g.component(j));
  return out;
}

double inner(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid(), v.grid(), "inner");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
  return u.grid().cell_volume() * sum;
}

double inner(const VectorField& u, const VectorField& v) {
  require_same_grid(u.grid(), v.grid(), "inner");
  double sum = 0.0;
  for (int j = 0; j < u.components(); ++j) sum += inner(u.component(j), v.component(j));
  return sum;
}

double norm(const ScalarField& u) { return std::sqrt(inner(u, u)); }
double norm(const VectorField& u) { return std::sqrt(inner(u, u)); }

double inner_on(const ScalarField& u, const ScalarField& v, const OmegaMask& mask) {
  require_same_grid(u.grid(), v.grid(), "inner_on");
  require_same_grid(u.grid(), mask.grid(), "inner_on");
  double sum = 0.0;
  for (std::size_t i : mask.indices()) sum += u[i] * v[i];
  return u.grid().cell_volume() * sum;
}

double norm_on(const ScalarField& u, const OmegaMask& mask) { return std::sqrt(inner_on(u, u, mask)); }

ScalarField restrict_to_mask(const ScalarField& u, const OmegaMask& mask) {
  require_same_grid(u.grid(), mask.grid(), "restrict_to_mask");
  ScalarField out(u.grid());
  for (std::size_t i : mask.indices()) out[i] = u[i];
  return out;
}

std::vector<double> gather_inside(const ScalarField& u, const OmegaMask& mask) {
  require_same_grid(u.grid(), mask.grid(), "gather_inside");
  std::vector<double> out;
  out.reserve(mask.count());
  for (std::size_t i : mask.indices()) out.push_back(u[i]);
  return out;
}

ScalarField extend_by_zero(std::span<const double> inside_values, const OmegaMask& mask) {
  if (inside_values.size() != mask.count()) throw InvalidArgument("extend_by_zero: size does not match mask");
  ScalarField out(mask.grid());
  const auto& idx = mask.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = inside_values[k];
  return out;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------

Coefficient::Coefficient(Grid grid, std::vector<Mat2> matrices, double alpha, double beta)
    : grid_(std::move(grid)), matrices_(std::move(matrices)), alpha_(alpha), beta_(beta) {
  if (matrices_.size() != grid_.size()) throw InvalidArgument("Coefficient: matrix count does not match grid");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw ValidationError("Coefficient: alpha must be positive");
  if (!(beta_ >= alpha_) || !std::isfinite(beta_)) throw ValidationError("Coefficient: need beta >= alpha");
  if (grid_.dim() == 1)
    for (auto& m : matrices_) m = Mat2{{m.a[0], 0.0, 0.0, 0.0}};
}

VectorField Coefficient::apply(const VectorField& g) const {
  require_same_grid(grid_, g.grid(), "Coefficient::apply");
  VectorField out(grid_);
  if (dim() == 1) {
    for (std::size_t i = 0; i < grid_.size(); ++i) out.component(0)[i] = matrices_[i].a[0] * g.component(0)[i];
    return out;
  }
  const auto& g0 = g.component(0);
  const auto& g1 = g.component(1);
  auto& o0 = out.component(0);
  auto& o1 = out.component(1);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const Mat2& m = matrices_[i];
    o0[i] = m(0, 0) * g0[i] + m(0, 1) * g1[i];
    o1[i] = m(1, 0) * g0[i] + m(1, 1) * g1[i];
  }
  return out;
}

VectorField Coefficient::apply_transpose(const VectorField& g) const { return transposed().apply(g); }

Coefficient Coefficient::transposed() const {
  Coefficient t = *this;
  for (auto& m : t.matrices_) std::swap(m.a[1], m.a[2]);
  return t;
}

Coefficient Coefficient::scaled(double c) const {
  if (!(c > 0.0)) throw InvalidArgument("Coefficient::scaled: factor must be positive");
  Coefficient out = *this;
  for (auto& m : out.matrices_)
    for (double& v : m.a) v *= c;
  out.alpha_ *= c;
  out.beta_ *= c;
  return out;
}

bool Coefficient::is_symmetric(double tol) const {
  if (dim() == 1) return true;
  return std::all_of(matrices_.begin(), matrices_.end(),
                     [tol](const Mat2& m) { return std::abs(m.a[1] - m.a[2]) <= tol; });
}

ScalarField Coefficient::entry(int i, int j) const {
  ScalarField out(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) out[p] = matrices_[p](i, j);
  return out;
}

namespace {

struct PointMargins {
  double coercivity;
  double bound;
};

PointMargins point_margins(const Mat2& m, int dim, double alpha, double beta) {
  if (dim == 1) {
    const double a = m.a[0];
    return {a - alpha, a - a * a / beta};
  }
  // Smallest eigenvalue of the symmetric part in closed form.
  const double p = m(0, 0), q = 0.5 * (m(0, 1) + m(1, 0)), r = m(1, 1);
  const double lambda_min = 0.5 * (p + r) - std::hypot(0.5 * (p - r), q);

  auto bound_at = [&](double c, double s) {
    const double ax = m(0, 0) * c + m(0, 1) * s;
    const double ay = m(1, 0) * c + m(1, 1) * s;
    return (ax * c + ay * s) - (ax * ax + ay * ay) / beta;
  };
  double bound = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 360; ++k) {
    const double theta = k * std::numbers::pi / 180.0;
    bound = std::min(bound, bound_at(std::cos(theta), std::sin(theta)));
  }
  // Eigen-directions of A^T A.
  const double b00 = m(0, 0) * m(0, 0) + m(1, 0) * m(1, 0);
  const double b01 = m(0, 0) * m(0, 1) + m(1, 0) * m(1, 1);
  const double b11 = m(0, 1) * m(0, 1) + m(1, 1) * m(1, 1);
  const double phi = 0.5 * std::atan2(2.0 * b01, b00 - b11);
  bound = std::min({bound, bound_at(std::cos(phi), std::sin(phi)),
                    bound_at(-std::sin(phi), std::cos(phi))});
  return {lambda_min - alpha, bound};
}

} // namespace

CoefficientReport validate_coefficient(const Coefficient& coeff) {
  CoefficientReport report;
  report.coercivity_margin = std::numeric_limits<double>::infinity();
  report.bound_margin = std::numeric_limits<double>::infinity();
  const double tol = 1e-12 * std::max(1.0, coeff.beta());
  bool finite = true;
  for (std::size_t i = 0; i < coeff.grid().size(); ++i) {
    const Mat2& m = coeff.at(i);
    if (!all_finite(m.a)) {
      finite = false;
      if (report.first_violation < 0) report.first_violation = static_cast<long long>(i);
      continue;
    }
    const auto pm = point_margins(m, coeff.dim(), coeff.alpha(), coeff.beta());
    report.coercivity_margin = std::min(report.coercivity_margin, pm.coercivity);
    report.bound_margin = std::min(report.bound_margin, pm.bound);
    if (report.first_violation < 0 && (pm.coercivity < -tol || pm.bound < -tol))
      report.first_violation = static_cast<long long>(i);
  }
  report.valid = finite && report.coercivity_margin >= -tol && report.bound_margin >= -tol;
  return report;
}

Coefficient coefficient_from_function(const Grid& grid, const std::function<Mat2(const Point&)>& fn,
                                      double alpha, double beta) {
  std::vector<Mat2> mats(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) mats[i] = fn(grid.point(i));
  Coefficient coeff(grid, std::move(mats), alpha, beta);
  const auto report = validate_coefficient(coeff);
  if (!report.valid) {
    const auto i = static_cast<std::size_t>(std::max(0LL, report.first_violation));
    const Point p = grid.point(i);
    std::ostringstream os;
    os << "coefficient outside M(" << alpha << ", " << beta << ") at grid point " << i << " (x = " << p[0];
    if (grid.dim() == 2) os << ", y = " << p[1];
    os << "): coercivity margin " << report.coercivity_margin << ", bound margin " << report.bound_margin;
    throw ValidationError(os.str());
  }
  return coeff;
}

Coefficient scalar_coefficient(const Grid& grid, const std::function<double(const Point&)>& fn, double alpha,
                               double beta) {
  return coefficient_from_function(grid, [&](const Point& p) { return Mat2::scalar(fn(p)); }, alpha, beta);
}

} // namespace fraqhom
