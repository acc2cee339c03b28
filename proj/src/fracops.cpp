#include "fraqhom/fracops.hpp"

#include "fraqhom/errors.hpp"

#include <boost/math/special_functions/zeta.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <tuple>

namespace fraqhom {

FracOrder::FracOrder(double s, int dim) : s_(s), dim_(dim), mu_(0.0) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("FracOrder: s must lie strictly inside (0, 1)");
  if (dim != 1 && dim != 2) throw InvalidArgument("FracOrder: dim must be 1 or 2");
  mu_ = riesz_gradient_constant(s, dim);
}

double riesz_gradient_constant(double s, int dim) {
  const double d = dim;
  return std::pow(2.0, s) * std::pow(std::numbers::pi, -0.5 * d) * std::tgamma(0.5 * (d + s + 1.0)) /
         std::tgamma(0.5 * (1.0 - s));
}

// ---------------------------------------------------------------------------

SymbolTable::SymbolTable(const Grid& grid, double s) : grid_(grid), s_(s) {
  const int n = grid.points_per_axis();
  const double dk = std::numbers::pi / grid.half_width();
  std::vector<double> axis_xi(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> axis_nyq(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < n; ++k) {
    const int signed_k = k < n / 2 ? k : k - n;
    axis_xi[static_cast<std::size_t>(k)] = dk * signed_k;
  }
  axis_nyq[static_cast<std::size_t>(n / 2)] = 1;

  const std::size_t total = grid.size();
  for (int a = 0; a < grid.dim(); ++a) xi_[static_cast<std::size_t>(a)].resize(total);
  abs_xi_.resize(total);
  weight_.assign(total, 0.0);
  active_.assign(total, 0);
  for (std::size_t p = 0; p < total; ++p) {
    const auto idx = grid.multi_index(p);
    double r2 = 0.0;
    bool nyquist = false;
    for (int a = 0; a < grid.dim(); ++a) {
      const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
      const double x = axis_xi[k];
      xi_[static_cast<std::size_t>(a)][p] = x;
      r2 += x * x;
      nyquist = nyquist || axis_nyq[k];
    }
    abs_xi_[p] = std::sqrt(r2);
    if (p != 0 && !nyquist) {
      active_[p] = 1;
      weight_[p] = std::pow(abs_xi_[p], s - 1.0);
    }
  }
}

std::complex<double> SymbolTable::grad_multiplier(int axis, std::size_t k) const {
  return {0.0, xi(axis, k) * weight_[k]};
}

std::complex<double> SymbolTable::div_multiplier(int axis, std::size_t k) const {
  return {0.0, xi(axis, k) * weight_[k]};
}

double SymbolTable::laplacian_multiplier(std::size_t k) const {
  return active(k) ? std::pow(abs_xi_[k], 2.0 * s_) : 0.0;
}

namespace {

using Key = std::tuple<int, int, double, double>;

std::shared_mutex g_table_mutex;
std::map<Key, std::shared_ptr<const SymbolTable>> g_tables;

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex g_plan_mutex;

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::map<std::pair<int, int>, Plans> g_plans;

Plans plans_for(const Grid& grid) {
  std::lock_guard lock(g_plan_mutex);
  const auto key = std::make_pair(grid.dim(), grid.points_per_axis());
  if (auto it = g_plans.find(key); it != g_plans.end()) return it->second;
  const int n = grid.points_per_axis();
  std::vector<std::complex<double>> scratch_in(grid.size()), scratch_out(grid.size());
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p;
  if (grid.dim() == 1) {
    p.forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
  } else {
    p.forward = fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, flags);
  }
  if (!p.forward || !p.backward) throw NumericalError("FFTW planning failed");
  g_plans.emplace(key, p);
  return p;
}

void execute(fftw_plan plan, std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) {
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void require_finite(std::span<const double> v, const char* where) {
  if (!all_finite(v)) throw NumericalError(std::string(where) + ": non-finite input");
}

} // namespace

std::shared_ptr<const SymbolTable> symbol_table(const Grid& grid, double s) {
  const Key key{grid.dim(), grid.points_per_axis(), grid.half_width(), s};
  {
    std::shared_lock lock(g_table_mutex);
    if (auto it = g_tables.find(key); it != g_tables.end()) return it->second;
  }
  auto table = std::make_shared<const SymbolTable>(grid, s);
  std::unique_lock lock(g_table_mutex);
  return g_tables.try_emplace(key, std::move(table)).first->second;
}

std::vector<std::complex<double>> forward_transform(const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw InvalidArgument("forward_transform: size does not match grid");
  std::vector<std::complex<double>> in(values.begin(), values.end()), out(values.size());
  execute(plans_for(grid).forward, in, out);
  return out;
}

std::vector<double> inverse_transform_real(const Grid& grid, std::vector<std::complex<double>> spectrum,
                                           double scale) {
  if (spectrum.size() != grid.size()) throw InvalidArgument("inverse_transform_real: size does not match grid");
  std::vector<std::complex<double>> out(spectrum.size());
  execute(plans_for(grid).backward, spectrum, out);
  const double norm = 1.0 / static_cast<double>(grid.size());
  std::vector<double> re(out.size());
  double residue = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    re[i] = out[i].real() * norm;
    residue = std::max(residue, std::abs(out[i].imag()) * norm);
  }
  const double reference = std::max({scale, max_abs(re), std::numeric_limits<double>::min()});
  if (residue > 1e-12 * reference) throw NumericalError("spectral operator produced a non-real field");
  return re;
}

VectorField grad_s_spectral(const ScalarField& u, const FracOrder& order) {
  if (order.dim() != u.grid().dim()) throw InvalidArgument("grad_s_spectral: order dimension mismatch");
  require_finite(u.values(), "grad_s_spectral");
  const auto table = symbol_table(u.grid(), order.s());
  const auto spec = forward_transform(u.grid(), u.values());
  const double scale = max_abs(u.values());
  VectorField g(u.grid());
  for (int a = 0; a < u.grid().dim(); ++a) {
    std::vector<std::complex<double>> comp(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) comp[k] = table->grad_multiplier(a, k) * spec[k];
    g.component(a) = ScalarField(u.grid(), inverse_transform_real(u.grid(), std::move(comp), scale));
  }
  return g;
}

ScalarField div_s_spectral(const VectorField& g, const FracOrder& order) {
  if (order.dim() != g.grid().dim()) throw InvalidArgument("div_s_spectral: order dimension mismatch");
  const auto table = symbol_table(g.grid(), order.s());
  std::vector<std::complex<double>> acc(g.grid().size(), 0.0);
  double scale = 0.0;
  for (int a = 0; a < g.components(); ++a) {
    require_finite(g.component(a).values(), "div_s_spectral");
    scale = std::max(scale, max_abs(g.component(a).values()));
    const auto spec = forward_transform(g.grid(), g.component(a).values());
    for (std::size_t k = 0; k < spec.size(); ++k) acc[k] += table->div_multiplier(a, k) * spec[k];
  }
  return ScalarField(g.grid(), inverse_transform_real(g.grid(), std::move(acc), scale));
}

namespace {

template <typename Multiplier>
ScalarField apply_real_multiplier(const ScalarField& u, Multiplier&& m) {
  require_finite(u.values(), "spectral multiplier");
  const auto table = symbol_table(u.grid(), 0.5);
  auto spec = forward_transform(u.grid(), u.values());
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= table->active(k) ? m(table->abs_xi(k)) : 0.0;
  return ScalarField(u.grid(), inverse_transform_real(u.grid(), std::move(spec), max_abs(u.values())));
}

} // namespace

ScalarField frac_laplacian(const ScalarField& u, double t) {
  if (!(t > 0.0 && t < 2.0)) throw InvalidArgument("frac_laplacian: order must lie in (0, 2)");
  return apply_real_multiplier(u, [t](double r) { return std::pow(r, t); });
}

ScalarField riesz_potential(const ScalarField& u, double alpha) {
  const double upper = std::max(1.0, static_cast<double>(u.grid().dim()));
  if (!(alpha > 0.0)) throw InvalidArgument("riesz_potential: alpha must be positive");
  if (!(alpha < upper)) throw InvalidArgument("riesz_potential: alpha must be below max(d, 1)");
  return apply_real_multiplier(u, [alpha](double r) { return std::pow(r, -alpha); });
}

VectorField spectral_gradient(const ScalarField& u) {
  require_finite(u.values(), "spectral_gradient");
  const auto table = symbol_table(u.grid(), 0.5);
  const auto spec = forward_transform(u.grid(), u.values());
  VectorField g(u.grid());
  for (int a = 0; a < u.grid().dim(); ++a) {
    std::vector<std::complex<double>> comp(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k)
      comp[k] = table->active(k) ? std::complex<double>(0.0, table->xi(a, k)) * spec[k] : 0.0;
    g.component(a) = ScalarField(u.grid(), inverse_transform_real(u.grid(), std::move(comp), max_abs(u.values())));
  }
  return g;
}

// ---------------------------------------------------------------------------

double dirichlet_beta(double x) {
  if (!(x > 0.0)) throw InvalidArgument("dirichlet_beta: argument must be positive");
  // Cohen-Rodriguez Villegas-Zagier acceleration of sum (-1)^k (2k+1)^(-x).
  constexpr int n = 48;
  double d = std::pow(3.0 + std::sqrt(8.0), n);
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0, c = -d, sum = 0.0;
  for (int k = 0; k < n; ++k) {
    c = b - c;
    sum += c * std::pow(2.0 * k + 1.0, -x);
    b = (static_cast<double>(k) + n) * (static_cast<double>(k) - n) * b / ((k + 0.5) * (k + 1.0));
  }
  return sum / d;
}

double lattice_zeta(int dim, double sigma) {
  if (dim == 1) return 2.0 * boost::math::zeta(sigma);
  if (dim == 2) return 4.0 * boost::math::zeta(0.5 * sigma) * dirichlet_beta(0.5 * sigma);
  throw InvalidArgument("lattice_zeta: dim must be 1 or 2");
}

namespace {

// Offsets m in [-(N-1), N-1]^d, row-major with stride 2N-1.
struct OffsetKernel {
  int n;
  int stride;
  std::array<std::vector<double>, 2> k; // (m h) / |m h|^(d+s+1), zero at m = 0

  /// images > 0 adds the periodic copies |k_j| <= images of every offset,
  /// symmetric so that the odd kernel sum converges.
  OffsetKernel(const Grid& grid, double s, int images = 0) : n(grid.points_per_axis()), stride(2 * n - 1) {
    const int dim = grid.dim();
    const double h = grid.spacing();
    const std::size_t count = dim == 1 ? static_cast<std::size_t>(stride)
                                       : static_cast<std::size_t>(stride) * static_cast<std::size_t>(stride);
    for (int a = 0; a < dim; ++a) k[static_cast<std::size_t>(a)].assign(count, 0.0);
    const double power = dim + s + 1.0;
    const int images1 = dim == 2 ? images : 0;
    for (std::size_t p = 0; p < count; ++p) {
      const int m0 = dim == 1 ? static_cast<int>(p) - (n - 1) : static_cast<int>(p / static_cast<std::size_t>(stride)) - (n - 1);
      const int m1 = dim == 1 ? 0 : static_cast<int>(p % static_cast<std::size_t>(stride)) - (n - 1);
      double k0 = 0.0, k1 = 0.0;
      for (int c0 = -images; c0 <= images; ++c0)
        for (int c1 = -images1; c1 <= images1; ++c1) {
          const double q0 = m0 + static_cast<double>(c0) * n, q1 = m1 + static_cast<double>(c1) * n;
          if (q0 == 0.0 && q1 == 0.0) continue;
          const double w = std::pow(h * std::hypot(q0, q1), -power);
          k0 += h * q0 * w;
          k1 += h * q1 * w;
        }
      k[0][p] = k0;
      if (dim == 2) k[1][p] = k1;
    }
  }

  std::size_t offset_index(int dim, std::array<int, 2> from, std::array<int, 2> to) const {
    const int m0 = to[0] - from[0] + (n - 1);
    if (dim == 1) return static_cast<std::size_t>(m0);
    const int m1 = to[1] - from[1] + (n - 1);
    return static_cast<std::size_t>(m0) * static_cast<std::size_t>(stride) + static_cast<std::size_t>(m1);
  }
};

double value_or_zero(const ScalarField& u, std::array<int, 2> idx) {
  const int n = u.grid().points_per_axis();
  if (idx[0] < 0 || idx[0] >= n) return 0.0;
  if (u.grid().dim() == 1) return u[static_cast<std::size_t>(idx[0])];
  if (idx[1] < 0 || idx[1] >= n) return 0.0;
  return u[static_cast<std::size_t>(idx[0]) * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[1])];
}

} // namespace

std::vector<Point> grad_s_quadrature(const ScalarField& u, const FracOrder& order,
                                     std::span<const std::size_t> eval_indices) {
  const Grid& grid = u.grid();
  if (order.dim() != grid.dim()) throw InvalidArgument("grad_s_quadrature: order dimension mismatch");
  require_finite(u.values(), "grad_s_quadrature");
  for (std::size_t e : eval_indices)
    if (e >= grid.size()) throw InvalidArgument("grad_s_quadrature: evaluation point is off the grid");

  const int dim = grid.dim();
  const double h = grid.spacing();
  const double weight = order.mu() * grid.cell_volume();
  const OffsetKernel kernel(grid, order.s());
  const double self_factor = -order.mu() * std::pow(h, 1.0 - order.s()) *
                             lattice_zeta(dim, dim + order.s() - 1.0) / dim;

  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (u[j] != 0.0) support.push_back(j);

  std::vector<Point> out(eval_indices.size(), Point{0.0, 0.0});
  for (std::size_t e = 0; e < eval_indices.size(); ++e) {
    const auto xi = grid.multi_index(eval_indices[e]);
    Point acc{0.0, 0.0};
    for (std::size_t j : support) {
      if (j == eval_indices[e]) continue;
      const std::size_t off = kernel.offset_index(dim, xi, grid.multi_index(j));
      for (int a = 0; a < dim; ++a) acc[static_cast<std::size_t>(a)] += u[j] * kernel.k[static_cast<std::size_t>(a)][off];
    }
    for (int a = 0; a < dim; ++a) {
      auto plus = xi, minus = xi;
      plus[static_cast<std::size_t>(a)] += 1;
      minus[static_cast<std::size_t>(a)] -= 1;
      const double central = (value_or_zero(u, plus) - value_or_zero(u, minus)) / (2.0 * h);
      out[e][static_cast<std::size_t>(a)] = weight * acc[static_cast<std::size_t>(a)] + self_factor * central;
    }
  }
  return out;
}

VectorField leibniz_remainder(const ScalarField& phi, const ScalarField& u, const FracOrder& order) {
  require_same_grid(phi.grid(), u.grid(), "leibniz_remainder");
  const Grid& grid = u.grid();
  if (order.dim() != grid.dim()) throw InvalidArgument("leibniz_remainder: order dimension mismatch");
  require_finite(phi.values(), "leibniz_remainder");
  require_finite(u.values(), "leibniz_remainder");

  const int dim = grid.dim();
  const double weight = order.mu() * grid.cell_volume();
  // Periodic images, so the remainder matches the spectral operators on the box.
  const OffsetKernel kernel(grid, order.s(), dim == 1 ? 256 : 16);
  VectorField out(grid);
  // (phi(x)-phi(y)) vanishes unless x or y lies in supp phi.
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (phi[j] != 0.0) support.push_back(j);
  std::vector<std::uint8_t> in_support(grid.size(), 0);
  for (std::size_t j : support) in_support[j] = 1;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto xi = grid.multi_index(i);
    Point acc{0.0, 0.0};
    auto add = [&](std::size_t j) {
      if (j == i) return;
      const double prod = (phi[i] - phi[j]) * (u[i] - u[j]);
      if (prod == 0.0) return;
      const std::size_t off = kernel.offset_index(dim, xi, grid.multi_index(j));
      for (int a = 0; a < dim; ++a) acc[static_cast<std::size_t>(a)] += prod * kernel.k[static_cast<std::size_t>(a)][off];
    };
    if (in_support[i]) {
      for (std::size_t j = 0; j < grid.size(); ++j) add(j);
    } else {
      for (std::size_t j : support) add(j);
    }
    // acc holds sum of prod * (y - x)/|.|^(d+s+1); the remainder carries -(x - y).
    for (int a = 0; a < dim; ++a) out.component(a)[i] = weight * acc[static_cast<std::size_t>(a)];
  }
  return out;
}

} // namespace fraqhom
