#include "fraqhom/krylov.hpp"

#include <cmath>
#include <deque>

namespace fraqhom::krylov {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Result zero_result(std::size_t n, const char* method) {
  Result r;
  r.x.assign(n, 0.0);
  r.converged = true;
  r.method = method;
  return r;
}

double true_residual(const Operator& op, std::span<const double> rhs, std::span<const double> x, double bnorm) {
  std::vector<double> ax(rhs.size());
  op(x, ax);
  for (std::size_t i = 0; i < ax.size(); ++i) ax[i] = rhs[i] - ax[i];
  return norm2(ax) / bnorm;
}

Result cgnr(const Operator& op, const Operator& adjoint, std::span<const double> rhs, std::vector<double> x,
            double tol, int max_iter, int used) {
  const std::size_t n = rhs.size();
  const double bnorm = norm2(rhs);
  std::vector<double> r(n), z(n), p(n), q(n), w(n);
  op(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
  adjoint(r, z);
  p = z;
  double zz = dot(z, z);
  Result res;
  res.method = "cgnr";
  int it = used;
  double rel = norm2(r) / bnorm;
  while (rel > tol && it < max_iter) {
    op(p, q);
    const double qq = dot(q, q);
    if (qq == 0.0) break;
    const double alpha = zz / qq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    adjoint(r, z);
    const double zz_new = dot(z, z);
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + (zz_new / zz) * p[i];
    zz = zz_new;
    rel = norm2(r) / bnorm;
    ++it;
  }
  res.x = std::move(x);
  res.relative_residual = true_residual(op, rhs, res.x, bnorm);
  res.iterations = it;
  res.converged = res.relative_residual <= tol;
  return res;
}

} // namespace

Result conjugate_gradient(const Operator& op, std::span<const double> rhs, double tol, int max_iter) {
  const std::size_t n = rhs.size();
  const double bnorm = norm2(rhs);
  if (bnorm == 0.0) return zero_result(n, "cg");
  std::vector<double> x(n, 0.0), r(rhs.begin(), rhs.end()), p(r), q(n);
  double rr = dot(r, r);
  int it = 0;
  while (std::sqrt(rr) / bnorm > tol && it < max_iter) {
    op(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rr / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    const double rr_new = dot(r, r);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + (rr_new / rr) * p[i];
    rr = rr_new;
    ++it;
  }
  Result res;
  res.method = "cg";
  res.x = std::move(x);
  res.iterations = it;
  res.relative_residual = true_residual(op, rhs, res.x, bnorm);
  res.converged = res.relative_residual <= tol;
  return res;
}

Result gmres(const Operator& op, const Operator& adjoint, std::span<const double> rhs, double tol, int max_iter,
             int restart) {
  const std::size_t n = rhs.size();
  const double bnorm = norm2(rhs);
  if (bnorm == 0.0) return zero_result(n, "gmres");
  const auto m = static_cast<std::size_t>(restart);
  std::vector<double> x(n, 0.0), r(n), w(n);
  std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> hess(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1);
  std::deque<double> history;
  int it = 0;
  double rel = 1.0;

  while (it < max_iter) {
    op(x, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - w[i];
    const double beta = norm2(r);
    rel = beta / bnorm;
    if (rel <= tol) break;
    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    std::size_t k = 0;
    bool stagnated = false;
    for (; k < m && it < max_iter; ++k, ++it) {
      op(basis[k], w);
      for (std::size_t j = 0; j <= k; ++j) {
        hess[j][k] = dot(w, basis[j]);
        axpy(-hess[j][k], basis[j], w);
      }
      hess[k + 1][k] = norm2(w);
      if (hess[k + 1][k] > 0.0)
        for (std::size_t i = 0; i < n; ++i) basis[k + 1][i] = w[i] / hess[k + 1][k];
      for (std::size_t j = 0; j < k; ++j) {
        const double t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
        hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
        hess[j][k] = t;
      }
      const double denom = std::hypot(hess[k][k], hess[k + 1][k]);
      cs[k] = hess[k][k] / denom;
      sn[k] = hess[k + 1][k] / denom;
      hess[k][k] = denom;
      hess[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      rel = std::abs(g[k + 1]) / bnorm;
      history.push_back(rel);
      if (history.size() > 101) history.pop_front();
      if (history.size() == 101 && history.back() > 0.99 * history.front()) stagnated = true;
      if (rel <= tol || stagnated) {
        ++k;
        ++it;
        break;
      }
    }
    // Back substitution for the k x k triangular system.
    std::vector<double> y(k, 0.0);
    for (std::size_t jj = k; jj-- > 0;) {
      double s = g[jj];
      for (std::size_t l = jj + 1; l < k; ++l) s -= hess[jj][l] * y[l];
      y[jj] = s / hess[jj][jj];
    }
    for (std::size_t j = 0; j < k; ++j) axpy(y[j], basis[j], x);
    if (stagnated) return cgnr(op, adjoint, rhs, std::move(x), tol, it + max_iter, it);
  }
  Result res;
  res.method = "gmres";
  res.x = std::move(x);
  res.iterations = it;
  res.relative_residual = true_residual(op, rhs, res.x, bnorm);
  res.converged = res.relative_residual <= tol;
  return res;
}

} // namespace fraqhom::krylov
