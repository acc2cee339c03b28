#include "fraqhom/schur.hpp"

#include "fraqhom/errors.hpp"
#include "fraqhom/field_io.hpp"
#include "fraqhom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace fraqhom {

DenseVector to_vector(const VectorField& g) {
  const std::size_t n = g.grid().size();
  const double scale = std::sqrt(g.grid().cell_volume());
  DenseVector v(static_cast<Eigen::Index>(n * static_cast<std::size_t>(g.components())));
  for (int j = 0; j < g.components(); ++j)
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(j * n + i)] = scale * g.component(j)[i];
  return v;
}

VectorField to_field(const DenseVector& v, const Grid& grid) {
  const std::size_t n = grid.size();
  if (static_cast<std::size_t>(v.size()) != n * static_cast<std::size_t>(grid.dim()))
    throw InvalidArgument("to_field: vector length does not match grid");
  const double scale = 1.0 / std::sqrt(grid.cell_volume());
  VectorField g(grid);
  for (int j = 0; j < grid.dim(); ++j)
    for (std::size_t i = 0; i < n; ++i) g.component(j)[i] = scale * v[static_cast<Eigen::Index>(j * n + i)];
  return g;
}

namespace {

DenseVector multiply_pointwise(const Coefficient& coeff, const DenseVector& v, bool transpose) {
  const std::size_t n = coeff.grid().size();
  const int d = coeff.dim();
  DenseVector out(v.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Mat2& m = coeff.at(i);
    for (int r = 0; r < d; ++r) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += (transpose ? m(c, r) : m(r, c)) * v[static_cast<Eigen::Index>(c * n + i)];
      out[static_cast<Eigen::Index>(r * n + i)] = s;
    }
  }
  return out;
}

DenseMatrix apply_columns(const std::function<DenseVector(const DenseVector&)>& op, const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = op(m.col(j));
  return out;
}

double min_symmetric_eigenvalue(const DenseMatrix& m) {
  const DenseMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const DenseMatrix& m) {
  const DenseMatrix gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

} // namespace

LinearOperator multiplication_operator(const Coefficient& coeff) {
  LinearOperator op;
  op.size = coeff.grid().size() * static_cast<std::size_t>(coeff.dim());
  op.apply = [coeff](const DenseVector& v) { return multiply_pointwise(coeff, v, false); };
  op.apply_transpose = [coeff](const DenseVector& v) { return multiply_pointwise(coeff, v, true); };
  return op;
}

LinearOperator dense_operator(DenseMatrix matrix) {
  if (matrix.rows() != matrix.cols()) throw InvalidArgument("dense_operator: matrix must be square");
  LinearOperator op;
  op.size = static_cast<std::size_t>(matrix.rows());
  auto shared = std::make_shared<const DenseMatrix>(std::move(matrix));
  op.apply = [shared](const DenseVector& v) -> DenseVector { return *shared * v; };
  op.apply_transpose = [shared](const DenseVector& v) -> DenseVector { return shared->transpose() * v; };
  return op;
}

DenseMatrix orthonormal_basis(const DenseMatrix& columns, double rank_tol, std::vector<double>* singular_values) {
  if (columns.cols() == 0) return DenseMatrix(columns.rows(), 0);
  Eigen::BDCSVD<DenseMatrix> svd(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > rank_tol * smax) ++rank;
  if (singular_values) singular_values->assign(sv.data(), sv.data() + sv.size());
  DenseMatrix q = svd.matrixU().leftCols(rank);
  // Fix the sign of each column so the basis does not depend on SVD sign choices.
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    Eigen::Index at = 0;
    q.col(j).cwiseAbs().maxCoeff(&at);
    if (q(at, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

BlockDecomposition::BlockDecomposition(OmegaMask mask, FracOrder order, DenseMatrix basis,
                                       std::vector<double> singular_values)
    : mask_(std::move(mask)), order_(order), basis_(std::move(basis)), singular_values_(std::move(singular_values)) {}

DenseVector BlockDecomposition::project(const DenseVector& v) const { return basis_ * (basis_.transpose() * v); }

DenseVector BlockDecomposition::project_complement(const DenseVector& v) const { return v - project(v); }

BlockDecomposition build_decomposition(const OmegaMask& mask, const FracOrder& order, double rank_tol) {
  if (mask.count() < 4) throw InvalidArgument("build_decomposition: Omega needs at least 4 cells");
  const Grid& grid = mask.grid();
  const auto& inside = mask.indices();
  DenseMatrix columns(static_cast<Eigen::Index>(grid.size() * static_cast<std::size_t>(grid.dim())),
                      static_cast<Eigen::Index>(inside.size()));
  parallel_for(inside.size(), [&](std::size_t j) {
    ScalarField e(grid);
    e[inside[j]] = 1.0;
    columns.col(static_cast<Eigen::Index>(j)) = to_vector(grad_s_spectral(e, order));
  });
  std::vector<double> sv;
  DenseMatrix q = orthonormal_basis(columns, rank_tol, &sv);
  if (q.cols() == 0) throw NumericalError("build_decomposition: grad^s of Omega fields has rank 0");
  return BlockDecomposition(mask, order, std::move(q), std::move(sv));
}

// ---------------------------------------------------------------------------

PsiMaps::PsiMaps(const BlockDecomposition& decomposition, LinearOperator a)
    : decomposition_(&decomposition), a_(std::move(a)) {
  if (a_.size != decomposition.size()) throw InvalidArgument("psi_maps: operator size does not match decomposition");
  const DenseMatrix& q = decomposition.basis();
  a00_ = q.transpose() * apply_columns(a_.apply, q);
  lu_.compute(a00_);
  if (!(lu_.rcond() > 1e-14)) throw NumericalError("psi_maps: a00 is numerically singular");
}

DenseVector PsiMaps::solve00(const DenseVector& coords) const { return lu_.solve(coords); }

DenseVector PsiMaps::psi00(const DenseVector& v) const {
  const DenseMatrix& q = decomposition_->basis();
  return q * solve00(q.transpose() * v);
}

DenseVector PsiMaps::psi10(const DenseVector& v) const {
  return decomposition_->project_complement(a_.apply(psi00(v)));
}

DenseVector PsiMaps::psi01(const DenseVector& z) const {
  const DenseMatrix& q = decomposition_->basis();
  return q * solve00(q.transpose() * a_.apply(z));
}

DenseVector PsiMaps::psi11(const DenseVector& z) const {
  const DenseVector az = a_.apply(z);
  const DenseMatrix& q = decomposition_->basis();
  const DenseVector x = q * solve00(q.transpose() * az);
  return decomposition_->project_complement(az - a_.apply(x));
}

PsiMaps psi_maps(const Coefficient& coeff, const BlockDecomposition& decomposition) {
  require_same_grid(coeff.grid(), decomposition.mask().grid(), "psi_maps");
  return PsiMaps(decomposition, multiplication_operator(coeff));
}

// ---------------------------------------------------------------------------

namespace {

double low_mode(int k, double x, double L) {
  if (k == 0) return 1.0;
  const double t = std::numbers::pi * (x + L) / L;
  const int freq = (k + 1) / 2;
  return (k % 2 == 1) ? std::cos(freq * t) : std::sin(freq * t);
}

DenseVector smooth_random_field(const Grid& grid, std::mt19937_64& rng) {
  constexpr int modes = 9;
  std::normal_distribution<double> normal;
  const double L = grid.half_width();
  VectorField g(grid);
  for (int comp = 0; comp < grid.dim(); ++comp) {
    std::vector<double> c(static_cast<std::size_t>(grid.dim() == 1 ? modes : modes * modes));
    for (std::size_t k = 0; k < c.size(); ++k) {
      const int a = static_cast<int>(k % modes), b = static_cast<int>(k / modes);
      c[k] = normal(rng) / (1.0 + (a + 1) / 2 + (b + 1) / 2);
    }
    g.component(comp) = ScalarField::from_function(grid, [&](const Point& p) {
      double s = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const int a = static_cast<int>(k % modes), b = static_cast<int>(k / modes);
        s += c[k] * low_mode(a, p[0], L) * (grid.dim() == 2 ? low_mode(b, p[1], L) : 1.0);
      }
      return s;
    });
  }
  return to_vector(g);
}

DenseVector unit(DenseVector v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw NumericalError("schur probes: projected probe vanished");
  return v / n;
}

} // namespace

SchurProbes make_schur_probes(const BlockDecomposition& decomposition, int count, std::uint64_t seed) {
  const Grid& grid = decomposition.mask().grid();
  std::mt19937_64 rng(seed);
  SchurProbes p;
  for (int k = 0; k < count; ++k) {
    p.h0_domain.push_back(unit(decomposition.project(smooth_random_field(grid, rng))));
    p.h0_test.push_back(unit(decomposition.project(smooth_random_field(grid, rng))));
    p.h1_domain.push_back(unit(decomposition.project_complement(smooth_random_field(grid, rng))));
    p.h1_test.push_back(unit(decomposition.project_complement(smooth_random_field(grid, rng))));
  }
  return p;
}

MembershipReport membership_check(const PsiMaps& maps, const Gamma& gamma, int probe_count, std::uint64_t seed) {
  const BlockDecomposition& dec = maps.decomposition();
  const DenseMatrix& q = dec.basis();
  const DenseMatrix& a00 = maps.a00();
  const Eigen::PartialPivLU<DenseMatrix> lu(a00);
  const DenseMatrix a00_inv = lu.inverse();

  MembershipReport report;
  auto add = [&](std::string name, double value, double bound, bool lower, bool estimated) {
    MembershipCondition c;
    c.name = std::move(name);
    c.value = value;
    c.bound = bound;
    c.margin = lower ? value - bound : bound - value;
    c.estimated = estimated;
    c.pass = c.margin >= -1e-8;
    report.conditions.push_back(std::move(c));
  };

  add("Re Psi00^-1 >= g00", min_symmetric_eigenvalue(a00), gamma.g00, true, false);
  add("Re Psi00 >= 1/g11", min_symmetric_eigenvalue(a00_inv), 1.0 / gamma.g11, true, false);

  const DenseMatrix aq = apply_columns(maps.op().apply, q);
  const DenseMatrix psi10 = (aq - q * (q.transpose() * aq)) * a00_inv;
  add("|Psi10| <= g10", spectral_norm(psi10), gamma.g10, false, false);

  const DenseMatrix atq = apply_columns(maps.op().apply_transpose, q);
  const DenseMatrix psi01_t = (atq - q * (q.transpose() * atq)) * a00_inv.transpose();
  add("|Psi01| <= g01", spectral_norm(psi01_t), gamma.g01, false, false);

  const Grid& grid = dec.mask().grid();
  std::mt19937_64 rng(seed);
  double inv_min = std::numeric_limits<double>::infinity();
  double fwd_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < probe_count; ++k) {
    const DenseVector z = unit(dec.project_complement(smooth_random_field(grid, rng)));
    const DenseVector y = maps.psi11(z);
    const double zy = z.dot(y);
    fwd_min = std::min(fwd_min, zy);
    const double yy = y.squaredNorm();
    if (yy > 0.0) inv_min = std::min(inv_min, zy / yy);
  }
  add("Re Psi11^-1 >= 1/g11", inv_min, 1.0 / gamma.g11, true, true);
  add("Re Psi11 >= g00", fwd_min, gamma.g00, true, true);

  report.pass = std::all_of(report.conditions.begin(), report.conditions.end(), [](const auto& c) { return c.pass; });
  return report;
}

MembershipReport membership_check(const Coefficient& coeff, const BlockDecomposition& decomposition,
                                  const Gamma& gamma, int probe_count, std::uint64_t seed) {
  return membership_check(psi_maps(coeff, decomposition), gamma, probe_count, seed);
}

// ---------------------------------------------------------------------------

namespace {

std::array<std::vector<double>, 4> probe_values(const PsiMaps& maps, const SchurProbes& probes) {
  std::array<std::vector<double>, 4> out;
  for (std::size_t p = 0; p < probes.h0_domain.size(); ++p) {
    out[0].push_back(probes.h0_test[p].dot(maps.psi00(probes.h0_domain[p])));
    out[1].push_back(probes.h1_test[p].dot(maps.psi10(probes.h0_domain[p])));
    out[2].push_back(probes.h0_test[p].dot(maps.psi01(probes.h1_domain[p])));
    out[3].push_back(probes.h1_test[p].dot(maps.psi11(probes.h1_domain[p])));
  }
  return out;
}

} // namespace

SchurProbeReport schur_convergence_probe(const CoefficientSequence& sequence, const Coefficient& limit,
                                         const BlockDecomposition& decomposition, const SchurProbes& probes,
                                         const std::vector<int>& n_list) {
  if (n_list.empty()) throw InvalidArgument("schur_convergence_probe: empty n list");
  const auto reference = probe_values(psi_maps(limit, decomposition), probes);
  std::vector<std::array<std::vector<double>, 4>> per_n(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t i) {
    per_n[i] = probe_values(psi_maps(sequence(n_list[i]), decomposition), probes);
  });

  SchurProbeReport report;
  report.n_values = n_list;
  for (std::size_t i = 0; i < n_list.size(); ++i)
    for (int m = 0; m < 4; ++m) {
      double worst = 0.0;
      for (std::size_t p = 0; p < reference[static_cast<std::size_t>(m)].size(); ++p) {
        const double d = std::abs(per_n[i][static_cast<std::size_t>(m)][p] - reference[static_cast<std::size_t>(m)][p]);
        report.rows.push_back({n_list[i], m, static_cast<int>(p), d});
        worst = std::max(worst, d);
      }
      report.max_discrepancy[static_cast<std::size_t>(m)].push_back(worst);
    }
  for (std::size_t m = 0; m < 4; ++m) {
    const auto& v = report.max_discrepancy[m];
    report.decreasing[m] = true;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] < v[i - 1])) report.decreasing[m] = false;
  }
  const auto& v0 = report.max_discrepancy[0];
  report.psi00_trend = true;
  for (std::size_t i = v0.size() >= 3 ? v0.size() - 2 : 1; i < v0.size(); ++i)
    if (v0[i] > v0[i - 1]) report.psi00_trend = false;
  return report;
}

void write_probe_csv(std::ostream& os, const SchurProbeReport& report) {
  os << "n,map,probe_id,discrepancy\n";
  for (const auto& r : report.rows)
    os << r.n << ',' << kPsiMapNames[static_cast<std::size_t>(r.map)] << ',' << r.probe_id << ','
       << io::format_double(r.discrepancy) << '\n';
}

} // namespace fraqhom
