// Acceptance suite: one PASS/FAIL line per criterion with its runtime.
// Exit status is non-zero when any criterion fails.

#include "cli.hpp"
#include "fraqhom/config.hpp"
#include "fraqhom/heat.hpp"
#include "fraqhom/homog.hpp"
#include "fraqhom/identities.hpp"
#include "fraqhom/parallel.hpp"
#include "fraqhom/schur.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fraqhom;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Line {
  std::string label;
  double limit_seconds = 0.0;
  std::function<Outcome()> body;
  bool counted = true;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.3e", x);
  return s;
}

const Profile sine_profile = [](double y) { return 2.0 + std::sin(2.0 * std::numbers::pi * y); };
const std::vector<int> kFlagshipN{4, 8, 16, 32, 64};

struct Flagship {
  Grid grid;
  OmegaMask mask;
  FracOrder order{0.5, 1};
  CoefficientSequence sequence;
  Coefficient limit;
  ScalarField f;

  explicit Flagship(int N)
      : grid(build_grid(1, 8.0, N)), mask(interval_mask(grid, -1.0, 1.0)),
        sequence(periodic_sequence_1d(grid, sine_profile, 1.0, 3.0)), limit(predicted_limit_1d(sequence, mask)),
        f(grid) {
    for (std::size_t i : mask.indices()) f[i] = 1.0;
  }
};

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// ---------------------------------------------------------------------------

Outcome identities() {
  double worst = 0.0;
  bool pass = true;
  for (auto [d, n] : {std::pair{1, 1024}, std::pair{2, 64}})
    for (double s : {0.25, 0.5, 0.75})
      for (const auto& r : operator_identity_suite(build_grid(d, 4.0, n), FracOrder(s, d), 20, 2024, 1e-12)) {
        worst = std::max(worst, r.max_relative_error);
        pass = pass && r.pass;
      }
  return {pass, "worst relative error " + fmt("%.2e", worst) + " over 4 identities x 3 orders x 2 grids"};
}

Outcome quadrature_cross_check() {
  bool pass = true;
  std::string detail;
  for (double s : {0.3, 0.5, 0.7}) {
    std::vector<double> errs;
    for (int n : {512, 1024, 2048, 4096}) {
      const Grid g = build_grid(1, 20.0 * std::sqrt(n / 2048.0), n);
      const FracOrder o(s, 1);
      const auto u = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0]); });
      const auto gs = grad_s_spectral(u, o).component(0);
      std::vector<std::size_t> idx;
      for (double x : {-0.9, -0.5, 0.0, 0.3, 0.5, 1.0}) idx.push_back(g.nearest_index({x, 0.0}));
      const auto q = grad_s_quadrature(u, o, idx);
      double err = 0.0, ref = 0.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        err = std::max(err, std::abs(q[k][0] - gs[idx[k]]));
        ref = std::max(ref, std::abs(gs[idx[k]]));
      }
      errs.push_back(err / ref);
    }
    pass = pass && errs[2] < 1e-2 && strictly_decreasing(errs);
    detail += "s=" + fmt("%.1f", s) + ": " + list(errs) + "; ";
  }
  return {pass, detail + "N = 512..4096, L = 20 sqrt(N/2048)"};
}

ScalarField random_smooth(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(-1.5, 1.5), width(0.5, 1.5), amp(-1.0, 1.0), freq(0.0, 3.0);
  std::vector<std::array<double, 4>> terms(3);
  for (auto& t : terms) t = {amp(rng), centre(rng), width(rng), freq(rng)};
  return ScalarField::from_function(g, [terms](const Point& p) {
    double v = 0.0;
    for (const auto& t : terms) {
      const double z = (p[0] - t[1]) / t[2];
      v += t[0] * std::exp(-z * z) * std::cos(t[3] * p[0]);
    }
    return v;
  });
}

Outcome leibniz() {
  const Grid g = build_grid(1, 8.0, 2048);
  const FracOrder o(0.5, 1);
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const ScalarField phi = random_smooth(g, rng), u = random_smooth(g, rng);
    const auto lhs = grad_s_spectral(multiply(phi, u), o).component(0);
    const auto rhs = multiply(phi, grad_s_spectral(u, o).component(0)) +
                     multiply(u, grad_s_spectral(phi, o).component(0)) + leibniz_remainder(phi, u, o).component(0);
    worst = std::max(worst, norm(lhs - rhs) / norm(lhs));
  }
  return {worst < 1e-2, "worst four-term residual " + fmt("%.2e", worst) + " over 3 random pairs"};
}

Outcome flagship(int N) {
  const Flagship fl(N);
  ExperimentOptions opts;
  opts.ds_terms = 0;
  const auto r = run_homog_experiment(fl.sequence, fl.mask, fl.order, fl.f, kFlagshipN, fl.limit, opts);
  std::vector<double> l2;
  bool solved = true;
  for (const auto& row : r.rows) {
    l2.push_back(row.l2_relative);
    solved = solved && row.solved;
  }
  const auto& last = r.rows.back();
  const bool i = solved && strictly_decreasing(l2) && last.l2_relative < 0.05;
  const bool ii = last.flux_pairing_relative < 0.05;
  const bool iii = last.energy_relative_error < 0.05;
  const bool iv = r.verdicts_agree();
  std::string detail = "(i) " + std::string(i ? "ok" : "FAIL") + " L2 rel " + list(l2) + "; (ii) " +
                       (ii ? "ok" : "FAIL") + " flux pairing " + fmt("%.3e", last.flux_pairing_relative) + "; (iii) " +
                       (iii ? "ok" : "FAIL") + " energy " + fmt("%.4f", last.energy) + " vs " +
                       fmt("%.4f", r.reference_energy) + " (" + fmt("%.2e", last.energy_relative_error) + "); (iv) " +
                       (iv ? "ok" : "FAIL") + " G/H verdicts " + (r.solution_verdict.pass ? "pass" : "fail") + "/" +
                       (r.flux_verdict.pass ? "pass" : "fail");
  return {i && ii && iii && iv, detail};
}

Outcome wrong_limit(int N) {
  const Flagship fl(N);
  const auto impostor = scalar_coefficient(fl.grid, [](const Point&) { return 2.0; }, 1.0, 3.0);
  ExperimentOptions opts;
  opts.ds_terms = 0;
  const auto r = run_homog_experiment(fl.sequence, fl.mask, fl.order, fl.f, kFlagshipN, impostor, opts);
  std::vector<double> l2;
  for (const auto& row : r.rows) l2.push_back(row.l2_relative);
  const bool fails_4i = !(strictly_decreasing(l2) && l2.back() < 0.05);
  const bool large = l2.back() > 0.20;
  return {fails_4i && large, std::string("4(i) ") + (fails_4i ? "fails as required" : "PASSES") +
                                 "; final discrepancy " + fmt("%.3f", l2.back()) + (large ? " > 0.20" : " <= 0.20") +
                                 "; L2 rel " + list(l2)};
}

Outcome metric_axioms() {
  const Flagship fl(2048);
  const int terms = 16;
  const auto id = identity_coefficient(fl.grid);
  const std::vector<Coefficient> named{id, id.scaled(2.0), fl.sequence(8)};
  bool indiscernible = true, symmetric = true;
  double min_off = 1e300, max_self = 0.0, max_asym = 0.0;
  for (std::size_t a = 0; a < named.size(); ++a)
    for (std::size_t b = 0; b < named.size(); ++b) {
      const double d = ds_metric(named[a], named[b], fl.mask, fl.order, terms);
      if (a == b) {
        max_self = std::max(max_self, d);
      } else {
        min_off = std::min(min_off, d);
        if (b > a) max_asym = std::max(max_asym, std::abs(d - ds_metric(named[b], named[a], fl.mask, fl.order, terms)));
      }
    }
  indiscernible = max_self < 1e-10 && min_off > 1e-3;
  symmetric = max_asym < 1e-10;

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> mean(1.5, 2.5), amp(0.0, 0.5), freq(0.5, 8.0);
  auto random_coeff = [&] {
    const double c = mean(rng), a = amp(rng), k = freq(rng);
    return scalar_coefficient(fl.grid, [=](const Point& p) { return c + a * std::sin(k * p[0]); }, 1.0, 3.0);
  };
  double worst_slack = -1e300;
  for (int t = 0; t < 10; ++t) {
    const auto a = random_coeff(), b = random_coeff(), c = random_coeff();
    const double ab = ds_metric(a, b, fl.mask, fl.order, terms), bc = ds_metric(b, c, fl.mask, fl.order, terms),
                 ac = ds_metric(a, c, fl.mask, fl.order, terms);
    worst_slack = std::max(worst_slack, ac - ab - bc);
  }
  const bool triangle = worst_slack <= 1e-8;
  return {indiscernible && symmetric && triangle,
          "d(A,A) max " + fmt("%.1e", max_self) + ", d(A,B) min " + fmt("%.3e", min_off) + ", asymmetry " +
              fmt("%.1e", max_asym) + ", triangle max d(a,c)-d(a,b)-d(b,c) " + fmt("%.3e", worst_slack) +
              " over 10 triples"};
}

Outcome kernel_lemma() {
  const Flagship fl(2048);
  const auto fam = kernel_family_1d(fl.mask, fl.order, {0.0, 1.0, 2.0, 3.0});
  double lo = 1e300, hi = 0.0;
  for (const auto& f : fam.fields) {
    lo = std::min(lo, norm(f));
    hi = std::max(hi, norm(f));
  }
  const ProbeSet probes = make_probes(fl.mask);
  double pairing = 0.0;
  for (const auto& f : fam.fields) {
    const auto ds = grad_s_spectral(f, fl.order).component(0);
    for (const auto& phi : probes.omega_modes) pairing = std::max(pairing, std::abs(inner(ds, phi)));
  }
  const auto gram = gram_matrix(fam.fields);
  const std::vector<double> off{std::abs(gram[1]), std::abs(gram[2]), std::abs(gram[3])};
  const bool pass = hi - lo < 1e-12 && pairing < 1e-8 && strictly_decreasing(off);
  return {pass, "norm spread " + fmt("%.1e", hi - lo) + ", max Omega pairing " + fmt("%.1e", pairing) +
                    ", |G_0j| " + list(off)};
}

Outcome schur_probe() {
  // dense oracle on the tiny grid
  const Grid tiny = build_grid(1, 2.0, 16);
  const auto small = build_decomposition(interval_mask(tiny, -1.0, 1.0), FracOrder(0.5, 1));
  const DenseMatrix q0 = small.basis();
  const Eigen::HouseholderQR<DenseMatrix> qr(q0);
  const DenseMatrix q1 = (qr.householderQ() * DenseMatrix::Identity(16, 16)).rightCols(16 - q0.cols());
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  double oracle_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    DenseMatrix b(16, 16);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = normal(rng);
    const DenseMatrix a = b * b.transpose() + 2.0 * DenseMatrix::Identity(16, 16);
    const PsiMaps maps(small, dense_operator(a));
    const DenseMatrix oracle = (q1.transpose() * a.inverse() * q1).inverse();
    DenseMatrix psi11(q1.cols(), q1.cols());
    for (Eigen::Index j = 0; j < q1.cols(); ++j) psi11.col(j) = q1.transpose() * maps.psi11(q1.col(j));
    oracle_err = std::max(oracle_err, (psi11 - oracle).cwiseAbs().maxCoeff() / oracle.cwiseAbs().maxCoeff());
  }

  const Flagship fl(8192);
  const auto dec = build_decomposition(fl.mask, fl.order);
  const auto report = schur_convergence_probe(fl.sequence, fl.limit, dec, make_schur_probes(dec), kFlagshipN);
  std::string detail = "dense oracle error " + fmt("%.1e", oracle_err) + "; N=8192 rank " +
                       std::to_string(dec.rank()) + "; max probe discrepancy";
  for (int k = 0; k < 4; ++k)
    detail += std::string(" ") + kPsiMapNames[static_cast<std::size_t>(k)] + " [" +
              list(report.max_discrepancy[static_cast<std::size_t>(k)]) + "]";
  return {report.all_decreasing() && oracle_err < 1e-10, detail};
}

Outcome heat() {
  const Flagship fl(4096);
  const Forcing f = constant_forcing(fl.f);
  const auto r = heat_homog_experiment(fl.sequence, fl.mask, fl.order, f, 1.0, 1.0 / 64, kFlagshipN, fl.limit);
  std::vector<double> rel;
  for (const auto& row : r.rows) rel.push_back(row.relative);
  const bool conv = r.strictly_decreasing && rel.back() < 0.05;

  auto traj = [&](double dt) {
    return solve_heat(HeatProblem{fl.mask, fl.limit, fl.order, 1.0, dt, f, TimeScheme::ImplicitEuler, 1, 1e-10});
  };
  const auto t1 = traj(1.0 / 64), t2 = traj(1.0 / 128), t3 = traj(1.0 / 256);
  const double ratio = spacetime_distance(t1, t2, fl.mask) / spacetime_distance(t2, t3, fl.mask);
  const bool halving = ratio > 1.6 && ratio < 2.4;
  return {conv && halving, "relative space-time discrepancy " + list(rel) + "; dt-halving ratio " +
                               fmt("%.3f", ratio) + " (N=4096)"};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> cells(const std::string& text) {
  std::vector<std::string> out(1);
  for (char c : text) {
    if (c == ',' || c == '\n') out.emplace_back();
    else out.back().push_back(c);
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "fraqhom_acceptance";
  fs::remove_all(root);
  ExperimentConfig flagship;
  flagship.seed = 5;
  ExperimentConfig small = flagship;
  small.grid.N = 1024;
  small.experiment.n_list = {4, 8, 16};
  small.experiment.n_terms = 8;
  small.experiment.T = 0.25;
  small.experiment.dt = 1.0 / 32;

  struct Case {
    std::string command;
    ExperimentConfig config;
  };
  const std::vector<Case> cases{{"homog", flagship}, {"solve", flagship},    {"heat", small},
                                {"metric", small},   {"schur", small},       {"kernel", flagship},
                                {"validate", flagship}, {"ops-check", small}};
  std::size_t files = 0, differing = 0;
  double worst = 0.0;
  std::cout.setstate(std::ios::failbit);
  for (const auto& c : cases) {
    const fs::path a = root / (c.command + "_1a"), b = root / (c.command + "_1b"), m = root / (c.command + "_8");
    set_thread_count(1);
    cli::run_command(c.config, {c.command, a, false});
    cli::run_command(c.config, {c.command, b, false});
    set_thread_count(8);
    cli::run_command(c.config, {c.command, m, false});
    set_thread_count(1);
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto name = entry.path().filename();
      std::string x = slurp(a / name), y = slurp(b / name);
      if (name == "manifest.csv") {
        x = x.substr(0, x.find("timestamp,"));
        y = y.substr(0, y.find("timestamp,"));
      }
      ++files;
      if (x != y) ++differing;
      if (entry.path().extension() != ".csv" || name == "manifest.csv") continue;
      const auto ca = cells(slurp(a / name)), cm = cells(slurp(m / name));
      if (ca.size() != cm.size()) {
        worst = 1e300;
        continue;
      }
      for (std::size_t i = 0; i < ca.size(); ++i) {
        if (ca[i] == cm[i]) continue;
        char* end = nullptr;
        const double u = std::strtod(ca[i].c_str(), &end);
        if (end == ca[i].c_str()) {
          worst = 1e300;
          continue;
        }
        worst = std::max(worst, std::abs(u - std::strtod(cm[i].c_str(), nullptr)) / std::max(1.0, std::abs(u)));
      }
    }
  }
  std::cout.clear();
  fs::remove_all(root);
  return {differing == 0 && worst <= 1e-12,
          std::to_string(files) + " files over 8 subcommands, " + std::to_string(differing) +
              " differ between re-runs; worst threads 1 vs 8 cell difference " + fmt("%.1e", worst)};
}

} // namespace

int main() {
  set_thread_count(1);
  const std::vector<Line> lines{
      {"criterion 1  operator identities", 10, identities},
      {"criterion 2  quadrature vs spectral", 30, quadrature_cross_check},
      {"criterion 3  fractional Leibniz rule", 30, leibniz},
      {"criterion 4  flagship homogenisation N=2048", 120, [] { return flagship(2048); }},
      {"criterion 4  supplementary, flagship at N=4096", 120, [] { return flagship(4096); }, false},
      {"criterion 5  wrong-limit rejection N=2048", 120, [] { return wrong_limit(2048); }},
      {"criterion 5  supplementary, wrong limit at N=4096", 120, [] { return wrong_limit(4096); }, false},
      {"criterion 6  metric axioms", 120, metric_axioms},
      {"criterion 7  kernel family", 10, kernel_lemma},
      {"criterion 8  Schur probes and dense oracle", 120, schur_probe},
      {"criterion 9  heat homogenisation", 300, heat},
      {"criterion 10 determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& line : lines) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = line.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = seconds < line.limit_seconds;
    const bool pass = out.pass && in_time;
    if (!pass && line.counted) ++failed;
    std::printf("%s %-48s %7.1f s (limit %g s%s)  %s\n", pass ? "PASS" : "FAIL", line.label.c_str(), seconds,
                line.limit_seconds, in_time ? "" : ", exceeded", out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
