#include "cli.hpp"

#include "fraqhom/dirichlet.hpp"
#include "fraqhom/errors.hpp"
#include "fraqhom/field_io.hpp"
#include "fraqhom/heat.hpp"
#include "fraqhom/homog.hpp"
#include "fraqhom/identities.hpp"
#include "fraqhom/parallel.hpp"
#include "fraqhom/schur.hpp"

#include <CLI11.hpp>
#include <boost/crc.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace fraqhom::cli {

namespace {

using io::format_double;

/// Collects written files for the manifest.
class Artifacts {
public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    body(os);
    if (!os) throw std::runtime_error("write failed for " + (dir_ / name).string());
    files_.push_back(name);
  }

  void binary(const std::string& name, const ScalarField& u) {
    io::write_binary(dir_ / name, u);
    files_.push_back(name);
  }

  void manifest() const {
    std::vector<std::string> names = files_;
    std::sort(names.begin(), names.end());
    std::ofstream os(dir_ / "manifest.csv", std::ios::binary);
    os << "file,bytes,crc32\n";
    for (const auto& name : names) {
      std::ifstream in(dir_ / name, std::ios::binary);
      const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      boost::crc_32_type crc;
      crc.process_bytes(content.data(), content.size());
      os << name << ',' << content.size() << ',' << std::hex << std::setw(8) << std::setfill('0') << crc.checksum()
         << std::dec << '\n';
    }
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    os << "timestamp,," << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  }

private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::string stage_;

void stage(const std::string& name) { stage_ = name; }

SolveOptions solve_options(const ExperimentConfig& c) {
  SolveOptions o;
  o.tol = c.solver.tol;
  o.max_iter = c.solver.max_iter;
  return o;
}

std::optional<Coefficient> reference_for(const ExperimentPlan& plan) { return plan.limit; }

void write_plot(Artifacts& out, const std::string& title, const std::string& csv, const std::string& x,
                const std::vector<std::string>& ys, bool logscale) {
  out.write("plot.gp", [&](std::ostream& os) {
    os << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set title '" << title << "'\n"
       << "set xlabel '" << x << "'\n";
    if (logscale) os << "set logscale xy\n";
    os << "set terminal pngcairo size 900,600\n"
       << "set output '" << title << ".png'\n"
       << "plot ";
    for (std::size_t i = 0; i < ys.size(); ++i)
      os << (i ? ", " : "") << "'" << csv << "' using '" << x << "':'" << ys[i] << "' with linespoints";
    os << '\n';
  });
}

void write_verdicts(std::ostream& os, const ConvergenceReport& r) {
  os << "verdict,pass,final_value,trend_non_increasing\n";
  auto row = [&](const char* name, const Verdict& v) {
    os << name << ',' << (v.pass ? 1 : 0) << ',' << format_double(v.final_value) << ','
       << (v.trend_non_increasing ? 1 : 0) << '\n';
  };
  row("solution", r.solution_verdict);
  row("flux", r.flux_verdict);
  row("energy", r.energy_verdict);
  os << "agree," << (r.verdicts_agree() ? 1 : 0) << ",,\n";
}

void write_probe_table(std::ostream& os, const ProbeSet& probes) {
  os << "kind,id,norm,support_lo,support_hi\n";
  auto rows = [&](const char* kind, const std::vector<ScalarField>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto& f = fields[k];
      double lo = 0.0, hi = 0.0;
      bool any = false;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        const double x = f.grid().point(i)[0];
        lo = any ? std::min(lo, x) : x;
        hi = any ? std::max(hi, x) : x;
        any = true;
      }
      os << kind << ',' << k << ',' << format_double(norm(f)) << ',' << format_double(lo) << ','
         << format_double(hi) << '\n';
    }
  };
  rows("omega_mode", probes.omega_modes);
  rows("box_mode", probes.box_modes);
  rows("exterior_bump", probes.exterior_bumps);
  rows("interior_bump", probes.interior_bumps);
}

void cmd_solve(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("solve");
  const Coefficient a = plan.sequence(c.coefficient.member);
  const DirichletSolution sol = solve(plan.mask, a, plan.order, plan.rhs, solve_options(c));
  out.write("solution.csv", [&](std::ostream& os) { io::write_csv(os, sol.u); });
  out.write("flux.csv", [&](std::ostream& os) { io::write_csv(os, sol.flux); });
  out.write("summary.csv", [&](std::ostream& os) { write_summary_csv(os, sol); });
  out.write("mask.csv", [&](std::ostream& os) { io::write_mask_csv(os, plan.mask); });
  out.binary("solution.frqh", sol.u);
  write_plot(out, "solution", "solution.csv", "x", {"value"}, false);
  std::cout << "energy " << format_double(sol.energy) << "  residual " << format_double(sol.residual)
            << "  iterations " << sol.iterations << "  apriori_ratio " << format_double(sol.apriori_ratio) << '\n';
}

void cmd_homog(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("homog");
  ExperimentOptions opts;
  opts.solve = solve_options(c);
  opts.tolerance = c.experiment.tolerance;
  opts.ds_terms = c.experiment.n_terms;
  const ConvergenceReport report = run_homog_experiment(plan.sequence, plan.mask, plan.order, plan.rhs,
                                                        c.experiment.n_list, reference_for(plan), opts);
  out.write("report.csv", [&](std::ostream& os) { write_report_csv(os, report); });
  out.write("verdicts.csv", [&](std::ostream& os) { write_verdicts(os, report); });
  out.write("probes.csv", [&](std::ostream& os) { write_probe_table(os, make_probes(plan.mask)); });
  write_plot(out, "homog", "report.csv", "n", {"l2_relative", "flux_pairing_relative", "energy_relative_error"}, true);
  for (const auto& r : report.rows)
    if (!r.solved) std::cerr << "fraqhom: homog: n = " << r.n << " failed: " << r.error << '\n';
  std::cout << "solution verdict " << (report.solution_verdict.pass ? "pass" : "fail") << ", flux verdict "
            << (report.flux_verdict.pass ? "pass" : "fail") << ", energy verdict "
            << (report.energy_verdict.pass ? "pass" : "fail") << '\n';
}

void cmd_metric(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("metric");
  const auto& n_list = c.experiment.n_list;
  const Coefficient reference = plan.limit ? *plan.limit : plan.sequence(n_list.back());
  std::vector<GlobalMetric> values(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t i) {
    values[i] = global_metric(plan.sequence(n_list[i]), reference, plan.mask, plan.order, c.experiment.n_terms,
                              solve_options(c));
  });
  out.write("metric.csv", [&](std::ostream& os) {
    os << "n,ds,exterior,total\n";
    for (std::size_t i = 0; i < n_list.size(); ++i)
      os << n_list[i] << ',' << format_double(values[i].omega_part) << ',' << format_double(values[i].exterior_part)
         << ',' << format_double(values[i].total()) << '\n';
  });
  write_plot(out, "metric", "metric.csv", "n", {"ds", "exterior", "total"}, true);
}

void cmd_heat(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("heat");
  HeatExperimentOptions opts;
  opts.scheme = c.experiment.scheme == "crank-nicolson" ? TimeScheme::CrankNicolson : TimeScheme::ImplicitEuler;
  opts.tol = c.solver.tol;
  opts.tolerance = c.experiment.tolerance;
  const HeatReport report = heat_homog_experiment(plan.sequence, plan.mask, plan.order, plan.forcing, c.experiment.T,
                                                  c.experiment.dt, c.experiment.n_list, plan.limit, opts);
  out.write("heat_report.csv", [&](std::ostream& os) { write_heat_report_csv(os, report); });
  out.write("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, report.reference); });
  write_plot(out, "heat", "heat_report.csv", "n", {"relative"}, true);
  for (const auto& r : report.rows)
    if (!r.solved) std::cerr << "fraqhom: heat: n = " << r.n << " failed: " << r.error << '\n';
  std::cout << "heat verdict " << (report.verdict.pass ? "pass" : "fail") << ", strictly decreasing "
            << (report.strictly_decreasing ? "yes" : "no") << '\n';
}

void cmd_schur(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("schur decomposition");
  const BlockDecomposition dec = build_decomposition(plan.mask, plan.order);
  stage("schur membership");
  const Coefficient member = plan.sequence(c.coefficient.member);
  const MembershipReport m =
      membership_check(member, dec, Gamma::canonical(c.coefficient.alpha, c.coefficient.beta), 64, c.seed);
  out.write("membership.csv", [&](std::ostream& os) {
    os << "condition,value,bound,margin,estimated,pass\n";
    for (const auto& cond : m.conditions)
      os << cond.name << ',' << format_double(cond.value) << ',' << format_double(cond.bound) << ','
         << format_double(cond.margin) << ',' << (cond.estimated ? 1 : 0) << ',' << (cond.pass ? 1 : 0) << '\n';
  });
  stage("schur probes");
  const auto& n_list = c.experiment.n_list;
  const Coefficient reference = plan.limit ? *plan.limit : plan.sequence(n_list.back());
  const SchurProbes probes = make_schur_probes(dec, c.experiment.probes, c.seed);
  const SchurProbeReport report = schur_convergence_probe(plan.sequence, reference, dec, probes, n_list);
  out.write("schur_probes.csv", [&](std::ostream& os) { write_probe_csv(os, report); });
  out.write("schur_summary.csv", [&](std::ostream& os) {
    os << "n,psi00,psi10,psi01,psi11\n";
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      os << n_list[i];
      for (std::size_t k = 0; k < 4; ++k) os << ',' << format_double(report.max_discrepancy[k][i]);
      os << '\n';
    }
  });
  write_plot(out, "schur", "schur_summary.csv", "n", {"psi00", "psi10", "psi01", "psi11"}, true);
  std::cout << "rank " << dec.rank() << ", membership " << (m.pass ? "pass" : "fail") << ", probes decreasing "
            << (report.all_decreasing() ? "yes" : "no") << '\n';
}

void cmd_kernel(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("kernel");
  const KernelFamily fam = kernel_family_1d(plan.mask, plan.order, c.experiment.shifts, c.experiment.kernel_radius);
  const auto gram = gram_matrix(fam.fields);
  const ProbeSet probes = make_probes(plan.mask);
  const std::size_t n = fam.fields.size();
  out.write("gram.csv", [&](std::ostream& os) {
    os << "i,j,shift_i,shift_j,value\n";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        os << i << ',' << j << ',' << format_double(fam.shifts[i]) << ',' << format_double(fam.shifts[j]) << ','
           << format_double(gram[i * n + j]) << '\n';
  });
  out.write("kernel_checks.csv", [&](std::ostream& os) {
    os << "shift,norm,max_omega_pairing\n";
    for (std::size_t i = 0; i < n; ++i) {
      const VectorField ds = grad_s_spectral(fam.fields[i], plan.order);
      double pairing = 0.0;
      for (const auto& phi : probes.omega_modes) pairing = std::max(pairing, std::abs(inner(ds.component(0), phi)));
      os << format_double(fam.shifts[i]) << ',' << format_double(norm(fam.fields[i])) << ','
         << format_double(pairing) << '\n';
    }
  });
  write_plot(out, "kernel", "gram.csv", "shift_j", {"value"}, false);
}

void cmd_validate(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("validate");
  std::vector<int> ns = c.experiment.n_list;
  if (std::find(ns.begin(), ns.end(), c.coefficient.member) == ns.end()) ns.push_back(c.coefficient.member);
  std::sort(ns.begin(), ns.end());
  std::ostringstream table;
  table << "n,valid,coercivity_margin,bound_margin,first_violation\n";
  for (int n : ns) {
    const CoefficientReport r = validate_coefficient(plan.sequence(n));
    table << n << ',' << (r.valid ? 1 : 0) << ',' << format_double(r.coercivity_margin) << ','
          << format_double(r.bound_margin) << ',' << r.first_violation << '\n';
    std::cout << "n = " << n << ": " << (r.valid ? "valid" : "INVALID") << "  mA1 margin "
              << format_double(r.coercivity_margin) << "  mA2 margin " << format_double(r.bound_margin) << '\n';
  }
  out.write("validate.csv", [&](std::ostream& os) { os << table.str(); });
}

void cmd_ops_check(const ExperimentConfig& c, const ExperimentPlan& plan, Artifacts& out) {
  stage("ops-check");
  const auto results = operator_identity_suite(plan.grid, plan.order, c.experiment.fields, c.seed);
  out.write("ops_check.csv", [&](std::ostream& os) { write_identity_csv(os, results); });
  bool all = true;
  for (const auto& r : results) {
    std::cout << std::left << std::setw(16) << r.name << " d=" << r.dim << " N=" << r.points_per_axis
              << "  max rel err " << std::setw(24) << format_double(r.max_relative_error) << (r.pass ? "pass" : "FAIL")
              << '\n';
    all = all && r.pass;
  }
  if (!all) throw NumericalError("ops-check: identity suite failed");
}

} // namespace

void run_command(const ExperimentConfig& config, const RunOptions& options) {
  stage("validation");
  const ExperimentPlan plan = build_plan(config);
  if (options.dry_run) {
    std::cout << "configuration valid: " << options.command << " on a " << plan.grid.dim() << "D grid with N = "
              << plan.grid.points_per_axis() << ", " << plan.mask.count() << " Omega cells\n";
    return;
  }
  Artifacts out(options.out_dir);
  const std::string& cmd = options.command;
  if (cmd == "solve") cmd_solve(config, plan, out);
  else if (cmd == "homog") cmd_homog(config, plan, out);
  else if (cmd == "metric") cmd_metric(config, plan, out);
  else if (cmd == "heat") cmd_heat(config, plan, out);
  else if (cmd == "schur") cmd_schur(config, plan, out);
  else if (cmd == "kernel") cmd_kernel(config, plan, out);
  else if (cmd == "validate") cmd_validate(config, plan, out);
  else if (cmd == "ops-check") cmd_ops_check(config, plan, out);
  else throw ConfigError("unknown subcommand '" + cmd + "'");
  out.manifest();
}

int main(int argc, char** argv) {
  CLI::App app{"fraqhom: fractional diffusion and homogenisation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool dry_run = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "run the command named by the `command` key of the config"},
      {"solve", "solve one Dirichlet problem"},
      {"homog", "homogenisation convergence report"},
      {"metric", "d_s and global metric along the sequence"},
      {"heat", "fractional heat homogenisation"},
      {"schur", "Schur-map membership and probe convergence"},
      {"kernel", "kernel family of the 1D fractional derivative"},
      {"validate", "check coefficient members against M(alpha, beta)"},
      {"ops-check", "operator identity suite"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto* cfg = sub->add_option("config", config_path, "configuration file");
    if (name == "run") cfg->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for random probes");
    sub->add_option("--threads", threads, "worker threads (default: FRAQHOM_THREADS or hardware)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--dry-run", dry_run, "validate the configuration only");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  stage("configuration");
  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    std::string command = app.get_subcommands().front()->get_name();
    if (command == "run") {
      if (config.command.empty()) throw ConfigError(config_path + ": 'command' key required by 'run'");
      command = config.command;
    }
    config.command = command;
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out_dir = out_dir;

    int workers = 0;
    if (threads) {
      workers = *threads;
    } else if (const char* env = std::getenv("FRAQHOM_THREADS"); env && *env) {
      try {
        workers = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError("FRAQHOM_THREADS must be a positive integer");
      }
      if (workers < 1) throw ConfigError("FRAQHOM_THREADS must be a positive integer");
    } else {
      workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    set_thread_count(workers);

    run_command(config, RunOptions{command, config.out_dir, dry_run});
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "fraqhom: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "fraqhom: validation error in stage '" << stage_ << "': " << e.what() << '\n';
    return kExitValidation;
  } catch (const InvalidArgument& e) {
    std::cerr << "fraqhom: invalid input in stage '" << stage_ << "': " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "fraqhom: numerical failure in stage '" << stage_ << "': " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "fraqhom: failure in stage '" << stage_ << "': " << e.what() << '\n';
    return kExitNumerical;
  }
}

} // namespace fraqhom::cli
