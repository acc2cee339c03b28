#include "fraqhom/config.hpp"

#include "fraqhom/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace fraqhom {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& text) {
  T v{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw std::invalid_argument("not a boolean: '" + text + "'");
}

Point parse_point(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw std::invalid_argument("expected two comma-separated numbers");
  return {parse_number<double>(parts[0]), parse_number<double>(parts[1])};
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"command", [](ExperimentConfig& c, const std::string& v) { c.command = v; }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>(v); }},
      {"out", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
      {"grid.dim", [](ExperimentConfig& c, const std::string& v) { c.grid.dim = parse_number<int>(v); }},
      {"grid.L", [](ExperimentConfig& c, const std::string& v) { c.grid.L = parse_number<double>(v); }},
      {"grid.N", [](ExperimentConfig& c, const std::string& v) { c.grid.N = parse_number<int>(v); }},
      {"omega.shape", [](ExperimentConfig& c, const std::string& v) { c.omega.shape = v; }},
      {"omega.a", [](ExperimentConfig& c, const std::string& v) { c.omega.a = parse_number<double>(v); }},
      {"omega.b", [](ExperimentConfig& c, const std::string& v) { c.omega.b = parse_number<double>(v); }},
      {"omega.center", [](ExperimentConfig& c, const std::string& v) { c.omega.center = parse_point(v); }},
      {"omega.radius", [](ExperimentConfig& c, const std::string& v) { c.omega.radius = parse_number<double>(v); }},
      {"order.s", [](ExperimentConfig& c, const std::string& v) { c.s = parse_number<double>(v); }},
      {"coefficient.family", [](ExperimentConfig& c, const std::string& v) { c.coefficient.family = v; }},
      {"coefficient.profile", [](ExperimentConfig& c, const std::string& v) { c.coefficient.profile = v; }},
      {"coefficient.mean", [](ExperimentConfig& c, const std::string& v) { c.coefficient.mean = parse_number<double>(v); }},
      {"coefficient.amplitude",
       [](ExperimentConfig& c, const std::string& v) { c.coefficient.amplitude = parse_number<double>(v); }},
      {"coefficient.low", [](ExperimentConfig& c, const std::string& v) { c.coefficient.low = parse_number<double>(v); }},
      {"coefficient.high", [](ExperimentConfig& c, const std::string& v) { c.coefficient.high = parse_number<double>(v); }},
      {"coefficient.value", [](ExperimentConfig& c, const std::string& v) { c.coefficient.value = parse_number<double>(v); }},
      {"coefficient.antisym",
       [](ExperimentConfig& c, const std::string& v) { c.coefficient.antisym = parse_number<double>(v); }},
      {"coefficient.alpha", [](ExperimentConfig& c, const std::string& v) { c.coefficient.alpha = parse_number<double>(v); }},
      {"coefficient.beta", [](ExperimentConfig& c, const std::string& v) { c.coefficient.beta = parse_number<double>(v); }},
      {"coefficient.exterior",
       [](ExperimentConfig& c, const std::string& v) { c.coefficient.exterior = parse_number<double>(v); }},
      {"coefficient.transpose", [](ExperimentConfig& c, const std::string& v) { c.coefficient.transpose = parse_bool(v); }},
      {"coefficient.member", [](ExperimentConfig& c, const std::string& v) { c.coefficient.member = parse_number<int>(v); }},
      {"forcing.type", [](ExperimentConfig& c, const std::string& v) { c.forcing.type = v; }},
      {"forcing.value", [](ExperimentConfig& c, const std::string& v) { c.forcing.value = parse_number<double>(v); }},
      {"forcing.center", [](ExperimentConfig& c, const std::string& v) { c.forcing.center = parse_point(v); }},
      {"forcing.radius", [](ExperimentConfig& c, const std::string& v) { c.forcing.radius = parse_number<double>(v); }},
      {"solver.tol", [](ExperimentConfig& c, const std::string& v) { c.solver.tol = parse_number<double>(v); }},
      {"solver.max_iter", [](ExperimentConfig& c, const std::string& v) { c.solver.max_iter = parse_number<int>(v); }},
      {"experiment.n_list",
       [](ExperimentConfig& c, const std::string& v) {
         c.experiment.n_list.clear();
         for (const auto& item : split_list(v)) c.experiment.n_list.push_back(parse_number<int>(item));
       }},
      {"experiment.limit", [](ExperimentConfig& c, const std::string& v) { c.experiment.limit = v; }},
      {"experiment.tolerance",
       [](ExperimentConfig& c, const std::string& v) { c.experiment.tolerance = parse_number<double>(v); }},
      {"experiment.n_terms", [](ExperimentConfig& c, const std::string& v) { c.experiment.n_terms = parse_number<int>(v); }},
      {"experiment.probes", [](ExperimentConfig& c, const std::string& v) { c.experiment.probes = parse_number<int>(v); }},
      {"experiment.T", [](ExperimentConfig& c, const std::string& v) { c.experiment.T = parse_number<double>(v); }},
      {"experiment.dt", [](ExperimentConfig& c, const std::string& v) { c.experiment.dt = parse_number<double>(v); }},
      {"experiment.scheme", [](ExperimentConfig& c, const std::string& v) { c.experiment.scheme = v; }},
      {"experiment.snapshot_stride",
       [](ExperimentConfig& c, const std::string& v) { c.experiment.snapshot_stride = parse_number<int>(v); }},
      {"experiment.shifts",
       [](ExperimentConfig& c, const std::string& v) {
         c.experiment.shifts.clear();
         for (const auto& item : split_list(v)) c.experiment.shifts.push_back(parse_number<double>(item));
       }},
      {"experiment.kernel_radius",
       [](ExperimentConfig& c, const std::string& v) { c.experiment.kernel_radius = parse_number<double>(v); }},
      {"experiment.fields", [](ExperimentConfig& c, const std::string& v) { c.experiment.fields = parse_number<int>(v); }},
  };
  return table;
}

const std::set<std::string> kSections{"grid", "omega", "order", "coefficient", "forcing", "solver", "experiment"};
const std::set<std::string> kCommands{"solve", "homog", "metric", "heat", "schur", "kernel", "validate", "ops-check"};

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw ValidationError(field + " " + message);
}

template <typename T>
std::string show(T v) {
  std::ostringstream os;
  os << v;
  return " (got " + os.str() + ")";
}

} // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig config;
  std::string section;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& message) {
    throw ConfigError(source + ":" + std::to_string(line_no) + ": " + message);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end()) fail("unknown key '" + full + "'");
    if (!seen.insert(full).second) fail("duplicate key '" + full + "'");
    try {
      it->second(config, value);
    } catch (const std::invalid_argument& e) {
      fail("bad value for '" + full + "': " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void validate_config(const ExperimentConfig& c) {
  if (!c.command.empty() && !kCommands.count(c.command)) invalid("command", "is not a known subcommand: '" + c.command + "'");
  if (c.grid.dim != 1 && c.grid.dim != 2) invalid("grid.dim", "must be 1 or 2" + show(c.grid.dim));
  if (!(c.grid.L > 0.0)) invalid("grid.L", "must be positive" + show(c.grid.L));
  if (c.grid.N < 8 || c.grid.N % 2 != 0) invalid("grid.N", "must be an even integer >= 8" + show(c.grid.N));

  if (c.grid.dim == 1 && c.omega.shape != "interval") invalid("omega.shape", "must be 'interval' in 1D");
  if (c.grid.dim == 2 && c.omega.shape != "ball") invalid("omega.shape", "must be 'ball' in 2D");
  if (c.omega.shape == "interval" && !(c.omega.a < c.omega.b)) invalid("omega.a", "must be smaller than omega.b");
  if (c.omega.shape == "ball" && !(c.omega.radius > 0.0)) invalid("omega.radius", "must be positive" + show(c.omega.radius));

  if (!(c.s > 0.0 && c.s < 1.0)) invalid("order.s", "must lie in (0, 1)" + show(c.s));

  const auto& k = c.coefficient;
  if (!(k.alpha > 0.0)) invalid("coefficient.alpha", "must be positive" + show(k.alpha));
  if (!(k.beta >= k.alpha)) invalid("coefficient.beta", "must be at least coefficient.alpha" + show(k.beta));
  static const std::set<std::string> families{"periodic-1d", "layered-2d", "checkerboard-2d", "constant"};
  if (!families.count(k.family)) invalid("coefficient.family", "is unknown: '" + k.family + "'");
  if (k.family == "periodic-1d" && c.grid.dim != 1) invalid("coefficient.family", "periodic-1d needs grid.dim = 1");
  if ((k.family == "layered-2d" || k.family == "checkerboard-2d") && c.grid.dim != 2)
    invalid("coefficient.family", k.family + " needs grid.dim = 2");
  static const std::set<std::string> profiles{"sine", "two-phase", "constant"};
  if (!profiles.count(k.profile)) invalid("coefficient.profile", "is unknown: '" + k.profile + "'");
  if (k.profile == "sine" && !(k.mean - std::abs(k.amplitude) > 0.0))
    invalid("coefficient.amplitude", "makes the sine profile non-positive");
  if (k.profile == "two-phase" && !(k.low > 0.0 && k.high > 0.0)) invalid("coefficient.low", "and high must be positive");
  if (k.profile == "constant" && !(k.value > 0.0)) invalid("coefficient.value", "must be positive" + show(k.value));
  if (k.exterior && !(*k.exterior > 0.0)) invalid("coefficient.exterior", "must be positive" + show(*k.exterior));
  if (k.exterior && k.family != "periodic-1d") invalid("coefficient.exterior", "is only supported by periodic-1d");
  if (k.member < 1) invalid("coefficient.member", "must be positive" + show(k.member));

  static const std::set<std::string> forcings{"constant", "bump", "sine-bump"};
  if (!forcings.count(c.forcing.type)) invalid("forcing.type", "is unknown: '" + c.forcing.type + "'");
  if (!(c.forcing.radius > 0.0)) invalid("forcing.radius", "must be positive" + show(c.forcing.radius));

  if (!(c.solver.tol > 0.0 && c.solver.tol < 1.0)) invalid("solver.tol", "must lie in (0, 1)" + show(c.solver.tol));
  if (c.solver.max_iter < 0) invalid("solver.max_iter", "must be non-negative" + show(c.solver.max_iter));

  const auto& e = c.experiment;
  if (e.n_list.empty()) invalid("experiment.n_list", "must not be empty");
  for (std::size_t i = 0; i < e.n_list.size(); ++i) {
    if (e.n_list[i] < 1) invalid("experiment.n_list", "entries must be positive");
    if (i > 0 && e.n_list[i] <= e.n_list[i - 1]) invalid("experiment.n_list", "must be strictly increasing");
  }
  static const std::set<std::string> limits{"predicted", "cauchy", "arithmetic"};
  if (!limits.count(e.limit)) invalid("experiment.limit", "must be predicted, cauchy or arithmetic");
  if (e.limit != "cauchy" && k.family != "periodic-1d" && k.family != "constant")
    invalid("experiment.limit", "'" + e.limit + "' needs a periodic-1d or constant family; use cauchy");
  if (e.limit == "arithmetic" && k.family != "periodic-1d") invalid("experiment.limit", "'arithmetic' needs periodic-1d");
  if (!(e.tolerance > 0.0)) invalid("experiment.tolerance", "must be positive" + show(e.tolerance));
  if (e.n_terms < 1) invalid("experiment.n_terms", "must be at least 1" + show(e.n_terms));
  if (e.probes < 1) invalid("experiment.probes", "must be at least 1" + show(e.probes));
  if (!(e.T > 0.0)) invalid("experiment.T", "must be positive" + show(e.T));
  if (!(e.dt > 0.0 && e.dt <= e.T)) invalid("experiment.dt", "must lie in (0, T]" + show(e.dt));
  if (e.scheme != "implicit-euler" && e.scheme != "crank-nicolson")
    invalid("experiment.scheme", "must be implicit-euler or crank-nicolson");
  if (e.snapshot_stride < 1) invalid("experiment.snapshot_stride", "must be at least 1");
  if (e.shifts.empty()) invalid("experiment.shifts", "must not be empty");
  if (!(e.kernel_radius > 0.0)) invalid("experiment.kernel_radius", "must be positive");
  if (e.fields < 1) invalid("experiment.fields", "must be at least 1");
}

Profile make_profile(const CoefficientConfig& c) {
  if (c.profile == "sine") {
    const double mean = c.mean, amp = c.amplitude;
    return [mean, amp](double y) { return mean + amp * std::sin(2.0 * std::numbers::pi * y); };
  }
  if (c.profile == "two-phase") {
    const double low = c.low, high = c.high;
    return [low, high](double y) { return y - std::floor(y) < 0.5 ? low : high; };
  }
  const double v = c.value;
  return [v](double) { return v; };
}

ExperimentPlan build_plan(const ExperimentConfig& c) {
  validate_config(c);
  try {
    ExperimentPlan plan;
    plan.grid = build_grid(c.grid.dim, c.grid.L, c.grid.N);
    plan.mask = c.grid.dim == 1 ? interval_mask(plan.grid, c.omega.a, c.omega.b)
                                : ball_mask(plan.grid, c.omega.center, c.omega.radius);
    plan.order = FracOrder(c.s, c.grid.dim);
    const auto& k = c.coefficient;
    const Profile profile = make_profile(k);
    if (k.family == "periodic-1d") {
      std::optional<std::pair<OmegaMask, double>> omega_only;
      if (k.exterior) omega_only = std::make_pair(plan.mask, *k.exterior);
      plan.sequence = periodic_sequence_1d(plan.grid, profile, k.alpha, k.beta, omega_only);
    } else if (k.family == "layered-2d") {
      plan.sequence = layered_sequence_2d(plan.grid, profile, k.antisym, k.alpha, k.beta);
    } else if (k.family == "checkerboard-2d") {
      plan.sequence = checkerboard_sequence_2d(plan.grid, k.low, k.high, k.alpha, k.beta);
    } else {
      plan.sequence = constant_sequence(
          Coefficient(plan.grid, std::vector<Mat2>(plan.grid.size(), Mat2::scalar(k.value)), k.alpha, k.beta));
    }
    if (k.transpose) plan.sequence = transposed_sequence(plan.sequence);

    for (int n : c.experiment.n_list) (void)plan.sequence(n);
    (void)plan.sequence(k.member);

    if (c.experiment.limit == "predicted") {
      plan.limit = k.family == "constant" ? plan.sequence(1) : predicted_limit_1d(plan.sequence, plan.mask);
    } else if (c.experiment.limit == "arithmetic") {
      const Coefficient predicted = predicted_limit_1d(plan.sequence, plan.mask);
      const double mean = arithmetic_mean(profile);
      std::vector<Mat2> mats(predicted.matrices().begin(), predicted.matrices().end());
      for (std::size_t i : plan.mask.indices()) mats[i] = Mat2::scalar(mean);
      plan.limit = Coefficient(plan.grid, std::move(mats), k.alpha, k.beta);
    }

    ScalarField shape(plan.grid);
    if (c.forcing.type == "constant") {
      shape = ScalarField::from_function(plan.grid, [&](const Point&) { return c.forcing.value; });
    } else {
      shape = c.forcing.value * bump_field(plan.grid, c.forcing.center, c.forcing.radius);
    }
    plan.rhs = restrict_to_mask(shape, plan.mask);
    if (c.forcing.type == "sine-bump") {
      plan.forcing = [rhs = plan.rhs](double t) { return std::sin(std::numbers::pi * t) * rhs; };
    } else {
      plan.forcing = constant_forcing(plan.rhs);
    }
    return plan;
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what());
  }
}

} // namespace fraqhom
