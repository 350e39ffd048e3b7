#include "phifem/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phifem/csv.hpp"

namespace phifem {

std::vector<std::vector<double>> read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    std::vector<double> row;
    double v;
    bool numeric = true;
    std::string tok;
    std::istringstream probe(line);
    while (probe >> tok) {
      std::istringstream ts(tok);
      if (!(ts >> v)) {
        numeric = false;
        break;
      }
    }
    if (!numeric) continue;  // header line
    while (is >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// ConfigTree

ConfigTree ConfigTree::parse_string(const std::string& text, const std::string& origin) {
  ConfigTree t;
  t.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    t.entries_[key] = val;
  }
  return t;
}

ConfigTree ConfigTree::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_string(os.str(), path);
}

void ConfigTree::fail(const std::string& key, const std::string& why) const {
  throw ConfigError(key + ": " + why);
}

bool ConfigTree::has(const std::string& key) const {
  const auto it = entries_.find(key);
  return it != entries_.end() && !it->second.empty();
}

std::string ConfigTree::get_string(const std::string& key) const {
  if (!has(key)) fail(key, "missing required entry");
  return entries_.at(key);
}

std::string ConfigTree::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? entries_.at(key) : fallback;
}

double ConfigTree::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  std::istringstream is(s);
  double v;
  if (!(is >> v)) fail(key, "expected a number, got '" + s + "'");
  return v;
}

double ConfigTree::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int ConfigTree::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-12) fail(key, "expected an integer");
  return i;
}

int ConfigTree::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool ConfigTree::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(key, "expected a boolean, got '" + s + "'");
  return false;
}

std::vector<double> ConfigTree::get_doubles(const std::string& key) const {
  std::string s = get_string(key);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) fail(key, "expected a list of numbers");
  return out;
}

// ---------------------------------------------------------------------------
// RunConfig

namespace {

ScalarField field_from_entry(const std::string& key, const std::string& text,
                             const Domain& domain) {
  if (text.rfind("csv:", 0) == 0) {
    if (domain.dim != 1)
      throw ConfigError(key + ": tabulated coefficients are supported on intervals only");
    const auto rows = read_csv_table(text.substr(4));
    auto xs = std::make_shared<std::vector<double>>();
    auto ys = std::make_shared<std::vector<double>>();
    for (const auto& r : rows) {
      if (r.size() < 2) throw ConfigError(key + ": table rows need (x, value)");
      xs->push_back(r[0]);
      ys->push_back(r[1]);
    }
    if (xs->size() < 2) throw ConfigError(key + ": table needs >= 2 rows");
    for (std::size_t i = 1; i < xs->size(); ++i)
      if (!((*xs)[i] > (*xs)[i - 1]))
        throw ConfigError(key + ": table abscissae must be strictly increasing");
    return [xs, ys](const Point& p) {
      const auto& x = *xs;
      const auto& y = *ys;
      if (p.x <= x.front()) return y.front();
      if (p.x >= x.back()) return y.back();
      const auto it = std::upper_bound(x.begin(), x.end(), p.x);
      const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
      const double t = (p.x - x[i]) / (x[i + 1] - x[i]);
      return y[i] + t * (y[i + 1] - y[i]);
    };
  }
  Expression e;
  try {
    e = Expression::parse(text);
  } catch (const ExpressionError& err) {
    throw ConfigError(key + ": " + err.what());
  }
  const bool needs_d = e.uses_distance();
  const Domain dom = domain;
  return [e, needs_d, dom](const Point& p) {
    double d = 0.0;
    if (needs_d)
      d = dom.dim == 1 ? std::min(p.x - dom.x0, dom.x1 - p.x)
                       : point_to_loop_distance(dom.loop, p);
    return e.eval(p.x, p.y, d);
  };
}

}  // namespace

std::shared_ptr<const Mesh> RunConfig::build_mesh() const { return build_mesh(mesh_n); }

std::shared_ptr<const Mesh> RunConfig::build_mesh(int n_override) const {
  if (problem.domain.dim == 1)
    return std::make_shared<Mesh>(
        build_interval_mesh(problem.domain.x0, problem.domain.x1, n_override));
  return std::make_shared<Mesh>(build_polygon_mesh(problem.domain.loop, mesh_h));
}

RunConfig load_run_config(const ConfigTree& t) {
  RunConfig cfg;

  // Domain.
  cfg.problem.domain.dim = t.get_int("domain.dim", 1);
  if (cfg.problem.domain.dim == 1) {
    cfg.problem.domain.x0 = t.get_double("domain.x0", 0.0);
    cfg.problem.domain.x1 = t.get_double("domain.x1", 1.0);
    if (!(cfg.problem.domain.x1 > cfg.problem.domain.x0))
      throw ConfigError("domain.x1: must exceed domain.x0");
  } else if (cfg.problem.domain.dim == 2) {
    const auto coords = t.get_doubles("domain.polygon");
    if (coords.size() < 6 || coords.size() % 2 != 0)
      throw ConfigError("domain.polygon: expected >= 3 (x, y) pairs");
    for (std::size_t i = 0; i < coords.size(); i += 2)
      cfg.problem.domain.loop.push_back({coords[i], coords[i + 1]});
  } else {
    throw ConfigError("domain.dim: must be 1 or 2");
  }

  // Weight (phi catalog or table).
  cfg.phi_key = t.get_string("problem.phi");
  const int dimN = t.get_int("problem.dimN", 3);
  try {
    if (cfg.phi_key.rfind("csv:", 0) == 0) {
      const auto rows = read_csv_table(cfg.phi_key.substr(4));
      std::vector<double> ts, ph;
      for (const auto& r : rows) {
        if (r.size() < 2) throw ConfigError("problem.phi: table rows need (t, phi)");
        ts.push_back(r[0]);
        ph.push_back(r[1]);
      }
      cfg.problem.nfun =
          nfunction_from_table(ts, ph, dimN, t.get_double("problem.phi_ell", 0.0),
                               t.get_double("problem.phi_em", 0.0));
    } else {
      cfg.problem.nfun = nfunction_from_key(cfg.phi_key, dimN);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("problem.phi: ") + e.what());
  }

  // Coefficients and exponents.
  cfg.problem.alpha = t.get_double("problem.alpha");
  cfg.problem.a = field_from_entry("problem.a", t.get_string("problem.a"), cfg.problem.domain);
  if (t.has("problem.b")) {
    cfg.problem.b = field_from_entry("problem.b", t.get_string("problem.b"), cfg.problem.domain);
    cfg.problem.gamma = t.get_double("problem.gamma", 0.0);
    cfg.problem.sigma = t.get_double("problem.sigma", 0.0);
  }
  cfg.problem.q = t.get_double("problem.q", 0.0);
  try {
    cfg.problem.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  // Mesh.
  cfg.mesh_n = t.get_int("mesh.n", 64);
  if (cfg.mesh_n < 2) throw ConfigError("mesh.n: must be >= 2");
  cfg.mesh_h = t.get_double("mesh.h", 0.1);
  if (cfg.problem.domain.dim == 2 && !(cfg.mesh_h > 0.0))
    throw ConfigError("mesh.h: must be > 0");

  // Solver and ladder.
  NewtonConfig& nw = cfg.ladder.newton;
  nw.tol_residual = t.get_double("solver.tol_residual", 1e-10);
  if (!(nw.tol_residual > 0.0)) throw ConfigError("solver.tol_residual: must be > 0");
  nw.max_iters = t.get_int("solver.max_iters", 80);
  if (nw.max_iters < 1) throw ConfigError("solver.max_iters: must be >= 1");
  nw.damping_factor = t.get_double("solver.damping", 0.5);
  if (!(nw.damping_factor > 0.0 && nw.damping_factor < 1.0))
    throw ConfigError("solver.damping: must lie in (0, 1)");
  nw.min_step = t.get_double("solver.min_step", 1e-12);
  if (!(nw.min_step > 0.0)) throw ConfigError("solver.min_step: must be > 0");
  nw.positivity_guard = t.get_bool("solver.positivity_guard", true);
  nw.linear_solver = t.get_string("solver.linear", "direct");
  if (nw.linear_solver != "direct" && nw.linear_solver != "cg")
    throw ConfigError("solver.linear: must be 'direct' or 'cg'");
  nw.assembly.kappa = t.get_double("solver.kappa", 1e-10);

  if (t.has("solver.schedule")) {
    cfg.ladder.schedule = t.get_doubles("solver.schedule");
  } else {
    const int n_max = t.get_int("solver.n_max", 64);
    if (n_max < 1) throw ConfigError("solver.n_max: must be >= 1");
    cfg.ladder.schedule = default_schedule(n_max);
  }
  cfg.ladder.tol_cauchy_max = t.get_double("solver.tol_cauchy_max", 2e-2);
  cfg.ladder.tol_cauchy_lux = t.get_double("solver.tol_cauchy_lux", 5e-2);
  if (!(cfg.ladder.tol_cauchy_max > 0.0) || !(cfg.ladder.tol_cauchy_lux > 0.0))
    throw ConfigError("solver.tol_cauchy_max/tol_cauchy_lux: must be > 0");

  // Diagnostics.
  cfg.diagnostics.k_max = t.get_int("diagnostics.k_max", 25);
  if (cfg.diagnostics.k_max < 1) throw ConfigError("diagnostics.k_max: must be >= 1");
  cfg.diagnostics.mu = t.get_double("diagnostics.mu", 0.0);
  cfg.diagnostics.strip_delta = t.get_double("diagnostics.strip_delta", 0.125);
  cfg.diagnostics.moser = t.get_bool("diagnostics.moser", cfg.problem.q > 0.0);
  cfg.diagnostics.multistart = t.get_int("diagnostics.multistart", 0);
  cfg.diagnostics.weak_tests = t.get_int("diagnostics.weak_tests", 20);
  if (cfg.diagnostics.moser && !(cfg.problem.q > 0.0))
    throw ConfigError("diagnostics.moser: requires problem.q to be set");

  // Manufactured block.
  if (t.has("manufactured.u_star")) {
    cfg.manufactured.present = true;
    try {
      cfg.manufactured.u_star = Expression::parse(t.get_string("manufactured.u_star"));
    } catch (const ExpressionError& e) {
      throw ConfigError(std::string("manufactured.u_star: ") + e.what());
    }
    cfg.manufactured.eps = t.get_double("manufactured.eps", 1e-8);
    if (!(cfg.manufactured.eps > 0.0)) throw ConfigError("manufactured.eps: must be > 0");
  }

  cfg.output.precision = t.get_int("output.precision", 12);
  if (cfg.output.precision < 3 || cfg.output.precision > 17)
    throw ConfigError("output.precision: must lie in [3, 17]");
  cfg.seed = static_cast<std::uint64_t>(t.get_int("run.seed", 0));
  return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
  return load_run_config(ConfigTree::parse_file(path));
}

}  // namespace phifem
