#include "phifem/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phifem/assembly.hpp"

namespace phifem {

double Domain::diameter() const {
  if (dim == 1) return x1 - x0;
  double d = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i)
    for (std::size_t j = i + 1; j < loop.size(); ++j)
      d = std::max(d, std::hypot(loop[i].x - loop[j].x, loop[i].y - loop[j].y));
  return d;
}

void SingularProblem::validate() const {
  if (!nfun) throw std::invalid_argument("problem: missing weight (nfun)");
  if (!a) throw std::invalid_argument("problem.a: missing source weight");
  if (!(alpha > 0.0)) throw std::invalid_argument("problem.alpha: must be > 0");
  if (domain.dim == 1) {
    if (!(domain.x1 > domain.x0)) throw std::invalid_argument("domain: need x1 > x0");
  } else if (domain.dim == 2) {
    if (domain.loop.size() < 3) throw std::invalid_argument("domain: polygon needs >= 3 vertices");
  } else {
    throw std::invalid_argument("domain: dim must be 1 or 2");
  }
  const double ell = nfun->ell();
  if (has_b()) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("problem.gamma: must be >= 0");
    if (!(gamma < ell - 1.0)) {
      std::ostringstream os;
      os << "problem.gamma: the convex existence result requires gamma < ell - 1 = "
         << ell - 1.0 << " (got " << gamma << ")";
      throw std::invalid_argument(os.str());
    }
    const double sigma_min = ell / (ell - gamma - 1.0);
    if (!(sigma > sigma_min)) {
      std::ostringstream os;
      os << "problem.sigma: requires sigma > ell/(ell - gamma - 1) = " << sigma_min << " (got "
         << sigma << ")";
      throw std::invalid_argument(os.str());
    }
  }
  if (q > 0.0) {
    const QWindow w = q_window(alpha + gamma, ell, nfun->em(), nfun->dimN(), alpha);
    if (!w.contains(q)) {
      std::ostringstream os;
      os << "problem.q: outside the admissible window (" << w.q_min << ", ";
      if (w.unbounded_above)
        os << "inf)";
      else
        os << w.q_max << "]";
      os << " (got " << q << ")";
      throw std::invalid_argument(os.str());
    }
  }
}

double RegularizedProblem::a_eps(const Point& p) const {
  return std::min(parent.a(p), 1.0 / eps);
}

double RegularizedProblem::b_eps(const Point& p) const {
  if (!parent.has_b()) return 0.0;
  return std::min(parent.b(p), 1.0 / eps);
}

RegularizedProblem regularize(const SingularProblem& p, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("regularize: eps must be > 0");
  return RegularizedProblem{p, eps};
}

QWindow q_window(double alpha_plus_gamma, double ell, double em, int dimN, double alpha) {
  (void)em;
  const double s = alpha_plus_gamma;
  if (!(s > 0.0)) throw std::domain_error("q_window: need alpha + gamma > 0");
  if (!(ell < dimN)) throw std::domain_error("q_window: ell_star undefined (requires ell < dimN)");
  const double ell_star = dimN * ell / (dimN - ell);
  QWindow w;
  w.q_min = dimN / ell;
  w.q_max = s <= 1.0 ? ell_star / s : (ell_star + (alpha - 1.0) * ell_star / ell) / s;
  w.unbounded_above = !std::isfinite(w.q_max);
  w.empty = !w.unbounded_above && !(w.q_min < w.q_max);
  return w;
}

std::string to_string(ResultTag tag) {
  switch (tag) {
    case ResultTag::ExistenceEnergy: return "existence-energy";
    case ResultTag::ExistenceLocal: return "existence-local";
    case ResultTag::ExistenceConvex: return "existence-convex";
    case ResultTag::UniqueEnergySolution: return "uniqueness-energy";
    case ResultTag::BoundedSolution: return "bounded-solution";
    case ResultTag::ContinuousSolution: return "continuous-solution";
  }
  return "?";
}

bool HypothesisReport::applies(ResultTag tag) const {
  return std::find(applicable.begin(), applicable.end(), tag) != applicable.end();
}

namespace {

ProxyFlag integral_proxy(std::string name, const LayeredQuadrature& lq, const ScalarField& f) {
  ProxyFlag flag;
  flag.name = std::move(name);
  flag.evaluated = true;
  const LayeredIntegral li = layered_integral(lq, f);
  flag.value = li.value;
  flag.last_layer_share = li.last_layer_share;
  flag.suspected_divergent = li.suspected_divergent || !std::isfinite(li.value);
  flag.pass = !flag.suspected_divergent;
  return flag;
}

}  // namespace

HypothesisReport check_problem(const SingularProblem& p, const Mesh& mesh) {
  p.validate();
  const NFunction& nf = *p.nfun;
  const double ell = nf.ell();
  HypothesisReport rep;

  const LayeredQuadrature lq = boundary_layered_quadrature(mesh, 10, 0.5);
  const std::size_t n_pts = lq.points.size();

  // Sampled sign conditions on the source weight.
  double a_min = std::numeric_limits<double>::infinity(), a_max = 0.0, a_max_bulk = 0.0;
  for (std::size_t i = 0; i < n_pts; ++i) {
    const double av = p.a(lq.points[i].x);
    a_min = std::min(a_min, av);
    a_max = std::max(a_max, std::abs(av));
    if (lq.layer[i] < lq.n_layers / 2) a_max_bulk = std::max(a_max_bulk, std::abs(av));
  }

  rep.a_L1 = integral_proxy("a in L1", lq, p.a);
  rep.a_L1.pass = rep.a_L1.pass && a_min >= -1e-14 && a_max > 0.0;

  // Conjugate-class membership of a d^{-alpha}: Luxemburg norm over the
  // layered samples, with the innermost layer's modular share as the
  // divergence heuristic.
  {
    ProxyFlag& flag = rep.a_dist_conjugate;
    flag.name = "a d^{-alpha} in conjugate Orlicz class";
    flag.evaluated = true;
    std::vector<double> vals(n_pts), wts(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i) {
      const double d = mesh.distance_to_boundary(lq.points[i].x);
      vals[i] = p.a(lq.points[i].x) * std::pow(d, -p.alpha);
      wts[i] = lq.points[i].w;
    }
    const double norm = luxemburg_norm(vals, wts, [&nf](double t) { return nf.conjugate(t); });
    flag.value = norm;
    double total = 0.0, last = 0.0;
    if (norm > 0.0) {
      for (std::size_t i = 0; i < n_pts; ++i) {
        const double term = wts[i] * nf.conjugate(std::abs(vals[i]) / norm);
        total += term;
        if (lq.layer[i] == lq.n_layers) last += term;
      }
    }
    flag.last_layer_share = total > 0.0 ? last / total : 0.0;
    flag.suspected_divergent = !std::isfinite(norm) || flag.last_layer_share > 0.10;
    flag.pass = !flag.suspected_divergent;
  }

  const double ell_star = nf.ell_star();
  const double q_crit = ell_star / (ell_star + p.alpha - 1.0);
  rep.a_Lcrit = integral_proxy("a in L^{ell*/(ell*+alpha-1)}", lq, [&](const Point& x) {
    return std::pow(std::abs(p.a(x)), q_crit);
  });

  if (p.q > 0.0) {
    rep.a_Lq = integral_proxy("a in L^q", lq, [&](const Point& x) {
      return std::pow(std::abs(p.a(x)), p.q);
    });
  }

  rep.a_Linf.name = "a in L^inf";
  rep.a_Linf.evaluated = true;
  rep.a_Linf.value = a_max;
  rep.a_Linf.suspected_divergent = !std::isfinite(a_max) || a_max > 10.0 * a_max_bulk;
  rep.a_Linf.pass = !rep.a_Linf.suspected_divergent;

  if (p.has_b() && p.sigma > 0.0) {
    rep.b_Lsigma = integral_proxy("b in L^sigma", lq, [&](const Point& x) {
      return std::pow(std::abs(p.b(x)), p.sigma);
    });
  }

  rep.alpha_le_1 = p.alpha <= 1.0;
  rep.alpha_ge_1 = p.alpha >= 1.0;
  rep.gamma_ok = !p.has_b() || p.gamma < ell - 1.0;
  rep.sigma_ok = !p.has_b() || p.sigma > ell / (ell - p.gamma - 1.0);
  rep.window = q_window(p.alpha + p.gamma, ell, nf.em(), nf.dimN(), p.alpha);
  rep.q_in_window = p.q > 0.0 && rep.window.contains(p.q);

  // Applicability map.  Both routes into the energy-space existence result
  // are listed with no ranking between them.
  const bool energy_branch_dist = rep.a_L1.pass && rep.a_dist_conjugate.pass;
  const bool energy_branch_crit = rep.a_L1.pass && rep.alpha_le_1 && rep.a_Lcrit.pass;
  if (!p.has_b()) {
    if (energy_branch_dist || energy_branch_crit)
      rep.applicable.push_back(ResultTag::ExistenceEnergy);
    if (rep.a_L1.pass && rep.alpha_ge_1) rep.applicable.push_back(ResultTag::ExistenceLocal);
    if (rep.applies(ResultTag::ExistenceEnergy))
      rep.applicable.push_back(ResultTag::UniqueEnergySolution);
  } else {
    if (rep.a_dist_conjugate.pass && rep.gamma_ok && rep.sigma_ok && rep.b_Lsigma.pass)
      rep.applicable.push_back(ResultTag::ExistenceConvex);
  }
  const bool some_existence = !rep.applicable.empty();
  if (some_existence && rep.q_in_window && rep.a_Lq.pass &&
      (p.alpha > 1.0 || rep.a_Lcrit.pass) && (!p.has_b() || rep.a_Linf.pass))
    rep.applicable.push_back(ResultTag::BoundedSolution);
  if (some_existence && !p.has_b() && rep.a_Linf.pass)
    rep.applicable.push_back(ResultTag::ContinuousSolution);

  return rep;
}

std::string HypothesisReport::summary() const {
  std::ostringstream os;
  const auto line = [&os](const ProxyFlag& f) {
    if (!f.evaluated) return;
    os << "  " << (f.pass ? "pass" : "FAIL") << "  " << f.name << "  value=" << f.value
       << " last-layer-share=" << f.last_layer_share
       << (f.suspected_divergent ? " (suspected divergent)" : "") << "\n";
  };
  os << "integrability proxies:\n";
  line(a_L1);
  line(a_dist_conjugate);
  line(a_Lcrit);
  line(a_Lq);
  line(a_Linf);
  line(b_Lsigma);
  os << "exponents: alpha<=1 " << (alpha_le_1 ? "yes" : "no") << ", alpha>=1 "
     << (alpha_ge_1 ? "yes" : "no") << ", gamma-window " << (gamma_ok ? "ok" : "violated")
     << ", sigma-window " << (sigma_ok ? "ok" : "violated") << "\n";
  os << "q-window: (" << window.q_min << ", ";
  if (window.unbounded_above)
    os << "inf)";
  else
    os << window.q_max << "]";
  os << (window.empty ? " EMPTY" : "") << ", q " << (q_in_window ? "inside" : "outside/unset")
     << "\n";
  os << "applicable results:";
  if (applicable.empty()) os << " none";
  for (const auto tag : applicable) os << " " << to_string(tag);
  os << "\n";
  return os.str();
}

}  // namespace phifem
