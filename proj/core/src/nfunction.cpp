#include "phifem/nfunction.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

namespace phifem {

namespace {

constexpr double kOverflowGuard = 1e290;
constexpr double kInf = std::numeric_limits<double>::infinity();

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double central_ratio(const std::function<double(double)>& phi, double t) {
  // (t phi(t))' / phi(t) by central differences, h = t * 1e-6.
  const double h = t * 1e-6;
  const double fp = (t + h) * phi(t + h);
  const double fm = (t - h) * phi(t - h);
  return (fp - fm) / (2.0 * h * phi(t));
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / (n - 1));
  return out;
}

}  // namespace

double ZetaBounds::zeta0(double t) const { return std::min(std::pow(t, ell), std::pow(t, em)); }
double ZetaBounds::zeta1(double t) const { return std::max(std::pow(t, ell), std::pow(t, em)); }
double ZetaBounds::zeta2(double t) const {
  return std::min(std::pow(t, ell_tilde()), std::pow(t, em_tilde()));
}
double ZetaBounds::zeta3(double t) const {
  return std::max(std::pow(t, ell_tilde()), std::pow(t, em_tilde()));
}

NFunction::NFunction(NFunctionSpec spec) : spec_(std::move(spec)) {
  if (!spec_.phi) throw std::invalid_argument("NFunction: phi is empty");
  if (!(spec_.ell > 1.0))
    throw HypothesisViolation("NFunction: lower index must satisfy ell > 1");
  if (!(spec_.ell <= spec_.em))
    throw HypothesisViolation("NFunction: indices must satisfy ell <= em");
  if (!(spec_.em < spec_.dimN))
    throw HypothesisViolation("NFunction: upper index must satisfy em < dimN");
  if (spec_.dimN < 2) throw std::invalid_argument("NFunction: dimN must be >= 2");

  // Eager checkpoint grid: 8 points per decade over [1e-14, 1e16], cut short
  // if the integrand overflows.  Strict monotonicity of s*phi(s) is verified
  // at grid points and geometric midpoints as the grid is built.
  const double t_lo = 1e-14, t_hi = 1e16;
  const int per_decade = 8;
  const int n = static_cast<int>(per_decade * std::log10(t_hi / t_lo)) + 1;

  ckpt_t_.push_back(t_lo);
  ckpt_phi_.push_back(partial_integral(0.0, t_lo));
  double f_prev = integrand(t_lo);
  for (int i = 1; i < n; ++i) {
    const double t = t_lo * std::pow(10.0, static_cast<double>(i) / per_decade);
    const double f_mid = integrand(std::sqrt(ckpt_t_.back() * t));
    const double f_t = integrand(t);
    if (!(f_t > 0.0) || !std::isfinite(f_t) || f_t > kOverflowGuard) break;
    if (!(f_mid > f_prev) || !(f_t > f_mid)) {
      std::ostringstream os;
      os << "NFunction '" << spec_.name << "': t*phi(t) is not strictly increasing near t = "
         << t << "; the weight violates the monotonicity hypothesis";
      throw HypothesisViolation(os.str());
    }
    const double inc = partial_integral(ckpt_t_.back(), t);
    const double acc = ckpt_phi_.back() + inc;
    if (!std::isfinite(acc) || acc > kOverflowGuard) break;
    ckpt_t_.push_back(t);
    ckpt_phi_.push_back(acc);
    f_prev = f_t;
  }
  capped_ = ckpt_t_.size() < static_cast<std::size_t>(n);
}

double NFunction::integrand(double s) const {
  if (s <= 0.0) return 0.0;
  return s * spec_.phi(s);
}

double NFunction::partial_integral(double a, double b) const {
  if (b <= a) return 0.0;
  // Integrate on a normalized panel: adaptive error control in the
  // quadrature is relative to an O(1) integrand, so segments of tiny or
  // huge magnitude terminate as fast as O(1) ones.
  const double len = b - a;
  const double scale = std::max(integrand(a), integrand(b)) * len;
  if (!std::isfinite(scale)) return kInf;
  if (!(scale > 1e-300)) return 0.5 * (integrand(a) + integrand(b)) * len;
  const auto g = [&](double u) { return integrand(a + u * len) * (len / scale); };
  double err = 0.0;
  return scale * GK::integrate(g, 0.0, 1.0, 12, spec_.quad_tol, &err);
}

double NFunction::phi(double t) const { return spec_.phi(t); }

double NFunction::phi_prime(double t) const {
  if (spec_.dphi) return spec_.dphi(t);
  const double h = std::max(t, 1e-30) * 1e-6;
  return (spec_.phi(t + h) - spec_.phi(t - h)) / (2.0 * h);
}

double NFunction::Phi(double t) const {
  t = std::abs(t);
  if (t == 0.0) return 0.0;
  if (t <= ckpt_t_.front()) return partial_integral(0.0, t);
  if (t > ckpt_t_.back()) {
    if (capped_) return kInf;  // grid ended at the overflow guard
    const double tail = partial_integral(ckpt_t_.back(), t);
    const double v = ckpt_phi_.back() + tail;
    return std::isfinite(v) ? v : kInf;
  }
  const auto it = std::upper_bound(ckpt_t_.begin(), ckpt_t_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - ckpt_t_.begin()) - 1;
  return ckpt_phi_[j] + partial_integral(ckpt_t_[j], t);
}

double NFunction::Phi_inverse(double s) const {
  if (s < 0.0) throw std::domain_error("Phi_inverse: negative argument");
  if (s == 0.0) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (Phi(hi) < s) {
    hi *= 4.0;
    if (++guard > 600) throw std::range_error("Phi_inverse: bracket overflow");
  }
  double lo = hi > 1.0 ? hi / 4.0 : 0.0;
  for (int i = 0; i < 200 && (hi - lo) > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (Phi(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double NFunction::conjugate_argmax(double t) const {
  t = std::abs(t);
  if (t == 0.0) return 0.0;
  // Solve s*phi(s) = t; monotone by the growth hypotheses.
  double hi = 1.0;
  int guard = 0;
  while (integrand(hi) < t) {
    hi *= 2.0;
    if (hi > kOverflowGuard || ++guard > 1200)
      throw std::range_error("conjugate: bracket exceeds overflow guard (unbounded conjugate)");
  }
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (integrand(mid) < t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double NFunction::conjugate(double t) const {
  t = std::abs(t);
  if (t == 0.0) return 0.0;
  const double s = conjugate_argmax(t);
  return std::max(0.0, t * s - Phi(s));
}

double NFunction::sobolev_conjugate_inverse(double t) const {
  if (t < 0.0) throw std::domain_error("sobolev_conjugate_inverse: negative argument");
  if (t == 0.0) return 0.0;
  const double N = spec_.dimN;
  const double expo = (N + 1.0) / N;

  // Head [0, s0]: the integrand Phi^{-1}(s) s^{-(N+1)/N} has an integrable
  // power singularity at 0.  Fit the local exponent of Phi^{-1} and
  // integrate the monomial in closed form; the fit is exact for monomial
  // weights and the head is vanishingly small otherwise.
  const double s0 = std::min(t, 1e-10);
  const double v0 = Phi_inverse(s0);
  const double v1 = Phi_inverse(s0 / 16.0);
  const double sigma = std::log(v0 / v1) / std::log(16.0);  // ~ 1/m near 0
  if (!(sigma > 1.0 / N + 1e-12))
    throw HypothesisViolation(
        "sobolev_conjugate_inverse: integrand is not integrable at 0 (requires em < dimN)");
  double head = v0 * std::pow(s0, -1.0 / N) / (sigma - 1.0 / N);

  // Tail [s0, t] split per decade, each panel normalized to O(1).
  double tail = 0.0;
  const auto f = [&](double s) { return Phi_inverse(s) * std::pow(s, -expo); };
  double a = s0;
  while (a < t) {
    const double b = std::min(t, a * 10.0);
    const double len = b - a;
    const double scale = std::max(f(a), f(b)) * len;
    if (scale > 1e-300) {
      const auto g = [&](double u) { return f(a + u * len) * (len / scale); };
      double err = 0.0;
      tail += scale * GK::integrate(g, 0.0, 1.0, 8, 1e-10, &err);
    }
    a = b;
  }
  return head + tail;
}

double NFunction::sobolev_conjugate(double t) const {
  if (t < 0.0) throw std::domain_error("sobolev_conjugate: negative argument");
  if (t == 0.0) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (sobolev_conjugate_inverse(hi) < t) {
    hi *= 4.0;
    if (++guard > 400) throw std::range_error("sobolev_conjugate: bracket overflow");
  }
  double lo = hi > 1.0 ? hi / 4.0 : 0.0;
  for (int i = 0; i < 120 && (hi - lo) > 1e-11 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (sobolev_conjugate_inverse(mid) < t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double NFunction::ell_star() const {
  const double N = spec_.dimN;
  if (!(spec_.ell < N)) throw std::domain_error("ell_star: requires ell < dimN");
  return N * spec_.ell / (N - spec_.ell);
}

HypothesisCheck NFunction::check_hypotheses() const {
  HypothesisCheck out;
  const int n_probes = 200;
  const auto probes = log_spaced(1e-6, 1e6, n_probes);
  const auto f = [this](double t) { return t * spec_.phi(t); };

  // Limits at 0 and infinity: per-decade decay/growth of t*phi(t) at the
  // grid ends.  A genuine limit 0 (resp. inf) under the index band decays
  // (grows) at least like t^{ell-1} per decade.
  {
    const double r = f(1e-6) / f(1e-5);
    out.limit_zero.pass = std::isfinite(r) && r < 0.9;
    out.limit_zero.worst_value = r;
    out.limit_zero.worst_t = 1e-6;
    out.limit_zero.detail = "per-decade ratio of t*phi(t) at the small end";
  }
  {
    const double r = f(1e6) / f(1e5);
    out.limit_infty.pass = (r > 1.0 / 0.9) || !std::isfinite(r);
    out.limit_infty.worst_value = r;
    out.limit_infty.worst_t = 1e6;
    out.limit_infty.detail = "per-decade ratio of t*phi(t) at the large end";
  }

  // Strict monotonicity across probes; overflowed probes carry no evidence
  // either way and are skipped.
  out.monotone.pass = true;
  out.monotone.worst_value = kInf;
  double prev = f(probes[0]);
  for (int i = 1; i < n_probes; ++i) {
    const double cur = f(probes[i]);
    if (std::isfinite(prev) && std::isfinite(cur)) {
      const double margin = cur - prev;
      if (!(margin > 0.0)) {
        out.monotone.pass = false;
        if (margin < out.monotone.worst_value) {
          out.monotone.worst_value = margin;
          out.monotone.worst_t = probes[i];
        }
      }
    }
    prev = cur;
  }
  if (out.monotone.pass) out.monotone.worst_value = 0.0;
  out.monotone.detail = "t*phi(t) increments across the probe grid";

  // Index band ell-1 <= (t phi)'/phi <= m-1 at every probe.
  {
    const double slack = 1e-6 * (1.0 + std::abs(spec_.em - 1.0));
    out.index_band.pass = true;
    double worst_dev = 0.0;
    for (double t : probes) {
      const double r = central_ratio(spec_.phi, t);
      const double dev = std::max(spec_.ell - 1.0 - r, r - (spec_.em - 1.0));
      if (!std::isfinite(r) || dev > slack) out.index_band.pass = false;
      if (!std::isfinite(r) || dev > worst_dev) {
        worst_dev = std::isfinite(r) ? dev : kInf;
        out.index_band.worst_value = r;
        out.index_band.worst_t = t;
        if (!std::isfinite(r)) break;
      }
    }
    out.index_band.detail = "(t phi)'/phi against [ell-1, em-1]";
  }

  // Derived ratio band ell <= phi t^2 / Phi <= em.
  {
    const double slack = 1e-6 * (1.0 + spec_.em);
    out.ratio_band.pass = true;
    double worst_dev = -kInf;
    for (double t : probes) {
      const double P = Phi(t);
      const double r = std::isfinite(P) && P > 0.0 ? spec_.phi(t) * t * t / P : kInf;
      const double dev = std::max(spec_.ell - r, r - spec_.em);
      if (!std::isfinite(r) || dev > slack) out.ratio_band.pass = false;
      if (dev > worst_dev) {
        worst_dev = dev;
        out.ratio_band.worst_value = r;
        out.ratio_band.worst_t = t;
      }
    }
    out.ratio_band.detail = "phi(t) t^2 / Phi(t) against [ell, em]";
  }
  return out;
}

double luxemburg_norm(std::span<const double> values, std::span<const double> weights,
                      const std::function<double(double)>& Phi) {
  if (values.size() != weights.size())
    throw std::invalid_argument("luxemburg_norm: values/weights size mismatch");
  double vmax = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("luxemburg_norm: negative weight");
    if (weights[i] > 0.0) vmax = std::max(vmax, std::abs(values[i]));
  }
  if (vmax == 0.0) return 0.0;

  const auto modular = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (weights[i] == 0.0 || values[i] == 0.0) continue;
      s += weights[i] * Phi(std::abs(values[i]) / lam);
      if (!std::isfinite(s)) return kInf;
    }
    return s;
  };

  double hi = vmax;
  int guard = 0;
  while (modular(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 4000) throw std::range_error("luxemburg_norm: no finite bracket");
  }
  double lo = hi / 2.0;
  while (modular(lo) < 1.0) {
    hi = lo;
    lo /= 2.0;
    if (lo < 1e-300) return 0.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 400; ++i) {
    mid = 0.5 * (lo + hi);
    const double m = modular(mid);
    if (std::abs(m - 1.0) <= 1e-10) return mid;
    (m > 1.0 ? lo : hi) = mid;
    if ((hi - lo) <= 1e-16 * hi) break;
  }
  return mid;
}

ZetaSandwichReport zeta_sandwich_check(const NFunction& nf,
                                       std::span<const std::pair<double, double>> samples,
                                       double slack) {
  ZetaSandwichReport rep;
  rep.n_samples = static_cast<int>(samples.size());
  const ZetaBounds z = nf.zeta_bounds();
  const auto record = [&](double rho, double t, const char* which, double excess) {
    rep.worst_excess = std::max(rep.worst_excess, excess);
    if (excess > slack) rep.violations.push_back({rho, t, which, excess});
  };
  for (const auto& [rho, t] : samples) {
    if (!(rho > 0.0) || !(t > 0.0))
      throw std::invalid_argument("zeta_sandwich_check: samples must be positive");
    const double P_rho = nf.Phi(rho), P_rt = nf.Phi(rho * t);
    record(rho, t, "zeta0*Phi(rho) <= Phi(rho t)", (z.zeta0(t) * P_rho - P_rt) / P_rt);
    record(rho, t, "Phi(rho t) <= zeta1*Phi(rho)",
           (P_rt - z.zeta1(t) * P_rho) / (z.zeta1(t) * P_rho));
    const double C_rho = nf.conjugate(rho), C_rt = nf.conjugate(rho * t);
    record(rho, t, "zeta2*Phi~(rho) <= Phi~(rho t)", (z.zeta2(t) * C_rho - C_rt) / C_rt);
    record(rho, t, "Phi~(rho t) <= zeta3*Phi~(rho)",
           (C_rt - z.zeta3(t) * C_rho) / (z.zeta3(t) * C_rho));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

struct ParsedKey {
  std::string name;
  std::vector<double> args;
};

ParsedKey parse_key(const std::string& key) {
  const auto lp = key.find('(');
  if (lp == std::string::npos || key.back() != ')')
    throw std::invalid_argument("weight key must look like name(arg,...): " + key);
  ParsedKey out;
  out.name = key.substr(0, lp);
  std::string args = key.substr(lp + 1, key.size() - lp - 2);
  std::replace(args.begin(), args.end(), ',', ' ');
  std::istringstream is(args);
  double v;
  while (is >> v) out.args.push_back(v);
  if (out.args.empty()) throw std::invalid_argument("weight key has no arguments: " + key);
  return out;
}

std::shared_ptr<const NFunction> make_power_sum(std::vector<double> ps, int dimN,
                                                double quad_tol, std::string name) {
  std::sort(ps.begin(), ps.end());
  NFunctionSpec s;
  s.name = std::move(name);
  s.ell = ps.front();
  s.em = ps.back();
  s.dimN = dimN;
  s.quad_tol = quad_tol;
  s.phi = [ps](double t) {
    double v = 0.0;
    for (double p : ps) v += std::pow(t, p - 2.0);
    return v;
  };
  s.dphi = [ps](double t) {
    double v = 0.0;
    for (double p : ps) v += (p - 2.0) * std::pow(t, p - 3.0);
    return v;
  };
  return std::make_shared<NFunction>(std::move(s));
}

}  // namespace

std::vector<std::string> nfunction_catalog() {
  return {"p-laplace(p)", "pq-laplace(p,q)", "anisotropic(p1,...,pk)", "weighted(p,c)"};
}

std::shared_ptr<const NFunction> nfunction_from_key(const std::string& key, int dimN,
                                                    double quad_tol) {
  const ParsedKey k = parse_key(key);
  if (k.name == "p-laplace") {
    if (k.args.size() != 1) throw std::invalid_argument("p-laplace takes one argument");
    return make_power_sum({k.args[0]}, dimN, quad_tol, key);
  }
  if (k.name == "pq-laplace") {
    if (k.args.size() != 2 || !(k.args[0] < k.args[1]))
      throw std::invalid_argument("pq-laplace takes p < q");
    return make_power_sum({k.args[0], k.args[1]}, dimN, quad_tol, key);
  }
  if (k.name == "anisotropic") {
    return make_power_sum(k.args, dimN, quad_tol, key);
  }
  if (k.name == "weighted") {
    if (k.args.size() != 2) throw std::invalid_argument("weighted takes (p, c)");
    const double p = k.args[0], c = k.args[1];
    if (!(c > 0.0)) throw std::invalid_argument("weighted: c must be > 0");
    const auto a = [c](double s) { return c + s / (1.0 + s); };
    const auto da = [](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); };
    NFunctionSpec s;
    s.name = key;
    s.dimN = dimN;
    s.quad_tol = quad_tol;
    s.phi = [a, p](double t) { return a(std::pow(t, p)) * std::pow(t, p - 2.0); };
    s.dphi = [a, da, p](double t) {
      const double tp = std::pow(t, p);
      return da(tp) * p * std::pow(t, p - 1.0) * std::pow(t, p - 2.0) +
             a(tp) * (p - 2.0) * std::pow(t, p - 3.0);
    };
    // (t phi)'/phi = (p-1) + p * s a'(s)/a(s) with s = t^p >= p-1; measure
    // the supremum of the drift term for the upper index.
    double drift = 0.0;
    for (double t : log_spaced(1e-8, 1e8, 400)) {
      const double tp = std::pow(t, p);
      drift = std::max(drift, tp * da(tp) / a(tp));
    }
    s.ell = p;
    s.em = p * (1.0 + drift) + 1e-9;
    return std::make_shared<NFunction>(std::move(s));
  }
  std::ostringstream os;
  os << "unknown weight key '" << key << "'; catalog:";
  for (const auto& c : nfunction_catalog()) os << ' ' << c;
  throw std::invalid_argument(os.str());
}

// ---------------------------------------------------------------------------
// Tabulated weights: monotone cubic (Fritsch-Carlson) interpolation of
// log(t*phi(t)) against log t, with power-law extrapolation at the ends.

namespace {

struct Pchip {
  std::vector<double> x, y, d;  // nodes, values, slopes

  static Pchip fit(std::vector<double> xs, std::vector<double> ys) {
    const std::size_t n = xs.size();
    Pchip p;
    p.x = std::move(xs);
    p.y = std::move(ys);
    p.d.assign(n, 0.0);
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = p.x[i + 1] - p.x[i];
      s[i] = (p.y[i + 1] - p.y[i]) / h[i];
    }
    p.d[0] = s[0];
    p.d[n - 1] = s[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (s[i - 1] * s[i] <= 0.0) {
        p.d[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
        p.d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
      }
    }
    return p;
  }

  double eval(double t) const {
    if (t <= x.front()) return y.front() + d.front() * (t - x.front());
    if (t >= x.back()) return y.back() + d.back() * (t - x.back());
    auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double h = x[i + 1] - x[i], u = (t - x[i]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * y[i] + h10 * h * this->d[i] + h01 * y[i + 1] + h11 * h * this->d[i + 1];
  }
};

}  // namespace

std::shared_ptr<const NFunction> nfunction_from_table(const std::vector<double>& t,
                                                      const std::vector<double>& phi_vals,
                                                      int dimN, double ell, double em,
                                                      double quad_tol) {
  if (t.size() != phi_vals.size() || t.size() < 4)
    throw std::invalid_argument("nfunction_from_table: need >= 4 (t, phi) rows");
  std::vector<double> lx(t.size()), ly(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(phi_vals[i] > 0.0))
      throw std::invalid_argument("nfunction_from_table: t and phi must be positive");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw std::invalid_argument("nfunction_from_table: t must be strictly increasing");
    lx[i] = std::log(t[i]);
    ly[i] = std::log(t[i] * phi_vals[i]);
  }
  auto spline = std::make_shared<Pchip>(Pchip::fit(std::move(lx), std::move(ly)));
  NFunctionSpec s;
  s.name = "tabulated";
  s.dimN = dimN;
  s.quad_tol = quad_tol;
  s.phi = [spline](double x) { return std::exp(spline->eval(std::log(x))) / x; };
  if (ell > 0.0 && em > 0.0) {
    s.ell = ell;
    s.em = em;
  } else {
    // Measure the index band on the table's range, with a small margin.
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double x : log_spaced(t.front() * 1.001, t.back() * 0.999, 300)) {
      const double r = central_ratio(s.phi, x);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    s.ell = std::max(1.0 + 1e-6, lo + 1.0 - 1e-3);
    s.em = hi + 1.0 + 1e-3;
  }
  return std::make_shared<NFunction>(std::move(s));
}

}  // namespace phifem
