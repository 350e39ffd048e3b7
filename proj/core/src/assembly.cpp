#include "phifem/assembly.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace phifem {

namespace {

// (u+)^g with the convention 0^0 = 0 on the closed negative half-line.
double pow_plus(double u, double g) {
  if (u <= 0.0) return 0.0;
  if (g == 0.0) return 1.0;
  return std::pow(u, g);
}

struct BasisGradients {
  double g[3][2];  // per local vertex
};

BasisGradients basis_gradients(const Mesh& mesh, int cell) {
  BasisGradients bg{};
  const auto& c = mesh.cells[cell];
  const auto& vs = mesh.vertices;
  if (mesh.dim == 1) {
    const double h = vs[c[1]].x - vs[c[0]].x;
    bg.g[0][0] = -1.0 / h;
    bg.g[1][0] = 1.0 / h;
    return bg;
  }
  const double ax = vs[c[1]].x - vs[c[0]].x, ay = vs[c[1]].y - vs[c[0]].y;
  const double bx = vs[c[2]].x - vs[c[0]].x, by = vs[c[2]].y - vs[c[0]].y;
  const double det = ax * by - ay * bx;
  bg.g[1][0] = by / det;
  bg.g[1][1] = -bx / det;
  bg.g[2][0] = -ay / det;
  bg.g[2][1] = ax / det;
  bg.g[0][0] = -bg.g[1][0] - bg.g[2][0];
  bg.g[0][1] = -bg.g[1][1] - bg.g[2][1];
  return bg;
}

[[noreturn]] void bad_coefficient(const char* name, int cell, const Point& p) {
  std::ostringstream os;
  os << "assembly: coefficient " << name << " is not finite at quadrature point (" << p.x << ", "
     << p.y << ") of cell " << cell;
  throw AssemblyError(os.str());
}

}  // namespace

Eigen::VectorXd assemble_residual(const RegularizedProblem& rp, const DiscreteField& u,
                                  const AssemblyOptions& opt) {
  const Mesh& mesh = u.mesh();
  const SingularProblem& p = rp.parent;
  const NFunction& nf = *p.nfun;
  Eigen::VectorXd R = Eigen::VectorXd::Zero(mesh.n_free());
  std::vector<QuadPoint> quad;
  const int k = mesh.cell_size();

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& c = mesh.cells[cell];
    const BasisGradients bg = basis_gradients(mesh, cell);
    const double meas = mesh.cell_measure(cell);

    // Flux term: P1 gradients are constant per cell, so the midpoint value
    // is exact.  |g| is smoothed by kappa inside assembly only.
    double g[2];
    u.cell_gradient(cell, g);
    const double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + opt.kappa * opt.kappa);
    const double fv = nf.phi(gn);
    for (int i = 0; i < k; ++i) {
      const int fi = mesh.free_index[c[i]];
      if (fi < 0) continue;
      R[fi] += fv * (g[0] * bg.g[i][0] + g[1] * bg.g[i][1]) * meas;
    }

    // Reaction terms by the degree-4 rule; the right-hand side uses
    // (|u| + eps)^{-alpha} and (u+)^gamma so negative iterates stay defined.
    cell_quadrature(mesh, cell, quad);
    for (const QuadPoint& q : quad) {
      const double aq = rp.a_eps(q.x);
      if (!std::isfinite(aq)) bad_coefficient("a_eps", cell, q.x);
      const double bq = rp.b_eps(q.x);
      if (!std::isfinite(bq)) bad_coefficient("b_eps", cell, q.x);
      const double uq = u.at(cell, q);
      const double reaction =
          aq / std::pow(std::abs(uq) + rp.eps, p.alpha) + bq * pow_plus(uq, p.gamma);
      for (int i = 0; i < k; ++i) {
        const int fi = mesh.free_index[c[i]];
        if (fi < 0) continue;
        R[fi] -= q.w * reaction * q.lambda[i];
      }
    }
  }
  return R;
}

Eigen::SparseMatrix<double> assemble_jacobian(const RegularizedProblem& rp,
                                              const DiscreteField& u,
                                              const AssemblyOptions& opt) {
  const Mesh& mesh = u.mesh();
  const SingularProblem& p = rp.parent;
  const NFunction& nf = *p.nfun;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * 9);
  std::vector<QuadPoint> quad;
  const int k = mesh.cell_size();

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& c = mesh.cells[cell];
    const BasisGradients bg = basis_gradients(mesh, cell);
    const double meas = mesh.cell_measure(cell);

    // d/dg [phi(|g|) g] = phi(|g|) I + (phi'(|g|)/|g|) g (x) g, with the
    // same smoothed |g| as the residual.
    double g[2];
    u.cell_gradient(cell, g);
    const double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + opt.kappa * opt.kappa);
    const double fv = nf.phi(gn);
    const double fp = nf.phi_prime(gn) / gn;
    double D[2][2] = {{fv + fp * g[0] * g[0], fp * g[0] * g[1]},
                      {fp * g[1] * g[0], fv + fp * g[1] * g[1]}};
    for (int i = 0; i < k; ++i) {
      const int fi = mesh.free_index[c[i]];
      if (fi < 0) continue;
      for (int j = 0; j < k; ++j) {
        const int fj = mesh.free_index[c[j]];
        if (fj < 0) continue;
        double v = 0.0;
        for (int r = 0; r < 2; ++r)
          for (int s = 0; s < 2; ++s) v += bg.g[i][r] * D[r][s] * bg.g[j][s];
        trip.emplace_back(fi, fj, v * meas);
      }
    }

    cell_quadrature(mesh, cell, quad);
    for (const QuadPoint& q : quad) {
      const double aq = rp.a_eps(q.x);
      const double bq = rp.b_eps(q.x);
      const double uq = u.at(cell, q);
      // Singular term is decreasing in u: positive diagonal contribution.
      const double sgn = uq >= 0.0 ? 1.0 : -1.0;
      double dr = p.alpha * aq * std::pow(std::abs(uq) + rp.eps, -p.alpha - 1.0) * sgn;
      if (p.gamma > 0.0 && uq > 0.0) dr -= p.gamma * bq * std::pow(uq, p.gamma - 1.0);
      for (int i = 0; i < k; ++i) {
        const int fi = mesh.free_index[c[i]];
        if (fi < 0) continue;
        for (int j = 0; j < k; ++j) {
          const int fj = mesh.free_index[c[j]];
          if (fj < 0) continue;
          trip.emplace_back(fi, fj, q.w * dr * q.lambda[i] * q.lambda[j]);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> J(mesh.n_free(), mesh.n_free());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double sobolev_seminorm_ell(const DiscreteField& u, double ell,
                            const std::function<bool(const Point&)>& where) {
  if (!(ell >= 1.0)) throw std::invalid_argument("sobolev_seminorm_ell: need ell >= 1");
  const Mesh& mesh = u.mesh();
  double s = 0.0;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    if (where && !where(mesh.cell_centroid(cell))) continue;
    double g[2];
    u.cell_gradient(cell, g);
    const double gn = std::hypot(g[0], g[1]);
    if (gn > 0.0) s += std::pow(gn, ell) * mesh.cell_measure(cell);
  }
  return std::pow(s, 1.0 / ell);
}

double luxemburg_gradient_norm(const DiscreteField& u, const NFunction& nf) {
  const Mesh& mesh = u.mesh();
  std::vector<double> vals(mesh.n_cells()), wts(mesh.n_cells());
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    double g[2];
    u.cell_gradient(cell, g);
    vals[cell] = std::hypot(g[0], g[1]);
    wts[cell] = mesh.cell_measure(cell);
  }
  return luxemburg_norm(vals, wts, [&nf](double t) { return nf.Phi(t); });
}

double integrate(const Mesh& mesh, const ScalarField& f) {
  double s = 0.0;
  std::vector<QuadPoint> quad;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    cell_quadrature(mesh, cell, quad);
    for (const QuadPoint& q : quad) s += q.w * f(q.x);
  }
  return s;
}

double lp_norm(const Mesh& mesh, const ScalarField& f, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm: need p > 0");
  const double s =
      integrate(mesh, [&](const Point& x) { return std::pow(std::abs(f(x)), p); });
  return std::pow(s, 1.0 / p);
}

double log_lp_norm(const DiscreteField& u, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("log_lp_norm: need beta > 0");
  const Mesh& mesh = u.mesh();
  std::vector<QuadPoint> quad;
  // log-sum-exp of (log w + beta log |u|) over quadrature points.
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    cell_quadrature(mesh, cell, quad);
    for (const QuadPoint& q : quad) {
      const double uq = std::abs(u.at(cell, q));
      if (uq == 0.0 || q.w == 0.0) continue;
      const double t = std::log(q.w) + beta * std::log(uq);
      terms.push_back(t);
      peak = std::max(peak, t);
    }
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (double t : terms) s += std::exp(t - peak);
  return (peak + std::log(s)) / beta;
}

// ---------------------------------------------------------------------------
// Boundary-layered quadrature

namespace {

void push_segment_quad(LayeredQuadrature& lq, double a, double b, int layer) {
  static const double xi[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double wt[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (int k = 0; k < 3; ++k) {
    const double u = 0.5 * (xi[k] + 1.0);
    QuadPoint q;
    q.x = {a + u * (b - a), 0.0};
    q.w = 0.5 * wt[k] * (b - a);
    lq.points.push_back(q);
    lq.layer.push_back(layer);
  }
}

void push_triangle_quad(LayeredQuadrature& lq, const Point& p0, const Point& p1, const Point& p2,
                        int layer) {
  static const double a1 = 0.445948490915965, w1 = 0.223381589678011;
  static const double a2 = 0.091576213509771, w2 = 0.109951743655322;
  static const double L[6][3] = {
      {1 - 2 * a1, a1, a1}, {a1, 1 - 2 * a1, a1}, {a1, a1, 1 - 2 * a1},
      {1 - 2 * a2, a2, a2}, {a2, 1 - 2 * a2, a2}, {a2, a2, 1 - 2 * a2},
  };
  static const double W[6] = {w1, w1, w1, w2, w2, w2};
  const double meas =
      0.5 * std::abs((p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x));
  for (int k = 0; k < 6; ++k) {
    QuadPoint q;
    q.x = {L[k][0] * p0.x + L[k][1] * p1.x + L[k][2] * p2.x,
           L[k][0] * p0.y + L[k][1] * p1.y + L[k][2] * p2.y};
    q.w = W[k] * meas;
    lq.points.push_back(q);
    lq.layer.push_back(layer);
  }
}

Point lerp(const Point& a, const Point& b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

}  // namespace

LayeredQuadrature boundary_layered_quadrature(const Mesh& mesh, int n_layers, double ratio) {
  if (n_layers < 1 || !(ratio > 0.0) || !(ratio < 1.0))
    throw std::invalid_argument("boundary_layered_quadrature: bad layering parameters");
  LayeredQuadrature lq;
  lq.n_layers = n_layers;
  std::vector<QuadPoint> quad;

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& c = mesh.cells[cell];
    int n_bnd = 0;
    for (int i = 0; i < mesh.cell_size(); ++i) n_bnd += mesh.on_boundary[c[i]] ? 1 : 0;
    if (n_bnd == 0) {
      cell_quadrature(mesh, cell, quad);
      for (const QuadPoint& q : quad) {
        lq.points.push_back(q);
        lq.layer.push_back(0);
      }
      continue;
    }

    if (mesh.dim == 1) {
      const double xa = mesh.vertices[c[0]].x, xb = mesh.vertices[c[1]].x;
      const bool ba = mesh.on_boundary[c[0]], bb = mesh.on_boundary[c[1]];
      // Grade each boundary-adjacent half geometrically toward its endpoint.
      const double xm = 0.5 * (xa + xb);
      const auto grade = [&](double bnd, double inner) {
        double t_out = 1.0;
        for (int k = 0; k < n_layers; ++k) {
          const double t_in = t_out * ratio;
          push_segment_quad(lq, bnd + t_in * (inner - bnd), bnd + t_out * (inner - bnd), k);
          t_out = t_in;
        }
        push_segment_quad(lq, bnd, bnd + t_out * (inner - bnd), n_layers);
      };
      if (ba && bb) {
        grade(xa, xm);
        grade(xb, xm);
      } else if (ba) {
        grade(xa, xb);
      } else {
        grade(xb, xa);
      }
      continue;
    }

    // 2D: grade toward the boundary vertex (one of them) or the boundary
    // edge (two or more).
    int bv[3], nb = 0, iv[3], ni = 0;
    for (int i = 0; i < 3; ++i) (mesh.on_boundary[c[i]] ? bv[nb++] : iv[ni++]) = c[i];
    if (nb == 1) {
      const Point& v = mesh.vertices[bv[0]];
      const Point& p = mesh.vertices[iv[0]];
      const Point& r = mesh.vertices[iv[1]];
      double s_out = 1.0;
      for (int k = 0; k < n_layers; ++k) {
        const double s_in = s_out * ratio;
        const Point a_out = lerp(v, p, s_out), b_out = lerp(v, r, s_out);
        const Point a_in = lerp(v, p, s_in), b_in = lerp(v, r, s_in);
        push_triangle_quad(lq, a_in, a_out, b_out, k);
        push_triangle_quad(lq, a_in, b_out, b_in, k);
        s_out = s_in;
      }
      push_triangle_quad(lq, v, lerp(v, p, s_out), lerp(v, r, s_out), n_layers);
    } else {
      // Edge (b1, b2) on or nearest the boundary, apex the remaining vertex.
      const Point& b1 = mesh.vertices[bv[0]];
      const Point& b2 = mesh.vertices[bv[1]];
      const Point apex = nb == 3 ? mesh.vertices[bv[2]] : mesh.vertices[iv[0]];
      double t_out = 1.0;  // barycentric coordinate of the apex
      for (int k = 0; k < n_layers; ++k) {
        const double t_in = t_out * ratio;
        const Point a_out = lerp(b1, apex, t_out), b_out = lerp(b2, apex, t_out);
        const Point a_in = lerp(b1, apex, t_in), b_in = lerp(b2, apex, t_in);
        if (k == 0) {
          push_triangle_quad(lq, a_in, apex, b_in, k);
        } else {
          push_triangle_quad(lq, a_in, a_out, b_out, k);
          push_triangle_quad(lq, a_in, b_out, b_in, k);
        }
        t_out = t_in;
      }
      push_triangle_quad(lq, b1, lerp(b1, apex, t_out), lerp(b2, apex, t_out), n_layers);
      push_triangle_quad(lq, b1, lerp(b2, apex, t_out), b2, n_layers);
    }
  }
  return lq;
}

LayeredIntegral layered_integral(const LayeredQuadrature& lq, const ScalarField& f) {
  LayeredIntegral out;
  double total_abs = 0.0, last_abs = 0.0;
  for (std::size_t i = 0; i < lq.points.size(); ++i) {
    const double term = lq.points[i].w * f(lq.points[i].x);
    out.value += term;
    total_abs += std::abs(term);
    if (lq.layer[i] == lq.n_layers) last_abs += std::abs(term);
  }
  out.last_layer_share = total_abs > 0.0 ? last_abs / total_abs : 0.0;
  out.suspected_divergent = out.last_layer_share > 0.10;
  return out;
}

}  // namespace phifem
