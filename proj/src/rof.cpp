#include "tvlevel/rof.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace tvlevel {

namespace {

// Moreau envelope of |.| with parameter eps (the Huber function).
double huber_of_abs(double t, double eps) {
  const double a = std::abs(t);
  return a <= eps ? t * t / (2 * eps) : a - eps / 2;
}

// Precomputed eigendecomposition of an SPD matrix for repeated ellipse
// projections with the same anisotropy.
struct EllipseProj {
  double c = 1.0, s = 0.0;  // rotation
  double l1 = 1.0, l2 = 1.0;

  explicit EllipseProj(const Mat2& m) {
    const double theta = 0.5 * std::atan2(2 * m.a12, m.a11 - m.a22);
    c = std::cos(theta);
    s = std::sin(theta);
    l1 = c * c * m.a11 + 2 * c * s * m.a12 + s * s * m.a22;
    l2 = s * s * m.a11 - 2 * c * s * m.a12 + c * c * m.a22;
  }

  // argmin_z |z - y|^2/2 + (damp/2) z^T M^{-1} z   s.t. z^T M^{-1} z <= r^2.
  Vec2 apply(Vec2 y, double radius, double damp = 0.0) const {
    const double y1 = c * y.x + s * y.y;
    const double y2 = -s * y.x + c * y.y;
    const double r2 = radius * radius;
    auto zpair = [&](double mu) {
      return std::pair<double, double>{y1 * l1 / (l1 + mu), y2 * l2 / (l2 + mu)};
    };
    auto h = [&](double mu) {
      auto [z1, z2] = zpair(mu);
      return z1 * z1 / l1 + z2 * z2 / l2 - r2;
    };
    if (h(damp) <= 0.0) {
      auto [z1, z2] = zpair(damp);
      return {c * z1 - s * z2, s * z1 + c * z2};
    }
    // h is convex decreasing in mu; Newton from the left converges
    // monotonically and quadratically.
    double mu = damp;
    for (int it = 0; it < 80; it++) {
      const double hm = h(mu);
      if (hm <= 1e-15 * r2) break;
      const double dh = -2 * (y1 * y1 * l1 / std::pow(l1 + mu, 3) + y2 * y2 * l2 / std::pow(l2 + mu, 3));
      mu -= hm / dh;
    }
    auto [z1, z2] = zpair(mu);
    return {c * z1 - s * z2, s * z1 + c * z2};
  }
};

Vec2 project_lq_ball(double q, Vec2 y, double radius) {
  // boundary parametrization z(t) = r (t^{1/q}, (1-t)^{1/q}) in the first
  // quadrant; squared distance is unimodal along the boundary
  const double a = std::abs(y.x), b = std::abs(y.y);
  auto zq = [&](double t) -> Vec2 {
    return {radius * std::pow(t, 1.0 / q), radius * std::pow(1.0 - t, 1.0 / q)};
  };
  auto dist2 = [&](double t) {
    const Vec2 z = zq(t);
    return (z.x - a) * (z.x - a) + (z.y - b) * (z.y - b);
  };
  double lo = 0.0, hi = 1.0;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double m1 = hi - ratio * (hi - lo), m2 = lo + ratio * (hi - lo);
  double f1 = dist2(m1), f2 = dist2(m2);
  for (int it = 0; it < 160; it++) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - ratio * (hi - lo);
      f1 = dist2(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + ratio * (hi - lo);
      f2 = dist2(m2);
    }
  }
  const Vec2 z = zq((lo + hi) / 2);
  return {std::copysign(z.x, y.x), std::copysign(z.y, y.y)};
}

// argmin_p |p - y|^2/2 + (damp/2) phipolar(p)^2  s.t. phipolar(p) <= radius,
// for lp norms: projected gradient with a conservative fixed step.
Vec2 lp_damped_prox(const Anisotropy& a, Vec2 y, double radius, double damp) {
  const Anisotropy polar = a.polar();
  Vec2 p = project_polar_ball(a, y, radius);
  if (damp <= 0.0) return p;
  const double step = 1.0 / (1.0 + 4.0 * damp);
  for (int it = 0; it < 400; it++) {
    const double pv = polar.eval(p);
    Vec2 grad_quad{0.0, 0.0};
    if (pv > 0.0) {
      const Vec2 gp = polar.grad(p);
      grad_quad = (damp * pv) * gp;
    }
    const Vec2 cand{p.x - step * (p.x - y.x + grad_quad.x), p.y - step * (p.y - y.y + grad_quad.y)};
    p = project_polar_ball(a, cand, radius);
  }
  return p;
}

}  // namespace

Vec2 project_polar_ball(const Anisotropy& a, Vec2 y, double radius) {
  const Anisotropy polar = a.polar();
  if (polar.eval(y) <= radius) return y;
  switch (a.kind()) {
    case NormKind::Euclidean: {
      const double n = norm2(y);
      return (radius / n) * y;
    }
    case NormKind::WeightedL2:
      // polar ball of sqrt(x^T M x) is {p : p^T M^{-1} p <= r^2}
      return EllipseProj(a.matrix()).apply(y, radius);
    case NormKind::Lp:
      return project_lq_ball(polar.exponent(), y, radius);
    case NormKind::L1:
      // polar ball is the sup-norm box
      return {std::clamp(y.x, -radius, radius), std::clamp(y.y, -radius, radius)};
    case NormKind::Linf: {
      // polar ball is the l1 diamond
      const double ax = std::abs(y.x), ay = std::abs(y.y);
      double nx, ny;
      if (ax - ay > radius) {
        nx = radius;
        ny = 0.0;
      } else if (ay - ax > radius) {
        nx = 0.0;
        ny = radius;
      } else {
        const double t = (ax + ay - radius) / 2;
        nx = ax - t;
        ny = ay - t;
      }
      return {std::copysign(nx, y.x), std::copysign(ny, y.y)};
    }
  }
  return y;
}

void RofProblem::validate() const {
  g.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("rof: lambda must be positive");
  if (f == FKind::Huber && !(huber_eps > 0.0))
    throw std::invalid_argument("rof: huber smoothing needs eps > 0");
  if (reg == Regularizer::Pairwise)
    stencil.validate();
  else if (aniso.crystalline())
    throw std::invalid_argument("rof: crystalline norms are limited to the geometric solver");
  if (boundary == BoundaryMode::Dirichlet) {
    bool has = false;
    for (auto k : g.geom().mask) has |= (k == CellKind::Boundary);
    if (!has) throw std::invalid_argument("rof: dirichlet mode needs boundary cells");
  }
}

double energy(const RofProblem& p, const ScalarField& u) {
  if (!u.geom().same_geometry(p.g.geom()))
    throw std::invalid_argument("rof energy: geometry mismatch");
  const auto& g = p.g.geom();
  const double gamma = g.delta * g.delta / p.lambda;

  double reg = 0.0;
  if (p.reg == Regularizer::Pairwise) {
    for (int y = 0; y < g.height; y++)
      for (int x = 0; x < g.width; x++) {
        if (!g.inside(x, y)) continue;
        for (const auto& arm : p.stencil.arms) {
          const int X = x + arm.dx, Y = y + arm.dy;
          if (!g.inside(X, Y)) continue;
          const double d = u.at(X, Y) - u.at(x, y);
          reg += p.f == FKind::Identity ? arm.weight * std::abs(d)
                                        : arm.weight * huber_of_abs(d, p.huber_eps);
        }
      }
  } else {
    const VectorField q = forward_gradient(u);
    const double area = g.delta * g.delta;
    for (int i = 0; i < g.cells(); i++) {
      if (g.mask[i] == CellKind::Outside) continue;
      const double phi = p.aniso.eval({q.dx[i], q.dy[i]});
      reg += area * (p.f == FKind::Identity ? phi : huber_of_abs(phi, p.huber_eps));
    }
  }

  double fid = 0.0;
  for (int i = 0; i < g.cells(); i++) {
    const CellKind k = g.mask[i];
    if (k == CellKind::Outside) continue;
    if (p.boundary == BoundaryMode::Dirichlet && k == CellKind::Boundary) continue;
    const double d = u[i] - p.g[i];
    fid += gamma * d * d / 2;
  }
  return reg + fid;
}

namespace {

struct PairEdge {
  int a, b;
  double w;  // internally rescaled weight
};

}  // namespace

std::pair<ScalarField, SolverReport> solve(const RofProblem& prob, double tol, int max_iter) {
  prob.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("rof solve: tol must be positive");
  const auto t_start = std::chrono::steady_clock::now();

  const auto& g = prob.g.geom();
  const int n = g.cells();
  const bool pairwise = prob.reg == Regularizer::Pairwise;
  const double delta = g.delta;

  // The objective is minimized in rescaled units: multiplying by
  // rho = lambda/delta^2 makes the fidelity modulus exactly 1 and the
  // difference operator spacing-free, which keeps the accelerated schedule
  // effective on fine grids. Reported energies convert back.
  const double rho = prob.lambda / (delta * delta);

  std::vector<char> free_cell(n, 0);
  for (int i = 0; i < n; i++) {
    const CellKind k = g.mask[i];
    free_cell[i] =
        (k != CellKind::Outside &&
         !(prob.boundary == BoundaryMode::Dirichlet && k == CellKind::Boundary))
            ? 1
            : 0;
  }
  const auto [range_lo, range_hi] = prob.g.range();

  // ---- operator structure ----
  std::vector<PairEdge> edges;
  std::vector<char> has_e(n, 0), has_n(n, 0);
  if (pairwise) {
    for (int y = 0; y < g.height; y++)
      for (int x = 0; x < g.width; x++) {
        if (!g.inside(x, y)) continue;
        for (const auto& arm : prob.stencil.arms) {
          const int X = x + arm.dx, Y = y + arm.dy;
          if (!g.inside(X, Y)) continue;
          edges.push_back({g.idx(x, y), g.idx(X, Y), rho * arm.weight});
        }
      }
  } else {
    for (int y = 0; y < g.height; y++)
      for (int x = 0; x < g.width; x++) {
        if (!g.inside(x, y)) continue;
        has_e[g.idx(x, y)] = g.inside(x + 1, y) ? 1 : 0;
        has_n[g.idx(x, y)] = g.inside(x, y + 1) ? 1 : 0;
      }
  }
  // per-cell coefficient of phi(plain difference) and huber kink, rescaled
  const double cell_coef = prob.lambda / delta;
  const double eps_pair = prob.f == FKind::Huber ? prob.huber_eps : 0.0;
  const double eps_cell = prob.f == FKind::Huber ? prob.huber_eps * delta : 0.0;
  const double cell_damp_factor = eps_cell > 0 ? eps_cell / cell_coef : 0.0;

  const bool cell_euclid = !pairwise && prob.aniso.kind() == NormKind::Euclidean;
  const bool cell_wl2 = !pairwise && prob.aniso.kind() == NormKind::WeightedL2;
  const EllipseProj ellipse(cell_wl2 ? prob.aniso.matrix() : Mat2{});
  const Anisotropy polar = prob.aniso.polar();

  auto apply_K_pair = [&](const std::vector<double>& u, std::vector<double>& q, bool vanish) {
    for (size_t e = 0; e < edges.size(); e++) {
      const double ua = (vanish && !free_cell[edges[e].a]) ? 0.0 : u[edges[e].a];
      const double ub = (vanish && !free_cell[edges[e].b]) ? 0.0 : u[edges[e].b];
      q[e] = ub - ua;
    }
  };
  auto apply_Kt_pair = [&](const std::vector<double>& q, std::vector<double>& s) {
    std::fill(s.begin(), s.end(), 0.0);
    for (size_t e = 0; e < edges.size(); e++) {
      if (free_cell[edges[e].a]) s[edges[e].a] -= q[e];
      if (free_cell[edges[e].b]) s[edges[e].b] += q[e];
    }
  };
  auto apply_K_cell = [&](const std::vector<double>& u, std::vector<double>& qx,
                          std::vector<double>& qy, bool vanish) {
    for (int y = 0; y < g.height; y++)
      for (int x = 0; x < g.width; x++) {
        const int i = g.idx(x, y);
        if (g.mask[i] == CellKind::Outside) {
          qx[i] = qy[i] = 0.0;
          continue;
        }
        auto val = [&](int j) { return (vanish && !free_cell[j]) ? 0.0 : u[j]; };
        qx[i] = has_e[i] ? val(g.idx(x + 1, y)) - val(i) : 0.0;
        qy[i] = has_n[i] ? val(g.idx(x, y + 1)) - val(i) : 0.0;
      }
  };
  auto apply_Kt_cell = [&](const std::vector<double>& qx, const std::vector<double>& qy,
                           std::vector<double>& s) {
    std::fill(s.begin(), s.end(), 0.0);
    for (int y = 0; y < g.height; y++)
      for (int x = 0; x < g.width; x++) {
        const int i = g.idx(x, y);
        if (g.mask[i] == CellKind::Outside) continue;
        if (has_e[i]) {
          const int j = g.idx(x + 1, y);
          if (free_cell[i]) s[i] -= qx[i];
          if (free_cell[j]) s[j] += qx[i];
        }
        if (has_n[i]) {
          const int j = g.idx(x, y + 1);
          if (free_cell[i]) s[i] -= qy[i];
          if (free_cell[j]) s[j] += qy[i];
        }
      }
  };

  // ---- operator norm by 50 power-iteration steps on K^T K ----
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; i++)
    if (free_cell[i]) v[i] = double((i * 2654435761u) % 1000) / 1000.0 - 0.5;
  std::vector<double> qx(pairwise ? edges.size() : n, 0.0);
  std::vector<double> qy(pairwise ? size_t(0) : size_t(n), 0.0);
  std::vector<double> s(n, 0.0);
  double op_norm_sq = 1.0;
  for (int it = 0; it < 50; it++) {
    if (pairwise) {
      apply_K_pair(v, qx, true);
      apply_Kt_pair(qx, s);
    } else {
      apply_K_cell(v, qx, qy, true);
      apply_Kt_cell(qx, qy, s);
    }
    double nrm = 0.0;
    for (int i = 0; i < n; i++) nrm += s[i] * s[i];
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) break;  // K vanishes (no interior pairs)
    op_norm_sq = nrm;
    for (int i = 0; i < n; i++) v[i] = free_cell[i] ? s[i] / nrm : 0.0;
  }
  const double L = std::sqrt(op_norm_sq) * 1.02;  // small safety on the measured norm

  // ---- accelerated primal-dual loop (gamma = 1 after rescaling) ----
  double tau = 1.0 / L, sigma = 1.0 / L;
  std::vector<double> u(prob.g.values()), uprev(n, 0.0);
  for (int i = 0; i < n; i++)
    if (g.mask[i] == CellKind::Outside) u[i] = 0.0;
  std::vector<double> ubar(u);
  std::vector<double> p_pair(pairwise ? edges.size() : 0, 0.0);
  std::vector<double> p_x(pairwise ? 0 : n, 0.0), p_y(pairwise ? 0 : n, 0.0);

  SolverReport rep;
  ScalarField best_u;
  double best_primal = std::numeric_limits<double>::infinity();

  auto clipped_field = [&](const std::vector<double>& vals) {
    ScalarField out(g, vals);
    for (int i = 0; i < n; i++) {
      if (g.mask[i] == CellKind::Outside)
        out[i] = 0.0;
      else if (free_cell[i])
        out[i] = std::clamp(vals[i], range_lo, range_hi);
    }
    return out;
  };

  auto evaluate_gap = [&](int iter) {
    double fixed_dot = 0.0, quad = 0.0;
    if (pairwise) {
      for (size_t e = 0; e < edges.size(); e++) {
        const auto& ed = edges[e];
        if (!free_cell[ed.a]) fixed_dot -= p_pair[e] * u[ed.a];
        if (!free_cell[ed.b]) fixed_dot += p_pair[e] * u[ed.b];
        if (eps_pair > 0) quad += eps_pair * p_pair[e] * p_pair[e] / (2 * ed.w);
      }
      apply_Kt_pair(p_pair, s);
    } else {
      for (int y = 0; y < g.height; y++)
        for (int x = 0; x < g.width; x++) {
          const int i = g.idx(x, y);
          if (g.mask[i] == CellKind::Outside) continue;
          if (has_e[i]) {
            const int j = g.idx(x + 1, y);
            if (!free_cell[j]) fixed_dot += p_x[i] * u[j];
            if (!free_cell[i]) fixed_dot -= p_x[i] * u[i];
          }
          if (has_n[i]) {
            const int j = g.idx(x, y + 1);
            if (!free_cell[j]) fixed_dot += p_y[i] * u[j];
            if (!free_cell[i]) fixed_dot -= p_y[i] * u[i];
          }
          if (eps_cell > 0) {
            const double pv = polar.eval({p_x[i], p_y[i]});
            quad += cell_damp_factor * pv * pv / 2;
          }
        }
      apply_Kt_cell(p_x, p_y, s);
    }
    double dual_int = fixed_dot - quad;
    for (int i = 0; i < n; i++) {
      if (!free_cell[i]) continue;
      dual_int += s[i] * prob.g[i] - s[i] * s[i] / 2;
    }
    const double dual_phys = dual_int / rho;

    ScalarField cand1 = clipped_field(u);
    const double j1 = energy(prob, cand1);
    std::vector<double> uhat(u);
    for (int i = 0; i < n; i++)
      if (free_cell[i]) uhat[i] = prob.g[i] - s[i];
    ScalarField cand2 = clipped_field(uhat);
    const double j2 = energy(prob, cand2);

    const double primal = std::min(j1, j2);
    if (primal < best_primal) {
      best_primal = primal;
      best_u = j1 <= j2 ? std::move(cand1) : std::move(cand2);
    }
    rep.primal = best_primal;
    rep.dual = dual_phys;
    rep.gap_abs = best_primal - dual_phys;
    rep.gap_rel = rep.gap_abs / (1.0 + std::abs(best_primal));
    rep.iterations = iter;
    rep.gap_history.emplace_back(iter, rep.gap_rel);
    return rep.gap_rel <= tol;
  };

  const int check_every = 32;
  int iter;
  for (iter = 1; iter <= max_iter; iter++) {
    if (pairwise) {
      apply_K_pair(ubar, qx, false);
      for (size_t e = 0; e < edges.size(); e++) {
        const double w = edges[e].w;
        const double damp = eps_pair > 0 ? 1.0 + sigma * eps_pair / w : 1.0;
        p_pair[e] = std::clamp((p_pair[e] + sigma * qx[e]) / damp, -w, w);
      }
    } else {
      apply_K_cell(ubar, qx, qy, false);
      for (int i = 0; i < n; i++) {
        if (g.mask[i] == CellKind::Outside) continue;
        const Vec2 cand{p_x[i] + sigma * qx[i], p_y[i] + sigma * qy[i]};
        Vec2 proj;
        if (cell_euclid) {
          const double damp = 1.0 + sigma * cell_damp_factor;
          Vec2 d{cand.x / damp, cand.y / damp};
          const double nv = norm2(d);
          proj = nv <= cell_coef ? d : (cell_coef / nv) * d;
        } else if (cell_wl2) {
          proj = ellipse.apply(cand, cell_coef, sigma * cell_damp_factor);
        } else {
          proj = eps_cell > 0 ? lp_damped_prox(prob.aniso, cand, cell_coef, sigma * cell_damp_factor)
                              : project_polar_ball(prob.aniso, cand, cell_coef);
        }
        p_x[i] = proj.x;
        p_y[i] = proj.y;
      }
    }
    if (pairwise)
      apply_Kt_pair(p_pair, s);
    else
      apply_Kt_cell(p_x, p_y, s);
    uprev = u;
    for (int i = 0; i < n; i++) {
      if (!free_cell[i]) continue;
      u[i] = (u[i] - tau * s[i] + tau * prob.g[i]) / (1.0 + tau);
    }
    const double theta = 1.0 / std::sqrt(1.0 + 2.0 * tau);
    tau *= theta;
    sigma /= theta;
    for (int i = 0; i < n; i++)
      ubar[i] = free_cell[i] ? u[i] + theta * (u[i] - uprev[i]) : u[i];

    if (iter % check_every == 0 && evaluate_gap(iter)) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged && evaluate_gap(std::min(iter, max_iter))) rep.converged = true;
  rep.iterations = std::min(iter, max_iter);

  rep.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  if (best_u.cells() == 0) best_u = clipped_field(u);
  return {std::move(best_u), std::move(rep)};
}

std::string SolverReport::to_json_line(bool with_timing) const {
  nlohmann::ordered_json j;
  j["primal"] = primal;
  j["dual"] = dual;
  j["gap_abs"] = gap_abs;
  j["gap_rel"] = gap_rel;
  j["iterations"] = iterations;
  j["converged"] = converged;
  if (with_timing) j["wall_ms"] = wall_ms;
  return j.dump();
}

}  // namespace tvlevel
