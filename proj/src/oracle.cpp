#include "nsdarcy/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nsdarcy::oracle {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

int monomial_count(BasisFamily f) { return f == BasisFamily::Linear ? 3 : 6; }

// 1, x, y, x^2, xy, y^2 (shifted coordinates) and their gradients.
void monomials(int n, double x, double y, double* v, Vec2* g) {
  const double all[6] = {1.0, x, y, x * x, x * y, y * y};
  const Vec2 grads[6] = {{0, 0}, {1, 0}, {0, 1}, {2 * x, 0}, {y, x}, {0, 2 * y}};
  for (int k = 0; k < n; ++k) {
    v[k] = all[k];
    g[k] = grads[k];
  }
}

// Inverse of a small dense matrix by Gauss-Jordan with partial pivoting.
std::vector<std::vector<double>> invert(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-300) throw std::runtime_error("oracle: singular Vandermonde system");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

struct Tri {
  Point v[3];
  double area = 0.0;
};

Tri triangle_of(const Mesh& m, std::size_t t) {
  Tri tr;
  for (int k = 0; k < 3; ++k) tr.v[k] = m.node(sz(m.triangle(t)[sz(k)]));
  tr.area = 0.5 * std::abs((tr.v[1].x - tr.v[0].x) * (tr.v[2].y - tr.v[0].y) -
                           (tr.v[2].x - tr.v[0].x) * (tr.v[1].y - tr.v[0].y));
  return tr;
}

// Physical quadrature points of one triangle.
template <class Fn>
void for_points(const Mesh& m, std::size_t t, int degree, Fn&& fn) {
  const QuadratureRule& r = quadrature_rule(QuadratureEntity::Triangle, degree);
  const Tri tr = triangle_of(m, t);
  for (std::size_t q = 0; q < r.points.size(); ++q) {
    const auto& b = r.points[q];
    const Point x{b.l0 * tr.v[0].x + b.l1 * tr.v[1].x + b.l2 * tr.v[2].x,
                  b.l0 * tr.v[0].y + b.l1 * tr.v[1].y + b.l2 * tr.v[2].y};
    fn(x, r.weights[q] * 2.0 * tr.area);
  }
}

struct InterfacePoint {
  Point x;
  double w;
  Vec2 n;
  Vec2 tau;
};

std::vector<InterfacePoint> interface_points(const Mesh& m) {
  std::vector<InterfacePoint> out;
  const Vec2 n = m.interface_line().normal;
  const Vec2 tau{-n.y, n.x};
  const QuadratureRule& r = quadrature_rule(QuadratureEntity::Edge, kEdgeDegree);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    if (m.edge(e).tag != EdgeTag::Interface) continue;
    const Point a = m.node(sz(m.edge(e).nodes[0]));
    const Point b = m.node(sz(m.edge(e).nodes[1]));
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    for (std::size_t q = 0; q < r.points.size(); ++q) {
      const double s = r.points[q].l1;
      out.push_back({{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)}, r.weights[q] * len, n, tau});
    }
  }
  return out;
}

Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

struct Eval {
  std::vector<double> v;
  std::vector<Vec2> g;
};

Eval at(const DenseBasis& b, std::size_t t, const Point& x) {
  Eval e;
  b.eval(t, x, e.v, e.g);
  return e;
}

double field_value(const Field& f, const Eval& e, int c = 0) {
  const std::size_t n = f.space->scalar_dofs();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += f.values[sz(c) * n + i] * e.v[i];
  return s;
}

Vec2 field_grad(const Field& f, const Eval& e, int c = 0) {
  const std::size_t n = f.space->scalar_dofs();
  Vec2 g;
  for (std::size_t i = 0; i < n; ++i) {
    g.x += f.values[sz(c) * n + i] * e.g[i].x;
    g.y += f.values[sz(c) * n + i] * e.g[i].y;
  }
  return g;
}

}  // namespace

DenseBasis::DenseBasis(const DofMap& space) : space_(&space) {
  const Mesh& m = space.mesh();
  const int nb = monomial_count(space.family());
  coeff_.resize(m.num_triangles());
  shift_.resize(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!space.contains_triangle(t)) continue;
    const Tri tr = triangle_of(m, t);
    const Point c{(tr.v[0].x + tr.v[1].x + tr.v[2].x) / 3.0, (tr.v[0].y + tr.v[1].y + tr.v[2].y) / 3.0};
    shift_[t] = c;
    std::vector<Point> nodes(tr.v, tr.v + 3);
    if (nb == 6) {
      // midpoints opposite each vertex
      for (int k = 0; k < 3; ++k) {
        const Point& a = tr.v[(k + 1) % 3];
        const Point& b = tr.v[(k + 2) % 3];
        nodes.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      }
    }
    std::vector<std::vector<double>> vdm(sz(nb), std::vector<double>(sz(nb)));
    for (int k = 0; k < nb; ++k) {
      double v[6];
      Vec2 g[6];
      monomials(nb, nodes[sz(k)].x - c.x, nodes[sz(k)].y - c.y, v, g);
      for (int j = 0; j < nb; ++j) vdm[sz(k)][sz(j)] = v[j];
    }
    coeff_[t] = invert(vdm);  // column k: coefficients of local function k
  }
}

void DenseBasis::eval(std::size_t t, const Point& x, std::vector<double>& value, std::vector<Vec2>& grad) const {
  const std::size_t n = space_->scalar_dofs();
  value.assign(n, 0.0);
  grad.assign(n, Vec2{});
  const int nb = monomial_count(space_->family());
  double v[6];
  Vec2 g[6];
  monomials(nb, x.x - shift_[t].x, x.y - shift_[t].y, v, g);
  for (int k = 0; k < nb; ++k) {
    const std::size_t dof = sz(space_->dof_of(t, k));
    for (int j = 0; j < nb; ++j) {
      const double c = coeff_[t][sz(j)][sz(k)];
      value[dof] += c * v[j];
      grad[dof].x += c * g[j].x;
      grad[dof].y += c * g[j].y;
    }
  }
}

std::size_t DenseBasis::locate(const Point& x) const {
  const Mesh& m = space_->mesh();
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!space_->contains_triangle(t)) continue;
    const Tri tr = triangle_of(m, t);
    bool inside = true;
    for (int k = 0; k < 3; ++k) {
      const Point& a = tr.v[k];
      const Point& b = tr.v[(k + 1) % 3];
      const double cross = (b.x - a.x) * (x.y - a.y) - (b.y - a.y) * (x.x - a.x);
      if (cross < -1e-12) inside = false;
    }
    if (inside) return t;
  }
  throw std::runtime_error("oracle: point outside space");
}

Dense mass(const DofMap& s, double weight) {
  const DenseBasis basis(s);
  const std::size_t n = s.scalar_dofs();
  Dense out = zeros(s.total_dofs(), s.total_dofs());
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      for (int c = 0; c < s.components(); ++c)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) out[sz(c) * n + i][sz(c) * n + j] += weight * w * e.v[i] * e.v[j];
    });
  }
  return out;
}

Dense tensor_mass(const DofMap& s, const TensorField& k) {
  const DenseBasis basis(s);
  const std::size_t n = s.scalar_dofs();
  Dense out = zeros(s.total_dofs(), s.total_dofs());
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) {
              // (K e_d) . e_c
              const Vec2 kd = k[t].apply(d == 0 ? Vec2{1, 0} : Vec2{0, 1});
              const double kcd = c == 0 ? kd.x : kd.y;
              out[sz(c) * n + i][sz(d) * n + j] += w * kcd * e.v[i] * e.v[j];
            }
    });
  }
  return out;
}

Dense stiffness(const DofMap& s, double coeff) {
  const DenseBasis basis(s);
  const std::size_t n = s.scalar_dofs();
  Dense out = zeros(s.total_dofs(), s.total_dofs());
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      for (int c = 0; c < s.components(); ++c)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            out[sz(c) * n + i][sz(c) * n + j] += coeff * w * (e.g[i].x * e.g[j].x + e.g[i].y * e.g[j].y);
    });
  }
  return out;
}

Dense stiffness(const DofMap& s, const TensorField& k) {
  const DenseBasis basis(s);
  const std::size_t n = s.scalar_dofs();
  Dense out = zeros(n, n);
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const Vec2 kg = k[t].apply(e.g[j]);
          out[i][j] += w * (kg.x * e.g[i].x + kg.y * e.g[i].y);
        }
    });
  }
  return out;
}

Dense divergence(const DofMap& velocity, const DofMap& pressure) {
  const DenseBasis bv(velocity), bp(pressure);
  const std::size_t nv = velocity.scalar_dofs();
  Dense out = zeros(pressure.total_dofs(), velocity.total_dofs());
  for (std::size_t t = 0; t < velocity.mesh().num_triangles(); ++t) {
    if (!velocity.contains_triangle(t)) continue;
    for_points(velocity.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval ev = at(bv, t, x), ep = at(bp, t, x);
      for (std::size_t i = 0; i < pressure.scalar_dofs(); ++i)
        for (std::size_t j = 0; j < nv; ++j) {
          out[i][j] += w * ep.v[i] * ev.g[j].x;
          out[i][nv + j] += w * ep.v[i] * ev.g[j].y;
        }
    });
  }
  return out;
}

Dense gradient(const DofMap& velocity, const DofMap& scalar) {
  const DenseBasis bv(velocity), bs(scalar);
  const std::size_t nv = velocity.scalar_dofs();
  Dense out = zeros(velocity.total_dofs(), scalar.total_dofs());
  for (std::size_t t = 0; t < velocity.mesh().num_triangles(); ++t) {
    if (!velocity.contains_triangle(t)) continue;
    for_points(velocity.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval ev = at(bv, t, x), es = at(bs, t, x);
      for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j < scalar.scalar_dofs(); ++j) {
          out[i][j] += w * ev.v[i] * es.g[j].x;
          out[nv + i][j] += w * ev.v[i] * es.g[j].y;
        }
    });
  }
  return out;
}

Dense bjs(const DofMap& velocity, const std::vector<double>& edge_coeff) {
  const DenseBasis bv(velocity);
  const std::size_t n = velocity.scalar_dofs();
  Dense out = zeros(velocity.total_dofs(), velocity.total_dofs());
  const auto pts = interface_points(velocity.mesh());
  const std::size_t per_edge = quadrature_rule(QuadratureEntity::Edge, kEdgeDegree).points.size();
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const double gamma = edge_coeff[q / per_edge];
    const Eval e = at(bv, bv.locate(pts[q].x), pts[q].x);
    const double tau[2] = {pts[q].tau.x, pts[q].tau.y};
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 2; ++d)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            out[sz(c) * n + i][sz(d) * n + j] += gamma * pts[q].w * tau[c] * tau[d] * e.v[i] * e.v[j];
  }
  return out;
}

Dense cgamma(const DofMap& velocity, const DofMap& scalar, double g) {
  const DenseBasis bv(velocity), bs(scalar);
  const std::size_t n = velocity.scalar_dofs();
  Dense out = zeros(velocity.total_dofs(), scalar.total_dofs());
  for (const auto& p : interface_points(velocity.mesh())) {
    const Eval ev = at(bv, bv.locate(p.x), p.x);
    const Eval es = at(bs, bs.locate(p.x), p.x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < scalar.scalar_dofs(); ++j) {
        out[i][j] += g * p.w * p.n.x * ev.v[i] * es.v[j];
        out[n + i][j] += g * p.w * p.n.y * ev.v[i] * es.v[j];
      }
  }
  return out;
}

Dense mobility(const DofMap& s, const Field& phi, const std::function<double(double)>& m) {
  const DenseBasis basis(s), bphi(*phi.space);
  const std::size_t n = s.scalar_dofs();
  Dense out = zeros(n, n);
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      const double mx = m(field_value(phi, at(bphi, t, x)));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i][j] += mx * w * (e.g[i].x * e.g[j].x + e.g[i].y * e.g[j].y);
    });
  }
  return out;
}

namespace {

std::vector<double> convection(const Field& u, const Field& v, bool emac) {
  const DofMap& s = *u.space;
  const DenseBasis basis(s);
  const std::size_t n = s.scalar_dofs();
  std::vector<double> out(s.total_dofs(), 0.0);
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      const Vec2 uu{field_value(u, e, 0), field_value(u, e, 1)};
      const Vec2 vv{field_value(v, e, 0), field_value(v, e, 1)};
      const Vec2 gu0 = field_grad(u, e, 0), gu1 = field_grad(u, e, 1);
      const Vec2 gv0 = field_grad(v, e, 0), gv1 = field_grad(v, e, 1);
      Vec2 r;
      if (emac) {
        // (grad u + grad u^T) v + (div u) v
        const double div = gu0.x + gu1.y;
        r.x = (gu0.x + gu0.x) * vv.x + (gu0.y + gu1.x) * vv.y + div * vv.x;
        r.y = (gu1.x + gu0.y) * vv.x + (gu1.y + gu1.y) * vv.y + div * vv.y;
      } else {
        r.x = uu.x * gv0.x + uu.y * gv0.y;
        r.y = uu.x * gv1.x + uu.y * gv1.y;
      }
      for (std::size_t i = 0; i < n; ++i) {
        out[i] += w * r.x * e.v[i];
        out[n + i] += w * r.y * e.v[i];
      }
    });
  }
  const double scale = emac ? 1.0 : 0.5;
  for (const auto& p : interface_points(s.mesh())) {
    const Eval e = at(basis, basis.locate(p.x), p.x);
    const double uv = field_value(u, e, 0) * field_value(v, e, 0) + field_value(u, e, 1) * field_value(v, e, 1);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] -= scale * p.w * uv * p.n.x * e.v[i];
      out[n + i] -= scale * p.w * uv * p.n.y * e.v[i];
    }
  }
  return out;
}

}  // namespace

std::vector<double> convection_a(const Field& u, const Field& v) { return convection(u, v, false); }
std::vector<double> convection_b(const Field& u, const Field& v) { return convection(u, v, true); }

std::vector<double> load(const DofMap& s, const ScalarFn& f) {
  const DenseBasis basis(s);
  std::vector<double> out(s.total_dofs(), 0.0);
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      for (std::size_t i = 0; i < s.scalar_dofs(); ++i) out[i] += w * f(x) * e.v[i];
    });
  }
  return out;
}

std::vector<double> load(const DofMap& s, const VectorFn& f) {
  const DenseBasis basis(s);
  const std::size_t n = s.scalar_dofs();
  std::vector<double> out(s.total_dofs(), 0.0);
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    for_points(s.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(basis, t, x);
      const Vec2 fx = f(x);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] += w * fx.x * e.v[i];
        out[n + i] += w * fx.y * e.v[i];
      }
    });
  }
  return out;
}

std::vector<double> interface_load(const DofMap& s, const ScalarFn& f) {
  const DenseBasis basis(s);
  std::vector<double> out(s.total_dofs(), 0.0);
  for (const auto& p : interface_points(s.mesh())) {
    const Eval e = at(basis, basis.locate(p.x), p.x);
    for (std::size_t i = 0; i < s.scalar_dofs(); ++i) out[i] += p.w * f(p.x) * e.v[i];
  }
  return out;
}

std::vector<double> interface_load(const DofMap& s, const VectorFn& f) {
  const DenseBasis basis(s);
  const std::size_t n = s.scalar_dofs();
  std::vector<double> out(s.total_dofs(), 0.0);
  for (const auto& p : interface_points(s.mesh())) {
    const Eval e = at(basis, basis.locate(p.x), p.x);
    const Vec2 fx = f(p.x);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += p.w * fx.x * e.v[i];
      out[n + i] += p.w * fx.y * e.v[i];
    }
  }
  return out;
}

std::vector<double> phase_coupling(const Field& phi, const Field& mu, const DofMap& velocity) {
  const DenseBasis bv(velocity), bphi(*phi.space), bmu(*mu.space);
  const std::size_t n = velocity.scalar_dofs();
  std::vector<double> out(velocity.total_dofs(), 0.0);
  for (std::size_t t = 0; t < velocity.mesh().num_triangles(); ++t) {
    if (!velocity.contains_triangle(t)) continue;
    for_points(velocity.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(bv, t, x);
      const double ph = field_value(phi, at(bphi, t, x));
      const Vec2 gm = field_grad(mu, at(bmu, t, x));
      for (std::size_t i = 0; i < n; ++i) {
        out[i] += w * ph * gm.x * e.v[i];
        out[n + i] += w * ph * gm.y * e.v[i];
      }
    });
  }
  return out;
}

std::vector<double> transport(const Field& phi, const Field& u_f, const Field& u_p, const DofMap& target) {
  const DenseBasis bt(target), bphi(*phi.space), bf(*u_f.space), bp(*u_p.space);
  std::vector<double> out(target.total_dofs(), 0.0);
  for (std::size_t t = 0; t < target.mesh().num_triangles(); ++t) {
    if (!target.contains_triangle(t)) continue;
    const bool fluid = target.mesh().domain_of_triangle(t) == Subdomain::Fluid;
    for_points(target.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(bt, t, x);
      const Eval eu = at(fluid ? bf : bp, t, x);
      const Field& u = fluid ? u_f : u_p;
      const Vec2 uu{field_value(u, eu, 0), field_value(u, eu, 1)};
      const double ph = field_value(phi, at(bphi, t, x));
      for (std::size_t i = 0; i < target.scalar_dofs(); ++i) out[i] += w * ph * (uu.x * e.g[i].x + uu.y * e.g[i].y);
    });
  }
  return out;
}

std::vector<double> function_load(const DofMap& target, const Field& phi, const std::function<double(double)>& f) {
  const DenseBasis bt(target), bphi(*phi.space);
  std::vector<double> out(target.total_dofs(), 0.0);
  for (std::size_t t = 0; t < target.mesh().num_triangles(); ++t) {
    if (!target.contains_triangle(t)) continue;
    for_points(target.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(bt, t, x);
      const double fx = f(field_value(phi, at(bphi, t, x)));
      for (std::size_t i = 0; i < target.scalar_dofs(); ++i) out[i] += w * fx * e.v[i];
    });
  }
  return out;
}

std::vector<double> buoyancy(const Field& phi, double phi_bar, const Vec2& b, const DofMap& velocity) {
  const DenseBasis bv(velocity), bphi(*phi.space);
  const std::size_t n = velocity.scalar_dofs();
  std::vector<double> out(velocity.total_dofs(), 0.0);
  for (std::size_t t = 0; t < velocity.mesh().num_triangles(); ++t) {
    if (!velocity.contains_triangle(t)) continue;
    for_points(velocity.mesh(), t, kVolumeDegree, [&](const Point& x, double w) {
      const Eval e = at(bv, t, x);
      const double s = w * (field_value(phi, at(bphi, t, x)) - phi_bar);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] += s * b.x * e.v[i];
        out[n + i] += s * b.y * e.v[i];
      }
    });
  }
  return out;
}

double max_abs_diff(const CsrMatrix& a, const Dense& d) {
  if (d.size() != a.rows() || (!d.empty() && d[0].size() != a.cols())) throw std::invalid_argument("shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a.coeff(i, j) - d[i][j]));
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const Dense& d) {
  double m = 0.0;
  for (const auto& r : d)
    for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

namespace {

std::vector<std::pair<std::string, Mesh>> small_meshes() {
  std::vector<std::pair<std::string, Mesh>> out;
  out.emplace_back("stack-h1", build_two_domain_mesh({{0, 1, 0, 1}, {0, 1, -1, 0}}, 1.0));
  out.emplace_back("wide-stack", build_two_domain_mesh({{0, 2, 0, 1}, {0, 2, -1, 0}}, 1.0));
  out.emplace_back("fluid-right", build_two_domain_mesh({{1, 2, 0, 1}, {0, 1, 0, 1}}, 1.0));
  out.emplace_back("fluid-below", build_two_domain_mesh({{0, 1, 0, 1}, {0, 1, 1, 2}}, 1.0));
  out.emplace_back("stretched", build_two_domain_mesh({{0.2, 1.7, 0.3, 1.0}, {0.2, 1.7, -0.5, 0.3}}, 2.0));
  // Two four-triangle fans around skewed interior points.
  const Geometry g{{0, 1, 0, 1}, {0, 1, -1, 0}};
  std::vector<Point> nodes = {{0, -1}, {1, -1}, {1, 0}, {0, 0}, {0.6, -0.4}, {1, 1}, {0, 1}, {0.45, 0.55}};
  std::vector<std::array<int, 3>> tris = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4},
                                          {3, 2, 7}, {2, 5, 7}, {5, 6, 7}, {6, 3, 7}};
  std::vector<Subdomain> dom(4, Subdomain::Porous);
  dom.insert(dom.end(), 4, Subdomain::Fluid);
  out.emplace_back("fans", Mesh(g, nodes, tris, dom));
  return out;
}

}  // namespace

std::vector<CheckResult> run_assembly_checks(unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<CheckResult> out;
  auto random_field = [&](std::shared_ptr<const DofMap> s) {
    Field f(s);
    for (double& v : f.values) v = u(rng);
    return f;
  };
  const auto mob = [](double p) { return 0.3 * std::sqrt((1.0 - p) * (1.0 - p) + 0.09); };
  const auto gprime = [](double p) { return p * p * p - p; };
  const ScalarFn fs = [](const Point& x) { return std::sin(x.x + 2.0 * x.y) + x.x * x.y; };
  const VectorFn fv = [](const Point& x) { return Vec2{std::cos(x.y) - x.x, x.x * x.x + 0.5}; };

  for (const auto& [name, mesh] : small_meshes()) {
    if (mesh.num_triangles() > 8) throw std::logic_error("oracle catalogue mesh too large");
    const auto vf = build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Fluid);
    const auto vp = build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Porous);
    const auto pf = build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Fluid);
    const auto hp = build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Porous);
    const auto yw = build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Whole);
    const auto qw = build_dof_map(mesh, BasisFamily::Quadratic, 1, DomainSelector::Whole);

    TensorField k(mesh.num_triangles());
    for (auto& t : k) t = {1.5 + 0.5 * u(rng), 0.3 * u(rng), 1.5 + 0.5 * u(rng)};
    std::vector<double> edge_coeff;
    for (std::size_t i = 0; i < tagged_edges(mesh, EdgeTag::Interface).size(); ++i) edge_coeff.push_back(1.0 + 0.5 * u(rng));

    auto mat = [&](const std::string& what, const CsrMatrix& a, const Dense& d) {
      out.push_back({name + "/" + what, max_abs_diff(a, d), std::max(1.0, max_abs(d))});
    };
    auto vec = [&](const std::string& what, const std::vector<double>& a, const std::vector<double>& d) {
      out.push_back({name + "/" + what, max_abs_diff(a, d), std::max(1.0, max_abs(d))});
    };

    mat("mass-P2vec", mass_matrix(*vf, 0.7), mass(*vf, 0.7));
    mat("mass-P1", mass_matrix(*hp, 1.3), mass(*hp, 1.3));
    mat("mass-P2scalar", mass_matrix(*qw), mass(*qw, 1.0));
    mat("tensor-mass", tensor_mass_matrix(*vp, k), tensor_mass(*vp, k));
    mat("stiffness-vec", stiffness_matrix(*vf, 0.01), stiffness(*vf, 0.01));
    mat("stiffness-K", stiffness_matrix(*hp, k), stiffness(*hp, k));
    mat("stiffness-P2K", stiffness_matrix(*qw, k), stiffness(*qw, k));
    mat("divergence", divergence_matrix(*vf, *pf), divergence(*vf, *pf));
    mat("gradient", gradient_matrix(*vp, *hp), gradient(*vp, *hp));
    mat("bjs", bjs_matrix(*vf, edge_coeff), bjs(*vf, edge_coeff));
    mat("cgamma", cgamma_matrix(*vf, *hp, 2.5), cgamma(*vf, *hp, 2.5));
    mat("cgamma-whole", cgamma_matrix(*vf, *yw, 1.0), cgamma(*vf, *yw, 1.0));

    const Field phi = random_field(yw);
    const Field mu = random_field(yw);
    const Field uf = random_field(vf);
    const Field uf2 = random_field(vf);
    const Field up = random_field(vp);
    mat("mobility", mobility_stiffness(*yw, phi, mob), mobility(*yw, phi, mob));
    vec("convection-a", convection_vector_a(uf, uf), convection_a(uf, uf));
    vec("convection-a-mixed", convection_vector_a(uf, uf2), convection_a(uf, uf2));
    vec("convection-b", convection_vector_b(uf, uf), convection_b(uf, uf));
    vec("convection-b-mixed", convection_vector_b(uf2, uf), convection_b(uf2, uf));
    vec("load-scalar", load_vector(*hp, fs), load(*hp, fs));
    vec("load-vector", load_vector(*vf, fv), load(*vf, fv));
    vec("interface-load-scalar", nsdarcy::interface_load(*hp, fs), oracle::interface_load(*hp, fs));
    vec("interface-load-vector", nsdarcy::interface_load(*vf, fv), oracle::interface_load(*vf, fv));
    vec("phase-coupling-f", phase_coupling_vector(phi, mu, *vf), phase_coupling(phi, mu, *vf));
    vec("phase-coupling-p", phase_coupling_vector(phi, mu, *vp), phase_coupling(phi, mu, *vp));
    vec("transport", transport_vector(phi, uf, up, *yw), transport(phi, uf, up, *yw));
    vec("g-prime-load", nsdarcy::function_load(*yw, phi, gprime), oracle::function_load(*yw, phi, gprime));
    vec("buoyancy", buoyancy_vector(phi, 0.1, {0.0, 5.0}, *vf), buoyancy(phi, 0.1, {0.0, 5.0}, *vf));
  }
  return out;
}

}  // namespace nsdarcy::oracle
