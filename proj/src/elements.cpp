#include "nsdarcy/elements.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace nsdarcy {

BasisValues reference_basis(BasisFamily family, const Barycentric& p) {
  BasisValues b;
  const double l0 = p.l0;
  const double l1 = p.l1;
  const double l2 = p.l2;
  // d(l0,l1,l2)/d(xi,eta)
  const Vec2 d0{-1.0, -1.0};
  const Vec2 d1{1.0, 0.0};
  const Vec2 d2{0.0, 1.0};
  if (family == BasisFamily::Linear) {
    b.count = 3;
    b.value = {l0, l1, l2, 0, 0, 0};
    b.grad[0] = d0;
    b.grad[1] = d1;
    b.grad[2] = d2;
    return b;
  }
  b.count = 6;
  const double l[3] = {l0, l1, l2};
  const Vec2 d[3] = {d0, d1, d2};
  for (int i = 0; i < 3; ++i) {
    b.value[i] = l[i] * (2.0 * l[i] - 1.0);
    b.grad[i] = {(4.0 * l[i] - 1.0) * d[i].x, (4.0 * l[i] - 1.0) * d[i].y};
  }
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    b.value[3 + k] = 4.0 * l[i] * l[j];
    b.grad[3 + k] = {4.0 * (d[i].x * l[j] + l[i] * d[j].x), 4.0 * (d[i].y * l[j] + l[i] * d[j].y)};
  }
  return b;
}

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

void add_orbit3(QuadratureRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  r.points.push_back({b, a, a});
  r.points.push_back({a, b, a});
  r.points.push_back({a, a, b});
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

QuadratureRule collapsed_gauss(int degree) {
  const int n = (degree + 3) / 2;  // exact for degree + 1 in the collapsed direction
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  QuadratureRule r;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = x[static_cast<std::size_t>(i)];
      const double eta = x[static_cast<std::size_t>(j)] * (1.0 - xi);
      r.points.push_back({1.0 - xi - eta, xi, eta});
      r.weights.push_back(w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * (1.0 - xi));
    }
  }
  return r;
}

QuadratureRule make_triangle_rule(int degree) {
  QuadratureRule r;
  if (degree <= 1) {
    r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {0.5};
  } else if (degree == 2) {
    add_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
  } else if (degree <= 4) {
    add_orbit3(r, 0.44594849091596488632, 0.5 * 0.22338158967801146570);
    add_orbit3(r, 0.091576213509770743460, 0.5 * 0.10995174365532186764);
  } else if (degree == 5) {
    const double s15 = std::sqrt(15.0);
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(9.0 / 80.0);
    add_orbit3(r, (6.0 - s15) / 21.0, (155.0 - s15) / 2400.0);
    add_orbit3(r, (6.0 + s15) / 21.0, (155.0 + s15) / 2400.0);
  } else {
    r = collapsed_gauss(degree);
  }
  r.exact_degree = degree <= 1 ? 1 : (degree == 3 ? 4 : degree);
  return r;
}

QuadratureRule make_edge_rule(int degree) {
  const int n = (degree + 2) / 2;
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  QuadratureRule r;
  for (int i = 0; i < n; ++i) {
    r.points.push_back({1.0 - x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)], 0.0});
    r.weights.push_back(w[static_cast<std::size_t>(i)]);
  }
  r.exact_degree = 2 * n - 1;
  return r;
}

}  // namespace

const QuadratureRule& quadrature_rule(QuadratureEntity entity, int exact_degree) {
  const int max_degree = entity == QuadratureEntity::Triangle ? 7 : 9;
  if (exact_degree < 1 || exact_degree > max_degree) {
    throw QuadratureError("unsupported quadrature degree " + std::to_string(exact_degree));
  }
  static std::mutex guard;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(guard);
  const std::pair<int, int> key{static_cast<int>(entity), exact_degree};
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache
             .emplace(key, entity == QuadratureEntity::Triangle ? make_triangle_rule(exact_degree)
                                                                : make_edge_rule(exact_degree))
             .first;
  }
  return it->second;
}

ElementMap ElementMap::of(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangle(t);
  const Point& a = mesh.node(static_cast<std::size_t>(tri[0]));
  const Point& b = mesh.node(static_cast<std::size_t>(tri[1]));
  const Point& c = mesh.node(static_cast<std::size_t>(tri[2]));
  ElementMap m;
  m.origin = a;
  m.jac[0][0] = b.x - a.x;
  m.jac[0][1] = c.x - a.x;
  m.jac[1][0] = b.y - a.y;
  m.jac[1][1] = c.y - a.y;
  m.det = m.jac[0][0] * m.jac[1][1] - m.jac[0][1] * m.jac[1][0];
  // J^{-T} = (1/det) [[J11, -J10], [-J01, J00]]
  m.inv_jac_t[0][0] = m.jac[1][1] / m.det;
  m.inv_jac_t[0][1] = -m.jac[1][0] / m.det;
  m.inv_jac_t[1][0] = -m.jac[0][1] / m.det;
  m.inv_jac_t[1][1] = m.jac[0][0] / m.det;
  return m;
}

Point ElementMap::to_physical(const Barycentric& b) const {
  return {origin.x + jac[0][0] * b.l1 + jac[0][1] * b.l2, origin.y + jac[1][0] * b.l1 + jac[1][1] * b.l2};
}

Vec2 ElementMap::physical_gradient(const Vec2& g) const {
  return {inv_jac_t[0][0] * g.x + inv_jac_t[0][1] * g.y, inv_jac_t[1][0] * g.x + inv_jac_t[1][1] * g.y};
}

namespace {

bool selects(DomainSelector sel, Subdomain d) {
  return sel == DomainSelector::Whole || (sel == DomainSelector::Fluid) == (d == Subdomain::Fluid);
}

}  // namespace

DofMap::DofMap(const Mesh& mesh, BasisFamily family, int components, DomainSelector domain)
    : mesh_(&mesh), family_(family), components_(components), domain_(domain) {
  if (components != 1 && components != 2) throw std::invalid_argument("DofMap supports 1 or 2 components");
  node_dof_.assign(mesh.num_nodes(), -1);
  edge_dof_.assign(mesh.num_edges(), -1);
  std::vector<char> node_used(mesh.num_nodes(), 0);
  std::vector<char> edge_used(mesh.num_edges(), 0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!selects(domain, mesh.domain_of_triangle(t))) continue;
    for (int v : mesh.triangle(t)) node_used[static_cast<std::size_t>(v)] = 1;
    for (int e : mesh.triangle_edges(t)) edge_used[static_cast<std::size_t>(e)] = 1;
  }
  for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
    if (!node_used[v]) continue;
    node_dof_[v] = static_cast<int>(coords_.size());
    coords_.push_back(mesh.node(v));
  }
  if (family == BasisFamily::Quadratic) {
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (!edge_used[e]) continue;
      edge_dof_[e] = static_cast<int>(coords_.size());
      const Point& a = mesh.node(static_cast<std::size_t>(mesh.edge(e).nodes[0]));
      const Point& b = mesh.node(static_cast<std::size_t>(mesh.edge(e).nodes[1]));
      coords_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
  }

  local_.assign(mesh.num_triangles(), {-1, -1, -1, -1, -1, -1});
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!selects(domain, mesh.domain_of_triangle(t))) continue;
    for (int i = 0; i < 3; ++i) local_[t][static_cast<std::size_t>(i)] = node_dof_[static_cast<std::size_t>(mesh.triangle(t)[static_cast<std::size_t>(i)])];
    if (family == BasisFamily::Quadratic) {
      for (int k = 0; k < 3; ++k) {
        local_[t][static_cast<std::size_t>(3 + k)] = edge_dof_[static_cast<std::size_t>(mesh.triangle_edges(t)[static_cast<std::size_t>(k)])];
      }
    }
  }

  for (auto& m : masks_) m.assign(coords_.size(), 0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& tag = mesh.edge(e).tag;
    if (!tag) continue;
    for (int d : edge_dofs(e)) {
      if (d >= 0) masks_[static_cast<std::size_t>(*tag)][static_cast<std::size_t>(d)] = 1;
    }
  }
}

std::array<int, 3> DofMap::edge_dofs(std::size_t e) const {
  const Edge& edge = mesh_->edge(e);
  std::array<int, 3> out{node_dof_[static_cast<std::size_t>(edge.nodes[0])],
                         node_dof_[static_cast<std::size_t>(edge.nodes[1])], -1};
  if (family_ == BasisFamily::Quadratic) out[2] = edge_dof_[e];
  // An edge is in the space only if one of its triangles is.
  bool inside = false;
  for (int t : edge.triangles) {
    if (t >= 0 && contains_triangle(static_cast<std::size_t>(t))) inside = true;
  }
  if (!inside) out = {-1, -1, -1};
  return out;
}

std::shared_ptr<const DofMap> build_dof_map(const Mesh& mesh, BasisFamily family, int components,
                                            DomainSelector domain) {
  return std::make_shared<const DofMap>(mesh, family, components, domain);
}

}  // namespace nsdarcy
