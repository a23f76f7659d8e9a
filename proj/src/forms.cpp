#include "nsdarcy/forms.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nsdarcy {

namespace {

using Table = std::vector<BasisValues>;

const Table& tabulate(BasisFamily family, const QuadratureRule& rule) {
  static std::mutex guard;
  static std::map<std::pair<const QuadratureRule*, int>, Table> cache;
  std::lock_guard lock(guard);
  auto& t = cache[{&rule, static_cast<int>(family)}];
  if (t.empty()) {
    for (const auto& p : rule.points) t.push_back(reference_basis(family, p));
  }
  return t;
}

struct PhysicalBasis {
  int count = 0;
  std::array<double, 6> value{};
  std::array<Vec2, 6> grad{};
};

PhysicalBasis to_physical(const BasisValues& ref, const ElementMap& map) {
  PhysicalBasis b;
  b.count = ref.count;
  b.value = ref.value;
  for (int i = 0; i < ref.count; ++i) b.grad[static_cast<std::size_t>(i)] = map.physical_gradient(ref.grad[static_cast<std::size_t>(i)]);
  return b;
}

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

// Visits each quadrature point of each triangle in the space.
template <class Fn>
void for_each_point(const DofMap& space, int degree, Fn&& fn) {
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Triangle, degree);
  const Table& table = tabulate(space.family(), rule);
  const Mesh& mesh = space.mesh();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!space.contains_triangle(t)) continue;
    const ElementMap map = ElementMap::of(mesh, t);
    const double jac = std::abs(map.det);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      fn(t, map, rule.points[q], map.to_physical(rule.points[q]), rule.weights[q] * jac, to_physical(table[q], map));
    }
  }
}

int side_triangle(const DofMap& space, const Mesh& mesh, const TaggedEdge& e) {
  if (space.contains_triangle(static_cast<std::size_t>(e.triangle))) return e.triangle;
  const Edge& edge = mesh.edge(static_cast<std::size_t>(e.edge));
  const int other = edge.triangles[0] == e.triangle ? edge.triangles[1] : edge.triangles[0];
  if (other < 0 || !space.contains_triangle(static_cast<std::size_t>(other))) {
    throw std::invalid_argument("space does not touch the interface");
  }
  return other;
}

struct EdgePoint {
  Point x;
  double weight = 0.0;
};

std::vector<EdgePoint> edge_points(const TaggedEdge& e) {
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Edge, kEdgeDegree);
  std::vector<EdgePoint> out;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double s = rule.points[q].l1;
    out.push_back({{e.a.x + s * (e.b.x - e.a.x), e.a.y + s * (e.b.y - e.a.y)}, rule.weights[q] * e.length});
  }
  return out;
}

PhysicalBasis basis_at(const DofMap& space, std::size_t t, const Point& x, ElementMap* map_out = nullptr) {
  const ElementMap map = ElementMap::of(space.mesh(), t);
  if (map_out) *map_out = map;
  return to_physical(reference_basis(space.family(), barycentric_of(map, x)), map);
}

CsrMatrix finish(const DofMap& rows, const DofMap& cols, const std::vector<Triplet>& t) {
  return assemble_from_triplets(rows.total_dofs(), cols.total_dofs(), t);
}

void require_vector(const DofMap& s, const char* what) {
  if (s.components() != 2) throw std::invalid_argument(std::string(what) + " needs a vector space");
}

void require_same_mesh(const DofMap& a, const DofMap& b) {
  if (&a.mesh() != &b.mesh()) throw std::invalid_argument("spaces live on different meshes");
}

}  // namespace

TensorField uniform_tensor(const Mesh& mesh, const Tensor2& k) { return TensorField(mesh.num_triangles(), k); }

Barycentric barycentric_of(const ElementMap& map, const Point& p) {
  const double dx = p.x - map.origin.x;
  const double dy = p.y - map.origin.y;
  // J^{-1} = (J^{-T})^T
  const double l1 = map.inv_jac_t[0][0] * dx + map.inv_jac_t[1][0] * dy;
  const double l2 = map.inv_jac_t[0][1] * dx + map.inv_jac_t[1][1] * dy;
  return {1.0 - l1 - l2, l1, l2};
}

Field::Field(std::shared_ptr<const DofMap> s, std::vector<double> v) : space(std::move(s)), values(std::move(v)) {
  if (values.size() != space->total_dofs()) throw std::invalid_argument("field size does not match its space");
}

double Field::value(std::size_t t, const Barycentric& b, int c) const {
  const BasisValues v = reference_basis(space->family(), b);
  double s = 0.0;
  for (int i = 0; i < v.count; ++i) s += values[sz(space->dof_of(t, i, c))] * v.value[sz(i)];
  return s;
}

Vec2 Field::vector_value(std::size_t t, const Barycentric& b) const { return {value(t, b, 0), value(t, b, 1)}; }

Vec2 Field::gradient(std::size_t t, const Barycentric& b, int c) const {
  const ElementMap map = ElementMap::of(space->mesh(), t);
  const BasisValues v = reference_basis(space->family(), b);
  Vec2 g;
  for (int i = 0; i < v.count; ++i) {
    const Vec2 gi = map.physical_gradient(v.grad[sz(i)]);
    const double ci = values[sz(space->dof_of(t, i, c))];
    g.x += ci * gi.x;
    g.y += ci * gi.y;
  }
  return g;
}

Field interpolate(std::shared_ptr<const DofMap> space, const ScalarFn& f) {
  Field out(space);
  for (std::size_t i = 0; i < space->scalar_dofs(); ++i) out.values[i] = f(space->coordinate(i));
  return out;
}

Field interpolate(std::shared_ptr<const DofMap> space, const VectorFn& f) {
  require_vector(*space, "vector interpolation");
  Field out(space);
  const std::size_t n = space->scalar_dofs();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 v = f(space->coordinate(i));
    out.values[i] = v.x;
    out.values[n + i] = v.y;
  }
  return out;
}

// --- matrices --------------------------------------------------------------------------

CsrMatrix mass_matrix(const DofMap& space, double weight) {
  std::vector<Triplet> t;
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point&,
                                           double w, const PhysicalBasis& b) {
    for (int c = 0; c < space.components(); ++c) {
      for (int i = 0; i < b.count; ++i) {
        for (int j = 0; j < b.count; ++j) {
          t.push_back({space.dof_of(tri, i, c), space.dof_of(tri, j, c), weight * w * b.value[sz(i)] * b.value[sz(j)]});
        }
      }
    }
  });
  return finish(space, space, t);
}

CsrMatrix tensor_mass_matrix(const DofMap& space, const TensorField& tensor) {
  require_vector(space, "tensor mass");
  std::vector<Triplet> t;
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point&,
                                           double w, const PhysicalBasis& b) {
    const Tensor2& k = tensor[tri];
    const double m[2][2] = {{k.xx, k.xy}, {k.xy, k.yy}};
    for (int c = 0; c < 2; ++c) {
      for (int d = 0; d < 2; ++d) {
        if (m[c][d] == 0.0) continue;
        for (int i = 0; i < b.count; ++i) {
          for (int j = 0; j < b.count; ++j) {
            t.push_back({space.dof_of(tri, i, c), space.dof_of(tri, j, d), w * m[c][d] * b.value[sz(i)] * b.value[sz(j)]});
          }
        }
      }
    }
  });
  return finish(space, space, t);
}

CsrMatrix stiffness_matrix(const DofMap& space, double coeff) {
  std::vector<Triplet> t;
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point&,
                                           double w, const PhysicalBasis& b) {
    for (int c = 0; c < space.components(); ++c) {
      for (int i = 0; i < b.count; ++i) {
        for (int j = 0; j < b.count; ++j) {
          t.push_back({space.dof_of(tri, i, c), space.dof_of(tri, j, c), coeff * w * dot(b.grad[sz(i)], b.grad[sz(j)])});
        }
      }
    }
  });
  return finish(space, space, t);
}

CsrMatrix stiffness_matrix(const DofMap& space, const TensorField& tensor) {
  if (space.components() != 1) throw std::invalid_argument("tensor stiffness needs a scalar space");
  for (std::size_t tri = 0; tri < space.mesh().num_triangles(); ++tri) {
    if (space.contains_triangle(tri) && !tensor[tri].is_spd()) throw std::invalid_argument("conductivity tensor is not SPD");
  }
  std::vector<Triplet> t;
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point&,
                                           double w, const PhysicalBasis& b) {
    for (int i = 0; i < b.count; ++i) {
      for (int j = 0; j < b.count; ++j) {
        t.push_back({space.dof_of(tri, i), space.dof_of(tri, j), w * dot(tensor[tri].apply(b.grad[sz(j)]), b.grad[sz(i)])});
      }
    }
  });
  return finish(space, space, t);
}

CsrMatrix divergence_matrix(const DofMap& velocity, const DofMap& pressure) {
  require_vector(velocity, "divergence");
  require_same_mesh(velocity, pressure);
  std::vector<Triplet> t;
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Triangle, kVolumeDegree);
  const Table& tv = tabulate(velocity.family(), rule);
  const Table& tp = tabulate(pressure.family(), rule);
  const Mesh& mesh = velocity.mesh();
  for (std::size_t tri = 0; tri < mesh.num_triangles(); ++tri) {
    if (!velocity.contains_triangle(tri)) continue;
    if (!pressure.contains_triangle(tri)) throw std::invalid_argument("pressure space does not cover velocity domain");
    const ElementMap map = ElementMap::of(mesh, tri);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * std::abs(map.det);
      const PhysicalBasis bv = to_physical(tv[q], map);
      for (int i = 0; i < tp[q].count; ++i) {
        for (int j = 0; j < bv.count; ++j) {
          const double qi = w * tp[q].value[sz(i)];
          t.push_back({pressure.dof_of(tri, i), velocity.dof_of(tri, j, 0), qi * bv.grad[sz(j)].x});
          t.push_back({pressure.dof_of(tri, i), velocity.dof_of(tri, j, 1), qi * bv.grad[sz(j)].y});
        }
      }
    }
  }
  return finish(pressure, velocity, t);
}

CsrMatrix gradient_matrix(const DofMap& velocity, const DofMap& scalar) {
  require_vector(velocity, "gradient pairing");
  require_same_mesh(velocity, scalar);
  std::vector<Triplet> t;
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Triangle, kVolumeDegree);
  const Table& tv = tabulate(velocity.family(), rule);
  const Table& ts = tabulate(scalar.family(), rule);
  const Mesh& mesh = velocity.mesh();
  for (std::size_t tri = 0; tri < mesh.num_triangles(); ++tri) {
    if (!velocity.contains_triangle(tri)) continue;
    const ElementMap map = ElementMap::of(mesh, tri);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * std::abs(map.det);
      const PhysicalBasis bs = to_physical(ts[q], map);
      for (int i = 0; i < tv[q].count; ++i) {
        for (int j = 0; j < bs.count; ++j) {
          const double vi = w * tv[q].value[sz(i)];
          t.push_back({velocity.dof_of(tri, i, 0), scalar.dof_of(tri, j), vi * bs.grad[sz(j)].x});
          t.push_back({velocity.dof_of(tri, i, 1), scalar.dof_of(tri, j), vi * bs.grad[sz(j)].y});
        }
      }
    }
  }
  return finish(velocity, scalar, t);
}

CsrMatrix bjs_matrix(const DofMap& velocity, const std::vector<double>& edge_coeff) {
  require_vector(velocity, "BJS");
  const Mesh& mesh = velocity.mesh();
  const auto edges = tagged_edges(mesh, EdgeTag::Interface);
  if (edge_coeff.size() != edges.size()) throw std::invalid_argument("one BJS coefficient per interface edge required");
  std::vector<Triplet> t;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const TaggedEdge& te = edges[e];
    const std::size_t tri = static_cast<std::size_t>(side_triangle(velocity, mesh, te));
    const double tau[2] = {te.tangent.x, te.tangent.y};
    for (const EdgePoint& p : edge_points(te)) {
      const PhysicalBasis b = basis_at(velocity, tri, p.x);
      for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) {
          const double s = edge_coeff[e] * p.weight * tau[c] * tau[d];
          if (s == 0.0) continue;
          for (int i = 0; i < b.count; ++i) {
            for (int j = 0; j < b.count; ++j) {
              t.push_back({velocity.dof_of(tri, i, c), velocity.dof_of(tri, j, d), s * b.value[sz(i)] * b.value[sz(j)]});
            }
          }
        }
      }
    }
  }
  return finish(velocity, velocity, t);
}

CsrMatrix cgamma_matrix(const DofMap& velocity, const DofMap& scalar, double g) {
  require_vector(velocity, "interface coupling");
  require_same_mesh(velocity, scalar);
  const Mesh& mesh = velocity.mesh();
  std::vector<Triplet> t;
  for (const TaggedEdge& te : tagged_edges(mesh, EdgeTag::Interface)) {
    const std::size_t tv = static_cast<std::size_t>(side_triangle(velocity, mesh, te));
    const std::size_t ts = static_cast<std::size_t>(side_triangle(scalar, mesh, te));
    const double n[2] = {te.normal.x, te.normal.y};
    for (const EdgePoint& p : edge_points(te)) {
      const PhysicalBasis bv = basis_at(velocity, tv, p.x);
      const PhysicalBasis bs = basis_at(scalar, ts, p.x);
      for (int c = 0; c < 2; ++c) {
        if (n[c] == 0.0) continue;
        for (int i = 0; i < bv.count; ++i) {
          for (int j = 0; j < bs.count; ++j) {
            t.push_back({velocity.dof_of(tv, i, c), scalar.dof_of(ts, j), g * p.weight * n[c] * bv.value[sz(i)] * bs.value[sz(j)]});
          }
        }
      }
    }
  }
  return finish(velocity, scalar, t);
}

CsrMatrix mobility_stiffness(const DofMap& space, const Field& phi, const std::function<double(double)>& mobility) {
  std::vector<Triplet> t;
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric& bary, const Point&,
                                           double w, const PhysicalBasis& b) {
    const double m = mobility(phi.value(tri, bary));
    for (int c = 0; c < space.components(); ++c) {
      for (int i = 0; i < b.count; ++i) {
        for (int j = 0; j < b.count; ++j) {
          t.push_back({space.dof_of(tri, i, c), space.dof_of(tri, j, c), m * w * dot(b.grad[sz(i)], b.grad[sz(j)])});
        }
      }
    }
  });
  return finish(space, space, t);
}

std::vector<double> interface_trace_k(const Mesh& mesh, const TensorField& k) {
  std::vector<double> out;
  for (const TaggedEdge& te : tagged_edges(mesh, EdgeTag::Interface)) {
    const Edge& edge = mesh.edge(static_cast<std::size_t>(te.edge));
    const int tp = edge.triangles[0] == te.triangle ? edge.triangles[1] : edge.triangles[0];
    const double tr = k[static_cast<std::size_t>(tp)].trace();
    if (!(tr > 0.0)) throw std::invalid_argument("tr K must be positive on the interface");
    out.push_back(tr);
  }
  return out;
}

std::vector<double> bjs_coefficients_nsd(const Mesh& mesh, double alpha, double nu, double g, const TensorField& k) {
  std::vector<double> out = interface_trace_k(mesh, k);
  for (double& v : out) v = alpha * std::sqrt(nu * g / v);
  return out;
}

std::vector<double> bjs_coefficients_chnsd(const Mesh& mesh, double alpha, double nu_f, double nu_p,
                                           const TensorField& k) {
  std::vector<double> out = interface_trace_k(mesh, k);
  for (double& v : out) v = alpha * nu_f * std::sqrt(2.0) / std::sqrt(nu_p * v);
  return out;
}

// --- vectors ---------------------------------------------------------------------------

namespace {

struct LocalVector {
  Vec2 value;
  Vec2 grad[2];  // grad of component 0 and 1
};

LocalVector eval_vector(const Field& f, std::size_t tri, const PhysicalBasis& b) {
  LocalVector out;
  for (int i = 0; i < b.count; ++i) {
    const double c0 = f.values[sz(f.space->dof_of(tri, i, 0))];
    const double c1 = f.values[sz(f.space->dof_of(tri, i, 1))];
    out.value.x += c0 * b.value[sz(i)];
    out.value.y += c1 * b.value[sz(i)];
    out.grad[0].x += c0 * b.grad[sz(i)].x;
    out.grad[0].y += c0 * b.grad[sz(i)].y;
    out.grad[1].x += c1 * b.grad[sz(i)].x;
    out.grad[1].y += c1 * b.grad[sz(i)].y;
  }
  return out;
}

void check_pair(const Field& u, const Field& v) {
  if (u.space != v.space) throw std::invalid_argument("convection arguments must share a space");
  require_vector(*u.space, "convection");
}

// -scale * int_Gamma (u.v)(w.n), accumulated into out.
void add_interface_convection(const Field& u, const Field& v, double scale, std::vector<double>& out) {
  const DofMap& space = *u.space;
  const Mesh& mesh = space.mesh();
  for (const TaggedEdge& te : tagged_edges(mesh, EdgeTag::Interface)) {
    const std::size_t tri = static_cast<std::size_t>(side_triangle(space, mesh, te));
    for (const EdgePoint& p : edge_points(te)) {
      const PhysicalBasis b = basis_at(space, tri, p.x);
      const Vec2 uu = eval_vector(u, tri, b).value;
      const Vec2 vv = eval_vector(v, tri, b).value;
      const double s = -scale * p.weight * dot(uu, vv);
      for (int i = 0; i < b.count; ++i) {
        out[sz(space.dof_of(tri, i, 0))] += s * te.normal.x * b.value[sz(i)];
        out[sz(space.dof_of(tri, i, 1))] += s * te.normal.y * b.value[sz(i)];
      }
    }
  }
}

}  // namespace

std::vector<double> convection_vector_a(const Field& u, const Field& v) {
  check_pair(u, v);
  const DofMap& space = *u.space;
  std::vector<double> out(space.total_dofs(), 0.0);
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point&,
                                           double w, const PhysicalBasis& b) {
    const LocalVector lu = eval_vector(u, tri, b);
    const LocalVector lv = eval_vector(v, tri, b);
    // (u.grad) v
    const Vec2 conv{dot(lu.value, lv.grad[0]), dot(lu.value, lv.grad[1])};
    for (int i = 0; i < b.count; ++i) {
      out[sz(space.dof_of(tri, i, 0))] += w * conv.x * b.value[sz(i)];
      out[sz(space.dof_of(tri, i, 1))] += w * conv.y * b.value[sz(i)];
    }
  });
  add_interface_convection(u, v, 0.5, out);
  return out;
}

std::vector<double> convection_vector_b(const Field& u, const Field& v) {
  check_pair(u, v);
  const DofMap& space = *u.space;
  std::vector<double> out(space.total_dofs(), 0.0);
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point&,
                                           double w, const PhysicalBasis& b) {
    const LocalVector lu = eval_vector(u, tri, b);
    const LocalVector lv = eval_vector(v, tri, b);
    // 2D(u) = grad u + grad u^T; grad u rows are component gradients.
    const double d00 = 2.0 * lu.grad[0].x;
    const double d01 = lu.grad[0].y + lu.grad[1].x;
    const double d11 = 2.0 * lu.grad[1].y;
    const double div = lu.grad[0].x + lu.grad[1].y;
    const Vec2 r{d00 * lv.value.x + d01 * lv.value.y + div * lv.value.x,
                 d01 * lv.value.x + d11 * lv.value.y + div * lv.value.y};
    for (int i = 0; i < b.count; ++i) {
      out[sz(space.dof_of(tri, i, 0))] += w * r.x * b.value[sz(i)];
      out[sz(space.dof_of(tri, i, 1))] += w * r.y * b.value[sz(i)];
    }
  });
  add_interface_convection(u, v, 1.0, out);
  return out;
}

std::vector<double> load_vector(const DofMap& space, const ScalarFn& f) {
  if (space.components() != 1) throw std::invalid_argument("scalar load needs a scalar space");
  std::vector<double> out(space.total_dofs(), 0.0);
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point& x,
                                           double w, const PhysicalBasis& b) {
    const double fx = f(x);
    for (int i = 0; i < b.count; ++i) out[sz(space.dof_of(tri, i))] += w * fx * b.value[sz(i)];
  });
  return out;
}

std::vector<double> load_vector(const DofMap& space, const VectorFn& f) {
  require_vector(space, "vector load");
  std::vector<double> out(space.total_dofs(), 0.0);
  for_each_point(space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric&, const Point& x,
                                           double w, const PhysicalBasis& b) {
    const Vec2 fx = f(x);
    for (int i = 0; i < b.count; ++i) {
      out[sz(space.dof_of(tri, i, 0))] += w * fx.x * b.value[sz(i)];
      out[sz(space.dof_of(tri, i, 1))] += w * fx.y * b.value[sz(i)];
    }
  });
  return out;
}

std::vector<double> interface_load(const DofMap& space, const ScalarFn& f) {
  if (space.components() != 1) throw std::invalid_argument("scalar interface load needs a scalar space");
  const Mesh& mesh = space.mesh();
  std::vector<double> out(space.total_dofs(), 0.0);
  for (const TaggedEdge& te : tagged_edges(mesh, EdgeTag::Interface)) {
    const std::size_t tri = static_cast<std::size_t>(side_triangle(space, mesh, te));
    for (const EdgePoint& p : edge_points(te)) {
      const PhysicalBasis b = basis_at(space, tri, p.x);
      const double fx = f(p.x);
      for (int i = 0; i < b.count; ++i) out[sz(space.dof_of(tri, i))] += p.weight * fx * b.value[sz(i)];
    }
  }
  return out;
}

std::vector<double> interface_load(const DofMap& space, const VectorFn& f) {
  require_vector(space, "vector interface load");
  const Mesh& mesh = space.mesh();
  std::vector<double> out(space.total_dofs(), 0.0);
  for (const TaggedEdge& te : tagged_edges(mesh, EdgeTag::Interface)) {
    const std::size_t tri = static_cast<std::size_t>(side_triangle(space, mesh, te));
    for (const EdgePoint& p : edge_points(te)) {
      const PhysicalBasis b = basis_at(space, tri, p.x);
      const Vec2 fx = f(p.x);
      for (int i = 0; i < b.count; ++i) {
        out[sz(space.dof_of(tri, i, 0))] += p.weight * fx.x * b.value[sz(i)];
        out[sz(space.dof_of(tri, i, 1))] += p.weight * fx.y * b.value[sz(i)];
      }
    }
  }
  return out;
}

std::vector<double> phase_coupling_vector(const Field& phi, const Field& mu, const DofMap& velocity) {
  require_vector(velocity, "phase coupling");
  std::vector<double> out(velocity.total_dofs(), 0.0);
  for_each_point(velocity, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric& bary,
                                              const Point&, double w, const PhysicalBasis& b) {
    const double ph = phi.value(tri, bary);
    const Vec2 gm = mu.gradient(tri, bary);
    for (int i = 0; i < b.count; ++i) {
      out[sz(velocity.dof_of(tri, i, 0))] += w * ph * gm.x * b.value[sz(i)];
      out[sz(velocity.dof_of(tri, i, 1))] += w * ph * gm.y * b.value[sz(i)];
    }
  });
  return out;
}

std::vector<double> transport_vector(const Field& phi, const Field& u_f, const Field& u_p, const DofMap& target) {
  std::vector<double> out(target.total_dofs(), 0.0);
  for_each_point(target, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric& bary,
                                            const Point&, double w, const PhysicalBasis& b) {
    const Field& u = target.mesh().domain_of_triangle(tri) == Subdomain::Fluid ? u_f : u_p;
    const Vec2 uv = u.vector_value(tri, bary);
    const double ph = phi.value(tri, bary);
    for (int i = 0; i < b.count; ++i) out[sz(target.dof_of(tri, i))] += w * ph * dot(uv, b.grad[sz(i)]);
  });
  return out;
}

std::vector<double> function_load(const DofMap& target, const Field& phi, const std::function<double(double)>& f) {
  std::vector<double> out(target.total_dofs(), 0.0);
  for_each_point(target, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric& bary,
                                            const Point&, double w, const PhysicalBasis& b) {
    const double fx = f(phi.value(tri, bary));
    for (int i = 0; i < b.count; ++i) out[sz(target.dof_of(tri, i))] += w * fx * b.value[sz(i)];
  });
  return out;
}

std::vector<double> buoyancy_vector(const Field& phi, double phi_bar, const Vec2& force, const DofMap& velocity) {
  require_vector(velocity, "buoyancy");
  std::vector<double> out(velocity.total_dofs(), 0.0);
  for_each_point(velocity, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric& bary,
                                              const Point&, double w, const PhysicalBasis& b) {
    const double s = w * (phi.value(tri, bary) - phi_bar);
    for (int i = 0; i < b.count; ++i) {
      out[sz(velocity.dof_of(tri, i, 0))] += s * force.x * b.value[sz(i)];
      out[sz(velocity.dof_of(tri, i, 1))] += s * force.y * b.value[sz(i)];
    }
  });
  return out;
}

// --- scalars ---------------------------------------------------------------------------

double integrate_function(const Field& phi, const std::function<double(double)>& f, int degree) {
  double s = 0.0;
  for_each_point(*phi.space, degree, [&](std::size_t tri, const ElementMap&, const Barycentric& bary, const Point&,
                                         double w, const PhysicalBasis&) { s += w * f(phi.value(tri, bary)); });
  return s;
}

double weighted_gradient_energy(const Field& mu, const Field& phi, const std::function<double(double)>& mobility) {
  double s = 0.0;
  for_each_point(*mu.space, kVolumeDegree, [&](std::size_t tri, const ElementMap&, const Barycentric& bary,
                                               const Point&, double w, const PhysicalBasis&) {
    const Vec2 g = mu.gradient(tri, bary);
    s += w * mobility(phi.value(tri, bary)) * dot(g, g);
  });
  return s;
}

}  // namespace nsdarcy
