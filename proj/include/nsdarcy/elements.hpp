#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

#include "nsdarcy/mesh.hpp"

namespace nsdarcy {

enum class BasisFamily { Linear, Quadratic };

inline int num_local_basis(BasisFamily f) { return f == BasisFamily::Linear ? 3 : 6; }

struct Barycentric {
  double l0 = 1.0 / 3.0;
  double l1 = 1.0 / 3.0;
  double l2 = 1.0 / 3.0;
};

/// Values and reference-coordinate gradients (d/dxi, d/deta) of the local basis. The reference
/// triangle is (0,0),(1,0),(0,1) with l1 = xi, l2 = eta. Quadratic ordering: vertices 0..2 then
/// the midpoints of local edges 0..2 (edge k opposite vertex k).
struct BasisValues {
  int count = 0;
  std::array<double, 6> value{};
  std::array<Vec2, 6> grad{};
};

BasisValues reference_basis(BasisFamily family, const Barycentric& point);

enum class QuadratureEntity { Triangle, Edge };

class QuadratureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// For triangles, points are barycentric and weights sum to 1/2 (reference area). For edges,
/// points are parameters s in [0,1] stored in l1 (l0 = 1 - s) and weights sum to 1.
struct QuadratureRule {
  std::vector<Barycentric> points;
  std::vector<double> weights;
  int exact_degree = 0;
};

/// Triangle rules up to degree 7, edge rules up to degree 9.
const QuadratureRule& quadrature_rule(QuadratureEntity entity, int exact_degree);

/// Gauss-Legendre nodes/weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Affine map of one mesh triangle.
struct ElementMap {
  Point origin;
  double jac[2][2]{};      // columns: v1 - v0, v2 - v0
  double inv_jac_t[2][2]{};  // J^{-T}
  double det = 0.0;

  static ElementMap of(const Mesh& mesh, std::size_t triangle);
  Point to_physical(const Barycentric& b) const;
  Vec2 physical_gradient(const Vec2& ref) const;
};

enum class DomainSelector { Fluid, Porous, Whole };

/// Global numbering of a (possibly vector-valued) Lagrange space restricted to a subdomain.
///
/// Scalar DOFs: the vertices used by the selected triangles (in mesh node order), followed by
/// their edges for the quadratic family (in mesh edge order). Components are blocked:
/// dof = component * scalar_dofs + scalar index.
class DofMap {
 public:
  DofMap(const Mesh& mesh, BasisFamily family, int components, DomainSelector domain);

  const Mesh& mesh() const { return *mesh_; }
  BasisFamily family() const { return family_; }
  int components() const { return components_; }
  DomainSelector domain() const { return domain_; }
  int local_count() const { return num_local_basis(family_); }

  std::size_t scalar_dofs() const { return coords_.size(); }
  std::size_t total_dofs() const { return coords_.size() * static_cast<std::size_t>(components_); }

  bool contains_triangle(std::size_t t) const { return local_[t][0] >= 0; }
  /// Global index of local basis function `local` of triangle `t` for `component`.
  int dof_of(std::size_t t, int local, int component = 0) const {
    return local_[t][static_cast<std::size_t>(local)] + component * static_cast<int>(coords_.size());
  }
  const std::array<int, 6>& scalar_dofs_of(std::size_t t) const { return local_[t]; }

  /// Interpolation point of a scalar DOF.
  const Point& coordinate(std::size_t scalar_dof) const { return coords_[scalar_dof]; }

  /// Scalar DOFs lying on the closure of edges with the given tag.
  const std::vector<char>& boundary_mask(EdgeTag tag) const { return masks_[static_cast<std::size_t>(tag)]; }

  /// Scalar DOFs attached to a mesh edge (2 vertices, plus the midpoint when quadratic), in the
  /// order (node a, node b, midpoint). Entries are -1 when the edge is outside the domain.
  std::array<int, 3> edge_dofs(std::size_t edge) const;

 private:
  const Mesh* mesh_;
  BasisFamily family_;
  int components_;
  DomainSelector domain_;
  std::vector<std::array<int, 6>> local_;
  std::vector<Point> coords_;
  std::vector<int> node_dof_;
  std::vector<int> edge_dof_;
  std::array<std::vector<char>, 3> masks_;
};

std::shared_ptr<const DofMap> build_dof_map(const Mesh& mesh, BasisFamily family, int components,
                                            DomainSelector domain);

}  // namespace nsdarcy
