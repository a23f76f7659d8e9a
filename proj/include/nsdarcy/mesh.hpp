#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nsdarcy {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool contains(const Point& p, double tol = 1e-12) const {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol;
  }
};

enum class Subdomain { Fluid, Porous };
enum class EdgeTag { GammaF, GammaP, Interface };

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Free-flow rectangle and porous rectangle sharing one full side.
struct Geometry {
  Rect fluid;
  Rect porous;
};

/// Orientation of the shared side and the unit normal pointing from fluid into porous.
struct InterfaceLine {
  bool horizontal = true;  // true: y = coordinate; false: x = coordinate
  double coordinate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  Vec2 normal;  // fluid -> porous
};

/// Throws MeshError unless the rectangles have positive area and share exactly one full side.
InterfaceLine validate_geometry(const Geometry& geometry);

struct Edge {
  std::array<int, 2> nodes{};
  // Adjacent triangles; second is -1 on the outer boundary.
  std::array<int, 2> triangles{-1, -1};
  std::optional<EdgeTag> tag;
};

/// Conforming triangulation of Omega_f u Gamma u Omega_p.
///
/// Local edge k of a triangle is the edge opposite local vertex k, i.e.
/// (v1,v2), (v2,v0), (v0,v1). Triangles are counterclockwise. The mesh is
/// immutable once built.
class Mesh {
 public:
  Mesh(Geometry geometry, std::vector<Point> nodes, std::vector<std::array<int, 3>> triangles,
       std::vector<Subdomain> domains);

  const Geometry& geometry() const { return geometry_; }
  const InterfaceLine& interface_line() const { return interface_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const Point& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Point>& nodes() const { return nodes_; }
  const std::array<int, 3>& triangle(std::size_t t) const { return triangles_[t]; }
  Subdomain domain_of_triangle(std::size_t t) const { return domains_[t]; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const std::array<int, 3>& triangle_edges(std::size_t t) const { return triangle_edges_[t]; }

  double signed_area(std::size_t t) const;
  Point centroid(std::size_t t) const;
  double edge_length(std::size_t e) const;

 private:
  Geometry geometry_;
  InterfaceLine interface_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Subdomain> domains_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
};

/// Structured two-rectangle mesh: each rectangle is an n_x by n_y grid (n = round(L/h), at
/// least 1), each cell split along its lower-left to upper-right diagonal. Porous nodes are
/// numbered first, lexicographically by (y, x); interface nodes are shared.
Mesh build_two_domain_mesh(const Geometry& geometry, double h);

struct TaggedEdge {
  int edge = -1;
  // Triangle on the side the normal points away from (fluid side for interface edges).
  int triangle = -1;
  Point a;
  Point b;
  Vec2 normal;
  Vec2 tangent;  // normal rotated by +90 degrees
  double length = 0.0;
};

/// Tagged edges with unit normal and tangent. Boundary edges get the outward normal of their
/// subdomain; interface edges get n = n_f (fluid -> porous).
std::vector<TaggedEdge> tagged_edges(const Mesh& mesh, EdgeTag tag);

}  // namespace nsdarcy
