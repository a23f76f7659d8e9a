#include "nsdarcy/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace nsdarcy {

namespace {

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

int subdivisions(double length, double h) {
  return std::max(1, static_cast<int>(std::lround(length / h)));
}

}  // namespace

InterfaceLine validate_geometry(const Geometry& g) {
  const Rect& f = g.fluid;
  const Rect& p = g.porous;
  if (!(f.width() > 0.0 && f.height() > 0.0)) throw MeshError("fluid rectangle has non-positive area");
  if (!(p.width() > 0.0 && p.height() > 0.0)) throw MeshError("porous rectangle has non-positive area");
  const double scale = std::max({std::abs(f.x_min), std::abs(f.x_max), std::abs(f.y_min), std::abs(f.y_max),
                                 std::abs(p.x_min), std::abs(p.x_max), std::abs(p.y_min), std::abs(p.y_max)});

  InterfaceLine line;
  const bool same_x = close(f.x_min, p.x_min, scale) && close(f.x_max, p.x_max, scale);
  const bool same_y = close(f.y_min, p.y_min, scale) && close(f.y_max, p.y_max, scale);
  if (same_x && close(f.y_min, p.y_max, scale)) {
    line = {true, p.y_max, p.x_min, p.x_max, {0.0, -1.0}};
  } else if (same_x && close(f.y_max, p.y_min, scale)) {
    line = {true, p.y_min, p.x_min, p.x_max, {0.0, 1.0}};
  } else if (same_y && close(f.x_min, p.x_max, scale)) {
    line = {false, p.x_max, p.y_min, p.y_max, {-1.0, 0.0}};
  } else if (same_y && close(f.x_max, p.x_min, scale)) {
    line = {false, p.x_min, p.y_min, p.y_max, {1.0, 0.0}};
  } else {
    throw MeshError("fluid and porous rectangles must share exactly one full side");
  }
  return line;
}

Mesh::Mesh(Geometry geometry, std::vector<Point> nodes, std::vector<std::array<int, 3>> triangles,
           std::vector<Subdomain> domains)
    : geometry_(geometry),
      interface_(validate_geometry(geometry)),
      nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      domains_(std::move(domains)) {
  if (domains_.size() != triangles_.size()) throw MeshError("one subdomain label per triangle required");
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size()) throw MeshError("triangle references missing node");
    }
    if (!(signed_area(t) > 0.0)) throw MeshError("triangle " + std::to_string(t) + " is not counterclockwise");
  }

  std::map<std::pair<int, int>, int> lookup;
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.nodes = {key.first, key.second};
        e.triangles = {static_cast<int>(t), -1};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.triangles[1] != -1) throw MeshError("edge shared by more than two triangles");
        e.triangles[1] = static_cast<int>(t);
      }
      triangle_edges_[t][k] = it->second;
    }
  }

  for (Edge& e : edges_) {
    if (e.triangles[1] == -1) {
      e.tag = domains_[e.triangles[0]] == Subdomain::Fluid ? EdgeTag::GammaF : EdgeTag::GammaP;
    } else if (domains_[e.triangles[0]] != domains_[e.triangles[1]]) {
      e.tag = EdgeTag::Interface;
    }
  }
}

double Mesh::signed_area(std::size_t t) const {
  const Point& a = nodes_[triangles_[t][0]];
  const Point& b = nodes_[triangles_[t][1]];
  const Point& c = nodes_[triangles_[t][2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point Mesh::centroid(std::size_t t) const {
  const Point& a = nodes_[triangles_[t][0]];
  const Point& b = nodes_[triangles_[t][1]];
  const Point& c = nodes_[triangles_[t][2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double Mesh::edge_length(std::size_t e) const {
  const Point& a = nodes_[edges_[e].nodes[0]];
  const Point& b = nodes_[edges_[e].nodes[1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

Mesh build_two_domain_mesh(const Geometry& geometry, double h) {
  if (!(h > 0.0)) throw MeshError("mesh size h must be positive");
  validate_geometry(geometry);

  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Subdomain> domains;
  std::map<std::pair<long long, long long>, int> by_position;

  auto add_rect = [&](const Rect& r, Subdomain domain) {
    const int nx = subdivisions(r.width(), h);
    const int ny = subdivisions(r.height(), h);
    std::vector<int> ids(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const double x = i == nx ? r.x_max : r.x_min + r.width() * i / nx;
        const double y = j == ny ? r.y_max : r.y_min + r.height() * j / ny;
        const std::pair<long long, long long> key{std::llround(x * 1e9), std::llround(y * 1e9)};
        auto [it, inserted] = by_position.try_emplace(key, static_cast<int>(nodes.size()));
        if (inserted) nodes.push_back({x, y});
        ids[static_cast<std::size_t>(j * (nx + 1) + i)] = it->second;
      }
    }
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int ll = ids[static_cast<std::size_t>(j * (nx + 1) + i)];
        const int lr = ids[static_cast<std::size_t>(j * (nx + 1) + i + 1)];
        const int ur = ids[static_cast<std::size_t>((j + 1) * (nx + 1) + i + 1)];
        const int ul = ids[static_cast<std::size_t>((j + 1) * (nx + 1) + i)];
        triangles.push_back({ll, lr, ur});
        triangles.push_back({ll, ur, ul});
        domains.push_back(domain);
        domains.push_back(domain);
      }
    }
  };

  add_rect(geometry.porous, Subdomain::Porous);
  add_rect(geometry.fluid, Subdomain::Fluid);

  Mesh mesh(geometry, std::move(nodes), std::move(triangles), std::move(domains));

  // Conformity: every interface node must be shared, i.e. the interface must be tiled by edges
  // carrying the Interface tag.
  double tiled = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge(e).tag == EdgeTag::Interface) tiled += mesh.edge_length(e);
  }
  const InterfaceLine& line = mesh.interface_line();
  if (std::abs(tiled - (line.hi - line.lo)) > 1e-9 * (line.hi - line.lo)) {
    throw MeshError("interface is not conforming for this mesh size");
  }
  return mesh;
}

std::vector<TaggedEdge> tagged_edges(const Mesh& mesh, EdgeTag tag) {
  std::vector<TaggedEdge> out;
  const Vec2 n_f = mesh.interface_line().normal;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (edge.tag != tag) continue;
    TaggedEdge te;
    te.edge = static_cast<int>(e);
    te.a = mesh.node(edge.nodes[0]);
    te.b = mesh.node(edge.nodes[1]);
    te.length = mesh.edge_length(e);
    if (tag == EdgeTag::Interface) {
      te.normal = n_f;
      te.triangle = mesh.domain_of_triangle(edge.triangles[0]) == Subdomain::Fluid ? edge.triangles[0]
                                                                                    : edge.triangles[1];
    } else {
      te.triangle = edge.triangles[0];
      // Outward normal: rotate the edge direction and flip it away from the triangle centroid.
      const double dx = (te.b.x - te.a.x) / te.length;
      const double dy = (te.b.y - te.a.y) / te.length;
      Vec2 n{dy, -dx};
      const Point c = mesh.centroid(static_cast<std::size_t>(te.triangle));
      if (n.x * (te.a.x - c.x) + n.y * (te.a.y - c.y) < 0.0) n = {-n.x, -n.y};
      te.normal = n;
    }
    te.tangent = {-te.normal.y, te.normal.x};
    out.push_back(te);
  }
  return out;
}

}  // namespace nsdarcy
