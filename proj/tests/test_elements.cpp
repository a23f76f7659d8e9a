#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nsdarcy/elements.hpp"

using namespace nsdarcy;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of xi^a eta^b over the reference triangle.
double monomial_exact(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

double integrate(const QuadratureRule& r, int a, int b) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.points.size(); ++q) {
    s += r.weights[q] * std::pow(r.points[q].l1, a) * std::pow(r.points[q].l2, b);
  }
  return s;
}

const Barycentric kNodes[6] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};

Geometry unit_stack() { return {{0, 1, 0, 1}, {0, 1, -1, 0}}; }

}  // namespace

TEST(Basis, NodalProperty) {
  for (auto f : {BasisFamily::Linear, BasisFamily::Quadratic}) {
    const int n = num_local_basis(f);
    for (int i = 0; i < n; ++i) {
      const BasisValues b = reference_basis(f, kNodes[i]);
      for (int j = 0; j < n; ++j) EXPECT_NEAR(b.value[static_cast<std::size_t>(j)], i == j ? 1.0 : 0.0, 1e-15);
    }
  }
}

TEST(Basis, PartitionOfUnity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    double a = u(rng), b = u(rng);
    if (a + b > 1) { a = 1 - a; b = 1 - b; }
    const Barycentric p{1 - a - b, a, b};
    for (auto f : {BasisFamily::Linear, BasisFamily::Quadratic}) {
      const BasisValues v = reference_basis(f, p);
      double s = 0, gx = 0, gy = 0;
      for (int i = 0; i < v.count; ++i) {
        s += v.value[static_cast<std::size_t>(i)];
        gx += v.grad[static_cast<std::size_t>(i)].x;
        gy += v.grad[static_cast<std::size_t>(i)].y;
      }
      EXPECT_NEAR(s, 1.0, 1e-14);
      EXPECT_NEAR(gx, 0.0, 1e-13);
      EXPECT_NEAR(gy, 0.0, 1e-13);
    }
  }
}

TEST(Basis, GradientMatchesFiniteDifference) {
  const Barycentric p{0.2, 0.3, 0.5};
  const double h = 1e-6;
  for (auto f : {BasisFamily::Linear, BasisFamily::Quadratic}) {
    const BasisValues v = reference_basis(f, p);
    const BasisValues xp = reference_basis(f, {p.l0 - h, p.l1 + h, p.l2});
    const BasisValues xm = reference_basis(f, {p.l0 + h, p.l1 - h, p.l2});
    const BasisValues yp = reference_basis(f, {p.l0 - h, p.l1, p.l2 + h});
    const BasisValues ym = reference_basis(f, {p.l0 + h, p.l1, p.l2 - h});
    for (int i = 0; i < v.count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      EXPECT_NEAR(v.grad[k].x, (xp.value[k] - xm.value[k]) / (2 * h), 1e-8);
      EXPECT_NEAR(v.grad[k].y, (yp.value[k] - ym.value[k]) / (2 * h), 1e-8);
    }
  }
}

TEST(Quadrature, TriangleExactness) {
  for (int d = 1; d <= 7; ++d) {
    const QuadratureRule& r = quadrature_rule(QuadratureEntity::Triangle, d);
    double w = 0.0;
    for (double x : r.weights) w += x;
    EXPECT_NEAR(w, 0.5, 1e-15);
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        EXPECT_NEAR(integrate(r, a, b), monomial_exact(a, b), 1e-15) << "degree " << d << " x^" << a << " y^" << b;
      }
    }
  }
}

TEST(Quadrature, CentroidAndQuinticExamples) {
  const QuadratureRule& c = quadrature_rule(QuadratureEntity::Triangle, 1);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.weights[0], 0.5);
  // 2! 3! / 7!
  EXPECT_NEAR(integrate(quadrature_rule(QuadratureEntity::Triangle, 5), 2, 3), 1.0 / 420.0, 1e-14);
}

TEST(Quadrature, EdgeRules) {
  const QuadratureRule& r3 = quadrature_rule(QuadratureEntity::Edge, 3);
  ASSERT_EQ(r3.points.size(), 2u);
  EXPECT_NEAR(r3.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(r3.weights[1], 0.5, 1e-15);
  for (int d = 1; d <= 9; ++d) {
    const QuadratureRule& r = quadrature_rule(QuadratureEntity::Edge, d);
    for (int k = 0; k <= d; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.points.size(); ++q) s += r.weights[q] * std::pow(r.points[q].l1, k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-15) << "degree " << d << " s^" << k;
    }
  }
}

TEST(Quadrature, RejectsUnsupported) {
  EXPECT_THROW(quadrature_rule(QuadratureEntity::Triangle, 8), QuadratureError);
  EXPECT_THROW(quadrature_rule(QuadratureEntity::Edge, 10), QuadratureError);
  EXPECT_THROW(quadrature_rule(QuadratureEntity::Triangle, 0), QuadratureError);
}

TEST(Quadrature, QuadraticMassEntries) {
  // Reference P2 mass matrix (area 1/2): diag vertex 6/360, vertex-vertex -1/360,
  // vertex-opposite-midpoint -4/360, midpoint diag 32/360, midpoint-midpoint 16/360.
  const QuadratureRule& r = quadrature_rule(QuadratureEntity::Triangle, 4);
  double m[6][6] = {};
  for (std::size_t q = 0; q < r.points.size(); ++q) {
    const BasisValues b = reference_basis(BasisFamily::Quadratic, r.points[q]);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m[i][j] += r.weights[q] * b.value[static_cast<std::size_t>(i)] * b.value[static_cast<std::size_t>(j)];
  }
  const double s = 1.0 / 360.0;
  EXPECT_NEAR(m[0][0], 6 * s, 1e-15);
  EXPECT_NEAR(m[0][1], -1 * s, 1e-15);
  EXPECT_NEAR(m[0][3], -4 * s, 1e-15);
  EXPECT_NEAR(m[0][4], 0.0, 1e-15);
  EXPECT_NEAR(m[3][3], 32 * s, 1e-15);
  EXPECT_NEAR(m[3][4], 16 * s, 1e-15);
}

TEST(DofMap, SingleTriangleCounts) {
  const Mesh m(unit_stack(), {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {Subdomain::Fluid});
  EXPECT_EQ(build_dof_map(m, BasisFamily::Linear, 1, DomainSelector::Whole)->total_dofs(), 3u);
  EXPECT_EQ(build_dof_map(m, BasisFamily::Quadratic, 2, DomainSelector::Whole)->total_dofs(), 12u);
}

TEST(DofMap, SquareCounts) {
  const Mesh m(unit_stack(), {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
               {Subdomain::Fluid, Subdomain::Fluid});
  EXPECT_EQ(build_dof_map(m, BasisFamily::Quadratic, 1, DomainSelector::Whole)->total_dofs(), 9u);
}

TEST(DofMap, DomainRestrictionAndSharedInterface) {
  const Mesh m = build_two_domain_mesh(unit_stack(), 0.5);
  const auto whole = build_dof_map(m, BasisFamily::Quadratic, 1, DomainSelector::Whole);
  const auto fluid = build_dof_map(m, BasisFamily::Quadratic, 2, DomainSelector::Fluid);
  const auto porous = build_dof_map(m, BasisFamily::Linear, 1, DomainSelector::Porous);
  // 5x5 grid of P2 points per square, one shared row of 5.
  EXPECT_EQ(whole->total_dofs(), 45u);
  EXPECT_EQ(fluid->total_dofs(), 50u);
  EXPECT_EQ(porous->total_dofs(), 9u);
  const auto& mask = fluid->boundary_mask(EdgeTag::Interface);
  int count = 0;
  for (std::size_t i = 0; i < fluid->scalar_dofs(); ++i) {
    if (mask[i]) {
      ++count;
      EXPECT_NEAR(fluid->coordinate(i).y, 0.0, 1e-15);
    }
  }
  EXPECT_EQ(count, 5);
  // GammaF closure includes the corners on the interface line.
  const auto& gf = fluid->boundary_mask(EdgeTag::GammaF);
  int corners = 0;
  for (std::size_t i = 0; i < fluid->scalar_dofs(); ++i)
    if (gf[i] && mask[i]) ++corners;
  EXPECT_EQ(corners, 2);
}

TEST(DofMap, Bijection) {
  const Mesh m = build_two_domain_mesh(unit_stack(), 0.25);
  const auto d = build_dof_map(m, BasisFamily::Quadratic, 2, DomainSelector::Porous);
  std::vector<int> seen(d->total_dofs(), 0);
  // Each dof must be reached and its coordinate must match the local node position.
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!d->contains_triangle(t)) continue;
    const ElementMap em = ElementMap::of(m, t);
    for (int i = 0; i < 6; ++i) {
      for (int c = 0; c < 2; ++c) seen[static_cast<std::size_t>(d->dof_of(t, i, c))] = 1;
      const Point p = em.to_physical(kNodes[i]);
      const Point& q = d->coordinate(static_cast<std::size_t>(d->dof_of(t, i)));
      EXPECT_NEAR(p.x, q.x, 1e-15);
      EXPECT_NEAR(p.y, q.y, 1e-15);
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(DofMap, InterpolationReproducesQuadratics) {
  const Mesh m = build_two_domain_mesh(unit_stack(), 0.25);
  const auto d = build_dof_map(m, BasisFamily::Quadratic, 1, DomainSelector::Whole);
  auto f = [](const Point& p) { return 1.0 + 2.0 * p.x - p.y + 3.0 * p.x * p.y - p.x * p.x + 0.5 * p.y * p.y; };
  std::vector<double> c(d->total_dofs());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f(d->coordinate(i));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    double a = u(rng), b = u(rng);
    if (a + b > 1) { a = 1 - a; b = 1 - b; }
    const Barycentric p{1 - a - b, a, b};
    const BasisValues v = reference_basis(BasisFamily::Quadratic, p);
    const ElementMap em = ElementMap::of(m, t);
    double s = 0.0;
    Vec2 g{};
    for (int i = 0; i < 6; ++i) {
      const double ci = c[static_cast<std::size_t>(d->dof_of(t, i))];
      s += ci * v.value[static_cast<std::size_t>(i)];
      const Vec2 gi = em.physical_gradient(v.grad[static_cast<std::size_t>(i)]);
      g.x += ci * gi.x;
      g.y += ci * gi.y;
    }
    const Point x = em.to_physical(p);
    EXPECT_NEAR(s, f(x), 1e-12);
    EXPECT_NEAR(g.x, 2.0 + 3.0 * x.y - 2.0 * x.x, 1e-12);
    EXPECT_NEAR(g.y, -1.0 + 3.0 * x.x + x.y, 1e-12);
  }
}
