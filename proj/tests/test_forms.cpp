#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nsdarcy/forms.hpp"
#include "nsdarcy/oracle.hpp"

using namespace nsdarcy;

namespace {

// Fluid on top of porous, interface y = 0, n = (0, -1).
const Geometry kStack{{0, 1, 0, 1}, {0, 1, -1, 0}};

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

struct Spaces {
  Mesh mesh;
  std::shared_ptr<const DofMap> vf, pf, hp, vp, whole;
  explicit Spaces(double h, const Geometry& g = kStack) : mesh(build_two_domain_mesh(g, h)) {
    vf = build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Fluid);
    pf = build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Fluid);
    hp = build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Porous);
    vp = build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Porous);
    whole = build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Whole);
  }
};

// Random velocity vanishing on the outer fluid boundary.
Field random_hf(const std::shared_ptr<const DofMap>& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(s);
  const auto& mask = s->boundary_mask(EdgeTag::GammaF);
  const std::size_t n = s->scalar_dofs();
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) continue;
    f.values[i] = u(rng);
    f.values[n + i] = u(rng);
  }
  return f;
}

}  // namespace

TEST(Mass, TwoTriangleSquare) {
  Spaces s(1.0);
  const CsrMatrix m = mass_matrix(*s.hp);
  ASSERT_EQ(m.rows(), 4u);
  // porous nodes: (0,-1) (1,-1) (0,0) (1,0); diagonal (0,-1)-(1,0)
  EXPECT_NEAR(m.coeff(0, 0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(m.coeff(1, 1), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(m.coeff(0, 3), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(m.coeff(0, 1), 1.0 / 24.0, 1e-15);
  EXPECT_NEAR(m.coeff(1, 2), 0.0, 1e-15);
  EXPECT_NEAR(bilinear(m, ones(4), ones(4)), 1.0, 1e-14);
  const std::vector<double> c(4, 3.0);
  EXPECT_NEAR(bilinear(m, c, c), 9.0, 1e-13);
}

TEST(Mass, SymmetricAndAreaOnP2Vector) {
  Spaces s(0.25);
  const CsrMatrix m = mass_matrix(*s.vf, 2.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) ASSERT_NEAR(m.coeff(i, j), m.coeff(j, i), 1e-15);
  const Field e1 = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{1.0, 0.0}; }));
  EXPECT_NEAR(bilinear(m, e1.values, e1.values), 2.0, 1e-13);
}

TEST(Stiffness, CornerEntryAndNullspace) {
  Spaces s(1.0);
  const CsrMatrix a = stiffness_matrix(*s.hp, 1.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a.coeff(i, i), 1.0, 1e-14);
  for (double r : matvec(a, ones(4))) EXPECT_NEAR(r, 0.0, 1e-14);
  const CsrMatrix ak = stiffness_matrix(*s.hp, uniform_tensor(s.mesh, Tensor2::isotropic(1.0)));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(ak.coeff(i, j), a.coeff(i, j), 1e-14);
}

TEST(Stiffness, AnisotropicEnergy) {
  Spaces s(0.25);
  const CsrMatrix a = stiffness_matrix(*s.hp, uniform_tensor(s.mesh, Tensor2{2.0, 0.0, 1.0}));
  const Field x = interpolate(s.hp, ScalarFn([](const Point& p) { return p.x; }));
  EXPECT_NEAR(bilinear(a, x.values, x.values), 2.0, 1e-13);
}

TEST(Stiffness, RejectsIndefiniteTensor) {
  Spaces s(1.0);
  EXPECT_THROW(stiffness_matrix(*s.hp, uniform_tensor(s.mesh, Tensor2{1.0, 2.0, 1.0})), std::invalid_argument);
}

TEST(Divergence, Examples) {
  Spaces s(0.25);
  const CsrMatrix b = divergence_matrix(*s.vf, *s.pf);
  const Field shift = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{1.0, 0.0}; }));
  for (double r : matvec(b, shift.values)) EXPECT_NEAR(r, 0.0, 1e-14);
  const Field stretch = interpolate(s.vf, VectorFn([](const Point& p) { return Vec2{p.x, 0.0}; }));
  const std::vector<double> bq = matvec(b, stretch.values);
  const std::vector<double> mq = matvec(mass_matrix(*s.pf), ones(s.pf->total_dofs()));
  for (std::size_t i = 0; i < bq.size(); ++i) EXPECT_NEAR(bq[i], mq[i], 1e-14);
  const Field sol = interpolate(s.vf, VectorFn([](const Point& p) { return Vec2{p.x * p.x, -2.0 * p.x * p.y}; }));
  for (double r : matvec(b, sol.values)) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(Gradient, IsTransposeOfDivergenceUpToBoundary) {
  // (grad q, v) + (q, div v) = int_boundary q v.n; zero when v vanishes on the boundary.
  Spaces s(0.5);
  const CsrMatrix g = gradient_matrix(*s.vf, *s.pf);
  const CsrMatrix b = divergence_matrix(*s.vf, *s.pf);
  std::mt19937_64 rng(3);
  Field v(s.vf);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t i = 0; i < s.vf->scalar_dofs(); ++i) {
    const Point& x = s.vf->coordinate(i);
    if (x.x <= 0 || x.x >= 1 || x.y <= 0 || x.y >= 1) continue;
    v.values[i] = u(rng);
    v.values[s.vf->scalar_dofs() + i] = u(rng);
  }
  std::vector<double> q(s.pf->total_dofs());
  for (double& x : q) x = u(rng);
  EXPECT_NEAR(bilinear(g, v.values, q) + bilinear(b, q, v.values), 0.0, 1e-13);
}

TEST(Bjs, Examples) {
  Spaces s(0.25);
  const std::vector<double> coeff(tagged_edges(s.mesh, EdgeTag::Interface).size(), 1.0);
  const CsrMatrix m = bjs_matrix(*s.vf, coeff);
  const Field t = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{1.0, 0.0}; }));
  const Field n = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{0.0, 1.0}; }));
  EXPECT_NEAR(bilinear(m, t.values, t.values), 1.0, 1e-14);
  EXPECT_NEAR(bilinear(m, n.values, n.values), 0.0, 1e-15);
  const std::vector<double> coeff3(coeff.size(), 3.0);
  EXPECT_NEAR(bilinear(bjs_matrix(*s.vf, coeff3), t.values, t.values), 3.0, 1e-13);
}

TEST(Bjs, Coefficients) {
  Spaces s(0.5);
  const TensorField k = uniform_tensor(s.mesh, Tensor2{2.0, 0.0, 2.0});
  for (double c : bjs_coefficients_nsd(s.mesh, 1.0, 1.0, 1.0, k)) EXPECT_NEAR(c, 0.5, 1e-15);
  for (double c : bjs_coefficients_chnsd(s.mesh, 1.0, 1.0, 1.0, k)) EXPECT_NEAR(c, std::sqrt(0.5), 1e-15);
  TensorField bad = k;
  for (auto& t : bad) t = Tensor2{-1.0, 0.0, -1.0};
  EXPECT_THROW(bjs_coefficients_nsd(s.mesh, 1.0, 1.0, 1.0, bad), std::invalid_argument);
}

TEST(Cgamma, Examples) {
  Spaces s(0.25);
  const CsrMatrix c = cgamma_matrix(*s.vf, *s.hp, 1.0);
  const Field down = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{0.0, -1.0}; }));
  const Field side = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{1.0, 0.0}; }));
  const std::vector<double> one = ones(s.hp->total_dofs());
  EXPECT_NEAR(bilinear(c, down.values, one), 1.0, 1e-14);
  EXPECT_NEAR(bilinear(c, side.values, one), 0.0, 1e-15);
  EXPECT_NEAR(bilinear(cgamma_matrix(*s.vf, *s.hp, 9.81), down.values, one), 9.81, 1e-13);
}

TEST(Convection, ZeroAndConstant) {
  Spaces s(0.25);
  const Field zero(s.vf);
  for (double v : convection_vector_a(zero, zero)) EXPECT_EQ(v, 0.0);
  for (double v : convection_vector_b(zero, zero)) EXPECT_EQ(v, 0.0);
  const Field c = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{0.3, -0.4}; }));
  // w = (0, 1): int_Gamma w.n = -1, so a = -1/2 |u|^2 (-1)
  const Field w = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{0.0, 1.0}; }));
  EXPECT_NEAR(dotv(convection_vector_a(c, c), w.values), 0.125, 1e-14);
  EXPECT_NEAR(dotv(convection_vector_b(c, c), w.values), 0.25, 1e-14);
}

TEST(Convection, RotationHasOnlyInterfaceTerm) {
  Spaces s(0.25);
  const Field r = interpolate(s.vf, VectorFn([](const Point& p) { return Vec2{-p.y, p.x}; }));
  const Field w = interpolate(s.vf, VectorFn([](const Point& p) { return Vec2{p.x, 1.0 + p.y}; }));
  // On y = 0: u = (0, x), |u|^2 = x^2, w.n = -1.
  EXPECT_NEAR(dotv(convection_vector_b(r, r), w.values), 1.0 / 3.0, 1e-13);
}

TEST(Convection, SkewForRandomFields) {
  Spaces s(0.125);
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 100; ++trial) {
    const Field u = random_hf(s.vf, rng);
    const double scale = std::pow(norm2(u.values), 3.0);
    EXPECT_LE(std::abs(dotv(convection_vector_b(u, u), u.values)), 1e-12 * scale) << trial;
  }
}

TEST(Convection, DivergenceFreeQuadratic) {
  // (x^2, -2xy) on the unit square above y = 0: the outer boundary flux of |u|^2 u cancels.
  Spaces s(0.125);
  const Field u = interpolate(s.vf, VectorFn([](const Point& p) { return Vec2{p.x * p.x, -2.0 * p.x * p.y}; }));
  const double a = dotv(convection_vector_a(u, u), u.values);
  EXPECT_LE(std::abs(a), 1e-12);
  const double b = dotv(convection_vector_b(u, u), u.values);
  EXPECT_LE(std::abs(b), 1e-12);
}

TEST(Convection, RejectsMixedSpaces) {
  Spaces s(0.5);
  EXPECT_THROW(convection_vector_a(Field(s.vf), Field(s.vp)), std::invalid_argument);
}

TEST(Load, Examples) {
  Spaces s(0.25);
  for (double v : load_vector(*s.pf, ScalarFn([](const Point&) { return 0.0; }))) EXPECT_EQ(v, 0.0);
  double sum = 0.0;
  for (double v : load_vector(*s.pf, ScalarFn([](const Point&) { return 1.0; }))) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  sum = 0.0;
  for (double v : load_vector(*s.pf, ScalarFn([](const Point& p) { return p.x; }))) sum += v;
  EXPECT_NEAR(sum, 0.5, 1e-14);
}

TEST(InterfaceLoad, SumsToLineIntegral) {
  Spaces s(0.25);
  double sum = 0.0;
  for (double v : interface_load(*s.hp, ScalarFn([](const Point& p) { return p.x * p.x; }))) sum += v;
  EXPECT_NEAR(sum, 1.0 / 3.0, 1e-14);
  const std::vector<double> f = interface_load(*s.vf, VectorFn([](const Point& p) { return Vec2{1.0, p.x}; }));
  const Field w = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{1.0, 1.0}; }));
  EXPECT_NEAR(dotv(f, w.values), 1.5, 1e-14);
}

TEST(PhaseCoupling, Examples) {
  Spaces s(0.25);
  const Field one = interpolate(s.whole, ScalarFn([](const Point&) { return 1.0; }));
  const Field x = interpolate(s.whole, ScalarFn([](const Point& p) { return p.x; }));
  for (double v : phase_coupling_vector(x, one, *s.vf)) EXPECT_NEAR(v, 0.0, 1e-15);
  const std::vector<double> a = phase_coupling_vector(one, x, *s.vf);
  const std::vector<double> b = load_vector(*s.vf, VectorFn([](const Point&) { return Vec2{1.0, 0.0}; }));
  EXPECT_LE(oracle::max_abs_diff(a, b), 1e-15);
  const Field w = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{1.0, 0.0}; }));
  EXPECT_NEAR(dotv(phase_coupling_vector(x, x, *s.vf), w.values), 0.5, 1e-14);
}

TEST(Transport, ConstantFieldsGiveFlux) {
  // (u phi, grad psi) with psi = y, u = (0, 1) everywhere, phi = 1: area of both domains.
  Spaces s(0.25);
  const Field one = interpolate(s.whole, ScalarFn([](const Point&) { return 1.0; }));
  const Field uf = interpolate(s.vf, VectorFn([](const Point&) { return Vec2{0.0, 1.0}; }));
  const Field up = interpolate(s.vp, VectorFn([](const Point&) { return Vec2{0.0, 1.0}; }));
  const Field y = interpolate(s.whole, ScalarFn([](const Point& p) { return p.y; }));
  EXPECT_NEAR(dotv(transport_vector(one, uf, up, *s.whole), y.values), 2.0, 1e-13);
}

TEST(Scalars, IntegrateAndGradientEnergy) {
  Spaces s(0.25);
  const Field x = interpolate(s.whole, ScalarFn([](const Point& p) { return p.x; }));
  EXPECT_NEAR(integrate_function(x, [](double v) { return v; }), 1.0, 1e-14);
  EXPECT_NEAR(weighted_gradient_energy(x, x, [](double) { return 3.0; }), 6.0, 1e-13);
}

TEST(Linearity, RandomProbes) {
  Spaces s(0.5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Field phi = random_hf(s.vf, rng);
  Field mu1(s.whole), mu2(s.whole), ph(s.whole);
  for (double& v : mu1.values) v = u(rng);
  for (double& v : mu2.values) v = u(rng);
  for (double& v : ph.values) v = u(rng);
  Field sum(s.whole);
  for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] = 2.0 * mu1.values[i] - mu2.values[i];
  const auto a = phase_coupling_vector(ph, mu1, *s.vf);
  const auto b = phase_coupling_vector(ph, mu2, *s.vf);
  const auto c = phase_coupling_vector(ph, sum, *s.vf);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 2.0 * a[i] - b[i], 1e-14);
  // a(u, v, w) is linear in v
  const Field v1 = random_hf(s.vf, rng), v2 = random_hf(s.vf, rng);
  Field v12(s.vf);
  for (std::size_t i = 0; i < v12.values.size(); ++i) v12.values[i] = v1.values[i] + 3.0 * v2.values[i];
  const auto x1 = convection_vector_a(phi, v1), x2 = convection_vector_a(phi, v2), x12 = convection_vector_a(phi, v12);
  for (std::size_t i = 0; i < x12.size(); ++i) EXPECT_NEAR(x12[i], x1[i] + 3.0 * x2[i], 1e-13);
}

TEST(Oracle, DenseBasisIsNodal) {
  Spaces s(1.0);
  const oracle::DenseBasis b(*s.vf);
  std::vector<double> v;
  std::vector<Vec2> g;
  for (std::size_t i = 0; i < s.vf->scalar_dofs(); ++i) {
    const Point x = s.vf->coordinate(i);
    b.eval(b.locate(x), x, v, g);
    for (std::size_t j = 0; j < v.size(); ++j) ASSERT_NEAR(v[j], i == j ? 1.0 : 0.0, 1e-13);
  }
}

TEST(Oracle, AllFormsMatchDenseAssembly) {
  const auto results = oracle::run_assembly_checks(7);
  ASSERT_GT(results.size(), 100u);
  for (const auto& r : results) EXPECT_LE(r.error, 1e-12 * r.scale) << r.name;
}
