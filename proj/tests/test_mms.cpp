#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "nsdarcy/mms.hpp"

using namespace nsdarcy;

namespace {

constexpr double kPi = std::numbers::pi;

// Fourth-order central differences, independent of the hand-coded derivatives.
constexpr double kStep = 1e-3;

template <class F>
double d1(F&& f, double s) {
  const double h = kStep;
  return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h);
}

template <class F>
double d2(F&& f, double s) {
  const double h = kStep;
  return (-f(s + 2 * h) + 16 * f(s + h) - 30 * f(s) + 16 * f(s - h) - f(s - 2 * h)) / (12 * h * h);
}

struct Probe {
  Point x;
  double t;
};

std::vector<Probe> probes(const Rect& r, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(r.x_min + 0.01, r.x_max - 0.01), uy(r.y_min + 0.01, r.y_max - 0.01),
      ut(0.0, 2.0);
  std::vector<Probe> out;
  for (int i = 0; i < n; ++i) out.push_back({{ux(rng), uy(rng)}, ut(rng)});
  return out;
}

double comp(const Vec2& v, int i) { return i == 0 ? v.x : v.y; }

class Derivatives : public ::testing::TestWithParam<CaseId> {};

}  // namespace

TEST_P(Derivatives, VelocityMatchesFiniteDifferences) {
  const ManufacturedCase c(GetParam());
  for (const Probe& p : probes(ManufacturedCase::geometry().fluid, 40, 1)) {
    const Vec2 ut = c.velocity_dt(p.x, p.t);
    const Mat2 g = c.velocity_grad(p.x, p.t);
    const Vec2 lap = c.velocity_laplacian(p.x, p.t);
    for (int i = 0; i < 2; ++i) {
      auto in_t = [&](double s) { return comp(c.velocity(p.x, s), i); };
      auto in_x = [&](double s) { return comp(c.velocity({s, p.x.y}, p.t), i); };
      auto in_y = [&](double s) { return comp(c.velocity({p.x.x, s}, p.t), i); };
      EXPECT_NEAR(comp(ut, i), d1(in_t, p.t), 1e-10);
      EXPECT_NEAR(g[i][0], d1(in_x, p.x.x), 1e-10);
      EXPECT_NEAR(g[i][1], d1(in_y, p.x.y), 1e-10);
      EXPECT_NEAR(comp(lap, i), d2(in_x, p.x.x) + d2(in_y, p.x.y), 1e-7);
    }
  }
}

TEST_P(Derivatives, PressureAndHeadMatchFiniteDifferences) {
  const ManufacturedCase c(GetParam());
  for (const Probe& p : probes(ManufacturedCase::geometry().fluid, 40, 2)) {
    const Vec2 gp = c.pressure_grad(p.x, p.t);
    const double scale = 1.0 + std::abs(gp.x) + std::abs(gp.y);
    EXPECT_NEAR(gp.x, d1([&](double s) { return c.pressure({s, p.x.y}, p.t); }, p.x.x), 1e-9 * scale);
    EXPECT_NEAR(gp.y, d1([&](double s) { return c.pressure({p.x.x, s}, p.t); }, p.x.y), 1e-9 * scale);
  }
  for (const Probe& p : probes(ManufacturedCase::geometry().porous, 40, 3)) {
    const Vec2 g = c.head_grad(p.x, p.t);
    const auto h = c.head_hessian(p.x, p.t);
    auto in_x = [&](double s) { return c.head({s, p.x.y}, p.t); };
    auto in_y = [&](double s) { return c.head({p.x.x, s}, p.t); };
    const double scale = 1.0 + std::abs(c.head(p.x, p.t)) + std::abs(h[0]) + std::abs(h[2]);
    EXPECT_NEAR(c.head_dt(p.x, p.t), d1([&](double s) { return c.head(p.x, s); }, p.t), 1e-9 * scale);
    EXPECT_NEAR(g.x, d1(in_x, p.x.x), 1e-9 * scale);
    EXPECT_NEAR(g.y, d1(in_y, p.x.y), 1e-9 * scale);
    EXPECT_NEAR(h[0], d2(in_x, p.x.x), 1e-6 * scale);
    EXPECT_NEAR(h[2], d2(in_y, p.x.y), 1e-6 * scale);
    auto dx_at_y = [&](double s) { return d1([&](double r) { return c.head({r, s}, p.t); }, p.x.x); };
    EXPECT_NEAR(h[1], d1(dx_at_y, p.x.y), 1e-6 * scale);
  }
}

TEST_P(Derivatives, ForcingFromFiniteDifferences) {
  const ManufacturedCase c(GetParam());
  const double nu = 0.37;
  for (const Probe& p : probes(ManufacturedCase::geometry().fluid, 30, 4)) {
    const Vec2 f = c.fluid_forcing(p.x, p.t, nu);
    const Vec2 u = c.velocity(p.x, p.t);
    for (int i = 0; i < 2; ++i) {
      auto in_x = [&](double s) { return comp(c.velocity({s, p.x.y}, p.t), i); };
      auto in_y = [&](double s) { return comp(c.velocity({p.x.x, s}, p.t), i); };
      const double dp = i == 0 ? d1([&](double s) { return c.pressure({s, p.x.y}, p.t); }, p.x.x)
                               : d1([&](double s) { return c.pressure({p.x.x, s}, p.t); }, p.x.y);
      const double expect = d1([&](double s) { return comp(c.velocity(p.x, s), i); }, p.t) -
                            nu * (d2(in_x, p.x.x) + d2(in_y, p.x.y)) + dp + u.x * d1(in_x, p.x.x) +
                            u.y * d1(in_y, p.x.y);
      EXPECT_NEAR(comp(f, i), expect, 1e-8 * (1.0 + std::abs(expect)));
    }
  }
  const Tensor2 k{2.0, 0.3, 0.7};
  for (const Probe& p : probes(ManufacturedCase::geometry().porous, 30, 5)) {
    auto flux_x = [&](double s) {
      const Point q{s, p.x.y};
      return k.apply(Vec2{d1([&](double r) { return c.head({r, q.y}, p.t); }, q.x),
                          d1([&](double r) { return c.head({q.x, r}, p.t); }, q.y)}).x;
    };
    auto flux_y = [&](double s) {
      const Point q{p.x.x, s};
      return k.apply(Vec2{d1([&](double r) { return c.head({r, q.y}, p.t); }, q.x),
                          d1([&](double r) { return c.head({q.x, r}, p.t); }, q.y)}).y;
    };
    const double expect = 0.8 * d1([&](double s) { return c.head(p.x, s); }, p.t) - d1(flux_x, p.x.x) - d1(flux_y, p.x.y);
    EXPECT_NEAR(c.porous_forcing(p.x, p.t, 0.8, k), expect, 1e-6 * (1.0 + std::abs(expect)));
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, Derivatives, ::testing::Values(CaseId::Ex1, CaseId::Ex2));

TEST(Forcing, Ex2AtHalfPiIsTheTimeDerivative) {
  const ManufacturedCase c(CaseId::Ex2);
  const double l = 1.0 / (20.0 * kPi * kPi);
  const double t = kPi / 2;
  for (const Probe& p : probes(ManufacturedCase::geometry().fluid, 10, 6)) {
    const double x = p.x.x, y = p.x.y;
    // cos t = 0: only u_t = -sin t * (spatial u) survives
    const Vec2 f = c.fluid_forcing(p.x, t, 0.001);
    EXPECT_NEAR(f.x, -l * std::pow(std::sin(kPi * x), 2) * std::sin(2 * kPi * y), 1e-15);
    EXPECT_NEAR(f.y, l * std::sin(2 * kPi * x) * std::pow(std::sin(kPi * y), 2), 1e-15);
  }
}

TEST(Forcing, Ex1PorousAtBottom) {
  // y = -1: phi and phi_t vanish, f_p = -c x^2 (x-1)^2 * d_yy[(y+1)^2 y^2] = -2c x^2 (x-1)^2 cos t
  const ManufacturedCase c(CaseId::Ex1);
  const double cc = 64.0 * kPi * kPi;
  for (double x : {0.2, 0.5, 0.9}) {
    const double expect = -2.0 * cc * x * x * (x - 1) * (x - 1) * std::cos(0.3);
    EXPECT_NEAR(c.porous_forcing({x, -1.0}, 0.3, 1.0, Tensor2{}), expect, 1e-11 * std::abs(expect));
  }
}

TEST(Forcing, Ex2OnLeftWallOnlyViscousAndPressure) {
  // x = 0: u = 0 and grad u has no convective effect; f = -nu lap u + grad p.
  const ManufacturedCase c(CaseId::Ex2);
  const double l = 1.0 / (20.0 * kPi * kPi), nu = 0.01, t = 0.4;
  for (double y : {0.1, 0.35, 0.8}) {
    const Vec2 f = c.fluid_forcing({0.0, y}, t, nu);
    EXPECT_NEAR(f.x, -nu * 2.0 * kPi * kPi * l * std::sin(2 * kPi * y) * std::cos(t), 1e-15);
    EXPECT_NEAR(f.y, kPi * std::cos(kPi * y) * std::cos(t), 1e-14);
  }
}

TEST(Interface, ConditionsOnGamma) {
  const Mesh mesh = build_two_domain_mesh(ManufacturedCase::geometry(), 0.25);
  const Vec2 n = mesh.interface_line().normal;
  for (CaseId id : {CaseId::Ex1, CaseId::Ex2}) {
    const ManufacturedCase c(id);
    const NsdParams prm = c.params(mesh);
    const double beta = prm.alpha * std::sqrt(prm.nu * prm.g / 2.0);
    double worst_tangential = 0.0;
    for (double t : {0.0, 0.3, 0.9, 1.7, 2.5}) {
      for (int i = 0; i < 100; ++i) {
        const Point x{(i + 0.5) / 100.0, 0.0};
        const auto r = c.interface_residual(x, t, n, prm, beta);
        EXPECT_LE(std::abs(r.mass), 1e-12);
        EXPECT_LE(std::abs(r.normal), 1e-12);
        worst_tangential = std::max(worst_tangential, std::abs(r.tangential));
      }
    }
    if (id == CaseId::Ex1) EXPECT_LE(worst_tangential, 1e-12);
    else EXPECT_GT(worst_tangential, 1e-6);  // compensated by an interface load
  }
}

TEST(Interface, Ex2TangentialResidualClosedForm) {
  const ManufacturedCase c(CaseId::Ex2);
  const Mesh mesh = build_two_domain_mesh(ManufacturedCase::geometry(), 0.5);
  const NsdParams prm = c.params(mesh);
  const double l = 1.0 / (20.0 * kPi * kPi), t = 0.7;
  for (double x : {0.1, 0.5, 0.77}) {
    const auto r = c.interface_residual({x, 0.0}, t, {0.0, -1.0}, prm, 1.0);
    EXPECT_NEAR(r.tangential, 2.0 * kPi * l * prm.nu * std::pow(std::sin(kPi * x), 2) * std::cos(t), 1e-16);
  }
}

TEST(Emac, PressureShift) {
  const ManufacturedCase c(CaseId::Ex1);
  const Point x{0.3, 0.6};
  const Vec2 u = c.velocity(x, 0.2);
  EXPECT_DOUBLE_EQ(c.emac_pressure(x, 0.2), c.pressure(x, 0.2) - 0.5 * (u.x * u.x + u.y * u.y));
}

TEST(L2Error, Examples) {
  const Mesh mesh = build_two_domain_mesh(ManufacturedCase::geometry(), 0.25);
  const auto p1 = build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Porous);
  const ScalarFn lin = [](const Point& x) { return 1.0 + 2.0 * x.x - 3.0 * x.y; };
  EXPECT_LE(l2_error(interpolate(p1, lin), lin), 1e-14);
  EXPECT_NEAR(l2_error(Field(p1), ScalarFn([](const Point&) { return 1.0; })), 1.0, 1e-14);
  const auto p2 = build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Fluid);
  const VectorFn quad = [](const Point& x) { return Vec2{x.x * x.x, -2.0 * x.x * x.y}; };
  EXPECT_LE(l2_error(interpolate(p2, quad), quad), 1e-14);
  // |(3,4)| over unit area
  EXPECT_NEAR(l2_error(Field(p2), VectorFn([](const Point&) { return Vec2{3.0, 4.0}; })), 5.0, 1e-13);
}

TEST(L2Error, TranslationInvariant) {
  const Geometry moved{{2, 3, 5, 6}, {2, 3, 4, 5}};
  const Mesh a = build_two_domain_mesh(ManufacturedCase::geometry(), 0.25);
  const Mesh b = build_two_domain_mesh(moved, 0.25);
  auto sa = build_dof_map(a, BasisFamily::Linear, 1, DomainSelector::Fluid);
  auto sb = build_dof_map(b, BasisFamily::Linear, 1, DomainSelector::Fluid);
  const Field fa = interpolate(sa, ScalarFn([](const Point& x) { return std::sin(3 * x.x) * x.y; }));
  const Field fb = interpolate(sb, ScalarFn([](const Point& x) { return std::sin(3 * (x.x - 2)) * (x.y - 5); }));
  const double ea = l2_error(fa, ScalarFn([](const Point& x) { return std::exp(x.x) * x.y; }));
  const double eb = l2_error(fb, ScalarFn([](const Point& x) { return std::exp(x.x - 2) * (x.y - 5); }));
  EXPECT_NEAR(ea, eb, 1e-13 * ea);
}

TEST(FittedRate, ExactPowerLaws) {
  const std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y1, y2;
  for (double v : x) {
    y1.push_back(3.0 * v);
    y2.push_back(0.5 * v * v);
  }
  EXPECT_NEAR(fitted_rate(x, y1), 1.0, 1e-12);
  EXPECT_NEAR(fitted_rate(x, y2), 2.0, 1e-12);
  EXPECT_THROW(fitted_rate({0.1}, {1.0}), std::invalid_argument);
}

TEST(FittedRate, LeastSquaresNotEndpoints) {
  // log y = {0, -1, -1.5} against log x = {0, -1, -2}: slope 0.75
  const std::vector<double> x{1.0, std::exp(-1.0), std::exp(-2.0)};
  const std::vector<double> y{1.0, std::exp(-1.0), std::exp(-1.5)};
  EXPECT_NEAR(fitted_rate(x, y), 0.75, 1e-12);
}

TEST(Study, CsvAndFactorizations) {
  const ConvergenceStudy s =
      convergence_study(CaseId::Ex2, Scheme::One, Convection::Standard, {0.25, 0.125}, [](double h) { return h / 4; }, 0.25);
  ASSERT_EQ(s.rows.size(), 2u);
  for (const auto& r : s.rows) {
    EXPECT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.factorizations, 2);
    EXPECT_GT(r.err_u, 0.0);
  }
  EXPECT_LT(s.rows[1].err_phi, s.rows[0].err_phi);
  const std::string path = ::testing::TempDir() + "conv.csv";
  write_convergence_csv(s, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "h,dt,err_u,err_phi,err_p");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
  std::remove(path.c_str());
}

namespace {

// Final fields of Ex1 on a fixed mesh.
std::pair<Field, Field> ex1_final(const Mesh& mesh, Scheme scheme, double dt, double t_end) {
  const ManufacturedCase c(CaseId::Ex1);
  NsdConfig cfg;
  cfg.params = c.params(mesh);
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.scheme = scheme;
  NsdSolver s(mesh, cfg, manufactured_data(c, mesh, cfg.params));
  s.initialize([&](const Point& x) { return c.velocity(x, 0.0); }, [&](const Point& x) { return c.head(x, 0.0); },
               [&](const Point& x) { return c.pressure(x, 0.0); });
  s.run();
  return {s.velocity(), s.head()};
}

double l2_diff(const Field& a, const Field& b) {
  Field d(a.space);
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = a.values[i] - b.values[i];
  return l2_error(d, VectorFn([](const Point&) { return Vec2{}; }));
}

}  // namespace

TEST(SelfConvergence, SchemeOneHalvingOnFixedMesh) {
  // Differences of successive halvings cancel the spatial error; first order gives ratio 2.
  const Mesh mesh = build_two_domain_mesh(ManufacturedCase::geometry(), 0.125);
  const auto a = ex1_final(mesh, Scheme::One, 0.02, 0.2);
  const auto b = ex1_final(mesh, Scheme::One, 0.01, 0.2);
  const auto c = ex1_final(mesh, Scheme::One, 0.005, 0.2);
  const double ratio = l2_diff(a.first, b.first) / l2_diff(b.first, c.first);
  EXPECT_GE(ratio, 1.6);
  EXPECT_LE(ratio, 2.4);
}
