#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nsdarcy/chnsd.hpp"

using namespace nsdarcy;

namespace {

// fluid below, porous on top
const Geometry kColumn{{0, 1, 0, 1}, {0, 1, 1, 2}};

ChnsdConfig base_config(double dt, double t_end) {
  ChnsdConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.convection = Convection::Emac;
  return c;
}

struct State {
  Field phi, u_f, u_p;
};

State random_state(const ChnsdSolver& s, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const ChnsdSpaces& sp = s.spaces();
  State st{Field(sp.phase), Field(sp.fluid_velocity), Field(sp.porous_velocity)};
  for (double& v : st.phi.values) v = d(rng);
  for (double& v : st.u_f.values) v = amp * d(rng);
  for (double& v : st.u_p.values) v = amp * d(rng);
  return st;
}

Field constant_phase(const ChnsdSolver& s, double c) {
  return interpolate(s.spaces().phase, ScalarFn([c](const Point&) { return c; }));
}

}  // namespace

TEST(Mobility, DefaultValues) {
  const auto m = default_mobility(0.01);
  EXPECT_NEAR(m(1.0), 1e-4, 1e-18);
  EXPECT_NEAR(m(-1.0), 0.01 * std::sqrt(4.0 + 1e-4), 1e-16);
  EXPECT_GT(m(0.3), 0.0);
}

TEST(Relaxation, CorrectionArithmetic) {
  // E^n - E0^{n+1} = 0.5, E1~ = 0.4, dt I = 0.1
  const Relaxation r = relaxation_factor(0.5, 0.4, 1.0, 0.0, 0.1);
  EXPECT_NEAR(r.xi, 1.0, 1e-15);
  EXPECT_EQ(r.flags, kFlagNone);
}

TEST(ChnsdEnergy, Examples) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdConfig cfg = base_config(0.01, 0.1);
  cfg.params.lambda = 1.0;
  cfg.params.eps = 1.0;
  ChnsdSolver s(mesh, cfg);
  const ChnsdSpaces& sp = s.spaces();
  const Field zf(sp.fluid_velocity), zp(sp.porous_velocity);
  EXPECT_NEAR(s.energy(constant_phase(s, 1.0), zf, zp).total(), 0.0, 1e-13);
  // G(0) = 1/4 over an area of 2
  EXPECT_NEAR(s.energy(constant_phase(s, 0.0), zf, zp).total(), 0.5, 1e-14);
  const Field u1 = interpolate(sp.fluid_velocity, VectorFn([](const Point& p) { return Vec2{p.y, -p.x}; }));
  Field u2 = u1;
  for (double& v : u2.values) v *= 2;
  const double k1 = s.energy(constant_phase(s, 1.0), u1, zp).kinetic;
  EXPECT_GT(k1, 0.0);
  EXPECT_NEAR(s.energy(constant_phase(s, 1.0), u2, zp).kinetic, 4.0 * k1, 1e-13 * k1);
  // |u|^2 / 2 over the unit square for (y, -x)
  EXPECT_NEAR(k1, 1.0 / 3.0, 1e-13);
}

TEST(ChnsdEnergy, PorousKineticScalesWithChi) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdConfig cfg = base_config(0.01, 0.1);
  cfg.params.chi = 0.5;
  ChnsdSolver s(mesh, cfg);
  const Field up = interpolate(s.spaces().porous_velocity, VectorFn([](const Point&) { return Vec2{1.0, 0.0}; }));
  EXPECT_NEAR(s.energy(constant_phase(s, 1.0), Field(s.spaces().fluid_velocity), up).kinetic, 1.0, 1e-13);
}

TEST(NoFluxMask, ColumnGeometry) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdSpaces sp(mesh);
  const DofMap& v = *sp.porous_velocity;
  const auto mask = porous_no_flux_mask(v);
  const std::size_t n = v.scalar_dofs();
  ASSERT_EQ(mask.size(), 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = v.coordinate(i);
    const bool side = std::abs(p.x) < 1e-12 || std::abs(p.x - 1) < 1e-12;
    const bool top = std::abs(p.y - 2) < 1e-12;
    EXPECT_EQ(mask[i] != 0, side) << p.x << "," << p.y;
    EXPECT_EQ(mask[n + i] != 0, top) << p.x << "," << p.y;
  }
}

TEST(ChnsdSolver, PurePhaseFixedPoints) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  for (double c : {1.0, -1.0, 0.0}) {
    ChnsdConfig cfg = base_config(0.01, 0.1);
    cfg.params.buoyancy = {0.0, 5.0};
    ChnsdSolver s(mesh, cfg);
    s.initialize(ScalarFn([c](const Point&) { return c; }));
    s.run();
    for (double v : s.phase().values) EXPECT_NEAR(v, c, 1e-12);
    for (double v : s.fluid_velocity().values) EXPECT_NEAR(v, 0.0, 1e-12);
    for (double v : s.porous_velocity().values) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(ChnsdSolver, ZeroEnergyFlagged) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdSolver s(mesh, base_config(0.01, 0.05));
  s.initialize(ScalarFn([](const Point&) { return 1.0; }));
  for (const ChnsdRecord& r : s.run()) {
    EXPECT_EQ(r.flags, kFlagZeroEnergy);
    EXPECT_EQ(r.xi, 1.0);
  }
}

TEST(ChnsdSolver, MassConservedAndEnergyDecays) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdConfig cfg = base_config(0.001, 0.05);
  ChnsdSolver s(mesh, cfg);
  State st = random_state(s, 21, 0.1);
  s.initialize(st.phi, st.u_f, st.u_p);
  double e = s.initial_energy();
  double sum = 0.0;
  ASSERT_NO_THROW(s.run([&](const ChnsdRecord& r) {
    EXPECT_LE(std::abs(r.mass - s.initial_mass()), 1e-12);
    EXPECT_GE(r.xi, 0.0);
    EXPECT_LE(r.energy, e + 1e-12 * s.initial_energy());
    e = r.energy;
    sum += cfg.dt * r.xi * r.dissipation;
  }));
  EXPECT_EQ(s.clamped_steps(), 0);
  EXPECT_LE(std::abs(s.current_energy() + sum - s.initial_energy()), 1e-10 * s.initial_energy());
}

TEST(ChnsdSolver, VelocityRescalingOnly) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdSolver s(mesh, base_config(0.002, 0.02));
  State st = random_state(s, 22, 0.5);
  s.initialize(st.phi, st.u_f, st.u_p);
  for (int k = 0; k < 5; ++k) {
    const ChnsdRecord r = s.step();
    const ChnsdEnergy now = s.energy(s.phase(), s.fluid_velocity(), s.porous_velocity());
    EXPECT_NEAR(now.free, r.free_energy, 1e-14 * std::abs(r.free_energy));
    EXPECT_NEAR(now.kinetic, r.xi * r.kinetic_tilde, 1e-13 * r.kinetic_tilde + 1e-300);
    EXPECT_NEAR(r.energy, r.free_energy + r.xi * r.kinetic_tilde, 1e-13 * r.energy);
  }
}

TEST(ChnsdSolver, BoundaryConditionsAndDivergence) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdSolver s(mesh, base_config(0.002, 0.02));
  State st = random_state(s, 23, 0.5);
  s.initialize(st.phi, st.u_f, st.u_p);
  const auto& wall = s.spaces().fluid_velocity->boundary_mask(EdgeTag::GammaF);
  const std::size_t nf = s.spaces().fluid_velocity->scalar_dofs();
  const auto noflux = porous_no_flux_mask(*s.spaces().porous_velocity);
  for (const ChnsdRecord& r : s.run()) EXPECT_LE(r.div_residual, 1e-10);
  for (std::size_t i = 0; i < nf; ++i) {
    if (!wall[i]) continue;
    EXPECT_EQ(s.fluid_velocity().values[i], 0.0);
    EXPECT_EQ(s.fluid_velocity().values[nf + i], 0.0);
  }
  for (std::size_t i = 0; i < noflux.size(); ++i)
    if (noflux[i]) EXPECT_EQ(s.porous_velocity().values[i], 0.0);
}

TEST(ChnsdSolver, PorousPressureZeroMean) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdSolver s(mesh, base_config(0.002, 0.01));
  State st = random_state(s, 24, 0.5);
  s.initialize(st.phi, st.u_f, st.u_p);
  s.run();
  double norm = 0.0;
  for (double v : s.porous_pressure().values) norm = std::max(norm, std::abs(v));
  EXPECT_GT(norm, 1e-8);
  EXPECT_LE(std::abs(integrate_function(s.porous_pressure(), [](double v) { return v; })), 1e-10 * norm);
}

TEST(ChnsdSolver, FactorizationCount) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  const long before = factorization_count();
  ChnsdSolver s(mesh, base_config(0.002, 0.02));
  State st = random_state(s, 25, 0.1);
  s.initialize(st.phi, st.u_f, st.u_p);
  EXPECT_EQ(s.run().size(), 10u);
  // two fixed systems, one phase system per step
  EXPECT_EQ(factorization_count() - before, 12);
}

TEST(ChnsdSolver, StabilizationKeepsIdentity) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdConfig cfg = base_config(0.01, 0.1);
  cfg.params.stabilization = 2.0;
  ChnsdSolver s(mesh, cfg);
  State st = random_state(s, 26, 0.1);
  s.initialize(st.phi, st.u_f, st.u_p);
  EXPECT_NO_THROW(s.run());
}

TEST(ChnsdSolver, Deterministic) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  std::vector<double> first;
  for (int rep = 0; rep < 2; ++rep) {
    ChnsdSolver s(mesh, base_config(0.002, 0.01));
    State st = random_state(s, 27, 0.3);
    s.initialize(st.phi, st.u_f, st.u_p);
    s.run();
    if (rep == 0) first = s.phase().values;
    else EXPECT_EQ(first, s.phase().values);
  }
}

TEST(ChnsdSolver, InvariantViolationThrows) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.25);
  ChnsdConfig cfg = base_config(0.002, 0.01);
  cfg.identity_tolerance = -1.0;
  ChnsdSolver s(mesh, cfg);
  State st = random_state(s, 28, 0.3);
  s.initialize(st.phi, st.u_f, st.u_p);
  EXPECT_THROW(s.step(), InvariantError);
}

TEST(ChnsdSolver, RejectsBadConfig) {
  const Mesh mesh = build_two_domain_mesh(kColumn, 0.5);
  EXPECT_THROW(ChnsdSolver(mesh, base_config(-1.0, 1.0)), std::invalid_argument);
  ChnsdConfig c = base_config(0.1, 1.0);
  c.params.eps = 0.0;
  EXPECT_THROW(ChnsdSolver(mesh, c), std::invalid_argument);
  c = base_config(0.1, 1.0);
  c.params.k = uniform_tensor(mesh, Tensor2{1.0, 2.0, 1.0});
  EXPECT_THROW(ChnsdSolver(mesh, c), std::invalid_argument);
  c = base_config(0.1, 1.0);
  c.params.stabilization = -1.0;
  EXPECT_THROW(ChnsdSolver(mesh, c), std::invalid_argument);
  ChnsdSolver s(mesh, base_config(0.1, 1.0));
  EXPECT_THROW(s.step(), std::logic_error);
}
