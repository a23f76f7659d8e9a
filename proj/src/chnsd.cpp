#include "nsdarcy/chnsd.hpp"

#include <cmath>
#include <sstream>

namespace nsdarcy {

namespace {

void axpy(std::vector<double>& y, double s, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

std::vector<double> scaled(double s, const std::vector<double>& x) {
  std::vector<double> out(x);
  for (double& v : out) v *= s;
  return out;
}

double double_well(double p) { return 0.25 * (p * p - 1.0) * (p * p - 1.0); }
double double_well_prime(double p) { return p * p * p - p; }

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)); }

}  // namespace

std::function<double(double)> default_mobility(double eps) {
  return [eps](double p) { return eps * std::sqrt((1.0 - p) * (1.0 - p) + eps * eps); };
}

ChnsdSpaces::ChnsdSpaces(const Mesh& mesh)
    : phase(build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Whole)),
      fluid_velocity(build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Fluid)),
      fluid_pressure(build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Fluid)),
      porous_velocity(build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Porous)),
      porous_pressure(build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Porous)) {}

std::vector<char> porous_no_flux_mask(const DofMap& space) {
  const Rect& r = space.mesh().geometry().porous;
  const InterfaceLine& gamma = space.mesh().interface_line();
  const auto& outer = space.boundary_mask(EdgeTag::GammaP);
  const std::size_t n = space.scalar_dofs();
  std::vector<char> mask(2 * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!outer[i]) continue;
    const Point& p = space.coordinate(i);
    // sides lying on Gamma carry no condition
    const bool left = near(p.x, r.x_min) && !(!gamma.horizontal && near(gamma.coordinate, r.x_min));
    const bool right = near(p.x, r.x_max) && !(!gamma.horizontal && near(gamma.coordinate, r.x_max));
    const bool bottom = near(p.y, r.y_min) && !(gamma.horizontal && near(gamma.coordinate, r.y_min));
    const bool top = near(p.y, r.y_max) && !(gamma.horizontal && near(gamma.coordinate, r.y_max));
    if (left || right) mask[i] = 1;
    if (bottom || top) mask[n + i] = 1;
  }
  return mask;
}

ChnsdSolver::ChnsdSolver(const Mesh& mesh, ChnsdConfig config)
    : mesh_(&mesh), config_(std::move(config)), spaces_(mesh) {
  ChnsdParams& prm = config_.params;
  if (!(config_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(config_.t_end >= config_.dt)) throw std::invalid_argument("t_end must be at least dt");
  if (!(prm.nu_f > 0.0) || !(prm.nu_p > 0.0) || !(prm.chi > 0.0) || !(prm.lambda > 0.0) || !(prm.eps > 0.0))
    throw std::invalid_argument("nu_f, nu_p, chi, lambda, eps must be positive");
  if (prm.k.empty()) prm.k = uniform_tensor(mesh, Tensor2{});
  if (prm.k.size() != mesh.num_triangles()) throw std::invalid_argument("K needs one tensor per triangle");
  if (!(prm.stabilization >= 0.0)) throw std::invalid_argument("stabilization must be nonnegative");
  if (!prm.mobility) prm.mobility = default_mobility(prm.eps);
  area_ = mesh.geometry().fluid.area() + mesh.geometry().porous.area();

  const DofMap& ph = *spaces_.phase;
  const DofMap& vf = *spaces_.fluid_velocity;
  const DofMap& pf = *spaces_.fluid_pressure;
  const DofMap& vp = *spaces_.porous_velocity;
  const DofMap& pp = *spaces_.porous_pressure;
  mass_phase_ = mass_matrix(ph);
  stiff_phase_ = stiffness_matrix(ph, 1.0);
  mass_f_ = mass_matrix(vf);
  stiff_f_ = stiffness_matrix(vf, 1.0);
  bjs_ = bjs_matrix(vf, bjs_coefficients_chnsd(mesh, prm.alpha, prm.nu_f, prm.nu_p, prm.k));
  div_ = divergence_matrix(vf, pf);
  interface_pp_ = cgamma_matrix(vf, pp, 1.0);
  interface_pp_t_ = transpose(interface_pp_);
  mass_p_ = mass_matrix(vp);
  TensorField k_inv(prm.k.size());
  for (std::size_t t = 0; t < prm.k.size(); ++t) {
    if (mesh.domain_of_triangle(t) == Subdomain::Porous && !prm.k[t].is_spd())
      throw std::invalid_argument("K must be symmetric positive definite");
    k_inv[t] = mesh.domain_of_triangle(t) == Subdomain::Porous ? prm.k[t].inverse() : Tensor2{};
  }
  drag_p_ = tensor_mass_matrix(vp, k_inv);

  const double dt = config_.dt;
  // Fluid: [M/dt + nu A + S, -B^T; B, 0]
  const std::size_t nvf = vf.total_dofs();
  const std::size_t nf = nvf + pf.total_dofs();
  std::vector<Triplet> t;
  append_block(t, mass_f_, 0, 0, 1.0 / dt);
  append_block(t, stiff_f_, 0, 0, prm.nu_f);
  append_block(t, bjs_, 0, 0, 1.0);
  append_block(t, transpose(div_), 0, static_cast<int>(nvf), -1.0);
  append_block(t, div_, static_cast<int>(nvf), 0, 1.0);
  fluid_mask_.assign(nf, 0);
  const auto& wall = vf.boundary_mask(EdgeTag::GammaF);
  for (std::size_t i = 0; i < vf.scalar_dofs(); ++i)
    if (wall[i]) fluid_mask_[i] = fluid_mask_[vf.scalar_dofs() + i] = 1;
  fluid_elim_ = DirichletElimination(assemble_from_triplets(nf, nf, t), fluid_mask_);

  // Porous: [M/(chi dt) + K^-1, G, 0; G^T, 0, m; 0, m^T, 0], m_j = int q_j (zero-mean multiplier)
  const std::size_t nvp = vp.total_dofs();
  const std::size_t npp = pp.total_dofs();
  const std::size_t np = nvp + npp + 1;
  const CsrMatrix grad = gradient_matrix(vp, pp);
  t.clear();
  append_block(t, mass_p_, 0, 0, 1.0 / (prm.chi * dt));
  append_block(t, drag_p_, 0, 0, 1.0);
  append_block(t, grad, 0, static_cast<int>(nvp), 1.0);
  append_block(t, transpose(grad), static_cast<int>(nvp), 0, 1.0);
  const std::vector<double> m = load_vector(pp, ScalarFn([](const Point&) { return 1.0; }));
  const int lag = static_cast<int>(nvp + npp);
  for (std::size_t j = 0; j < npp; ++j) {
    t.push_back({static_cast<int>(nvp + j), lag, m[j]});
    t.push_back({lag, static_cast<int>(nvp + j), m[j]});
  }
  porous_mask_ = porous_no_flux_mask(vp);
  porous_mask_.resize(np, 0);
  porous_elim_ = DirichletElimination(assemble_from_triplets(np, np, t), porous_mask_);

  fluid_lu_ = LuFactors::factorize(fluid_elim_.matrix(), config_.solver);
  porous_lu_ = LuFactors::factorize(porous_elim_.matrix(), config_.solver);
}

std::size_t ChnsdSolver::num_steps() const {
  return static_cast<std::size_t>(std::llround(config_.t_end / config_.dt));
}

void ChnsdSolver::initialize(const ScalarFn& phi0, const VectorFn& u_f0, const VectorFn& u_p0) {
  Field uf(spaces_.fluid_velocity), up(spaces_.porous_velocity);
  if (u_f0) uf = interpolate(spaces_.fluid_velocity, u_f0);
  if (u_p0) up = interpolate(spaces_.porous_velocity, u_p0);
  initialize(interpolate(spaces_.phase, phi0), std::move(uf), std::move(up));
}

void ChnsdSolver::initialize(Field phi0, Field u_f0, Field u_p0) {
  if (phi0.space != spaces_.phase || u_f0.space != spaces_.fluid_velocity || u_p0.space != spaces_.porous_velocity)
    throw std::invalid_argument("initial data must live on the solver's spaces");
  // essential conditions hold from the start
  const std::size_t n = spaces_.fluid_velocity->total_dofs();
  for (std::size_t i = 0; i < n; ++i)
    if (fluid_mask_[i]) u_f0.values[i] = 0.0;
  for (std::size_t i = 0; i < u_p0.values.size(); ++i)
    if (porous_mask_[i]) u_p0.values[i] = 0.0;
  phi_ = std::move(phi0);
  mu_ = Field(spaces_.phase);
  u_f_ = u_f_tilde_ = std::move(u_f0);
  u_p_ = u_p_tilde_ = std::move(u_p0);
  p_f_ = Field(spaces_.fluid_pressure);
  p_p_ = Field(spaces_.porous_pressure);
  t_ = 0.0;
  step_ = 0;
  clamped_ = 0;
  e_ = e0_ = energy(phi_, u_f_, u_p_).total();
  mass0_ = mass(phi_);
  initialized_ = true;
}

ChnsdEnergy ChnsdSolver::energy(const Field& phi, const Field& u_f, const Field& u_p) const {
  const ChnsdParams& prm = config_.params;
  ChnsdEnergy e;
  e.free = 0.5 * prm.lambda * prm.eps * bilinear(stiff_phase_, phi.values, phi.values) +
           prm.lambda / prm.eps * integrate_function(phi, double_well);
  e.kinetic = 0.5 * bilinear(mass_f_, u_f.values, u_f.values) +
              0.5 / prm.chi * bilinear(mass_p_, u_p.values, u_p.values);
  return e;
}

double ChnsdSolver::mass(const Field& phi) const {
  double s = 0.0;
  for (double v : matvec(mass_phase_, phi.values)) s += v;
  return s;
}

void ChnsdSolver::ch_step(Field& phi_new, Field& mu_new) {
  const ChnsdParams& prm = config_.params;
  const DofMap& ph = *spaces_.phase;
  const std::size_t n = ph.total_dofs();
  const double dt = config_.dt;
  // [M/dt, M(phi^n) stiffness; -lambda eps A - (lambda/eps) S M, M] (phi, mu)
  const double stab = prm.lambda / prm.eps * prm.stabilization;
  std::vector<Triplet> t;
  append_block(t, mass_phase_, 0, 0, 1.0 / dt);
  append_block(t, mobility_stiffness(ph, phi_, prm.mobility), 0, static_cast<int>(n), 1.0);
  append_block(t, stiff_phase_, static_cast<int>(n), 0, -prm.lambda * prm.eps);
  if (stab > 0.0) append_block(t, mass_phase_, static_cast<int>(n), 0, -stab);
  append_block(t, mass_phase_, static_cast<int>(n), static_cast<int>(n), 1.0);
  const LuFactors lu = LuFactors::factorize(assemble_from_triplets(2 * n, 2 * n, t), config_.solver);

  std::vector<double> rhs = scaled(1.0 / dt, matvec(mass_phase_, phi_.values));
  axpy(rhs, 1.0, transport_vector(phi_, u_f_, u_p_, ph));
  std::vector<double> g = scaled(prm.lambda / prm.eps, function_load(ph, phi_, double_well_prime));
  if (stab > 0.0) axpy(g, -stab, matvec(mass_phase_, phi_.values));
  rhs.insert(rhs.end(), g.begin(), g.end());
  const std::vector<double> x = lu.solve(rhs);
  phi_new = Field(spaces_.phase, std::vector<double>(x.begin(), x.begin() + static_cast<long>(n)));
  mu_new = Field(spaces_.phase, std::vector<double>(x.begin() + static_cast<long>(n), x.end()));
}

void ChnsdSolver::darcy_step(const Field& phi_new, const Field& mu_new, Field& u_p_tilde, Field& p_p) {
  const ChnsdParams& prm = config_.params;
  const DofMap& vp = *spaces_.porous_velocity;
  const std::size_t nv = vp.total_dofs();
  const std::size_t npp = spaces_.porous_pressure->total_dofs();
  std::vector<double> rhs = scaled(1.0 / (prm.chi * config_.dt), matvec(mass_p_, u_p_tilde_.values));
  axpy(rhs, -1.0, phase_coupling_vector(phi_new, mu_new, vp));
  const double mean = mass(phi_new) / area_;
  if (prm.buoyancy.x != 0.0 || prm.buoyancy.y != 0.0) axpy(rhs, 1.0, buoyancy_vector(phi_new, mean, prm.buoyancy, vp));
  // (u_p, grad q) = -int_Gamma (u_f^n . n) q
  const std::vector<double> flux = scaled(-1.0, matvec(interface_pp_t_, u_f_.values));
  rhs.insert(rhs.end(), flux.begin(), flux.end());
  rhs.push_back(0.0);
  const std::vector<double> x = porous_lu_.solve(porous_elim_.lift(rhs, std::vector<double>(rhs.size(), 0.0)));
  u_p_tilde = Field(spaces_.porous_velocity, std::vector<double>(x.begin(), x.begin() + static_cast<long>(nv)));
  p_p = Field(spaces_.porous_pressure,
              std::vector<double>(x.begin() + static_cast<long>(nv), x.begin() + static_cast<long>(nv + npp)));
}

void ChnsdSolver::ns_step(const Field& phi_new, const Field& mu_new, const Field& p_p, Field& u_f_tilde,
                          Field& p_f) {
  const ChnsdParams& prm = config_.params;
  const DofMap& vf = *spaces_.fluid_velocity;
  const std::size_t nv = vf.total_dofs();
  std::vector<double> rhs = scaled(1.0 / config_.dt, matvec(mass_f_, u_f_tilde_.values));
  axpy(rhs, -1.0,
       config_.convection == Convection::Standard ? convection_vector_a(u_f_, u_f_) : convection_vector_b(u_f_, u_f_));
  axpy(rhs, -1.0, matvec(interface_pp_, p_p.values));
  axpy(rhs, -1.0, phase_coupling_vector(phi_new, mu_new, vf));
  const double mean = mass(phi_new) / area_;
  if (prm.buoyancy.x != 0.0 || prm.buoyancy.y != 0.0) axpy(rhs, 1.0, buoyancy_vector(phi_new, mean, prm.buoyancy, vf));
  rhs.resize(fluid_mask_.size(), 0.0);
  const std::vector<double> x = fluid_lu_.solve(fluid_elim_.lift(rhs, std::vector<double>(rhs.size(), 0.0)));
  u_f_tilde = Field(spaces_.fluid_velocity, std::vector<double>(x.begin(), x.begin() + static_cast<long>(nv)));
  p_f = Field(spaces_.fluid_pressure, std::vector<double>(x.begin() + static_cast<long>(nv), x.end()));
}

ChnsdRecord ChnsdSolver::step() {
  if (!initialized_) throw std::logic_error("ChnsdSolver::step before initialize");
  const ChnsdParams& prm = config_.params;
  const double dt = config_.dt;
  const double t_new = static_cast<double>(step_ + 1) * dt;

  Field phi_new, mu_new, u_p_tilde, p_p, u_f_tilde, p_f;
  ch_step(phi_new, mu_new);
  darcy_step(phi_new, mu_new, u_p_tilde, p_p);
  ns_step(phi_new, mu_new, p_p, u_f_tilde, p_f);

  // Correction: only the velocities are rescaled.
  const ChnsdEnergy et = energy(phi_new, u_f_tilde, u_p_tilde);
  const double diss = prm.nu_f * bilinear(stiff_f_, u_f_tilde.values, u_f_tilde.values) +
                      bilinear(bjs_, u_f_tilde.values, u_f_tilde.values) +
                      bilinear(drag_p_, u_p_tilde.values, u_p_tilde.values) +
                      weighted_gradient_energy(mu_new, phi_new, prm.mobility);
  Relaxation rel = relaxation_factor(e_ - et.free, et.kinetic, diss, 0.0, dt);
  // below roundoff of the energy scale the ratio is noise over noise
  const double floor = 1e-14 * std::max(e0_, 0.25 * prm.lambda / prm.eps * area_);
  if (et.kinetic + dt * diss <= floor) rel = {1.0, kFlagZeroEnergy};
  const double s = std::sqrt(rel.xi);

  ChnsdRecord rec;
  rec.step = step_ + 1;
  rec.t = t_new;
  rec.free_energy = et.free;
  rec.kinetic_tilde = et.kinetic;
  rec.xi = rel.xi;
  rec.dissipation = diss;
  rec.flags = rel.flags;
  rec.div_residual = norm2(matvec(div_, u_f_tilde.values));

  phi_ = std::move(phi_new);
  mu_ = std::move(mu_new);
  u_f_tilde_ = u_f_tilde;
  u_p_tilde_ = u_p_tilde;
  u_f_ = Field(spaces_.fluid_velocity, scaled(s, u_f_tilde.values));
  u_p_ = Field(spaces_.porous_velocity, scaled(s, u_p_tilde.values));
  p_f_ = std::move(p_f);
  p_p_ = std::move(p_p);
  const double e_old = e_;
  e_ = energy(phi_, u_f_, u_p_).total();
  rec.energy = e_;
  rec.mass = mass(phi_);
  t_ = t_new;
  ++step_;
  if (rel.flags & kFlagClamped) ++clamped_;

  if (config_.check_invariants) {
    std::ostringstream msg;
    const double drift = std::abs(rec.mass - mass0_);
    if (drift > static_cast<double>(step_) * config_.solver.residual_tolerance * area_)
      msg << "phase mass drift " << drift;
    if (!(rel.xi >= 0.0)) msg << "xi < 0";
    const double identity = std::abs(e_ - e_old + dt * rel.xi * diss);
    if (rel.flags == kFlagNone && identity > config_.identity_tolerance * std::max(1.0, e0_))
      msg << "energy identity residual " << identity;
    if (!msg.str().empty()) {
      std::ostringstream full;
      full << "step " << rec.step << " (t=" << t_new << "): " << msg.str() << "; E^n=" << e_old << " E^{n+1}=" << e_
           << " xi=" << rel.xi << " I=" << diss;
      throw InvariantError(full.str());
    }
  }
  return rec;
}

std::vector<ChnsdRecord> ChnsdSolver::run(const std::function<void(const ChnsdRecord&)>& sink) {
  std::vector<ChnsdRecord> out;
  const std::size_t n = num_steps();
  out.reserve(n);
  while (static_cast<std::size_t>(step_) < n) {
    out.push_back(step());
    if (sink) sink(out.back());
  }
  return out;
}

}  // namespace nsdarcy
