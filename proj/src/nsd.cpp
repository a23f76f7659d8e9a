#include "nsdarcy/nsd.hpp"

#include <cmath>
#include <sstream>

namespace nsdarcy {

namespace {

// y += s * x
void axpy(std::vector<double>& y, double s, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

std::vector<double> combine(double a, const std::vector<double>& x, double b, const std::vector<double>& y) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

std::vector<double> scaled(double s, const std::vector<double>& x) {
  std::vector<double> out(x);
  for (double& v : out) v *= s;
  return out;
}

template <class F>
auto at_time(const F& f, double t) {
  return [&f, t](const Point& x) { return f(x, t); };
}

}  // namespace

Relaxation relaxation_factor(double e_old, double e_tilde, double dissipation, double power, double dt) {
  const double num = e_old + dt * power;
  const double den = e_tilde + dt * dissipation;
  if (!(den > 0.0)) return {1.0, kFlagZeroEnergy};
  if (num < 0.0) return {0.0, kFlagClamped};
  return {num / den, kFlagNone};
}

NsdSpaces::NsdSpaces(const Mesh& mesh)
    : velocity(build_dof_map(mesh, BasisFamily::Quadratic, 2, DomainSelector::Fluid)),
      pressure(build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Fluid)),
      head(build_dof_map(mesh, BasisFamily::Linear, 1, DomainSelector::Porous)) {}

NsdSolver::NsdSolver(const Mesh& mesh, NsdConfig config, NsdData data)
    : mesh_(&mesh), config_(std::move(config)), data_(std::move(data)), spaces_(mesh) {
  const NsdParams& prm = config_.params;
  if (!(config_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(config_.t_end >= config_.dt)) throw std::invalid_argument("t_end must be at least dt");
  if (!(prm.nu > 0.0) || !(prm.g > 0.0) || !(prm.s0 > 0.0)) throw std::invalid_argument("nu, g, s0 must be positive");
  if (config_.params.k.empty()) config_.params.k = uniform_tensor(mesh, Tensor2{});
  if (config_.params.k.size() != mesh.num_triangles()) throw std::invalid_argument("K needs one tensor per triangle");
  theta_ = config_.scheme == Scheme::One ? 1.0 : 0.5;

  const DofMap& vel = *spaces_.velocity;
  const DofMap& pre = *spaces_.pressure;
  const DofMap& head = *spaces_.head;
  mass_f_ = mass_matrix(vel);
  stiff_f_ = stiffness_matrix(vel, 1.0);
  bjs_ = bjs_matrix(vel, bjs_coefficients_nsd(mesh, prm.alpha, prm.nu, prm.g, config_.params.k));
  div_ = divergence_matrix(vel, pre);
  cgamma_ = cgamma_matrix(vel, head, prm.g);
  mass_p_ = mass_matrix(head);
  stiff_k_ = stiffness_matrix(head, config_.params.k);
  div_t_ = transpose(div_);
  cgamma_t_ = transpose(cgamma_);

  const double dt = config_.dt;
  const std::size_t nv = vel.total_dofs();
  const std::size_t n = nv + pre.total_dofs();
  std::vector<Triplet> t;
  append_block(t, mass_f_, 0, 0, 1.0 / dt);
  append_block(t, stiff_f_, 0, 0, theta_ * prm.nu);
  append_block(t, bjs_, 0, 0, theta_);
  append_block(t, div_t_, 0, static_cast<int>(nv), -theta_);
  append_block(t, div_, static_cast<int>(nv), 0, 1.0);
  fluid_mask_.assign(n, 0);
  const auto& wall = vel.boundary_mask(EdgeTag::GammaF);
  for (std::size_t i = 0; i < vel.scalar_dofs(); ++i)
    if (wall[i]) fluid_mask_[i] = fluid_mask_[vel.scalar_dofs() + i] = 1;
  fluid_elim_ = DirichletElimination(assemble_from_triplets(n, n, t), fluid_mask_);

  t.clear();
  append_block(t, mass_p_, 0, 0, prm.g * prm.s0 / dt);
  append_block(t, stiff_k_, 0, 0, theta_ * prm.g);
  porous_mask_ = head.boundary_mask(EdgeTag::GammaP);
  porous_elim_ = DirichletElimination(assemble_from_triplets(head.total_dofs(), head.total_dofs(), t), porous_mask_);

  fluid_lu_ = LuFactors::factorize(fluid_elim_.matrix(), config_.solver);
  porous_lu_ = LuFactors::factorize(porous_elim_.matrix(), config_.solver);
}

std::size_t NsdSolver::num_steps() const {
  return static_cast<std::size_t>(std::llround(config_.t_end / config_.dt));
}

void NsdSolver::initialize(const VectorFn& u0, const ScalarFn& phi0, const ScalarFn& p0) {
  std::optional<Field> p;
  if (p0) p = interpolate(spaces_.pressure, p0);
  initialize(interpolate(spaces_.velocity, u0), interpolate(spaces_.head, phi0), std::move(p));
}

void NsdSolver::initialize(Field u0, Field phi0, std::optional<Field> p0) {
  if (u0.space != spaces_.velocity || phi0.space != spaces_.head)
    throw std::invalid_argument("initial data must live on the solver's spaces");
  u_ = u_tilde_ = u_prev_ = std::move(u0);
  phi_ = phi_tilde_ = phi_prev_ = std::move(phi0);
  p_ = p0 ? std::move(*p0) : Field(spaces_.pressure);
  t_ = 0.0;
  step_ = 0;
  e_ = e0_ = energy(u_, phi_);
  initialized_ = true;
}

double NsdSolver::energy(const Field& u, const Field& phi) const {
  const NsdParams& prm = config_.params;
  return 0.5 * bilinear(mass_f_, u.values, u.values) + 0.5 * prm.g * prm.s0 * bilinear(mass_p_, phi.values, phi.values);
}

double NsdSolver::dissipation(const Field& u, const Field& phi) const {
  const NsdParams& prm = config_.params;
  return prm.nu * bilinear(stiff_f_, u.values, u.values) + bilinear(bjs_, u.values, u.values) +
         prm.g * bilinear(stiff_k_, phi.values, phi.values);
}

std::vector<double> NsdSolver::fluid_boundary_values(double t) const {
  std::vector<double> g(fluid_mask_.size(), 0.0);
  if (!data_.u_boundary) return g;
  const DofMap& vel = *spaces_.velocity;
  const std::size_t n = vel.scalar_dofs();
  for (std::size_t i = 0; i < n; ++i) {
    if (!fluid_mask_[i]) continue;
    const Vec2 v = data_.u_boundary(vel.coordinate(i), t);
    g[i] = v.x;
    g[n + i] = v.y;
  }
  return g;
}

std::vector<double> NsdSolver::porous_boundary_values(double t) const {
  std::vector<double> g(porous_mask_.size(), 0.0);
  if (!data_.phi_boundary) return g;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (porous_mask_[i]) g[i] = data_.phi_boundary(spaces_.head->coordinate(i), t);
  return g;
}

std::vector<double> NsdSolver::fluid_source(double t) const {
  std::vector<double> f(spaces_.velocity->total_dofs(), 0.0);
  if (data_.f_f) f = load_vector(*spaces_.velocity, VectorFn(at_time(data_.f_f, t)));
  if (data_.interface_traction) axpy(f, 1.0, interface_load(*spaces_.velocity, VectorFn(at_time(data_.interface_traction, t))));
  return f;
}

std::vector<double> NsdSolver::porous_source(double t) const {
  std::vector<double> f(spaces_.head->total_dofs(), 0.0);
  if (data_.f_p) f = scaled(config_.params.g, load_vector(*spaces_.head, ScalarFn(at_time(data_.f_p, t))));
  if (data_.interface_source) axpy(f, 1.0, interface_load(*spaces_.head, ScalarFn(at_time(data_.interface_source, t))));
  return f;
}

std::vector<double> NsdSolver::convection(const Field& u) const {
  return config_.convection == Convection::Standard ? convection_vector_a(u, u) : convection_vector_b(u, u);
}

StepRecord NsdSolver::step() {
  if (!initialized_) throw std::logic_error("NsdSolver::step before initialize");
  const NsdParams& prm = config_.params;
  const double dt = config_.dt;
  const double t_new = static_cast<double>(step_ + 1) * dt;
  const std::size_t nv = spaces_.velocity->total_dofs();
  const bool two = config_.scheme == Scheme::Two;

  // Explicit velocity/head: u^n (Scheme I) or the extrapolation 3/2 u^n - 1/2 u^{n-1} (Scheme II).
  Field u_ex = u_, phi_ex = phi_;
  if (two) {
    u_ex.values = combine(1.5, u_.values, -0.5, u_prev_.values);
    phi_ex.values = combine(1.5, phi_.values, -0.5, phi_prev_.values);
  }

  std::vector<double> rhs_u = scaled(1.0 / dt, matvec(mass_f_, u_tilde_.values));
  axpy(rhs_u, -1.0, convection(u_ex));
  axpy(rhs_u, -1.0, matvec(cgamma_, phi_ex.values));
  std::vector<double> rhs_phi = scaled(prm.g * prm.s0 / dt, matvec(mass_p_, phi_tilde_.values));
  axpy(rhs_phi, 1.0, matvec(cgamma_t_, u_ex.values));
  if (two) {
    axpy(rhs_u, -0.5 * prm.nu, matvec(stiff_f_, u_.values));
    axpy(rhs_u, -0.5, matvec(bjs_, u_.values));
    axpy(rhs_u, 0.5, matvec(div_t_, p_.values));
    axpy(rhs_u, 0.5, fluid_source(t_));
    axpy(rhs_u, 0.5, fluid_source(t_new));
    axpy(rhs_phi, -0.5 * prm.g, matvec(stiff_k_, phi_.values));
    axpy(rhs_phi, 0.5, porous_source(t_));
    axpy(rhs_phi, 0.5, porous_source(t_new));
  } else {
    axpy(rhs_u, 1.0, fluid_source(t_new));
    axpy(rhs_phi, 1.0, porous_source(t_new));
  }

  rhs_u.resize(fluid_mask_.size(), 0.0);
  const std::vector<double> x = fluid_lu_.solve(fluid_elim_.lift(rhs_u, fluid_boundary_values(t_new)));
  const std::vector<double> phi_new = porous_lu_.solve(porous_elim_.lift(rhs_phi, porous_boundary_values(t_new)));

  const Field u_tilde_new(spaces_.velocity, std::vector<double>(x.begin(), x.begin() + static_cast<long>(nv)));
  const Field phi_tilde_new(spaces_.head, phi_new);
  Field p_new(spaces_.pressure, std::vector<double>(x.begin() + static_cast<long>(nv), x.end()));

  // Correction.
  double diss = 0.0;
  if (two) {
    const Field um(spaces_.velocity, combine(0.5, u_tilde_new.values, 0.5, u_.values));
    const Field pm(spaces_.head, combine(0.5, phi_tilde_new.values, 0.5, phi_.values));
    diss = dissipation(um, pm);
  } else {
    diss = dissipation(u_tilde_new, phi_tilde_new);
  }
  const double w = data_.power ? data_.power(two ? t_ + 0.5 * dt : t_new) : 0.0;
  const double e_tilde = energy(u_tilde_new, phi_tilde_new);
  const Relaxation rel = config_.relaxation ? relaxation_factor(e_, e_tilde, diss, w, dt) : Relaxation{};
  const double s = std::sqrt(rel.xi);

  StepRecord rec;
  rec.step = step_ + 1;
  rec.t = t_new;
  rec.energy_tilde = e_tilde;
  rec.xi = rel.xi;
  rec.dissipation = diss;
  rec.power = w;
  rec.flags = rel.flags;
  rec.div_residual = norm2(matvec(div_, u_tilde_new.values));

  u_prev_ = u_;
  phi_prev_ = phi_;
  u_tilde_ = u_tilde_new;
  phi_tilde_ = phi_tilde_new;
  u_ = Field(spaces_.velocity, scaled(s, u_tilde_new.values));
  phi_ = Field(spaces_.head, scaled(s, phi_tilde_new.values));
  p_ = std::move(p_new);
  const double e_old = e_;
  e_ = energy(u_, phi_);
  rec.energy = e_;
  t_ = t_new;
  ++step_;

  if (config_.check_invariants) {
    std::ostringstream msg;
    if (!(rel.xi >= 0.0)) msg << "xi < 0";
    const double identity = std::abs(e_ - e_old + dt * rel.xi * diss - dt * w);
    if (config_.relaxation && rel.flags == kFlagNone && identity > config_.identity_tolerance * std::max(1.0, e0_))
      msg << "energy identity residual " << identity;
    if (!data_.forced() && e_ > e_old + config_.monotone_tolerance * e0_) msg << "energy increased by " << e_ - e_old;
    if (!msg.str().empty()) {
      std::ostringstream full;
      full << "step " << rec.step << " (t=" << t_new << "): " << msg.str() << "; E^n=" << e_old << " E^{n+1}=" << e_
           << " xi=" << rel.xi << " I=" << diss;
      throw InvariantError(full.str());
    }
  }
  return rec;
}

std::vector<StepRecord> NsdSolver::run(const std::function<void(const StepRecord&)>& sink) {
  std::vector<StepRecord> out;
  const std::size_t n = num_steps();
  out.reserve(n);
  while (static_cast<std::size_t>(step_) < n) {
    out.push_back(step());
    if (sink) sink(out.back());
  }
  return out;
}

}  // namespace nsdarcy
