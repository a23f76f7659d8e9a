#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nsdarcy/nsd.hpp"

namespace nsdarcy {

/// eps sqrt((1 - phi)^2 + eps^2)
std::function<double(double)> default_mobility(double eps);

struct ChnsdParams {
  double nu_f = 0.1;
  double nu_p = 0.1;
  double alpha = 0.01;
  double chi = 1.0;
  double lambda = 0.1;
  double eps = 0.01;
  TensorField k;                            // per triangle; empty means identity
  std::function<double(double)> mobility;   // empty means default_mobility(eps)
  Vec2 buoyancy{};                          // B in B (phi - mean phi); zero disables
  double stabilization = 0.0;               // S in (lambda/eps) S (phi^{n+1} - phi^n); 0 is the plain scheme
};

struct ChnsdConfig {
  ChnsdParams params;
  double dt = 0.005;
  double t_end = 1.0;
  Convection convection = Convection::Standard;
  SolverOptions solver;
  bool check_invariants = true;
  double identity_tolerance = 1e-10;  // relative to max(1, E0)
};

struct ChnsdEnergy {
  double free = 0.0;     // lambda eps / 2 |grad phi|^2 + lambda / eps int G(phi)
  double kinetic = 0.0;  // |u_f|^2 / 2 + |u_p|^2 / (2 chi)
  double total() const { return free + kinetic; }
};

struct ChnsdRecord {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;         // E0^{n+1} + xi E1~^{n+1}
  double free_energy = 0.0;    // E0^{n+1}
  double kinetic_tilde = 0.0;  // E1~^{n+1}
  double xi = 1.0;
  double dissipation = 0.0;    // I_3^{n+1}
  double mass = 0.0;           // int phi^{n+1}
  double div_residual = 0.0;   // ||B u_f~^{n+1}||
  unsigned flags = kFlagNone;
};

/// P1 phase/chemical potential on the whole domain, Taylor-Hood fluid pair, P2 porous velocity
/// with P1 zero-mean porous pressure.
struct ChnsdSpaces {
  std::shared_ptr<const DofMap> phase;
  std::shared_ptr<const DofMap> fluid_velocity;
  std::shared_ptr<const DofMap> fluid_pressure;
  std::shared_ptr<const DofMap> porous_velocity;
  std::shared_ptr<const DofMap> porous_pressure;

  explicit ChnsdSpaces(const Mesh& mesh);
};

/// Component mask for u.n = 0 on the outer porous boundary (blocked layout of the P2 space).
std::vector<char> porous_no_flux_mask(const DofMap& porous_velocity);

class ChnsdSolver {
 public:
  ChnsdSolver(const Mesh& mesh, ChnsdConfig config);

  /// Nodal interpolation; absent velocities mean zero.
  void initialize(const ScalarFn& phi0, const VectorFn& u_f0 = {}, const VectorFn& u_p0 = {});
  void initialize(Field phi0, Field u_f0, Field u_p0);

  ChnsdRecord step();
  std::vector<ChnsdRecord> run(const std::function<void(const ChnsdRecord&)>& sink = {});

  ChnsdEnergy energy(const Field& phi, const Field& u_f, const Field& u_p) const;
  double mass(const Field& phi) const;

  const ChnsdSpaces& spaces() const { return spaces_; }
  const ChnsdConfig& config() const { return config_; }
  const Field& phase() const { return phi_; }
  const Field& chemical_potential() const { return mu_; }
  const Field& fluid_velocity() const { return u_f_; }
  const Field& porous_velocity() const { return u_p_; }
  const Field& fluid_pressure() const { return p_f_; }
  const Field& porous_pressure() const { return p_p_; }
  double time() const { return t_; }
  long steps_taken() const { return step_; }
  double initial_mass() const { return mass0_; }
  double initial_energy() const { return e0_; }
  double current_energy() const { return e_; }
  long clamped_steps() const { return clamped_; }
  std::size_t num_steps() const;

 private:
  void ch_step(Field& phi_new, Field& mu_new);
  void darcy_step(const Field& phi_new, const Field& mu_new, Field& u_p_tilde, Field& p_p);
  void ns_step(const Field& phi_new, const Field& mu_new, const Field& p_p, Field& u_f_tilde, Field& p_f);

  const Mesh* mesh_;
  ChnsdConfig config_;
  ChnsdSpaces spaces_;
  double area_ = 0.0;

  CsrMatrix mass_phase_, stiff_phase_;
  CsrMatrix mass_f_, stiff_f_, bjs_, div_, interface_pp_, interface_pp_t_;
  CsrMatrix mass_p_, drag_p_;
  DirichletElimination fluid_elim_, porous_elim_;
  LuFactors fluid_lu_, porous_lu_;
  std::vector<char> fluid_mask_, porous_mask_;

  Field phi_, mu_, u_f_, u_f_tilde_, p_f_, u_p_, u_p_tilde_, p_p_;
  double t_ = 0.0;
  long step_ = 0;
  double e_ = 0.0;
  double e0_ = 0.0;
  double mass0_ = 0.0;
  long clamped_ = 0;
  bool initialized_ = false;
};

}  // namespace nsdarcy
