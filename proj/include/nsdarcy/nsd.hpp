#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdarcy/forms.hpp"

namespace nsdarcy {

enum class Scheme { One, Two };
enum class Convection { Standard, Emac };

/// Thrown when a per-step invariant (xi >= 0, energy identity, monotonicity) is violated.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NsdParams {
  double nu = 1.0;
  double g = 1.0;
  double s0 = 1.0;
  double alpha = 1.0;
  TensorField k;  // per triangle; empty means identity everywhere
};

using SpaceTimeVector = std::function<Vec2(const Point&, double)>;
using SpaceTimeScalar = std::function<double(const Point&, double)>;

/// Time-dependent data. Every member is optional; absent means zero.
struct NsdData {
  SpaceTimeVector f_f;
  SpaceTimeScalar f_p;
  SpaceTimeVector u_boundary;    // on Gamma_f
  SpaceTimeScalar phi_boundary;  // on Gamma_p
  // Extra interface loads: momentum rhs += int_Gamma t.v, Darcy rhs += int_Gamma s psi.
  SpaceTimeVector interface_traction;
  SpaceTimeScalar interface_source;
  // Work done on the system per unit time, entering the relaxation equation.
  std::function<double(double)> power;

  /// True when anything other than the initial data drives the system.
  bool forced() const {
    return f_f || f_p || u_boundary || phi_boundary || interface_traction || interface_source || power;
  }
};

struct NsdConfig {
  NsdParams params;
  double dt = 0.01;
  double t_end = 1.0;
  Scheme scheme = Scheme::One;
  Convection convection = Convection::Standard;
  SolverOptions solver;
  bool check_invariants = true;
  bool relaxation = true;  // false keeps xi = 1 (diagnostic only)
  double identity_tolerance = 1e-11;   // relative to max(1, E0)
  double monotone_tolerance = 1e-12;   // relative to E0
};

enum StepFlag : unsigned {
  kFlagNone = 0,
  kFlagZeroEnergy = 1u,    // 0/0 relaxation, xi set to 1
  kFlagClamped = 2u,       // negative numerator, xi set to 0
};

struct StepRecord {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;        // E^{n+1} from the corrected fields
  double energy_tilde = 0.0;  // E~^{n+1}
  double xi = 1.0;
  double dissipation = 0.0;   // I^{n+1}
  double power = 0.0;         // W used in the relaxation
  double div_residual = 0.0;  // ||B u~^{n+1}||
  unsigned flags = kFlagNone;
};

/// Relaxation factor from E^n, E~^{n+1}, I, W and dt.
struct Relaxation {
  double xi = 1.0;
  unsigned flags = kFlagNone;
};
Relaxation relaxation_factor(double e_old, double e_tilde, double dissipation, double power, double dt);

/// Finite element spaces of the model: P2 fluid velocity, P1 fluid pressure, P1 porous head.
struct NsdSpaces {
  std::shared_ptr<const DofMap> velocity;
  std::shared_ptr<const DofMap> pressure;
  std::shared_ptr<const DofMap> head;

  explicit NsdSpaces(const Mesh& mesh);
};

class NsdSolver {
 public:
  NsdSolver(const Mesh& mesh, NsdConfig config, NsdData data = {});

  /// Nodal interpolation of the initial data. p0 is only used by Scheme II.
  void initialize(const VectorFn& u0, const ScalarFn& phi0, const ScalarFn& p0 = {});
  void initialize(Field u0, Field phi0, std::optional<Field> p0 = std::nullopt);

  /// Advances one step. Throws InvariantError when checks are enabled and fail.
  StepRecord step();
  /// Steps until t_end, handing each record to `sink` when given.
  std::vector<StepRecord> run(const std::function<void(const StepRecord&)>& sink = {});

  double energy(const Field& u, const Field& phi) const;
  double dissipation(const Field& u, const Field& phi) const;

  const NsdSpaces& spaces() const { return spaces_; }
  const NsdConfig& config() const { return config_; }
  const Field& velocity() const { return u_; }
  const Field& velocity_tilde() const { return u_tilde_; }
  const Field& pressure() const { return p_; }
  const Field& head() const { return phi_; }
  const Field& head_tilde() const { return phi_tilde_; }
  double time() const { return t_; }
  long steps_taken() const { return step_; }
  double initial_energy() const { return e0_; }
  double current_energy() const { return e_; }
  std::size_t num_steps() const;

 private:
  std::vector<double> fluid_boundary_values(double t) const;
  std::vector<double> porous_boundary_values(double t) const;
  std::vector<double> fluid_source(double t) const;
  std::vector<double> porous_source(double t) const;
  std::vector<double> convection(const Field& u) const;

  const Mesh* mesh_;
  NsdConfig config_;
  NsdData data_;
  NsdSpaces spaces_;
  double theta_ = 1.0;

  CsrMatrix mass_f_, stiff_f_, bjs_, div_, cgamma_, mass_p_, stiff_k_;
  CsrMatrix div_t_, cgamma_t_;
  DirichletElimination fluid_elim_, porous_elim_;
  LuFactors fluid_lu_, porous_lu_;
  std::vector<char> fluid_mask_, porous_mask_;

  Field u_, u_tilde_, u_prev_, p_, phi_, phi_tilde_, phi_prev_;
  double t_ = 0.0;
  long step_ = 0;
  double e_ = 0.0;
  double e0_ = 0.0;
  bool initialized_ = false;
};

}  // namespace nsdarcy
