#pragma once

#include <array>
#include <string>
#include <vector>

#include "nsdarcy/nsd.hpp"
#include "nsdarcy/oracle.hpp"

namespace nsdarcy {

enum class CaseId { Ex1, Ex2 };

/// d_j u_i stored as grad[i][j].
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Closed-form velocity/pressure/head with the derivatives the forcing needs.
class ManufacturedCase {
 public:
  explicit ManufacturedCase(CaseId id);

  CaseId id() const { return id_; }
  std::string name() const;
  /// Model parameters of the case (nu = 0.001, K = I, the rest 1).
  NsdParams params(const Mesh& mesh) const;
  static Geometry geometry();

  Vec2 velocity(const Point& x, double t) const;
  Vec2 velocity_dt(const Point& x, double t) const;
  Mat2 velocity_grad(const Point& x, double t) const;
  Vec2 velocity_laplacian(const Point& x, double t) const;
  double pressure(const Point& x, double t) const;
  Vec2 pressure_grad(const Point& x, double t) const;
  /// p - |u|^2 / 2, the pressure variable of the EMAC form.
  double emac_pressure(const Point& x, double t) const;
  double head(const Point& x, double t) const;
  double head_dt(const Point& x, double t) const;
  Vec2 head_grad(const Point& x, double t) const;
  /// (d_xx, d_xy, d_yy)
  std::array<double, 3> head_hessian(const Point& x, double t) const;

  /// f_f = u_t - nu lap u + grad p + (u.grad)u.
  Vec2 fluid_forcing(const Point& x, double t, double nu) const;
  /// f_p = s0 phi_t - div(K grad phi) for constant K.
  double porous_forcing(const Point& x, double t, double s0, const Tensor2& k) const;

  /// Residuals of the three interface conditions at a point of Gamma.
  struct InterfaceResidual {
    double mass = 0.0;        // u.n + K grad phi.n
    double normal = 0.0;      // p - nu n.(grad u n) + |u|^2/2 - g phi
    double tangential = 0.0;  // -nu tau.(grad u n) - beta u.tau
  };
  InterfaceResidual interface_residual(const Point& x, double t, const Vec2& n, const NsdParams& prm,
                                       double beta) const;

 private:
  CaseId id_;
  // Spatial factors; every field is (spatial part) * cos t.
  void velocity_parts(const Point& x, Vec2& u, Mat2& grad, Vec2& lap) const;
  void pressure_parts(const Point& x, double& p, Vec2& grad) const;
  void head_parts(const Point& x, double& phi, Vec2& grad, std::array<double, 3>& hess) const;
};

/// Data hooks (forcing, boundary data, interface loads, work term) that make the case an exact
/// solution of the discrete model's continuous counterpart.
NsdData manufactured_data(const ManufacturedCase& c, const Mesh& mesh, const NsdParams& prm);

/// sqrt(int |field - exact|^2) over the field's domain, degree-7 quadrature.
double l2_error(const Field& field, const ScalarFn& exact);
double l2_error(const Field& field, const VectorFn& exact);

struct ConvergenceRow {
  double h = 0.0;
  double dt = 0.0;
  double err_u = 0.0;
  double err_phi = 0.0;
  double err_p = 0.0;
  bool ok = true;
  std::string error;  // solver failure message when !ok
  long factorizations = 0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double rate_u = 0.0;
  double rate_phi = 0.0;
  double rate_p = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double fitted_rate(const std::vector<double>& x, const std::vector<double>& y);

/// dt_rule maps h to the time step. Rates are fitted against dt over the successful rows.
ConvergenceStudy convergence_study(CaseId id, Scheme scheme, Convection convection, const std::vector<double>& h_list,
                                   const std::function<double(double)>& dt_rule, double t_end = 0.5,
                                   const std::function<void(const NsdSolver&, const StepRecord&)>& observer = {});

/// Forcing of both cases against fourth-order central differences of the closed-form fields
/// at seeded interior points. `scale` is the largest |reference| + 1; pass means error <= 1e-6 scale.
std::vector<oracle::CheckResult> forcing_checks(unsigned long long seed);

/// Header `h,dt,err_u,err_phi,err_p`.
void write_convergence_csv(const ConvergenceStudy& study, const std::string& path);

}  // namespace nsdarcy
