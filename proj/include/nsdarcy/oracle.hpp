#pragma once

#include <string>
#include <vector>

#include "nsdarcy/forms.hpp"

/// Dense brute-force reference assembly.
///
/// Global basis functions are rebuilt per triangle from a monomial Vandermonde system in
/// physical coordinates, and every integral is a dense loop over all basis pairs. Only the
/// global numbering and the quadrature tables are shared with the sparse assembly.
namespace nsdarcy::oracle {

using Dense = std::vector<std::vector<double>>;

class DenseBasis {
 public:
  explicit DenseBasis(const DofMap& space);

  const DofMap& space() const { return *space_; }
  /// Values/gradients of all scalar global basis functions at x, taking the polynomial of
  /// triangle t (zero for functions not attached to t).
  void eval(std::size_t t, const Point& x, std::vector<double>& value, std::vector<Vec2>& grad) const;
  /// First triangle of the space whose closure contains x.
  std::size_t locate(const Point& x) const;

 private:
  const DofMap* space_;
  // Per triangle: monomial coefficients of each local basis function, and the shift used.
  std::vector<std::vector<std::vector<double>>> coeff_;
  std::vector<Point> shift_;
};

Dense mass(const DofMap& s, double weight);
Dense tensor_mass(const DofMap& s, const TensorField& k);
Dense stiffness(const DofMap& s, double coeff);
Dense stiffness(const DofMap& s, const TensorField& k);
Dense divergence(const DofMap& velocity, const DofMap& pressure);
Dense gradient(const DofMap& velocity, const DofMap& scalar);
Dense bjs(const DofMap& velocity, const std::vector<double>& edge_coeff);
Dense cgamma(const DofMap& velocity, const DofMap& scalar, double g);
Dense mobility(const DofMap& s, const Field& phi, const std::function<double(double)>& m);

std::vector<double> convection_a(const Field& u, const Field& v);
std::vector<double> convection_b(const Field& u, const Field& v);
std::vector<double> load(const DofMap& s, const ScalarFn& f);
std::vector<double> load(const DofMap& s, const VectorFn& f);
std::vector<double> interface_load(const DofMap& s, const ScalarFn& f);
std::vector<double> interface_load(const DofMap& s, const VectorFn& f);
std::vector<double> phase_coupling(const Field& phi, const Field& mu, const DofMap& velocity);
std::vector<double> transport(const Field& phi, const Field& u_f, const Field& u_p, const DofMap& target);
std::vector<double> function_load(const DofMap& target, const Field& phi, const std::function<double(double)>& f);
std::vector<double> buoyancy(const Field& phi, double phi_bar, const Vec2& b, const DofMap& velocity);

double max_abs_diff(const CsrMatrix& a, const Dense& d);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);
double max_abs(const Dense& d);
double max_abs(const std::vector<double>& v);

struct CheckResult {
  std::string name;
  double error = 0.0;
  double scale = 0.0;
};

/// Compares every sparse form against its dense counterpart on every small mesh of the
/// built-in catalogue (all with at most 8 triangles). Random inputs come from `seed`.
std::vector<CheckResult> run_assembly_checks(unsigned long long seed);

}  // namespace nsdarcy::oracle
