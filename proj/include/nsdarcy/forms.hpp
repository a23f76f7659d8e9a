#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "nsdarcy/elements.hpp"
#include "nsdarcy/sparse.hpp"

namespace nsdarcy {

/// Symmetric 2x2 tensor.
struct Tensor2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  static Tensor2 isotropic(double k) { return {k, 0.0, k}; }
  Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * xy; }
  bool is_spd() const { return xx > 0.0 && det() > 0.0; }
  Tensor2 inverse() const {
    const double d = det();
    return {yy / d, -xy / d, xx / d};
  }
};

/// One tensor per mesh triangle (entries outside the porous domain are ignored).
using TensorField = std::vector<Tensor2>;

TensorField uniform_tensor(const Mesh& mesh, const Tensor2& k);

/// Coefficient vector over a DOF map; vector components are blocked (see DofMap).
struct Field {
  std::shared_ptr<const DofMap> space;
  std::vector<double> values;

  Field() = default;
  explicit Field(std::shared_ptr<const DofMap> s) : space(std::move(s)), values(space->total_dofs(), 0.0) {}
  Field(std::shared_ptr<const DofMap> s, std::vector<double> v);

  /// Component `c` at a point of triangle t (t must belong to the space).
  double value(std::size_t t, const Barycentric& b, int c = 0) const;
  Vec2 vector_value(std::size_t t, const Barycentric& b) const;
  Vec2 gradient(std::size_t t, const Barycentric& b, int c = 0) const;
};

using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<Vec2(const Point&)>;

/// Nodal interpolation.
Field interpolate(std::shared_ptr<const DofMap> space, const ScalarFn& f);
Field interpolate(std::shared_ptr<const DofMap> space, const VectorFn& f);

Barycentric barycentric_of(const ElementMap& map, const Point& p);

inline constexpr int kVolumeDegree = 5;
inline constexpr int kEdgeDegree = 7;

// --- matrices --------------------------------------------------------------------------

/// weight * (u, v); block diagonal for vector spaces.
CsrMatrix mass_matrix(const DofMap& space, double weight = 1.0);
/// (T u, v) for a vector space with a per-triangle tensor.
CsrMatrix tensor_mass_matrix(const DofMap& space, const TensorField& tensor);
/// coeff * (grad u, grad v), component-wise for vector spaces.
CsrMatrix stiffness_matrix(const DofMap& space, double coeff);
/// (T grad u, grad v) for a scalar space. Throws std::invalid_argument on a non-SPD tensor.
CsrMatrix stiffness_matrix(const DofMap& space, const TensorField& tensor);
/// Rows: pressure DOFs, columns: velocity DOFs. Entry (q, v) = (q, div v).
CsrMatrix divergence_matrix(const DofMap& velocity, const DofMap& pressure);
/// Rows: velocity DOFs, columns: scalar DOFs. Entry (v, q) = (grad q, v).
CsrMatrix gradient_matrix(const DofMap& velocity, const DofMap& scalar);
/// sum over interface edges of coeff[e] * int_e (u.tau)(v.tau); coeff follows tagged_edges order.
CsrMatrix bjs_matrix(const DofMap& velocity, const std::vector<double>& edge_coeff);
/// Rows: velocity DOFs, columns: scalar DOFs. Entry (v, phi) = g int_Gamma phi v.n.
CsrMatrix cgamma_matrix(const DofMap& velocity, const DofMap& scalar, double g);
/// (M(phi) grad u, grad v) with M evaluated pointwise from a scalar field.
CsrMatrix mobility_stiffness(const DofMap& space, const Field& phi, const std::function<double(double)>& mobility);

/// tr K taken from the porous triangle adjacent to each interface edge.
std::vector<double> interface_trace_k(const Mesh& mesh, const TensorField& k);
/// alpha sqrt(nu g / tr K) per interface edge.
std::vector<double> bjs_coefficients_nsd(const Mesh& mesh, double alpha, double nu, double g, const TensorField& k);
/// alpha nu_f sqrt(2) / sqrt(nu_p tr K) per interface edge.
std::vector<double> bjs_coefficients_chnsd(const Mesh& mesh, double alpha, double nu_f, double nu_p,
                                           const TensorField& k);

// --- vectors ---------------------------------------------------------------------------

/// w -> a(u, v, w) = ((u.grad) v, w) - 1/2 int_Gamma (u.v)(w.n), over u's space.
std::vector<double> convection_vector_a(const Field& u, const Field& v);
/// w -> b(u, v, w) = (2 D(u) v, w) + ((div u) v, w) - int_Gamma (u.v)(w.n).
std::vector<double> convection_vector_b(const Field& u, const Field& v);

std::vector<double> load_vector(const DofMap& space, const ScalarFn& f);
std::vector<double> load_vector(const DofMap& space, const VectorFn& f);
/// int_Gamma f psi, traced from the side of Gamma the space lives on.
std::vector<double> interface_load(const DofMap& space, const ScalarFn& f);
std::vector<double> interface_load(const DofMap& space, const VectorFn& f);

/// w -> (phi grad mu, w) over the velocity space's domain.
std::vector<double> phase_coupling_vector(const Field& phi, const Field& mu, const DofMap& velocity);
/// psi -> (u phi, grad psi) where u is u_f on fluid and u_p on porous triangles.
std::vector<double> transport_vector(const Field& phi, const Field& u_f, const Field& u_p, const DofMap& target);
/// psi -> (f(phi), psi).
std::vector<double> function_load(const DofMap& target, const Field& phi, const std::function<double(double)>& f);
/// w -> ((phi - phi_bar) B, w) over the velocity space's domain.
std::vector<double> buoyancy_vector(const Field& phi, double phi_bar, const Vec2& b, const DofMap& velocity);

// --- scalars ---------------------------------------------------------------------------

/// int f(phi) over the field's domain.
double integrate_function(const Field& phi, const std::function<double(double)>& f, int degree = kVolumeDegree);
/// int M(phi) |grad mu|^2 over the field's domain.
double weighted_gradient_energy(const Field& mu, const Field& phi, const std::function<double(double)>& mobility);

}  // namespace nsdarcy
