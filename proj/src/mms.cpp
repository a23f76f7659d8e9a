#include "nsdarcy/mms.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>

namespace nsdarcy {

namespace {

constexpr double kPi = std::numbers::pi;

template <class Fn>
double integrate_domain(const Mesh& mesh, Subdomain d, int degree, Fn&& fn) {
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Triangle, degree);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.domain_of_triangle(t) != d) continue;
    const ElementMap map = ElementMap::of(mesh, t);
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      s += rule.weights[q] * std::abs(map.det) * fn(map.to_physical(rule.points[q]));
  }
  return s;
}

template <class Fn>
double integrate_interface(const Mesh& mesh, int degree, Fn&& fn) {
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Edge, degree);
  double s = 0.0;
  for (const TaggedEdge& e : tagged_edges(mesh, EdgeTag::Interface)) {
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double r = rule.points[q].l1;
      s += rule.weights[q] * e.length * fn(Point{e.a.x + r * (e.b.x - e.a.x), e.a.y + r * (e.b.y - e.a.y)});
    }
  }
  return s;
}

Vec2 matvec2(const Mat2& m, const Vec2& v) { return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y}; }

}  // namespace

ManufacturedCase::ManufacturedCase(CaseId id) : id_(id) {}

std::string ManufacturedCase::name() const { return id_ == CaseId::Ex1 ? "ex1" : "ex2"; }

Geometry ManufacturedCase::geometry() { return {{0.0, 1.0, 0.0, 1.0}, {0.0, 1.0, -1.0, 0.0}}; }

NsdParams ManufacturedCase::params(const Mesh& mesh) const {
  NsdParams p;
  p.nu = 0.001;
  p.g = 1.0;
  p.s0 = 1.0;
  p.alpha = 1.0;
  p.k = uniform_tensor(mesh, Tensor2{});
  return p;
}

void ManufacturedCase::velocity_parts(const Point& p, Vec2& u, Mat2& g, Vec2& lap) const {
  const double x = p.x, y = p.y;
  if (id_ == CaseId::Ex1) {
    u = {x * x * y * y, -2.0 / 3.0 * x * y * y * y};
    g = {{{2.0 * x * y * y, 2.0 * x * x * y}, {-2.0 / 3.0 * y * y * y, -2.0 * x * y * y}}};
    lap = {2.0 * y * y + 2.0 * x * x, -4.0 * x * y};
    return;
  }
  const double l = 1.0 / (20.0 * kPi * kPi);
  const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
  const double s2x = std::sin(2 * kPi * x), s2y = std::sin(2 * kPi * y);
  const double c2x = std::cos(2 * kPi * x), c2y = std::cos(2 * kPi * y);
  u = {l * sx * sx * s2y, -l * s2x * sy * sy};
  g = {{{l * kPi * s2x * s2y, 2.0 * kPi * l * sx * sx * c2y}, {-2.0 * kPi * l * c2x * sy * sy, -l * kPi * s2x * s2y}}};
  lap = {2.0 * kPi * kPi * l * c2x * s2y - 4.0 * kPi * kPi * l * sx * sx * s2y,
         4.0 * kPi * kPi * l * s2x * sy * sy - 2.0 * kPi * kPi * l * s2x * c2y};
}

void ManufacturedCase::pressure_parts(const Point& p, double& v, Vec2& g) const {
  const double x = p.x, y = p.y;
  if (id_ == CaseId::Ex1) {
    const double c = 64.0 * kPi * kPi;
    const double a = x * x * (x - 1) * (x - 1), da = 2.0 * x * (x - 1) * (2 * x - 1);
    const double b = y * y * (y - 1) * (y - 1), db = 2.0 * y * (y - 1) * (2 * y - 1);
    v = c * a * b;
    g = {c * da * b, c * a * db};
    return;
  }
  v = std::sin(kPi * y) * std::cos(kPi * x);
  g = {-kPi * std::sin(kPi * y) * std::sin(kPi * x), kPi * std::cos(kPi * y) * std::cos(kPi * x)};
}

void ManufacturedCase::head_parts(const Point& p, double& v, Vec2& g, std::array<double, 3>& h) const {
  const double x = p.x, y = p.y;
  if (id_ == CaseId::Ex1) {
    const double c = 64.0 * kPi * kPi;
    const double a = x * x * (x - 1) * (x - 1), da = 2.0 * x * (x - 1) * (2 * x - 1), dda = 12 * x * x - 12 * x + 2;
    const double d = (y + 1) * (y + 1) * y * y, dd = 2.0 * y * (y + 1) * (2 * y + 1), ddd = 12 * y * y + 12 * y + 2;
    v = c * a * d;
    g = {c * da * d, c * a * dd};
    h = {c * dda * d, c * da * dd, c * a * ddd};
    return;
  }
  const double sx = std::sin(kPi * x), cx = std::cos(kPi * x), sy = std::sin(kPi * y);
  const double s2y = std::sin(2 * kPi * y), c2y = std::cos(2 * kPi * y);
  v = sx * sy * sy;
  g = {kPi * cx * sy * sy, kPi * sx * s2y};
  h = {-kPi * kPi * sx * sy * sy, kPi * kPi * cx * s2y, 2.0 * kPi * kPi * sx * c2y};
}

Vec2 ManufacturedCase::velocity(const Point& x, double t) const {
  Vec2 u, lap;
  Mat2 g;
  velocity_parts(x, u, g, lap);
  return {u.x * std::cos(t), u.y * std::cos(t)};
}

Vec2 ManufacturedCase::velocity_dt(const Point& x, double t) const {
  Vec2 u, lap;
  Mat2 g;
  velocity_parts(x, u, g, lap);
  return {-u.x * std::sin(t), -u.y * std::sin(t)};
}

Mat2 ManufacturedCase::velocity_grad(const Point& x, double t) const {
  Vec2 u, lap;
  Mat2 g;
  velocity_parts(x, u, g, lap);
  for (auto& r : g)
    for (double& v : r) v *= std::cos(t);
  return g;
}

Vec2 ManufacturedCase::velocity_laplacian(const Point& x, double t) const {
  Vec2 u, lap;
  Mat2 g;
  velocity_parts(x, u, g, lap);
  return {lap.x * std::cos(t), lap.y * std::cos(t)};
}

double ManufacturedCase::pressure(const Point& x, double t) const {
  double p;
  Vec2 g;
  pressure_parts(x, p, g);
  return p * std::cos(t);
}

Vec2 ManufacturedCase::pressure_grad(const Point& x, double t) const {
  double p;
  Vec2 g;
  pressure_parts(x, p, g);
  return {g.x * std::cos(t), g.y * std::cos(t)};
}

double ManufacturedCase::emac_pressure(const Point& x, double t) const {
  const Vec2 u = velocity(x, t);
  return pressure(x, t) - 0.5 * dot(u, u);
}

double ManufacturedCase::head(const Point& x, double t) const {
  double v;
  Vec2 g;
  std::array<double, 3> h;
  head_parts(x, v, g, h);
  return v * std::cos(t);
}

double ManufacturedCase::head_dt(const Point& x, double t) const {
  double v;
  Vec2 g;
  std::array<double, 3> h;
  head_parts(x, v, g, h);
  return -v * std::sin(t);
}

Vec2 ManufacturedCase::head_grad(const Point& x, double t) const {
  double v;
  Vec2 g;
  std::array<double, 3> h;
  head_parts(x, v, g, h);
  return {g.x * std::cos(t), g.y * std::cos(t)};
}

std::array<double, 3> ManufacturedCase::head_hessian(const Point& x, double t) const {
  double v;
  Vec2 g;
  std::array<double, 3> h;
  head_parts(x, v, g, h);
  for (double& e : h) e *= std::cos(t);
  return h;
}

Vec2 ManufacturedCase::fluid_forcing(const Point& x, double t, double nu) const {
  const Vec2 u = velocity(x, t), ut = velocity_dt(x, t), lap = velocity_laplacian(x, t), gp = pressure_grad(x, t);
  const Vec2 conv = matvec2(velocity_grad(x, t), u);
  return {ut.x - nu * lap.x + gp.x + conv.x, ut.y - nu * lap.y + gp.y + conv.y};
}

double ManufacturedCase::porous_forcing(const Point& x, double t, double s0, const Tensor2& k) const {
  const auto h = head_hessian(x, t);
  return s0 * head_dt(x, t) - (k.xx * h[0] + 2.0 * k.xy * h[1] + k.yy * h[2]);
}

ManufacturedCase::InterfaceResidual ManufacturedCase::interface_residual(const Point& x, double t, const Vec2& n,
                                                                         const NsdParams& prm, double beta) const {
  const Vec2 tau{-n.y, n.x};
  const Vec2 u = velocity(x, t);
  const Vec2 gun = matvec2(velocity_grad(x, t), n);
  const Tensor2& k = prm.k.empty() ? Tensor2{} : prm.k.front();
  InterfaceResidual r;
  r.mass = dot(u, n) + dot(k.apply(head_grad(x, t)), n);
  r.normal = pressure(x, t) - prm.nu * dot(n, gun) + 0.5 * dot(u, u) - prm.g * head(x, t);
  r.tangential = -prm.nu * dot(tau, gun) - beta * dot(u, tau);
  return r;
}

NsdData manufactured_data(const ManufacturedCase& c, const Mesh& mesh, const NsdParams& prm) {
  const Tensor2 k = prm.k.empty() ? Tensor2{} : prm.k.front();
  const double beta = prm.alpha * std::sqrt(prm.nu * prm.g / k.trace());
  const Vec2 n = mesh.interface_line().normal;
  const Vec2 tau{-n.y, n.x};
  NsdData d;
  d.f_f = [c, prm](const Point& x, double t) { return c.fluid_forcing(x, t, prm.nu); };
  d.f_p = [c, prm, k](const Point& x, double t) { return c.porous_forcing(x, t, prm.s0, k); };
  d.u_boundary = [c](const Point& x, double t) { return c.velocity(x, t); };
  d.phi_boundary = [c](const Point& x, double t) { return c.head(x, t); };
  d.interface_traction = [c, prm, beta, n, tau](const Point& x, double t) {
    const auto r = c.interface_residual(x, t, n, prm, beta);
    return Vec2{-(r.normal * n.x + r.tangential * tau.x), -(r.normal * n.y + r.tangential * tau.y)};
  };
  d.interface_source = [c, prm, beta, n](const Point& x, double t) {
    return -prm.g * c.interface_residual(x, t, n, prm, beta).mass;
  };
  // W = dE/dt + I evaluated on the exact solution.
  const Mesh* m = &mesh;
  d.power = [c, prm, k, beta, tau, m](double t) {
    constexpr int deg = 7;
    const double fluid = integrate_domain(*m, Subdomain::Fluid, deg, [&](const Point& x) {
      const Vec2 u = c.velocity(x, t), ut = c.velocity_dt(x, t);
      const Mat2 g = c.velocity_grad(x, t);
      return dot(u, ut) + prm.nu * (g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]);
    });
    const double porous = integrate_domain(*m, Subdomain::Porous, deg, [&](const Point& x) {
      const Vec2 gp = c.head_grad(x, t);
      return prm.g * prm.s0 * c.head(x, t) * c.head_dt(x, t) + prm.g * dot(k.apply(gp), gp);
    });
    const double slip = integrate_interface(*m, deg, [&](const Point& x) {
      const double ut = dot(c.velocity(x, t), tau);
      return beta * ut * ut;
    });
    return fluid + porous + slip;
  };
  return d;
}

double l2_error(const Field& field, const ScalarFn& exact) {
  const DofMap& s = *field.space;
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Triangle, 7);
  double sum = 0.0;
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    const ElementMap map = ElementMap::of(s.mesh(), t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double e = field.value(t, rule.points[q]) - exact(map.to_physical(rule.points[q]));
      sum += rule.weights[q] * std::abs(map.det) * e * e;
    }
  }
  return std::sqrt(sum);
}

double l2_error(const Field& field, const VectorFn& exact) {
  const DofMap& s = *field.space;
  const QuadratureRule& rule = quadrature_rule(QuadratureEntity::Triangle, 7);
  double sum = 0.0;
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    if (!s.contains_triangle(t)) continue;
    const ElementMap map = ElementMap::of(s.mesh(), t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 v = field.vector_value(t, rule.points[q]);
      const Vec2 e = exact(map.to_physical(rule.points[q]));
      sum += rule.weights[q] * std::abs(map.det) * ((v.x - e.x) * (v.x - e.x) + (v.y - e.y) * (v.y - e.y));
    }
  }
  return std::sqrt(sum);
}

double fitted_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("rate fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceStudy convergence_study(CaseId id, Scheme scheme, Convection convection, const std::vector<double>& h_list,
                                   const std::function<double(double)>& dt_rule, double t_end,
                                   const std::function<void(const NsdSolver&, const StepRecord&)>& observer) {
  const ManufacturedCase c(id);
  ConvergenceStudy study;
  for (double h : h_list) {
    ConvergenceRow row;
    row.h = h;
    row.dt = dt_rule(h);
    try {
      const Mesh mesh = build_two_domain_mesh(ManufacturedCase::geometry(), h);
      NsdConfig cfg;
      cfg.params = c.params(mesh);
      cfg.dt = row.dt;
      cfg.t_end = t_end;
      cfg.scheme = scheme;
      cfg.convection = convection;
      const long before = factorization_count();
      NsdSolver solver(mesh, cfg, manufactured_data(c, mesh, cfg.params));
      const bool emac = convection == Convection::Emac;
      solver.initialize([&](const Point& x) { return c.velocity(x, 0.0); }, [&](const Point& x) { return c.head(x, 0.0); },
                        [&](const Point& x) { return emac ? c.emac_pressure(x, 0.0) : c.pressure(x, 0.0); });
      solver.run([&](const StepRecord& r) {
        if (observer) observer(solver, r);
      });
      row.factorizations = factorization_count() - before;
      const double t = solver.time();
      row.err_u = l2_error(solver.velocity(), VectorFn([&](const Point& x) { return c.velocity(x, t); }));
      row.err_phi = l2_error(solver.head(), ScalarFn([&](const Point& x) { return c.head(x, t); }));
      row.err_p = l2_error(solver.pressure(), ScalarFn([&](const Point& x) {
        return emac ? c.emac_pressure(x, t) : c.pressure(x, t);
      }));
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    study.rows.push_back(row);
  }
  std::vector<double> dts, eu, ephi, ep;
  for (const auto& r : study.rows) {
    if (!r.ok) continue;
    dts.push_back(r.dt);
    eu.push_back(r.err_u);
    ephi.push_back(r.err_phi);
    ep.push_back(r.err_p);
  }
  if (dts.size() >= 2) {
    study.rate_u = fitted_rate(dts, eu);
    study.rate_phi = fitted_rate(dts, ephi);
    study.rate_p = fitted_rate(dts, ep);
  }
  return study;
}

void write_convergence_csv(const ConvergenceStudy& study, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "h,dt,err_u,err_phi,err_p\n" << std::setprecision(17);
  for (const auto& r : study.rows) {
    if (!r.ok) continue;
    out << r.h << ',' << r.dt << ',' << r.err_u << ',' << r.err_phi << ',' << r.err_p << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<oracle::CheckResult> forcing_checks(unsigned long long seed) {
  constexpr double h = 1e-3;
  auto d1 = [](const std::function<double(double)>& f, double s) {
    return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h);
  };
  auto d2 = [](const std::function<double(double)>& f, double s) {
    return (-f(s + 2 * h) + 16 * f(s + h) - 30 * f(s) + 16 * f(s - h) - f(s - 2 * h)) / (12 * h * h);
  };
  auto comp = [](const Vec2& v, int i) { return i == 0 ? v.x : v.y; };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.01, 0.99), time(0.0, 2.0);
  const Geometry geo = ManufacturedCase::geometry();
  const double nu = 0.37, s0 = 0.8;
  const Tensor2 k{2.0, 0.3, 0.7};
  std::vector<oracle::CheckResult> out;
  for (CaseId id : {CaseId::Ex1, CaseId::Ex2}) {
    const ManufacturedCase c(id);
    oracle::CheckResult ff{c.name() + " fluid forcing", 0.0, 1.0}, fp{c.name() + " porous forcing", 0.0, 1.0};
    for (int n = 0; n < 30; ++n) {
      const Rect& r = geo.fluid;
      const Point x{r.x_min + unit(rng) * r.width(), r.y_min + unit(rng) * r.height()};
      const double t = time(rng);
      const Vec2 f = c.fluid_forcing(x, t, nu);
      const Vec2 u = c.velocity(x, t);
      for (int i = 0; i < 2; ++i) {
        auto in_x = [&](double s) { return comp(c.velocity({s, x.y}, t), i); };
        auto in_y = [&](double s) { return comp(c.velocity({x.x, s}, t), i); };
        const double dp = i == 0 ? d1([&](double s) { return c.pressure({s, x.y}, t); }, x.x)
                                 : d1([&](double s) { return c.pressure({x.x, s}, t); }, x.y);
        const double expect = d1([&](double s) { return comp(c.velocity(x, s), i); }, t) -
                              nu * (d2(in_x, x.x) + d2(in_y, x.y)) + dp + u.x * d1(in_x, x.x) + u.y * d1(in_y, x.y);
        ff.error = std::max(ff.error, std::abs(comp(f, i) - expect));
        ff.scale = std::max(ff.scale, 1.0 + std::abs(expect));
      }
    }
    for (int n = 0; n < 30; ++n) {
      const Rect& r = geo.porous;
      const Point x{r.x_min + unit(rng) * r.width(), r.y_min + unit(rng) * r.height()};
      const double t = time(rng);
      auto flux = [&](const Point& q) {
        return k.apply(Vec2{d1([&](double s) { return c.head({s, q.y}, t); }, q.x),
                            d1([&](double s) { return c.head({q.x, s}, t); }, q.y)});
      };
      const double expect = s0 * d1([&](double s) { return c.head(x, s); }, t) -
                            d1([&](double s) { return flux({s, x.y}).x; }, x.x) -
                            d1([&](double s) { return flux({x.x, s}).y; }, x.y);
      fp.error = std::max(fp.error, std::abs(c.porous_forcing(x, t, s0, k) - expect));
      fp.scale = std::max(fp.scale, 1.0 + std::abs(expect));
    }
    out.push_back(ff);
    out.push_back(fp);
  }
  return out;
}

}  // namespace nsdarcy
