#include "nsdarcy/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <numbers>
#include <set>

namespace nsdarcy {

namespace {

bool inside(const Box& b, const Point& p) { return p.x >= b[0] && p.x <= b[1] && p.y >= b[2] && p.y <= b[3]; }

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06ld.vtk", step);
  return buf;
}

// step index of each requested snapshot time
std::set<long> snapshot_steps(const RunConfig& cfg) {
  std::set<long> s;
  for (double t : cfg.snapshots) s.insert(std::lround(t / cfg.dt));
  return s;
}

// Length of the zero level set and area of {phi > 0} inside one linear triangle.
void clip_triangle(const std::array<Point, 3>& x, const std::array<double, 3>& v, double& length, double& area) {
  std::vector<Point> poly;
  std::vector<Point> cuts;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    if (v[i] > 0) poly.push_back(x[i]);
    if ((v[i] > 0) != (v[j] > 0)) {
      const double s = v[i] / (v[i] - v[j]);
      const Point c{x[i].x + s * (x[j].x - x[i].x), x[i].y + s * (x[j].y - x[i].y)};
      poly.push_back(c);
      cuts.push_back(c);
    }
  }
  if (cuts.size() == 2) length += std::hypot(cuts[1].x - cuts[0].x, cuts[1].y - cuts[0].y);
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  area += 0.5 * std::abs(a);
}

void write_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  std::ofstream f(dir / "config.txt");
  f << "# config_hash=" << config_hash(cfg) << '\n' << canonical_text(cfg);
  if (!f) throw std::runtime_error("write failed: " + (dir / "config.txt").string());
}

struct TraceStats {
  double xi_min = 1e300;
  double xi_max = -1e300;
  long clamped = 0;
  long zero = 0;
  long increases = 0;
  void add(double xi, unsigned flags, double e_new, double e_old, double tol) {
    xi_min = std::min(xi_min, xi);
    xi_max = std::max(xi_max, xi);
    if (flags & kFlagClamped) ++clamped;
    if (flags & kFlagZeroEnergy) ++zero;
    if (e_new > e_old + tol) ++increases;
  }
};

int run_convergence(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const CaseId id = cfg.case_name == "ex2" ? CaseId::Ex2 : CaseId::Ex1;
  const Scheme scheme = cfg.scheme == 2 ? Scheme::Two : Scheme::One;
  const double c = cfg.dt_coeff, p = cfg.dt_power;
  const ConvergenceStudy st = convergence_study(
      id, scheme, cfg.convection, cfg.h_list, [c, p](double h) { return c * std::pow(h, p); }, cfg.t_end);
  const std::string name = "convergence_" + cfg.case_name + "_" + std::to_string(cfg.scheme) + ".csv";
  write_convergence_csv(st, (dir / name).string());
  bool ok = true;
  for (const ConvergenceRow& r : st.rows) {
    log << "h=" << format_double(r.h) << " dt=" << format_double(r.dt) << " err_u=" << r.err_u
        << " err_phi=" << r.err_phi << " err_p=" << r.err_p << (r.ok ? "" : " FAILED: " + r.error) << '\n';
    ok = ok && r.ok;
  }
  log << "rate_u=" << st.rate_u << " rate_phi=" << st.rate_phi << " rate_p=" << st.rate_p << '\n';
  log << "wrote " << (dir / name).string() << '\n';
  return ok ? kExitOk : kExitSolver;
}

int run_nsd(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const Mesh mesh = build_two_domain_mesh(experiment_geometry(cfg), cfg.h);
  NsdSolver s(mesh, nsd_config(cfg, mesh));
  initialize_nsd(s, cfg);
  const std::set<long> snaps = snapshot_steps(cfg);
  std::ofstream index(dir / "snapshots.csv");
  index << "step,t,file,E\n";
  auto snapshot = [&](long step) {
    if (!snaps.count(step)) return;
    const std::string file = snapshot_name(step);
    write_vtk(mesh, {{"u_f", &s.velocity()}, {"p_f", &s.pressure()}, {"phi_p", &s.head()}}, (dir / file).string());
    index << step << ',' << format_double(s.time()) << ',' << file << ',' << format_double(s.current_energy()) << '\n';
  };
  std::vector<TraceRecord> trace;
  TraceStats stats;
  double e_old = s.initial_energy();
  const std::size_t total = s.num_steps();
  snapshot(0);
  int code = kExitOk;
  try {
    s.run([&](const StepRecord& r) {
      trace.push_back(to_trace(r));
      stats.add(r.xi, r.flags, r.energy, e_old, 1e-12 * s.initial_energy());
      e_old = r.energy;
      snapshot(r.step);
      if (total >= 10 && r.step % static_cast<long>(total / 10) == 0)
        log << "step " << r.step << "/" << total << " t=" << format_double(r.t) << " E=" << r.energy << " xi=" << r.xi
            << '\n';
    });
  } catch (const InvariantError& e) {
    log << "invariant violated: " << e.what() << '\n';
    code = kExitInvariant;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << '\n';
    code = kExitSolver;
  }
  write_trace(trace, (dir / "trace.csv").string(), config_hash(cfg), cfg.seed);
  log << "steps=" << trace.size() << " E0=" << s.initial_energy() << " E=" << s.current_energy()
      << " xi=[" << stats.xi_min << "," << stats.xi_max << "] clamped=" << stats.clamped
      << " energy_increases=" << stats.increases << '\n';
  return code;
}

int run_chnsd(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const Mesh mesh = build_two_domain_mesh(experiment_geometry(cfg), cfg.h);
  ChnsdSolver s(mesh, chnsd_config(cfg, mesh));
  initialize_chnsd(s, cfg);
  const std::set<long> snaps = snapshot_steps(cfg);
  std::ofstream index(dir / "snapshots.csv");
  index << "step,t,file,E,mass,area,perimeter,isoperimetric,centroid_x,centroid_y\n";
  auto snapshot = [&](long step) {
    if (!snaps.count(step)) return;
    const std::string file = snapshot_name(step);
    write_vtk(mesh,
              {{"phi", &s.phase()},
               {"mu", &s.chemical_potential()},
               {"u_f", &s.fluid_velocity()},
               {"p_f", &s.fluid_pressure()},
               {"u_p", &s.porous_velocity()},
               {"p_p", &s.porous_pressure()}},
              (dir / file).string());
    const PhaseMetrics m = phase_metrics(s.phase());
    index << step << ',' << format_double(s.time()) << ',' << file << ',' << format_double(s.current_energy()) << ','
          << format_double(s.mass(s.phase())) << ',' << format_double(m.area) << ',' << format_double(m.perimeter)
          << ',' << format_double(m.isoperimetric) << ',' << format_double(m.centroid.x) << ','
          << format_double(m.centroid.y) << '\n';
  };
  std::vector<TraceRecord> trace;
  TraceStats stats;
  double e_old = s.initial_energy();
  double drift = 0.0;
  const std::size_t total = s.num_steps();
  snapshot(0);
  int code = kExitOk;
  try {
    s.run([&](const ChnsdRecord& r) {
      trace.push_back(to_trace(r));
      stats.add(r.xi, r.flags, r.energy, e_old, 1e-10 * s.initial_energy());
      e_old = r.energy;
      drift = std::max(drift, std::abs(r.mass - s.initial_mass()));
      if (r.flags & kFlagClamped) log << "step " << r.step << ": xi clamped to 0\n";
      snapshot(r.step);
      if (total >= 10 && r.step % static_cast<long>(total / 10) == 0)
        log << "step " << r.step << "/" << total << " t=" << format_double(r.t) << " E=" << r.energy << " xi=" << r.xi
            << '\n';
    });
  } catch (const InvariantError& e) {
    log << "invariant violated: " << e.what() << '\n';
    code = kExitInvariant;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << '\n';
    code = kExitSolver;
  }
  write_trace(trace, (dir / "trace.csv").string(), config_hash(cfg), cfg.seed);
  log << "steps=" << trace.size() << " E0=" << s.initial_energy() << " E=" << s.current_energy()
      << " xi=[" << stats.xi_min << "," << stats.xi_max << "] clamped=" << stats.clamped
      << " energy_increases=" << stats.increases << " mass_drift=" << drift << '\n';
  return code;
}

}  // namespace

Geometry experiment_geometry(const RunConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::Filtration: return Geometry{{0, 2, 1.5, 2}, {0, 2, 0, 1.5}};
    case Experiment::PhaseSeparation:
    case Experiment::Droplet:
    case Experiment::Bubble: return Geometry{{0, 1, 0, 1}, {0, 1, 1, 2}};
    default: return ManufacturedCase::geometry();
  }
}

TensorField filtration_conductivity(const RunConfig& cfg, const Mesh& mesh) {
  TensorField k(mesh.num_triangles(), Tensor2{});
  if (cfg.case_name == "g") {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Tensor2& t : k) {
      const double r = 1.0 - u(rng);  // (0, 1]
      t = Tensor2{r, 0.1 * r, r};
    }
    return k;
  }
  for (std::size_t t = 0; t < k.size(); ++t) {
    const Point c = mesh.centroid(t);
    if (inside(cfg.block1, c) || inside(cfg.block2, c)) k[t] = Tensor2::isotropic(cfg.block_k);
  }
  return k;
}

NsdConfig nsd_config(const RunConfig& cfg, const Mesh& mesh) {
  NsdConfig c;
  c.params.nu = cfg.nu;
  c.params.g = cfg.g;
  c.params.s0 = cfg.s0;
  c.params.alpha = cfg.alpha;
  c.params.k = cfg.experiment == Experiment::Filtration ? filtration_conductivity(cfg, mesh) : uniform_tensor(mesh, cfg.k);
  c.dt = cfg.dt;
  c.t_end = cfg.t_end;
  c.scheme = cfg.scheme == 2 ? Scheme::Two : Scheme::One;
  c.convection = cfg.convection;
  return c;
}

ChnsdConfig chnsd_config(const RunConfig& cfg, const Mesh& mesh) {
  ChnsdConfig c;
  c.params.nu_f = cfg.nu_f;
  c.params.nu_p = cfg.nu_p;
  c.params.alpha = cfg.alpha;
  c.params.chi = cfg.chi;
  c.params.lambda = cfg.lambda;
  c.params.eps = cfg.eps;
  c.params.k = uniform_tensor(mesh, cfg.k);
  c.params.buoyancy = cfg.buoyancy;
  c.params.stabilization = cfg.stabilization;
  c.dt = cfg.dt;
  c.t_end = cfg.t_end;
  c.convection = cfg.convection;
  return c;
}

void initialize_nsd(NsdSolver& s, const RunConfig& cfg) {
  const NsdSpaces& sp = s.spaces();
  Field u(sp.velocity), phi(sp.head);
  const auto& wall = sp.velocity->boundary_mask(EdgeTag::GammaF);
  const std::size_t n = sp.velocity->scalar_dofs();
  if (cfg.experiment == Experiment::Filtration) {
    u = interpolate(sp.velocity, VectorFn([](const Point& p) { return Vec2{0.0, 0.01 * p.x * (p.x - 2.0)}; }));
    for (std::size_t i = 0; i < n; ++i)
      if (wall[i]) u.values[i] = u.values[n + i] = 0.0;
  } else if (cfg.experiment == Experiment::Custom) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> d(-cfg.amplitude, cfg.amplitude);
    for (std::size_t i = 0; i < n; ++i) {
      if (wall[i]) continue;
      u.values[i] = d(rng);
      u.values[n + i] = d(rng);
    }
    const auto& outer = sp.head->boundary_mask(EdgeTag::GammaP);
    for (std::size_t i = 0; i < phi.values.size(); ++i)
      if (!outer[i]) phi.values[i] = d(rng);
  } else {
    throw std::invalid_argument(to_string(cfg.experiment) + " is not a Navier-Stokes-Darcy experiment");
  }
  s.initialize(std::move(u), std::move(phi));
}

double petal_phase(const Point& p, int petals, double eps) {
  const double dx = p.x - 0.5, dy = p.y - 1.0;
  const double r = std::hypot(dx, dy);
  return std::tanh((0.25 + 0.1 * std::cos(petals * std::atan2(dy, dx)) - r) / (std::sqrt(2.0) * eps));
}

double bubble_phase(const Point& p, const std::vector<Disc>& discs, double eps) {
  double v = -1.0;
  for (const Disc& d : discs)
    v = std::max(v, std::tanh((d.r - std::hypot(p.x - d.x, p.y - d.y)) / (std::sqrt(2.0) * eps)));
  return v;
}

void initialize_chnsd(ChnsdSolver& s, const RunConfig& cfg) {
  const double eps = cfg.eps;
  switch (cfg.experiment) {
    case Experiment::PhaseSeparation: {
      Field phi(s.spaces().phase);
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      for (std::size_t i = 0; i < phi.values.size(); ++i)
        phi.values[i] = phi.space->coordinate(i).y - 1.0 + 0.01 * d(rng);
      s.initialize(std::move(phi), Field(s.spaces().fluid_velocity), Field(s.spaces().porous_velocity));
      return;
    }
    case Experiment::Droplet: {
      const int n = std::stoi(cfg.case_name);
      s.initialize(ScalarFn([n, eps](const Point& p) { return petal_phase(p, n, eps); }));
      return;
    }
    case Experiment::Bubble: {
      const std::vector<Disc> discs = cfg.bubbles;
      s.initialize(ScalarFn([discs, eps](const Point& p) { return bubble_phase(p, discs, eps); }));
      return;
    }
    default:
      throw std::invalid_argument(to_string(cfg.experiment) + " is not a phase-field experiment");
  }
}

PhaseMetrics phase_metrics(const Field& phi) {
  const DofMap& space = *phi.space;
  if (space.family() != BasisFamily::Linear || space.components() != 1)
    throw std::invalid_argument("phase_metrics needs a scalar linear field");
  const Mesh& mesh = space.mesh();
  PhaseMetrics m;
  double mx = 0.0, my = 0.0, area0 = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!space.contains_triangle(t)) continue;
    const auto& nodes = mesh.triangle(t);
    const auto& dofs = space.scalar_dofs_of(t);
    std::array<Point, 3> x;
    std::array<double, 3> v, w;
    for (int k = 0; k < 3; ++k) {
      x[k] = mesh.node(static_cast<std::size_t>(nodes[k]));
      v[k] = phi.values[static_cast<std::size_t>(dofs[k])];
      w[k] = 0.5 * (1.0 + v[k]);
    }
    const double a = std::abs(mesh.signed_area(t));
    // int f g = |T|/12 (sum f_i g_i + sum f_i sum g_i) for linear f, g
    const double sw = w[0] + w[1] + w[2];
    m.area += a * sw / 3.0;
    mx += a / 12.0 * (x[0].x * w[0] + x[1].x * w[1] + x[2].x * w[2] + (x[0].x + x[1].x + x[2].x) * sw);
    my += a / 12.0 * (x[0].y * w[0] + x[1].y * w[1] + x[2].y * w[2] + (x[0].y + x[1].y + x[2].y) * sw);
    clip_triangle(x, v, m.perimeter, area0);
  }
  if (m.area > 0.0) m.centroid = {mx / m.area, my / m.area};
  if (area0 > 0.0) m.isoperimetric = m.perimeter * m.perimeter / (4.0 * std::numbers::pi * area0);
  return m;
}

int run_experiment(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const std::filesystem::path dir(cfg.out);
  try {
    std::filesystem::create_directories(dir);
    write_config(cfg, dir);
  } catch (const std::exception& e) {
    log << "cannot prepare output directory " << cfg.out << ": " << e.what() << '\n';
    return kExitIo;
  }
  log << "experiment=" << to_string(cfg.experiment) << (cfg.case_name.empty() ? "" : " case=" + cfg.case_name)
      << " scheme=" << cfg.scheme << " config_hash=" << config_hash(cfg) << '\n';
  try {
    switch (cfg.experiment) {
      case Experiment::Convergence: return run_convergence(cfg, dir, log);
      case Experiment::Filtration:
      case Experiment::Custom: return run_nsd(cfg, dir, log);
      default: return run_chnsd(cfg, dir, log);
    }
  } catch (const std::ios_base::failure& e) {
    log << "i/o failure: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    log << "failure: " << what << '\n';
    return what.rfind("write failed", 0) == 0 || what.rfind("cannot open", 0) == 0 ? kExitIo : kExitSolver;
  }
}

}  // namespace nsdarcy
