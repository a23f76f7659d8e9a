#include "nsdarcy/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace nsdarcy {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

double parse_plain(const std::string& key, const std::string& text) {
  if (text.empty()) fail(key, "expected a number, got an empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
    fail(key, "expected a number, got '" + text + "'");
  return v;
}

// Accepts "0.0625" and "1/16".
double parse_number(const std::string& key, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_plain(key, text);
  const double num = parse_plain(key, trim(text.substr(0, slash)));
  const double den = parse_plain(key, trim(text.substr(slash + 1)));
  if (den == 0.0) fail(key, "division by zero in '" + text + "'");
  return num / den;
}

std::vector<double> parse_list(const std::string& key, const std::string& text, std::size_t expected = 0) {
  std::vector<double> out;
  if (text.empty() || text == "none") {
    if (expected != 0) fail(key, "expected " + std::to_string(expected) + " numbers");
    return out;
  }
  for (const std::string& item : split(text, ',')) out.push_back(parse_number(key, item));
  if (expected != 0 && out.size() != expected)
    fail(key, "expected " + std::to_string(expected) + " comma-separated numbers, got " + std::to_string(out.size()));
  return out;
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    fail(key, "expected a nonnegative integer, got '" + text + "'");
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) fail(key, "out of range");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::uint64_t v = parse_seed(key, text);
  if (v > 1000) fail(key, "out of range");
  return static_cast<int>(v);
}

std::string join(const std::vector<double>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_double(v[i]);
  }
  return s.empty() ? "none" : s;
}

const std::set<std::string>& cases_of(Experiment e) {
  static const std::map<Experiment, std::set<std::string>> table{
      {Experiment::Convergence, {"ex1", "ex2"}},
      {Experiment::Filtration, {"a", "b", "c", "d", "e", "f", "g"}},
      {Experiment::PhaseSeparation, {}},
      {Experiment::Droplet, {"4", "6"}},
      {Experiment::Bubble, {"1", "2"}},
      {Experiment::Custom, {}},
  };
  return table.at(e);
}

std::string default_case(Experiment e) {
  switch (e) {
    case Experiment::Convergence: return "ex1";
    case Experiment::Filtration: return "a";
    case Experiment::Droplet: return "4";
    case Experiment::Bubble: return "1";
    default: return {};
  }
}

bool is_chnsd(Experiment e) {
  return e == Experiment::PhaseSeparation || e == Experiment::Droplet || e == Experiment::Bubble;
}

void chnsd_common(RunConfig& c) {
  c.scheme = 3;
  c.convection = Convection::Emac;
  c.dt = 0.005;
  c.h = 1.0 / 100.0;
  c.nu_f = 0.1;
  c.nu_p = 0.1;
  c.alpha = 0.01;
  c.chi = 1.0;
  c.lambda = 0.1;
  c.eps = 0.01;
  c.k = Tensor2{0.5, 0.1, 0.2};
}

// widths of the two low-conductivity blocks, both centered at x = 1
Box centered_box(double width, double y0, double y1) { return {1.0 - width / 2, 1.0 + width / 2, y0, y1}; }

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Convergence: return "convergence";
    case Experiment::Filtration: return "filtration";
    case Experiment::PhaseSeparation: return "phase-separation";
    case Experiment::Droplet: return "droplet";
    case Experiment::Bubble: return "bubble";
    case Experiment::Custom: return "custom";
  }
  return "custom";
}

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : {Experiment::Convergence, Experiment::Filtration, Experiment::PhaseSeparation,
                       Experiment::Droplet, Experiment::Bubble, Experiment::Custom})
    if (to_string(e) == name) return e;
  fail("experiment", "unknown experiment '" + name +
                         "' (convergence, filtration, phase-separation, droplet, bubble, custom)");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "experiment", "case",  "scheme", "convection", "h",     "dt",      "t_end",         "snapshots",
      "seed",       "out",   "h_list", "dt_coeff",   "dt_power", "nu",   "g",             "s0",
      "alpha",      "k",     "nu_f",   "nu_p",       "chi",   "lambda",  "eps",           "buoyancy",
      "stabilization", "block1", "block2", "block_k", "bubbles", "amplitude"};
  return keys;
}

RunConfig preset(Experiment e, const std::string& case_in, int scheme) {
  const std::string cs = case_in.empty() ? default_case(e) : case_in;
  if (!cases_of(e).count(cs) && !(cs.empty() && cases_of(e).empty())) {
    if (cases_of(e).empty()) fail("case", "experiment " + to_string(e) + " has no cases");
    fail("case", "unknown case '" + cs + "' for " + to_string(e));
  }
  RunConfig c;
  c.experiment = e;
  c.case_name = cs;
  c.out = "out/" + to_string(e) + (cs.empty() ? "" : "_" + cs);
  switch (e) {
    case Experiment::Convergence: {
      c.scheme = scheme == 0 ? 1 : scheme;
      c.convection = Convection::Standard;
      c.h_list = {1.0 / 16, 1.0 / 20, 1.0 / 24, 1.0 / 28, 1.0 / 32};
      c.t_end = 0.5;
      c.nu = 0.001;
      c.g = c.s0 = c.alpha = 1.0;
      c.k = Tensor2{};
      if (c.scheme == 1) {
        c.dt_coeff = 1.0;
        c.dt_power = 2.0;
      } else {
        c.dt_coeff = cs == "ex1" ? 1.0 / 8 : 1.0 / 4;
        c.dt_power = 1.0;
      }
      c.h = c.h_list.back();
      c.dt = c.dt_coeff * std::pow(c.h, c.dt_power);
      break;
    }
    case Experiment::Filtration: {
      c.scheme = scheme == 0 ? 1 : scheme;
      c.convection = Convection::Emac;
      c.t_end = 0.5;
      c.dt = 0.005;
      c.h = 1.0 / 80;
      c.nu = c.g = c.s0 = c.alpha = 1.0;
      c.k = Tensor2{};
      c.block_k = 1e-6;
      c.snapshots = {0.0, 0.5};
      if (cs != "g") {
        const int idx = cs[0] - 'a';
        const double w1 = idx < 3 ? 0.4 : 0.8;
        const double w2 = 0.4 * (idx % 3 + 1);
        c.block1 = centered_box(w1, 1.1, 1.2);
        c.block2 = centered_box(w2, 0.5, 0.6);
      }
      break;
    }
    case Experiment::PhaseSeparation:
      chnsd_common(c);
      c.t_end = 10.0;
      c.snapshots = {0.5, 1.0, 2.0, 4.0, 10.0};
      break;
    case Experiment::Droplet:
      chnsd_common(c);
      c.nu_p = 1.0;
      c.k = Tensor2::isotropic(0.01);
      c.t_end = 4.0;
      c.snapshots = cs == "4" ? std::vector<double>{0.0, 0.2, 0.6, 1.0, 4.0}
                              : std::vector<double>{0.0, 0.2, 0.4, 0.6, 4.0};
      break;
    case Experiment::Bubble:
      chnsd_common(c);
      c.nu_p = 1.0;
      c.k = Tensor2::isotropic(0.01);
      if (cs == "1") {
        c.buoyancy = {0.0, 5.0};
        c.bubbles = {{0.5, 0.5, 0.3}};
        c.t_end = 4.0;
        c.snapshots = {0.0, 0.4, 1.0, 1.4, 2.0, 2.2, 2.8, 4.0};
      } else {
        c.buoyancy = {0.0, 8.0};
        c.bubbles = {{0.5, 0.3, 0.15}, {0.5, 0.65, 0.15}};
        c.t_end = 2.0;
        c.snapshots = {0.0, 0.2, 0.5, 0.7, 1.0, 1.1, 1.4, 2.0};
      }
      break;
    case Experiment::Custom:
      c.scheme = scheme == 0 ? 1 : scheme;
      c.convection = Convection::Standard;
      c.h = 1.0 / 16;
      c.dt = 0.01;
      c.t_end = 1.0;
      c.nu = 0.05;
      c.g = 1.0;
      c.s0 = 0.5;
      c.alpha = 1.0;
      c.k = Tensor2{};
      c.amplitude = 1.0;
      break;
  }
  if (is_chnsd(e) && scheme != 0 && scheme != 3) fail("scheme", "phase-field experiments use scheme 3");
  if (!is_chnsd(e) && scheme != 0 && scheme != 1 && scheme != 2) fail("scheme", "expected 1 or 2");
  return c;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "experiment") fail(key, "cannot be overridden");
  if (key == "case" || key == "scheme") {
    // handled by the preset; accept only a value equal to the resolved one
    if (key == "case" && v != c.case_name) fail(key, "must be chosen with the preset");
    if (key == "scheme" && parse_int(key, v) != c.scheme) fail(key, "must be chosen with the preset");
    return;
  }
  if (key == "convection") {
    if (v == "standard") c.convection = Convection::Standard;
    else if (v == "emac") c.convection = Convection::Emac;
    else fail(key, "expected standard or emac, got '" + v + "'");
  } else if (key == "h") c.h = parse_number(key, v);
  else if (key == "dt") c.dt = parse_number(key, v);
  else if (key == "t_end") c.t_end = parse_number(key, v);
  else if (key == "snapshots") c.snapshots = parse_list(key, v);
  else if (key == "seed") c.seed = parse_seed(key, v);
  else if (key == "out") {
    if (v.empty()) fail(key, "empty path");
    c.out = v;
  } else if (key == "h_list") c.h_list = parse_list(key, v);
  else if (key == "dt_coeff") c.dt_coeff = parse_number(key, v);
  else if (key == "dt_power") c.dt_power = parse_number(key, v);
  else if (key == "nu") c.nu = parse_number(key, v);
  else if (key == "g") c.g = parse_number(key, v);
  else if (key == "s0") c.s0 = parse_number(key, v);
  else if (key == "alpha") c.alpha = parse_number(key, v);
  else if (key == "k") {
    const auto t = parse_list(key, v, 3);
    c.k = Tensor2{t[0], t[1], t[2]};
  } else if (key == "nu_f") c.nu_f = parse_number(key, v);
  else if (key == "nu_p") c.nu_p = parse_number(key, v);
  else if (key == "chi") c.chi = parse_number(key, v);
  else if (key == "lambda") c.lambda = parse_number(key, v);
  else if (key == "eps") c.eps = parse_number(key, v);
  else if (key == "buoyancy") {
    const auto b = parse_list(key, v, 2);
    c.buoyancy = {b[0], b[1]};
  } else if (key == "stabilization") c.stabilization = parse_number(key, v);
  else if (key == "block1" || key == "block2") {
    const auto b = parse_list(key, v, 4);
    (key == "block1" ? c.block1 : c.block2) = {b[0], b[1], b[2], b[3]};
  } else if (key == "block_k") c.block_k = parse_number(key, v);
  else if (key == "bubbles") {
    c.bubbles.clear();
    if (v != "none")
      for (const std::string& d : split(v, ';')) {
        const auto x = parse_list(key, d, 3);
        c.bubbles.push_back({x[0], x[1], x[2]});
      }
  } else if (key == "amplitude") c.amplitude = parse_number(key, v);
  else fail(key, "unknown key");
}

void validate(const RunConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) fail(key, "must be positive, got " + format_double(v));
  };
  if (c.experiment == Experiment::Convergence) {
    if (c.h_list.size() < 2) fail("h_list", "needs at least two mesh sizes");
    for (std::size_t i = 0; i < c.h_list.size(); ++i) {
      positive("h_list", c.h_list[i]);
      if (i && !(c.h_list[i] < c.h_list[i - 1])) fail("h_list", "must be strictly descending");
    }
    positive("dt_coeff", c.dt_coeff);
    positive("dt_power", c.dt_power);
    positive("t_end", c.t_end);
    const RunConfig ref = preset(c.experiment, c.case_name, c.scheme);
    if (c.nu != ref.nu) fail("nu", "fixed by the manufactured case");
    if (c.g != ref.g) fail("g", "fixed by the manufactured case");
    if (c.s0 != ref.s0) fail("s0", "fixed by the manufactured case");
    if (c.alpha != ref.alpha) fail("alpha", "fixed by the manufactured case");
    if (c.k.xx != ref.k.xx || c.k.xy != ref.k.xy || c.k.yy != ref.k.yy) fail("k", "fixed by the manufactured case");
  } else {
    positive("h", c.h);
    positive("dt", c.dt);
    positive("t_end", c.t_end);
    if (c.t_end < c.dt) fail("t_end", "must be at least dt");
  }
  for (double s : c.snapshots)
    if (!(s >= 0.0 && s <= c.t_end * (1 + 1e-12))) fail("snapshots", "time " + format_double(s) + " outside [0, t_end]");
  if (is_chnsd(c.experiment)) {
    positive("nu_f", c.nu_f);
    positive("nu_p", c.nu_p);
    positive("chi", c.chi);
    positive("lambda", c.lambda);
    positive("eps", c.eps);
    if (!(c.alpha >= 0.0)) fail("alpha", "must be nonnegative");
    if (!(c.stabilization >= 0.0)) fail("stabilization", "must be nonnegative");
  } else {
    positive("nu", c.nu);
    positive("g", c.g);
    positive("s0", c.s0);
    if (!(c.alpha >= 0.0)) fail("alpha", "must be nonnegative");
  }
  if (!c.k.is_spd()) fail("k", "must be symmetric positive definite");
  if (c.experiment == Experiment::Filtration) {
    positive("block_k", c.block_k);
    for (const auto* b : {&c.block1, &c.block2}) {
      const char* key = b == &c.block1 ? "block1" : "block2";
      if ((*b)[0] > (*b)[1] || (*b)[2] > (*b)[3]) fail(key, "expects x0 <= x1 and y0 <= y1");
    }
  }
  if (c.experiment == Experiment::Bubble) {
    if (c.bubbles.empty()) fail("bubbles", "needs at least one disc");
    for (const Disc& d : c.bubbles) positive("bubbles", d.r);
  }
  if (c.experiment == Experiment::Custom) positive("amplitude", c.amplitude);
  if (c.out.empty()) fail("out", "empty path");
}

ConfigEntries parse_entries(const std::string& text) {
  ConfigEntries out;
  std::set<std::string> seen;
  const auto& keys = config_keys();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(key, "unknown key");
    if (!seen.insert(key).second) fail(key, "given twice");
    out.emplace_back(key, value);
  }
  return out;
}

RunConfig resolve_config(const ConfigEntries& entries) {
  std::string exp, cs;
  int scheme = 0;
  for (const auto& [k, v] : entries) {
    if (k == "experiment") exp = v;
    if (k == "case") cs = v;
    if (k == "scheme") scheme = parse_int(k, v);
  }
  if (exp.empty()) throw ConfigError("experiment required");
  RunConfig c = preset(parse_experiment(exp), cs, scheme);
  for (const auto& [k, v] : entries)
    if (k != "experiment" && k != "case" && k != "scheme") apply_key(c, k, v);
  if (c.experiment == Experiment::Convergence) {
    c.h = c.h_list.empty() ? 0.0 : c.h_list.back();
    c.dt = c.dt_coeff * std::pow(c.h, c.dt_power);
  }
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& text) { return resolve_config(parse_entries(text)); }

std::string canonical_text(const RunConfig& c) {
  std::ostringstream s;
  s << "experiment=" << to_string(c.experiment) << '\n';
  if (!c.case_name.empty()) s << "case=" << c.case_name << '\n';
  s << "scheme=" << c.scheme << '\n';
  s << "convection=" << (c.convection == Convection::Emac ? "emac" : "standard") << '\n';
  s << "h=" << format_double(c.h) << '\n';
  s << "dt=" << format_double(c.dt) << '\n';
  s << "t_end=" << format_double(c.t_end) << '\n';
  s << "snapshots=" << join(c.snapshots) << '\n';
  s << "seed=" << c.seed << '\n';
  s << "out=" << c.out << '\n';
  s << "h_list=" << join(c.h_list) << '\n';
  s << "dt_coeff=" << format_double(c.dt_coeff) << '\n';
  s << "dt_power=" << format_double(c.dt_power) << '\n';
  s << "nu=" << format_double(c.nu) << '\n';
  s << "g=" << format_double(c.g) << '\n';
  s << "s0=" << format_double(c.s0) << '\n';
  s << "alpha=" << format_double(c.alpha) << '\n';
  s << "k=" << join({c.k.xx, c.k.xy, c.k.yy}) << '\n';
  s << "nu_f=" << format_double(c.nu_f) << '\n';
  s << "nu_p=" << format_double(c.nu_p) << '\n';
  s << "chi=" << format_double(c.chi) << '\n';
  s << "lambda=" << format_double(c.lambda) << '\n';
  s << "eps=" << format_double(c.eps) << '\n';
  s << "buoyancy=" << join({c.buoyancy.x, c.buoyancy.y}) << '\n';
  s << "stabilization=" << format_double(c.stabilization) << '\n';
  s << "block1=" << join({c.block1.begin(), c.block1.end()}) << '\n';
  s << "block2=" << join({c.block2.begin(), c.block2.end()}) << '\n';
  s << "block_k=" << format_double(c.block_k) << '\n';
  std::string discs;
  for (const Disc& d : c.bubbles) discs += (discs.empty() ? "" : ";") + join({d.x, d.y, d.r});
  s << "bubbles=" << (discs.empty() ? "none" : discs) << '\n';
  s << "amplitude=" << format_double(c.amplitude) << '\n';
  return s.str();
}

std::string config_hash(const RunConfig& c) {
  // the output directory does not change the run
  RunConfig k = c;
  k.out = "-";
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_text(k)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------------------------

void write_vtk(const std::vector<Point>& points, const std::vector<std::array<int, 3>>& triangles,
               const std::vector<VtkArray>& arrays, const std::string& path, const std::string& title) {
  const std::size_t n = points.size();
  for (const VtkArray& a : arrays) {
    if (a.components != 1 && a.components != 2) throw std::invalid_argument("vtk array " + a.name + ": 1 or 2 components");
    if (a.values.size() != n * static_cast<std::size_t>(a.components))
      throw std::invalid_argument("vtk array " + a.name + ": size does not match the point count");
    if (a.name.empty() || a.name.find_first_of(" \t\n") != std::string::npos)
      throw std::invalid_argument("vtk array name must be a single token");
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << n << " double\n";
  for (const Point& p : points) f << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  f << "CELLS " << triangles.size() << ' ' << 4 * triangles.size() << '\n';
  for (const auto& t : triangles) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  f << "CELL_TYPES " << triangles.size() << '\n';
  for (std::size_t i = 0; i < triangles.size(); ++i) f << "5\n";
  if (!arrays.empty()) f << "POINT_DATA " << n << '\n';
  for (const VtkArray& a : arrays) {
    if (a.components == 1) {
      f << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : a.values) f << format_double(v) << '\n';
    } else {
      f << "VECTORS " << a.name << " double\n";
      for (std::size_t i = 0; i < n; ++i)
        f << format_double(a.values[2 * i]) << ' ' << format_double(a.values[2 * i + 1]) << " 0\n";
    }
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

VtkArray vertex_array(const std::string& name, const Field& field) {
  const DofMap& space = *field.space;
  const Mesh& mesh = space.mesh();
  const int nc = space.components();
  const std::size_t ns = space.scalar_dofs();
  VtkArray a{name, nc, std::vector<double>(mesh.num_nodes() * static_cast<std::size_t>(nc), 0.0)};
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!space.contains_triangle(t)) continue;
    const auto& nodes = mesh.triangle(t);
    const auto& dofs = space.scalar_dofs_of(t);
    for (int k = 0; k < 3; ++k) {
      const auto node = static_cast<std::size_t>(nodes[static_cast<std::size_t>(k)]);
      const auto dof = static_cast<std::size_t>(dofs[static_cast<std::size_t>(k)]);
      for (int c = 0; c < nc; ++c)
        a.values[node * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)] =
            field.values[static_cast<std::size_t>(c) * ns + dof];
    }
  }
  return a;
}

void write_vtk(const Mesh& mesh, const std::vector<std::pair<std::string, const Field*>>& fields,
               const std::string& path) {
  std::vector<std::array<int, 3>> tris(mesh.num_triangles());
  for (std::size_t t = 0; t < tris.size(); ++t) tris[t] = mesh.triangle(t);
  std::vector<VtkArray> arrays;
  for (const auto& [name, f] : fields) {
    if (&f->space->mesh() != &mesh) throw std::invalid_argument("vtk field " + name + " is not on this mesh");
    arrays.push_back(vertex_array(name, *f));
  }
  write_vtk(mesh.nodes(), tris, arrays, path);
}

// ---------------------------------------------------------------------------------------------

TraceRecord to_trace(const StepRecord& r) {
  return {r.step, r.t, r.energy, r.xi, r.dissipation, r.div_residual, std::nullopt, r.flags};
}

TraceRecord to_trace(const ChnsdRecord& r) {
  return {r.step, r.t, r.energy, r.xi, r.dissipation, r.div_residual, r.mass, r.flags};
}

void write_trace(const std::vector<TraceRecord>& records, const std::string& path, const std::string& hash,
                 std::uint64_t seed) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "# config_hash=" << hash << '\n' << "# seed=" << seed << '\n' << kTraceHeader << '\n';
  for (const TraceRecord& r : records) {
    f << r.step << ',' << format_double(r.t) << ',' << format_double(r.energy) << ',' << format_double(r.xi) << ','
      << format_double(r.dissipation) << ',' << format_double(r.div_residual) << ','
      << (r.mass ? format_double(*r.mass) : "nan") << ',' << r.flags << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace nsdarcy
