#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdarcy/chnsd.hpp"
#include "nsdarcy/mms.hpp"

namespace nsdarcy {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Convergence, Filtration, PhaseSeparation, Droplet, Bubble, Custom };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);  // throws ConfigError

/// x0, x1, y0, y1
using Box = std::array<double, 4>;

/// Disc of radius r centered at (x, y).
struct Disc {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
};

/// Fully resolved run description: preset for the experiment plus overrides.
struct RunConfig {
  Experiment experiment = Experiment::Custom;
  std::string case_name;  // ex1/ex2, a..g, 4/6, 1/2; empty when the experiment has no cases
  int scheme = 1;         // 1, 2 (NSD) or 3 (CHNSD)
  Convection convection = Convection::Standard;
  double h = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  std::vector<double> snapshots;
  std::uint64_t seed = 1;
  std::string out;

  // convergence
  std::vector<double> h_list;
  double dt_coeff = 1.0;  // dt = dt_coeff h^dt_power
  double dt_power = 2.0;

  // NSD
  double nu = 1.0;
  double g = 1.0;
  double s0 = 1.0;
  double alpha = 1.0;
  Tensor2 k{};

  // CHNSD
  double nu_f = 0.1;
  double nu_p = 0.1;
  double chi = 1.0;
  double lambda = 0.1;
  double eps = 0.01;
  Vec2 buoyancy{};
  double stabilization = 0.0;

  // filtration
  Box block1{};
  Box block2{};
  double block_k = 1e-6;

  // bubble
  std::vector<Disc> bubbles;

  double amplitude = 1.0;  // custom: random initial data in [-amplitude, amplitude]
};

/// Documented key set, in canonical order.
const std::vector<std::string>& config_keys();

/// Preset of an experiment, case and scheme (empty case / scheme 0 pick the defaults).
RunConfig preset(Experiment e, const std::string& case_name = {}, int scheme = 0);

/// Ordered key/value pairs as read from a config file.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// key=value lines, '#' comments, blank lines ignored. Duplicate and unknown keys are errors.
ConfigEntries parse_entries(const std::string& text);

/// Preset selected by `experiment` (required), `case` and `scheme`, then the remaining keys.
RunConfig resolve_config(const ConfigEntries& entries);

/// resolve_config(parse_entries(text)). Errors name the offending key.
RunConfig parse_config(const std::string& text);

/// Apply one override; `key` must be in config_keys() and not `experiment`.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Range and consistency checks; throws ConfigError naming the key.
void validate(const RunConfig& cfg);

/// Canonical key=value text of every field (round-trips through parse_config).
std::string canonical_text(const RunConfig& cfg);

/// FNV-1a 64 of canonical_text with `out` masked, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// ---------------------------------------------------------------------------------------------
// VTK

struct VtkArray {
  std::string name;
  int components = 1;          // 1 or 2 (written as 3 with z = 0)
  std::vector<double> values;  // point-major, `components` per point
};

void write_vtk(const std::vector<Point>& points, const std::vector<std::array<int, 3>>& triangles,
               const std::vector<VtkArray>& arrays, const std::string& path, const std::string& title = "nsdarcy");

/// Vertex values of a field on the whole mesh; nodes outside the field's subdomain get 0.
/// Quadratic fields lose their midpoint values.
VtkArray vertex_array(const std::string& name, const Field& field);

void write_vtk(const Mesh& mesh, const std::vector<std::pair<std::string, const Field*>>& fields,
               const std::string& path);

// ---------------------------------------------------------------------------------------------
// traces

struct TraceRecord {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;
  double xi = 1.0;
  double dissipation = 0.0;
  double div_residual = 0.0;
  std::optional<double> mass;  // CHNSD only; written as nan otherwise
  unsigned flags = 0;
};

TraceRecord to_trace(const StepRecord& r);
TraceRecord to_trace(const ChnsdRecord& r);

inline constexpr const char* kTraceHeader = "step,t,E,xi,I,div_residual,mass,flags";

/// `# config_hash=...` and `# seed=...` comment lines, the header, one row per record.
void write_trace(const std::vector<TraceRecord>& records, const std::string& path, const std::string& hash,
                 std::uint64_t seed);

/// Round-trip decimal form (%.17g).
std::string format_double(double v);

}  // namespace nsdarcy
