#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nsdarcy/io.hpp"

namespace nsdarcy {

/// Geometry of the experiment (MMS stack, filtration channel, or the two-layer column).
Geometry experiment_geometry(const RunConfig& cfg);

/// Per-triangle conductivity of the filtration cases: block_k inside the two boxes, 1 elsewhere,
/// or the seeded random tensor of case g.
TensorField filtration_conductivity(const RunConfig& cfg, const Mesh& mesh);

NsdConfig nsd_config(const RunConfig& cfg, const Mesh& mesh);
ChnsdConfig chnsd_config(const RunConfig& cfg, const Mesh& mesh);

/// Initial data of the experiment. Filtration zeroes the velocity on the no-slip walls.
void initialize_nsd(NsdSolver& solver, const RunConfig& cfg);
void initialize_chnsd(ChnsdSolver& solver, const RunConfig& cfg);

/// Initial phase of the petal droplet, centered at (0.5, 1).
double petal_phase(const Point& p, int petals, double eps);
/// Union of tanh bubbles (+1 inside).
double bubble_phase(const Point& p, const std::vector<Disc>& discs, double eps);

/// Geometry of the {phi > 0} region from the P1 phase field.
struct PhaseMetrics {
  double area = 0.0;       // int (1 + phi) / 2
  Point centroid{};        // weighted by (1 + phi) / 2
  double perimeter = 0.0;  // length of the piecewise-linear zero level set
  double isoperimetric = 0.0;  // perimeter^2 / (4 pi area_zero), area_zero = |{phi > 0}|
};
PhaseMetrics phase_metrics(const Field& phi);

/// Exit codes of run_experiment.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitInvariant = 3,
  kExitSolver = 4,
  kExitIo = 5,
};

/// Runs the experiment, writing config.txt, trace.csv, snapshot VTK files and snapshots.csv (or the
/// convergence CSV) under cfg.out. Progress goes to `log`.
int run_experiment(const RunConfig& cfg, std::ostream& log);

}  // namespace nsdarcy
