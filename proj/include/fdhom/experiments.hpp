#ifndef FDHOM_EXPERIMENTS_HPP
#define FDHOM_EXPERIMENTS_HPP

#include "fdhom/stochastic.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fdhom {

inline constexpr const char* kVersion = "0.1.0";

/// Builtin family by name: iso_norm, smoothed_norm, exp_norm (surface only), laminate,
/// checkerboard_cellwise.
struct IntegrandSpec {
  std::string family = "iso_norm";
  double scale = 1.0;
  double offset = 0.0;
  double linear = 0.0;
  double declared_c2 = 0.0;
  std::vector<double> values;
  int axis = 0;
};

VolumeIntegrand make_volume(const IntegrandSpec& spec, int m, int n);
SurfaceIntegrand make_surface(const IntegrandSpec& spec, int m, int n);

struct DomainSpec {
  Point center;
  double r = 1.0;
  int k = 1;
  Vector nu;
  double h = 0.125;
  std::optional<double> bc_width;
};

struct DatumSpec {
  std::string kind = "linear";  // linear | step
  Matrix xi;
  Point x0;
  Vector zeta;
  Vector nu;
};

struct SolverSpec {
  std::string kind = "exact";  // exact | heuristic | brute_force
  std::string pair = "f,g";    // f,g0 | finf,g | finf,g0 | f,g
  std::string bc = "full";     // full | perpendicular_only
  std::optional<int> levels;
  std::optional<double> span;
  std::optional<double> center;
  int refinement = 1;
  HeuristicSchedule schedule;
};

struct HomogenizeSpec {
  std::vector<std::string> formulas{"f_hom", "g_hom"};
  std::vector<double> xi{-2, -1, -0.5, 0.5, 1, 2};
  std::vector<double> zeta{-2, -1, -0.5, 0.5, 1, 2};
  std::vector<double> nu{1, -1};
  double x = 0.0;
  int k = 1;
  HomogenizeOptions options;
};

struct StochasticSpec {
  EnsembleSpec ensemble;
  std::uint64_t ensemble_seed = 0;
  std::string process = "volume";  // volume | surface
  Vector xi;
  Vector zeta;
  Vector nu;
  std::vector<double> r_schedule{4, 8, 16, 32};
  int n_omega = 32;
  int tail_window = 2;
  ProcessOptions options;
};

struct GammaSpec {
  double a = -2.0;
  double b = 2.0;
  double h = 1.0 / 64.0;
  std::vector<double> epsilon{0.25, 0.125, 0.0625};
  double x0 = 0.421875;
  double amplitude = 1.0;
  int refinement = 2;
  std::vector<double> xi_nodes{-4, -2, -1, -0.5, 0, 0.5, 1, 2, 4};
  std::vector<double> zeta_nodes{-2, -1, -0.5, 0, 0.5, 1, 2};
  HomogenizeOptions options;
};

struct ExperimentConfig {
  std::string experiment;  // check | cell-solve | homogenize | stochastic | gamma
  std::uint64_t seed = 0;
  int m = 1;
  int n = 1;
  IntegrandSpec volume;
  IntegrandSpec surface;
  std::optional<SampleSpec> sampling;
  std::optional<DomainSpec> domain;
  std::optional<DatumSpec> datum;
  SolverSpec solver;
  std::optional<HomogenizeSpec> homogenize;
  std::optional<StochasticSpec> stochastic;
  std::optional<GammaSpec> gamma;
  std::string output = "";  // file name inside the output directory; default <experiment>.csv
  std::uint64_t hash = 0;   // FNV-1a of the canonical config text
};

/// Parses the JSON config; unknown keys and type errors raise ConfigError naming the offending path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& text);

struct RunOptions {
  std::string out_dir = ".";
  int workers = 0;  // 0: machine parallelism
  std::optional<std::uint64_t> seed_override;
};

struct RunResult {
  int status = 0;
  std::vector<std::string> artifacts;
};

/// Executes the configured experiment and writes its CSV (with a "# " metadata header) into
/// options.out_dir. Progress and reports go to `log`.
RunResult run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

struct MinimaConvergenceRow {
  double epsilon = 0.0;
  double inf_eps = 0.0;  // min E_eps(u) + |u - target|_{L1}
  double min_hom = 0.0;  // min E_hom(u) + |u - target|_{L1}
  double gap = 0.0;      // |inf_eps - min_hom| / min_hom
  double l1_distance = 0.0;  // between the two minimisers
};

/// Fidelity-penalised minimisation on the target's domain (no boundary condition), exact by DP over a
/// grid anchored at 0 with spacing max|target| / (8 refinement).
SolveResult minimize_with_fidelity(const VolumeIntegrand& f, const SurfaceIntegrand& g, const DiscreteField& target,
                                   int refinement);

/// Integrands reading the tabulations (x-independent).
VolumeIntegrand tabulated_volume(const HomogenizedVolume& fh, const IntegrandConstants& c);
SurfaceIntegrand tabulated_surface(const HomogenizedSurface& gh, const IntegrandConstants& c);

/// Compares min(E_eps + L1) with min(E_hom + L1) along epsilon_list on a 1D piecewise-constant target.
std::vector<MinimaConvergenceRow> gamma_minima_experiment(const VolumeIntegrand& f, const SurfaceIntegrand& g,
                                                          const DiscreteField& target,
                                                          const std::vector<double>& epsilon_list,
                                                          const HomogenizedVolume& fh, const HomogenizedSurface& gh,
                                                          int refinement = 2, int workers = 1);

/// Piecewise-constant 1D target: 0 left of x0, amplitude right of it, on (a, b) at spacing h.
DiscreteField step_target(double a, double b, double h, double x0, double amplitude);

/// Shortest round-trip decimal representation, used for every CSV number.
std::string format_number(double value);

}  // namespace fdhom

#endif  // FDHOM_EXPERIMENTS_HPP
