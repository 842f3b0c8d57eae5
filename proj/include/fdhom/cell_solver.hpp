#ifndef FDHOM_CELL_SOLVER_HPP
#define FDHOM_CELL_SOLVER_HPP

#include "fdhom/fields.hpp"

#include <optional>
#include <string>
#include <variant>

namespace fdhom {

/// Which pair enters m^{.,.}: (f, g_0), (f_inf, g), (f_inf, g_0) or (f, g).
enum class PairKind { F_G0, FINF_G, FINF_G0, F_G };

std::string to_string(PairKind kind);

struct LinearDatum {
  Matrix xi;
  /// the datum is xi (y - origin); energies only see differences, so this is a gauge choice
  std::optional<Point> origin;
};

struct StepDatum {
  Point x0;
  Vector zeta;
  Vector nu;
};

using Datum = std::variant<LinearDatum, StepDatum>;

enum class BoundaryMode { full, perpendicular_only };

/// f, g together with the derived f_inf and g_0, computed once.
struct DerivedPair {
  VolumeIntegrand f;
  SurfaceIntegrand g;
  VolumeIntegrand f_inf;
  SurfaceIntegrand g0;

  static DerivedPair from(const VolumeIntegrand& f, const SurfaceIntegrand& g);
  VolumeIntegrand volume(PairKind kind) const;
  SurfaceIntegrand surface(PairKind kind) const;
};

/// One query m^{volume,surface}(datum, domain). `volume` and `surface` are the members of the
/// pair already selected by `pair_kind`.
struct CellProblem {
  PairKind pair_kind;
  VolumeIntegrand volume;
  SurfaceIntegrand surface;
  GridDomain domain;
  Datum datum;
  BoundaryMode bc_mode = BoundaryMode::full;

  CellProblem(PairKind kind, VolumeIntegrand volume, SurfaceIntegrand surface, GridDomain domain, Datum datum,
              BoundaryMode bc_mode = BoundaryMode::full);

  /// Cells fixed to the datum.
  CellMask pinned_mask() const;
  DiscreteField datum_field() const;
};

CellProblem make_cell_problem(PairKind kind, const DerivedPair& pair, GridDomain domain, Datum datum,
                              BoundaryMode bc_mode = BoundaryMode::full);

/// Grid of `levels` equispaced values of total width `span` around `center`
/// (default: midpoint of the datum range on the pinned cells).
struct Quantization {
  int levels = 33;
  double span = 2.0;
  std::optional<double> center;

  double spacing() const { return span / (levels - 1); }
};

/// Grid on which every datum value lies (up to rounding), two spare levels beyond the datum range
/// on each side. Linear data use spacing |xi . step| / refinement; steps use |zeta| / (8 refinement).
Quantization default_quantization(const CellProblem& p, int refinement = 1);

struct SolveResult {
  double value = 0.0;
  DiscreteField argmin;
  bool exact = false;
  int iterations = 0;
  int restarts = 0;
  std::string method;
};

/// Exact minimum of the quantized 1D problem by dynamic programming over the chain of cells.
/// Ties prefer bulk over jump, then the lower level.
SolveResult solve_exact_1d(const CellProblem& p, const Quantization& quant);

struct HeuristicSchedule {
  int sweeps = 40;
  int restarts = 3;
  /// amplitude of the random starts, as a fraction of the level count
  double temperature = 0.25;
  std::uint64_t seed = 1;
  /// start from per-line exact solutions along the last axis (n >= 2)
  bool line_init = true;
};

/// Coordinate descent over quantized levels with greedy jump toggling and restarts.
/// The datum itself is the first start, so the value never exceeds the datum energy.
SolveResult solve_heuristic(const CellProblem& p, const HeuristicSchedule& schedule = {},
                            std::optional<Quantization> quant = std::nullopt);

struct OracleLimits {
  int max_cells_1d = 8;
  int max_free_cells_2d = 9;
  int max_levels = 9;
  double max_count = 5e7;
};

/// Exhaustive enumeration of the quantized problem. Throws OracleLimitError beyond `limits`.
SolveResult brute_force_oracle(const CellProblem& p, const Quantization& quant, const OracleLimits& limits = {});

/// Componentwise clamp to [-M, M] that leaves the pinned cells on the datum.
DiscreteField truncate(const DiscreteField& u, const DiscreteField& datum, const CellMask& pinned, double M);

/// Number of enumeration steps the oracle would need.
double oracle_count(const CellProblem& p, const Quantization& quant);

}  // namespace fdhom

#endif  // FDHOM_CELL_SOLVER_HPP
