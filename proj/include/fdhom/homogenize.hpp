#ifndef FDHOM_HOMOGENIZE_HPP
#define FDHOM_HOMOGENIZE_HPP

#include "fdhom/cell_solver.hpp"

#include <utility>
#include <vector>

namespace fdhom {

/// Normalized cell values along an r-schedule and their tail-mean limit.
struct ExtrapolationResult {
  std::vector<std::pair<double, double>> samples;  // (r, normalized value)
  std::vector<double> raw;                         // unnormalized minimum values
  double limit = 0.0;
  double spread = 0.0;  // max - min over the tail window
  int tail_window = 0;
  bool flagged = false;  // spread above the caller tolerance
};

/// Tail mean and spread of the last `tail_window` samples.
ExtrapolationResult extrapolate(std::vector<std::pair<double, double>> samples, std::vector<double> raw,
                                int tail_window, std::optional<double> spread_tolerance = std::nullopt);

/// How r -> infinity is read: growing domains at fixed h, or the unit domain at spacing h/r
/// with the integrands oscillating at scale 1/r. Both give the same numbers.
enum class Scaling { domain_growth, epsilon };

enum class SolverChoice { automatic, exact, heuristic };

struct HomogenizeOptions {
  std::vector<double> r_schedule{4, 8, 16, 32, 64};
  int tail_window = 3;
  double h = 0.25;
  std::optional<double> bc_width;  // default 2h
  Scaling scaling = Scaling::domain_growth;
  int refinement = 1;
  SolverChoice solver = SolverChoice::automatic;
  HeuristicSchedule heuristic;
  std::optional<double> spread_tolerance;
  int workers = 1;

  /// 1D: r in {4, ..., 64}, tail 3. 2D: r in {4, 8, 16}, tail 2.
  static HomogenizeOptions defaults_for(int n);
};

/// m^{f,g_0}(l_xi, Q^{nu,k}_r(r x)) / (k^{n-1} r^n)
ExtrapolationResult f_hom(const DerivedPair& pair, const Matrix& xi, const Point& x, const Vector& nu, int k,
                          const HomogenizeOptions& options);

/// m^{f_inf,g}(u_{r x,zeta,nu}, Q^nu_r(r x)) / r^{n-1}
ExtrapolationResult g_hom(const DerivedPair& pair, const Vector& zeta, const Vector& nu, const Point& x,
                          const HomogenizeOptions& options);

enum class RecessionRoute { cell, recession };

/// Route `cell`: m^{f_inf,g_0}(l_xi, .) normalized like f_hom. Route `recession`: f_hom(t xi)/t along
/// `t_schedule` via the recession operation applied to f_hom as an integrand; samples are (t, f_hom(t xi)/t).
ExtrapolationResult f_hom_infinity(const DerivedPair& pair, const Matrix& xi, RecessionRoute route, const Point& x,
                                   const Vector& nu, int k, const HomogenizeOptions& options,
                                   const std::vector<double>& t_schedule = {1e1, 1e2, 1e3});

/// Partial-boundary variant: m~^{f_inf,g_0}(l_{a (x) nu}, Q^{nu,k}_r) with only the faces orthogonal
/// to nu pinned, normalized by k^{n-1} r^n.
ExtrapolationResult f_hom_infinity_partial(const DerivedPair& pair, const Vector& a, const Vector& nu, int k,
                                           const Point& x, const HomogenizeOptions& options);

/// f_hom wrapped as an x-independent volume integrand (limits cached per argument).
VolumeIntegrand f_hom_integrand(const DerivedPair& pair, const Point& x, const Vector& nu, int k,
                                const HomogenizeOptions& options);

// 1D shorthands
ExtrapolationResult f_hom(const DerivedPair& pair, double xi, const HomogenizeOptions& options, double x = 0.0, int k = 1);
ExtrapolationResult g_hom(const DerivedPair& pair, double zeta, double nu, const HomogenizeOptions& options,
                          double x = 0.0);
ExtrapolationResult f_hom_infinity(const DerivedPair& pair, double xi, RecessionRoute route,
                                   const HomogenizeOptions& options);

enum class Formula { f_hom, g_hom, f_hom_infinity };

std::string to_string(Formula formula);

struct InvarianceRow {
  Point x;
  Vector nu;
  int k = 1;
  double limit = 0.0;
};

struct InvarianceReport {
  std::vector<InvarianceRow> rows;
  double spread_x = 0.0;   // max relative spread when only x varies
  double spread_nu = 0.0;
  double spread_k = 0.0;
};

/// Recomputes the limit on the grid xs x nus x ks. `argument` is xi (flattened, m = 1) or zeta.
InvarianceReport invariance_diagnostics(Formula formula, const DerivedPair& pair, const Vector& argument,
                                        const std::vector<Point>& xs, const std::vector<Vector>& nus,
                                        const std::vector<int>& ks, const HomogenizeOptions& options);

/// Tabulated scalar f_hom (1D): piecewise linear between nodes, 1-homogeneous extension beyond
/// the outermost nodes when flagged, error otherwise.
struct HomogenizedVolume {
  std::vector<double> nodes;
  std::vector<double> values;
  std::vector<ExtrapolationResult> results;
  bool one_homogeneous = false;

  double operator()(double xi) const;
};

/// Tabulated scalar g_hom (1D) for nu = +1 and nu = -1.
struct HomogenizedSurface {
  std::vector<double> nodes;
  std::vector<double> plus;   // nu = +1
  std::vector<double> minus;  // nu = -1
  std::vector<ExtrapolationResult> results_plus;
  std::vector<ExtrapolationResult> results_minus;
  bool one_homogeneous = false;

  double operator()(double zeta, double nu) const;
};

HomogenizedVolume tabulate_f_hom(const DerivedPair& pair, std::vector<double> nodes, const HomogenizeOptions& options,
                                 bool one_homogeneous = false);
HomogenizedVolume tabulate_f_hom_infinity(const DerivedPair& pair, std::vector<double> nodes,
                                          const HomogenizeOptions& options);
HomogenizedSurface tabulate_g_hom(const DerivedPair& pair, std::vector<double> nodes, const HomogenizeOptions& options,
                                  bool one_homogeneous = false);

/// (aea)-continuity over all tabulated pairs and the (f3)/(f4) bounds, with absolute slack `tolerance`.
AdmissibilityReport check_volume_closure(const HomogenizedVolume& fh, const IntegrandConstants& c, double tolerance);
/// (g2)-type continuity, (g3)/(g4) bounds and (g6) symmetry.
AdmissibilityReport check_surface_closure(const HomogenizedSurface& gh, const IntegrandConstants& c, double tolerance);

/// int f_hom(u') + sum_jumps g_hom([u], +1) + f_hom_inf(polar) |C(u)| for a 1D test function.
double homogenized_energy(const HomogenizedVolume& fh, const HomogenizedSurface& gh, const HomogenizedVolume& fhinf,
                          const BVTestFunction1D& u);

}  // namespace fdhom

#endif  // FDHOM_HOMOGENIZE_HPP
