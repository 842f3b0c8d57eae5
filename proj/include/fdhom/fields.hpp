#ifndef FDHOM_FIELDS_HPP
#define FDHOM_FIELDS_HPP

#include "fdhom/geometry.hpp"
#include "fdhom/integrands.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace fdhom {

/// Cell values plus a jump indicator on every interior face of a GridDomain.
struct DiscreteField {
  GridDomain domain;
  Eigen::MatrixXd values;            // m x cell_count
  std::vector<std::uint8_t> jumps;   // indexed by interior face id

  DiscreteField() = default;
  DiscreteField(GridDomain domain, int m);

  int m() const { return static_cast<int>(values.rows()); }
  int cell_count() const { return static_cast<int>(values.cols()); }
  Vector value(int cell) const { return values.col(cell); }
  /// upper minus lower value across an interior face
  Vector delta(int face) const;
};

/// values = xi * (cell centre - origin), no jumps
DiscreteField linear_field(const Matrix& xi, const GridDomain& domain,
                           const std::optional<Point>& origin = std::nullopt);

/// values = zeta on {(y - x0) . nu >= 0}, 0 elsewhere; jumps on every face where the two sides differ
DiscreteField step_field(const Point& x0, const Vector& zeta, const Vector& nu, const GridDomain& domain);

/// Precomputed geometry of an interior face. The half cells on the domain boundary whose bulk term
/// reads the gradient of this face are attached to it.
struct FaceInfo {
  int axis = 0;
  int lower = 0;
  int upper = 0;
  Point x;
  Vector nu;
  bool lower_half = false;  ///< lower cell touches the boundary along `axis`
  bool upper_half = false;
  Point lower_x;
  Point upper_x;
};

std::vector<FaceInfo> face_table(const GridDomain& domain);

/// Energy of one face under each choice, boundary halves included.
struct FaceCost {
  double bulk = 0.0;
  double jump = 0.0;
};

FaceCost face_costs(const VolumeIntegrand& f, const SurfaceIntegrand& g, const FaceInfo& face, const Vector& delta,
                    double h, int n);

/// Bulk of the cells of axes with a single cell, where no face carries the half cells.
double lone_axis_energy(const VolumeIntegrand& f, const GridDomain& domain, const CellMask* region = nullptr);

/// Discrete E^{f,g}: non-jump faces pay h^n f(x, (delta/h) (x) nu), jump faces pay
/// h^{n-1} g(x, delta, nu) + h^n f(x, 0), and boundary half cells pay h^n/2 f at the gradient
/// of their face. In 2D each axis contributes its own rank-one proxy.
double energy(const VolumeIntegrand& f, const SurfaceIntegrand& g, const DiscreteField& u);
/// Same, restricted to faces whose two cells lie in `region`.
double energy(const VolumeIntegrand& f, const SurfaceIntegrand& g, const DiscreteField& u, const CellMask& region);

/// sum of h^{n-1} |delta| over faces, with the boundary halves weighted by 1/2
double total_variation(const DiscreteField& u);

/// One row per cell then one row per face.
void write_csv(std::ostream& out, const DiscreteField& u);

/// 1D function of bounded variation on (a, b): piecewise affine part, jumps, and a multiple
/// of the level-L Cantor staircase.
struct BVTestFunction1D {
  struct Jump {
    double location = 0.0;
    double amplitude = 0.0;
  };

  double a = 0.0;
  double b = 1.0;
  std::vector<double> breakpoints;  // a = p_0 < ... < p_K = b
  std::vector<double> slopes;       // K entries
  std::vector<Jump> jumps;
  double cantor_weight = 0.0;
  int cantor_level = 0;

  double value(double x) const;
  double ac_variation() const;
  double jump_variation() const;
  double cantor_mass() const;
  /// sign of the Cantor weight (0 when absent)
  double cantor_polar() const;
  double total_variation() const;
};

/// Level-L piecewise-linear approximation of the Cantor-Vitali function on [0, 1].
double cantor_staircase(double t, int level);

BVTestFunction1D cantor_test_function(double weight, int level);
BVTestFunction1D affine_test_function(double slope, double a = 0.0, double b = 1.0);
BVTestFunction1D step_test_function(double location, double amplitude, double a = 0.0, double b = 1.0);

}  // namespace fdhom

#endif  // FDHOM_FIELDS_HPP
