#ifndef FDHOM_GEOMETRY_HPP
#define FDHOM_GEOMETRY_HPP

#include "fdhom/types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace fdhom {

/// Orthogonal R with R e_n = nu. Continuous on each closed hemisphere, R_{-nu} = -R_nu,
/// and rational whenever nu is.
struct RotationMap {
  Vector nu;
  Matrix matrix;
  bool rational = false;
};

RotationMap rotation_matrix(const Vector& nu);

/// Smallest positive integer M with M * R integer-valued, if one exists below `max_scale`.
std::optional<int> integer_scale(const Matrix& R, int max_scale = 100000);

/// True when nu lies in the closed "upper" hemisphere: its last nonzero coordinate is positive.
bool upper_hemisphere(const Vector& nu);

/// Face of the lattice. Interior faces separate `cell` and `cell + e_axis` (side = +1);
/// boundary faces sit on the outer side of a cell on the domain boundary (side = -1 or +1).
struct Face {
  int axis = 0;
  int cell = 0;
  int side = 1;

  friend bool operator==(const Face&, const Face&) = default;
};

/// A box of lattice cells carried into space by an affine map:
/// cell centre(i) = corner + axes * (i + 1/2), with the columns of `axes` orthogonal and of length h.
/// The last lattice axis is the orientation axis (its physical direction is nu).
class GridDomain {
 public:
  GridDomain() = default;
  GridDomain(Point corner, Matrix axes, std::array<int, kMaxDim> counts, double h, int bc_cells);

  int dim() const { return static_cast<int>(corner_.size()); }
  double h() const { return h_; }
  int bc_cells() const { return bc_cells_; }
  double bc_width() const { return bc_cells_ * h_; }
  int count(int axis) const { return counts_[axis]; }
  const std::array<int, kMaxDim>& counts() const { return counts_; }
  const Point& corner() const { return corner_; }
  const Matrix& axes() const { return axes_; }
  /// Physical unit direction of lattice axis d (R e_d).
  Vector direction(int axis) const { return axes_.col(axis) / h_; }
  Vector nu() const { return direction(dim() - 1); }

  // Metadata of rotated rectangles; zero / empty for raw boxes.
  Point center;
  double side = 0.0;
  int elongation = 1;

  int cell_count() const;
  double cell_volume() const;
  double volume() const { return cell_count() * cell_volume(); }

  std::array<int, kMaxDim> multi_index(int cell) const;
  int linear_index(const std::array<int, kMaxDim>& idx) const;
  int stride(int axis) const;
  /// Neighbour across `axis` in direction `side` (+-1), or -1 at the boundary.
  int neighbour(int cell, int axis, int side) const;

  Point cell_center(int cell) const;
  /// Lattice coordinates (cell units) relative to the corner; the cell centre has i + 1/2.
  Point lattice_point(const Eigen::Ref<const Eigen::VectorXd>& coords) const;

  // Interior faces are numbered axis by axis.
  int interior_face_count() const;
  int face_offset(int axis) const;
  int face_id(int axis, int lower_cell) const;
  Face face(int id) const;
  int upper_cell(const Face& f) const { return neighbour(f.cell, f.axis, +1); }

  /// Midpoint of a face (interior or boundary).
  Point face_point(const Face& f) const;
  /// Normal pointing from the lower into the upper cell (outward for side = +1 boundary faces).
  Vector face_normal(const Face& f) const;

  /// Cells whose distance to the boundary is at most bc_width.
  CellMask strip_mask() const;
  /// Cells within bc_width of the two faces orthogonal to nu only.
  CellMask perpendicular_strip_mask() const;

  /// The same lattice translated by an integer vector; exact in floating point for
  /// dyadic data.
  GridDomain translated(const Point& shift) const;

 private:
  Point corner_;
  Matrix axes_;
  std::array<int, kMaxDim> counts_{1, 1, 1};
  double h_ = 1.0;
  int bc_cells_ = 2;
};

/// Q^{nu,k}_r(x) = x + R_nu((-kr/2, kr/2)^{n-1} x (-r/2, r/2)) at spacing h. bc_width defaults to 2h.
GridDomain rotated_rectangle(const Point& x, double r, int k, const Vector& nu, double h,
                             std::optional<double> bc_width = std::nullopt);

/// Lattice box with an arbitrary affine frame; `frame` columns have length h.
GridDomain box_domain(const Point& corner, const Matrix& frame, std::array<int, kMaxDim> counts, int bc_cells = 2);

CellMask boundary_strip(const GridDomain& domain);

enum class FaceRole { full_boundary, perpendicular, parallel, interface_plane };

struct FaceMask {
  FaceRole role = FaceRole::full_boundary;
  std::vector<Face> faces;
};

struct FaceMasks {
  FaceMask perpendicular;
  FaceMask parallel;
  FaceMask interface;
};

/// Boundary faces split into those with normal +-nu and those orthogonal to nu; interface =
/// interior faces crossed by the plane through the domain centre orthogonal to nu.
FaceMasks face_masks(const GridDomain& domain);

/// Vertices of R_nu applied to the unit cube, sorted lexicographically.
std::vector<Vector> rotated_cube_vertices(const Vector& nu);

}  // namespace fdhom

#endif  // FDHOM_GEOMETRY_HPP
