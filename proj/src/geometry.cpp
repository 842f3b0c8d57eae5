#include "fdhom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fdhom {

namespace {

// Denominator q <= max_den with |v - p/q| <= tol, via continued fractions.
std::optional<long> rational_denominator(double v, long max_den = 1000000, double tol = 1e-12) {
  double x = std::abs(v);
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    if (std::abs(std::abs(v) - static_cast<double>(p2) / static_cast<double>(q2)) <= tol) return q2;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = x - a;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

void check_unit(const Vector& nu) {
  const double norm = nu.norm();
  if (nu.size() < 1 || nu.size() > kMaxDim) throw PreconditionError("invalid direction: bad dimension");
  if (norm == 0.0) throw PreconditionError("invalid direction: zero vector");
  if (std::abs(norm - 1.0) > 1e-10) throw PreconditionError("invalid direction: |nu| must be 1");
}

Matrix upper_rotation(const Vector& nu) {
  const int n = static_cast<int>(nu.size());
  if (n == 1) return scalar_matrix(nu(0) > 0 ? 1.0 : -1.0);
  if (n == 2) {
    Matrix R(2, 2);
    R << nu(1), nu(0), -nu(0), nu(1);
    return R;
  }
  // R = -(I - 2 w w^T / |w|^2) with w = nu + e_n sends e_n to nu; w != 0 on the upper hemisphere.
  Vector w = nu;
  w(n - 1) += 1.0;
  Matrix R = Matrix::Identity(n, n) - 2.0 * (w * w.transpose()) / w.squaredNorm();
  return -R;
}

}  // namespace

bool upper_hemisphere(const Vector& nu) {
  for (Eigen::Index i = nu.size() - 1; i >= 0; --i) {
    if (nu(i) > 0.0) return true;
    if (nu(i) < 0.0) return false;
  }
  return true;
}

RotationMap rotation_matrix(const Vector& nu) {
  check_unit(nu);
  RotationMap map;
  map.nu = nu;
  if (nu.size() == 2 || upper_hemisphere(nu)) {
    map.matrix = upper_rotation(nu);
  } else {
    const Vector flipped = -nu;
    map.matrix = -upper_rotation(flipped);
  }
  map.rational = true;
  for (Eigen::Index i = 0; i < nu.size(); ++i)
    if (!rational_denominator(nu(i))) map.rational = false;
  return map;
}

std::optional<int> integer_scale(const Matrix& R, int max_scale) {
  long scale = 1;
  for (Eigen::Index k = 0; k < R.size(); ++k) {
    const auto q = rational_denominator(R.reshaped()(k));
    if (!q) return std::nullopt;
    scale = std::lcm(scale, *q);
    if (scale > max_scale) return std::nullopt;
  }
  for (Eigen::Index k = 0; k < R.size(); ++k) {
    const double v = scale * R.reshaped()(k);
    if (std::abs(v - std::round(v)) > 1e-9) return std::nullopt;
  }
  return static_cast<int>(scale);
}

// ---------------------------------------------------------------- GridDomain

GridDomain::GridDomain(Point corner, Matrix axes, std::array<int, kMaxDim> counts, double h, int bc_cells)
    : corner_(std::move(corner)), axes_(std::move(axes)), counts_(counts), h_(h), bc_cells_(bc_cells) {
  const int n = dim();
  if (n < 1 || n > kMaxDim) throw PreconditionError("domain: dimension out of range");
  if (axes_.rows() != n || axes_.cols() != n) throw PreconditionError("domain: frame must be n x n");
  if (!(h_ > 0.0)) throw PreconditionError("domain: spacing must be positive");
  for (int d = n; d < kMaxDim; ++d) counts_[d] = 1;
  for (int d = 0; d < n; ++d)
    if (counts_[d] < 1) throw DiscretizationError("domain: empty axis");
  if (bc_cells_ < 0) throw PreconditionError("domain: negative strip width");
  center = corner_ + axes_ * Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index d) { return 0.5 * counts_[d]; });
}

int GridDomain::cell_count() const {
  int total = 1;
  for (int d = 0; d < dim(); ++d) total *= counts_[d];
  return total;
}

double GridDomain::cell_volume() const { return std::pow(h_, dim()); }

int GridDomain::stride(int axis) const {
  int s = 1;
  for (int d = 0; d < axis; ++d) s *= counts_[d];
  return s;
}

std::array<int, kMaxDim> GridDomain::multi_index(int cell) const {
  std::array<int, kMaxDim> idx{0, 0, 0};
  for (int d = 0; d < dim(); ++d) {
    idx[d] = cell % counts_[d];
    cell /= counts_[d];
  }
  return idx;
}

int GridDomain::linear_index(const std::array<int, kMaxDim>& idx) const {
  int cell = 0;
  for (int d = dim() - 1; d >= 0; --d) cell = cell * counts_[d] + idx[d];
  return cell;
}

int GridDomain::neighbour(int cell, int axis, int side) const {
  const int i = (cell / stride(axis)) % counts_[axis];
  const int j = i + side;
  if (j < 0 || j >= counts_[axis]) return -1;
  return cell + side * stride(axis);
}

Point GridDomain::cell_center(int cell) const {
  const auto idx = multi_index(cell);
  Eigen::VectorXd coords(dim());
  for (int d = 0; d < dim(); ++d) coords(d) = idx[d] + 0.5;
  return lattice_point(coords);
}

Point GridDomain::lattice_point(const Eigen::Ref<const Eigen::VectorXd>& coords) const {
  Point p = corner_;
  for (int d = 0; d < dim(); ++d) p += axes_.col(d) * coords(d);
  return p;
}

int GridDomain::face_offset(int axis) const {
  int offset = 0;
  for (int d = 0; d < axis; ++d) offset += (cell_count() / counts_[d]) * (counts_[d] - 1);
  return offset;
}

int GridDomain::interior_face_count() const { return face_offset(dim()); }

int GridDomain::face_id(int axis, int lower_cell) const {
  auto idx = multi_index(lower_cell);
  if (idx[axis] >= counts_[axis] - 1) throw PreconditionError("face_id: no interior face above this cell");
  // enumerate faces of this axis on the lattice with counts[axis] - 1 along the axis
  int id = 0;
  for (int d = dim() - 1; d >= 0; --d) {
    const int extent = d == axis ? counts_[d] - 1 : counts_[d];
    id = id * extent + idx[d];
  }
  return face_offset(axis) + id;
}

Face GridDomain::face(int id) const {
  int axis = 0;
  while (axis + 1 < dim() && id >= face_offset(axis + 1)) ++axis;
  int local = id - face_offset(axis);
  std::array<int, kMaxDim> idx{0, 0, 0};
  for (int d = 0; d < dim(); ++d) {
    const int extent = d == axis ? counts_[d] - 1 : counts_[d];
    idx[d] = local % extent;
    local /= extent;
  }
  return Face{axis, linear_index(idx), 1};
}

Point GridDomain::face_point(const Face& f) const {
  const auto idx = multi_index(f.cell);
  Eigen::VectorXd coords(dim());
  for (int d = 0; d < dim(); ++d) coords(d) = idx[d] + 0.5;
  coords(f.axis) += 0.5 * f.side;
  return lattice_point(coords);
}

Vector GridDomain::face_normal(const Face& f) const {
  Vector n = direction(f.axis);
  return f.side < 0 ? Vector(-n) : n;
}

CellMask GridDomain::strip_mask() const {
  CellMask mask(cell_count(), 0);
  for (int c = 0; c < cell_count(); ++c) {
    const auto idx = multi_index(c);
    for (int d = 0; d < dim(); ++d)
      if (idx[d] < bc_cells_ || idx[d] >= counts_[d] - bc_cells_) mask[c] = 1;
  }
  return mask;
}

CellMask GridDomain::perpendicular_strip_mask() const {
  CellMask mask(cell_count(), 0);
  const int d = dim() - 1;
  for (int c = 0; c < cell_count(); ++c) {
    const auto idx = multi_index(c);
    if (idx[d] < bc_cells_ || idx[d] >= counts_[d] - bc_cells_) mask[c] = 1;
  }
  return mask;
}

GridDomain GridDomain::translated(const Point& shift) const {
  GridDomain out = *this;
  out.corner_ = corner_ + shift;
  out.center = center + shift;
  return out;
}

GridDomain rotated_rectangle(const Point& x, double r, int k, const Vector& nu, double h,
                             std::optional<double> bc_width) {
  const int n = static_cast<int>(x.size());
  if (nu.size() != n) throw PreconditionError("rotated_rectangle: nu and x dimensions differ");
  if (!(r > 0.0)) throw PreconditionError("rotated_rectangle: side must be positive");
  if (k < 1) throw PreconditionError("rotated_rectangle: elongation must be >= 1");
  if (!(h > 0.0)) throw PreconditionError("rotated_rectangle: spacing must be positive");
  const RotationMap rot = rotation_matrix(nu);

  std::array<int, kMaxDim> counts{1, 1, 1};
  Eigen::VectorXd half(n);
  for (int d = 0; d < n; ++d) {
    const double extent = d == n - 1 ? r : k * r;
    const double cells = extent / h;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
      throw DiscretizationError("rotated_rectangle: spacing h does not divide the side");
    counts[d] = static_cast<int>(rounded);
    if (counts[d] < 4) throw DiscretizationError("rotated_rectangle: fewer than 4 cells along an axis");
    half(d) = 0.5 * extent;
  }
  const double bc = bc_width.value_or(2.0 * h);
  if (bc < 2.0 * h * (1.0 - 1e-12)) throw PreconditionError("rotated_rectangle: bc_width must be >= 2h");
  const int bc_cells = static_cast<int>(std::ceil(bc / h - 1e-9));

  Point corner = x - rot.matrix * half;
  GridDomain domain(corner, Matrix(h * rot.matrix), counts, h, bc_cells);
  domain.center = x;
  domain.side = r;
  domain.elongation = k;
  return domain;
}

GridDomain box_domain(const Point& corner, const Matrix& frame, std::array<int, kMaxDim> counts, int bc_cells) {
  const double h = frame.col(0).norm();
  for (Eigen::Index d = 0; d < frame.cols(); ++d)
    if (std::abs(frame.col(d).norm() - h) > 1e-12 * h) throw PreconditionError("box_domain: frame columns must share length");
  return GridDomain(corner, frame, counts, h, bc_cells);
}

CellMask boundary_strip(const GridDomain& domain) { return domain.strip_mask(); }

FaceMasks face_masks(const GridDomain& domain) {
  FaceMasks masks;
  masks.perpendicular.role = FaceRole::perpendicular;
  masks.parallel.role = FaceRole::parallel;
  masks.interface.role = FaceRole::interface_plane;
  const int n = domain.dim();
  for (int d = 0; d < n; ++d) {
    FaceMask& target = d == n - 1 ? masks.perpendicular : masks.parallel;
    for (int c = 0; c < domain.cell_count(); ++c) {
      const int i = domain.multi_index(c)[d];
      if (i == 0) target.faces.push_back(Face{d, c, -1});
      if (i == domain.count(d) - 1) target.faces.push_back(Face{d, c, +1});
    }
  }
  const int last = n - 1;
  const double mid = 0.5 * domain.count(last);
  for (int id = 0; id < domain.interior_face_count(); ++id) {
    const Face f = domain.face(id);
    if (f.axis != last) continue;
    const int j = domain.multi_index(f.cell)[last];
    if ((j + 0.5 - mid >= 0.0) != (j + 1.5 - mid >= 0.0)) masks.interface.faces.push_back(f);
  }
  return masks;
}

std::vector<Vector> rotated_cube_vertices(const Vector& nu) {
  const RotationMap rot = rotation_matrix(nu);
  const int n = static_cast<int>(nu.size());
  std::vector<Vector> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vector v(n);
    for (int d = 0; d < n; ++d) v(d) = (mask >> d) & 1 ? 0.5 : -0.5;
    out.push_back(rot.matrix * v);
  }
  std::sort(out.begin(), out.end(), [](const Vector& a, const Vector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return out;
}

}  // namespace fdhom
