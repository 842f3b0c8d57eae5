#include "fdhom/fields.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace fdhom {

DiscreteField::DiscreteField(GridDomain d, int m)
    : domain(std::move(d)), values(Eigen::MatrixXd::Zero(m, domain.cell_count())),
      jumps(domain.interior_face_count(), 0) {
  if (m < 1 || m > kMaxDim) throw PreconditionError("field: target dimension out of range");
}

Vector DiscreteField::delta(int face) const {
  const Face f = domain.face(face);
  return values.col(domain.upper_cell(f)) - values.col(f.cell);
}

DiscreteField linear_field(const Matrix& xi, const GridDomain& domain, const std::optional<Point>& origin) {
  if (xi.cols() != domain.dim()) throw PreconditionError("linear_field: xi has wrong number of columns");
  if (origin && origin->size() != domain.dim()) throw PreconditionError("linear_field: origin has wrong dimension");
  DiscreteField u(domain, static_cast<int>(xi.rows()));
  for (int c = 0; c < u.cell_count(); ++c)
    u.values.col(c) = origin ? Vector(xi * (domain.cell_center(c) - *origin)) : Vector(xi * domain.cell_center(c));
  return u;
}

DiscreteField step_field(const Point& x0, const Vector& zeta, const Vector& nu, const GridDomain& domain) {
  if (x0.size() != domain.dim() || nu.size() != domain.dim())
    throw PreconditionError("step_field: point or normal has wrong dimension");
  DiscreteField u(domain, static_cast<int>(zeta.size()));
  std::vector<std::uint8_t> side(u.cell_count());
  for (int c = 0; c < u.cell_count(); ++c) {
    side[c] = (domain.cell_center(c) - x0).dot(nu) >= 0.0;
    if (side[c]) u.values.col(c) = zeta;
  }
  if (zeta.isZero(0.0)) return u;
  for (int id = 0; id < domain.interior_face_count(); ++id) {
    const Face f = domain.face(id);
    u.jumps[id] = side[f.cell] != side[domain.upper_cell(f)];
  }
  return u;
}

std::vector<FaceInfo> face_table(const GridDomain& domain) {
  std::vector<FaceInfo> table(domain.interior_face_count());
  for (int id = 0; id < domain.interior_face_count(); ++id) {
    const Face f = domain.face(id);
    FaceInfo& info = table[id];
    info.axis = f.axis;
    info.lower = f.cell;
    info.upper = domain.upper_cell(f);
    info.x = domain.face_point(f);
    info.nu = domain.direction(f.axis);
    info.lower_half = domain.multi_index(info.lower)[f.axis] == 0;
    info.upper_half = domain.multi_index(info.upper)[f.axis] == domain.count(f.axis) - 1;
    if (info.lower_half) info.lower_x = domain.face_point(Face{f.axis, info.lower, -1});
    if (info.upper_half) info.upper_x = domain.face_point(Face{f.axis, info.upper, +1});
  }
  return table;
}

namespace {

std::string face_context(const FaceInfo& face) {
  std::ostringstream s;
  s << " (face axis " << face.axis << " between cells " << face.lower << " and " << face.upper << ")";
  return s.str();
}

}  // namespace

FaceCost face_costs(const VolumeIntegrand& f, const SurfaceIntegrand& g, const FaceInfo& face, const Vector& delta,
                    double h, int n) {
  const double hn = std::pow(h, n);
  const double hs = std::pow(h, n - 1);
  const Matrix grad = (delta / h) * face.nu.transpose();
  const Matrix zero = Matrix::Zero(delta.size(), n);
  try {
    FaceCost cost;
    cost.bulk = hn * f(face.x, grad);
    cost.jump = hs * g(face.x, delta, face.nu) + hn * f(face.x, zero);
    if (face.lower_half) {
      cost.bulk += 0.5 * hn * f(face.lower_x, grad);
      cost.jump += 0.5 * hn * f(face.lower_x, zero);
    }
    if (face.upper_half) {
      cost.bulk += 0.5 * hn * f(face.upper_x, grad);
      cost.jump += 0.5 * hn * f(face.upper_x, zero);
    }
    return cost;
  } catch (const EvaluationError& e) {
    throw EvaluationError(e.what() + face_context(face));
  }
}

double lone_axis_energy(const VolumeIntegrand& f, const GridDomain& domain, const CellMask* region) {
  const int n = domain.dim();
  const double hn = std::pow(domain.h(), n);
  double total = 0.0;
  for (int d = 0; d < n; ++d) {
    if (domain.count(d) != 1) continue;
    const Matrix zero = Matrix::Zero(f.m(), n);
    for (int c = 0; c < domain.cell_count(); ++c) {
      if (region && !(*region)[c]) continue;
      total += hn * f(domain.cell_center(c), zero);
    }
  }
  return total;
}

namespace {

double energy_impl(const VolumeIntegrand& f, const SurfaceIntegrand& g, const DiscreteField& u,
                   const CellMask* region) {
  const GridDomain& domain = u.domain;
  if (f.m() != u.m() || g.m() != u.m()) throw PreconditionError("energy: integrand and field dimensions differ");
  if (region && static_cast<int>(region->size()) != u.cell_count())
    throw PreconditionError("energy: region mask has wrong size");
  const auto table = face_table(domain);
  const int n = domain.dim();
  double total = 0.0;
  for (std::size_t id = 0; id < table.size(); ++id) {
    const FaceInfo& face = table[id];
    if (region && !((*region)[face.lower] && (*region)[face.upper])) continue;
    const Vector delta = u.values.col(face.upper) - u.values.col(face.lower);
    const FaceCost cost = face_costs(f, g, face, delta, domain.h(), n);
    total += u.jumps[id] ? cost.jump : cost.bulk;
  }
  return total + lone_axis_energy(f, domain, region);
}

}  // namespace

double energy(const VolumeIntegrand& f, const SurfaceIntegrand& g, const DiscreteField& u) {
  return energy_impl(f, g, u, nullptr);
}

double energy(const VolumeIntegrand& f, const SurfaceIntegrand& g, const DiscreteField& u, const CellMask& region) {
  return energy_impl(f, g, u, &region);
}

double total_variation(const DiscreteField& u) {
  const GridDomain& domain = u.domain;
  const auto table = face_table(domain);
  const double hs = std::pow(domain.h(), domain.dim() - 1);
  double total = 0.0;
  for (std::size_t id = 0; id < table.size(); ++id) {
    const FaceInfo& face = table[id];
    const double size = (u.values.col(face.upper) - u.values.col(face.lower)).norm();
    double weight = 1.0;
    if (!u.jumps[id]) weight += 0.5 * (face.lower_half + face.upper_half);
    total += hs * weight * size;
  }
  return total;
}

void write_csv(std::ostream& out, const DiscreteField& u) {
  out << "kind,index,axis";
  for (int i = 0; i < u.m(); ++i) out << ",v" << i;
  out << ",jump\n";
  for (int c = 0; c < u.cell_count(); ++c) {
    out << "cell," << c << ",";
    for (int i = 0; i < u.m(); ++i) out << "," << u.values(i, c);
    out << ",\n";
  }
  for (int id = 0; id < static_cast<int>(u.jumps.size()); ++id) {
    const Vector d = u.delta(id);
    out << "face," << id << "," << u.domain.face(id).axis;
    for (int i = 0; i < u.m(); ++i) out << "," << d(i);
    out << "," << static_cast<int>(u.jumps[id]) << "\n";
  }
}

// ------------------------------------------------------------ BV test functions

double cantor_staircase(double t, int level) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (level <= 0) return t;
  if (t < 1.0 / 3.0) return 0.5 * cantor_staircase(3.0 * t, level - 1);
  if (t <= 2.0 / 3.0) return 0.5;
  return 0.5 + 0.5 * cantor_staircase(3.0 * t - 2.0, level - 1);
}

double BVTestFunction1D::value(double x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    const double lo = breakpoints[i];
    const double hi = std::min(breakpoints[i + 1], x);
    if (hi > lo) v += slopes[i] * (hi - lo);
  }
  for (const Jump& j : jumps)
    if (x >= j.location) v += j.amplitude;
  if (cantor_weight != 0.0) v += cantor_weight * cantor_staircase((x - a) / (b - a), cantor_level);
  return v;
}

double BVTestFunction1D::ac_variation() const {
  double total = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i) total += std::abs(slopes[i]) * (breakpoints[i + 1] - breakpoints[i]);
  return total;
}

double BVTestFunction1D::jump_variation() const {
  double total = 0.0;
  for (const Jump& j : jumps) total += std::abs(j.amplitude);
  return total;
}

double BVTestFunction1D::cantor_mass() const { return std::abs(cantor_weight); }

double BVTestFunction1D::cantor_polar() const { return cantor_weight > 0.0 ? 1.0 : (cantor_weight < 0.0 ? -1.0 : 0.0); }

double BVTestFunction1D::total_variation() const { return ac_variation() + jump_variation() + cantor_mass(); }

BVTestFunction1D cantor_test_function(double weight, int level) {
  if (level < 3 || level > 12) throw PreconditionError("cantor_test_function: level must lie in [3, 12]");
  BVTestFunction1D u;
  u.breakpoints = {0.0, 1.0};
  u.slopes = {0.0};
  u.cantor_weight = weight;
  u.cantor_level = level;
  return u;
}

BVTestFunction1D affine_test_function(double slope, double a, double b) {
  if (!(b > a)) throw PreconditionError("affine_test_function: empty interval");
  BVTestFunction1D u;
  u.a = a;
  u.b = b;
  u.breakpoints = {a, b};
  u.slopes = {slope};
  return u;
}

BVTestFunction1D step_test_function(double location, double amplitude, double a, double b) {
  if (!(b > a) || location <= a || location >= b) throw PreconditionError("step_test_function: jump outside interval");
  BVTestFunction1D u;
  u.a = a;
  u.b = b;
  u.breakpoints = {a, b};
  u.slopes = {0.0};
  u.jumps.push_back({location, amplitude});
  return u;
}

}  // namespace fdhom
