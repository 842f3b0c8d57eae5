#include "fdhom/stochastic.hpp"

#include "fdhom/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace fdhom {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t cell_hash(std::uint64_t seed, const std::array<std::int64_t, kMaxDim>& cell, int n, std::uint64_t salt) {
  std::uint64_t h = mix64(seed ^ mix64(salt));
  for (int d = 0; d < n; ++d) h = mix64(h ^ (static_cast<std::uint64_t>(cell[d]) + 0x632be59bd9b4e019ULL * (d + 1)));
  return h;
}

double unit_uniform(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::checkerboard: return "checkerboard";
    case EnsembleKind::iid_cell: return "iid_cell";
    case EnsembleKind::poisson_inclusion: return "poisson_inclusion";
  }
  return "?";
}

EnsembleKind ensemble_kind_from(const std::string& name) {
  if (name == "checkerboard") return EnsembleKind::checkerboard;
  if (name == "iid_cell") return EnsembleKind::iid_cell;
  if (name == "poisson_inclusion") return EnsembleKind::poisson_inclusion;
  throw ConfigError("unknown ensemble kind '" + name + "'");
}

Omega shift(const Omega& omega, const std::array<std::int64_t, kMaxDim>& z) {
  Omega out = omega;
  for (int d = 0; d < kMaxDim; ++d) out.offset[d] += z[d];
  return out;
}

StationaryEnsemble::StationaryEnsemble(EnsembleSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  if (spec_.n < 1 || spec_.n > kMaxDim) throw ConfigError("ensemble: dimension out of range");
  if (spec_.kind == EnsembleKind::poisson_inclusion) {
    if (!(spec_.matrix_value > 0.0) || !(spec_.inclusion_value > 0.0))
      throw ConfigError("ensemble: poisson values must be positive");
    if (!(spec_.radius > 0.0) || spec_.radius >= 1.0) throw ConfigError("ensemble: poisson radius must lie in (0, 1)");
    if (!(spec_.intensity >= 0.0)) throw ConfigError("ensemble: poisson intensity must be nonnegative");
    a_min_ = std::min(spec_.matrix_value, spec_.inclusion_value);
    a_max_ = std::max(spec_.matrix_value, spec_.inclusion_value);
  } else {
    if (spec_.law.empty()) throw ConfigError("ensemble: empty law");
    if (spec_.kind == EnsembleKind::checkerboard && spec_.law.size() > 2)
      throw ConfigError("ensemble: checkerboard takes at most two atoms");
    double total = 0.0;
    a_min_ = spec_.law.front().first;
    a_max_ = a_min_;
    for (const auto& [value, prob] : spec_.law) {
      if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError("ensemble: law values must be positive");
      if (!(prob >= 0.0)) throw ConfigError("ensemble: negative probability");
      total += prob;
      a_min_ = std::min(a_min_, value);
      a_max_ = std::max(a_max_, value);
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("ensemble: probabilities must sum to 1");
  }
  if (!(spec_.surface_scale > 0.0)) throw ConfigError("ensemble: surface scale must be positive");
}

StationaryEnsemble make_ensemble(const EnsembleSpec& spec, std::uint64_t seed) { return StationaryEnsemble(spec, seed); }

Omega StationaryEnsemble::omega(std::uint64_t index) const {
  return Omega{mix64(seed_ ^ mix64(index + 0x5851f42d4c957f2dULL)), {0, 0, 0}};
}

double StationaryEnsemble::cell_coefficient(std::uint64_t seed, const std::array<std::int64_t, kMaxDim>& cell) const {
  const int n = spec_.n;
  switch (spec_.kind) {
    case EnsembleKind::iid_cell: {
      const double u = unit_uniform(cell_hash(seed, cell, n, 0));
      double cumulative = 0.0;
      for (const auto& [value, prob] : spec_.law) {
        cumulative += prob;
        if (u < cumulative) return value;
      }
      return spec_.law.back().first;
    }
    case EnsembleKind::checkerboard: {
      if (spec_.law.size() == 1) return spec_.law.front().first;
      std::int64_t parity = static_cast<std::int64_t>(mix64(seed ^ 0xc0ffee) & 1);
      for (int d = 0; d < n; ++d) parity += cell[d];
      return spec_.law[static_cast<std::size_t>(((parity % 2) + 2) % 2)].first;
    }
    case EnsembleKind::poisson_inclusion: break;
  }
  return spec_.matrix_value;
}

double StationaryEnsemble::coefficient(const Omega& omega, const Point& x) const {
  const int n = spec_.n;
  if (x.size() != n) throw PreconditionError("ensemble: point has wrong dimension");
  std::array<std::int64_t, kMaxDim> cell{0, 0, 0};
  std::array<double, kMaxDim> frac{0.0, 0.0, 0.0};
  for (int d = 0; d < n; ++d) {
    const double fl = std::floor(x(d));
    cell[d] = static_cast<std::int64_t>(fl) + omega.offset[d];
    frac[d] = x(d) - fl;
  }
  if (spec_.kind != EnsembleKind::poisson_inclusion) return cell_coefficient(omega.seed, cell);

  // Poisson points of the neighbouring cells; distances use the integer cell difference and the
  // fractional parts only, so they do not depend on the offset.
  const double r2 = spec_.radius * spec_.radius;
  const int neighbours = static_cast<int>(std::pow(3, n));
  for (int code = 0; code < neighbours; ++code) {
    std::array<std::int64_t, kMaxDim> other = cell;
    std::array<int, kMaxDim> step{0, 0, 0};
    int rest = code;
    for (int d = 0; d < n; ++d) {
      step[d] = rest % 3 - 1;
      rest /= 3;
      other[d] += step[d];
    }
    const double u = unit_uniform(cell_hash(omega.seed, other, n, 0));
    int count = 0;
    double p = std::exp(-spec_.intensity), cumulative = p;
    while (u > cumulative && count < 64) {
      ++count;
      p *= spec_.intensity / count;
      cumulative += p;
    }
    for (int j = 0; j < count; ++j) {
      double dist2 = 0.0;
      for (int d = 0; d < n; ++d) {
        const double c = unit_uniform(cell_hash(omega.seed, other, n, 1 + static_cast<std::uint64_t>(j * n + d)));
        const double diff = static_cast<double>(step[d]) + (c - frac[d]);
        dist2 += diff * diff;
      }
      if (dist2 <= r2) return spec_.inclusion_value;
    }
  }
  return spec_.matrix_value;
}

IntegrandConstants StationaryEnsemble::constants() const {
  IntegrandConstants c;
  c.c1 = a_max_;
  c.c2 = std::min(a_min_, spec_.surface_scale);
  c.c3 = std::max(a_max_, spec_.surface_scale);
  c.sigma2 = MonotoneTable::capped_linear(1.0, 1.0);
  return c;
}

VolumeIntegrand StationaryEnsemble::volume(const Omega& omega) const {
  StationaryEnsemble self = *this;
  return VolumeIntegrand([self, omega](const Point& x, const Matrix& xi) { return self.coefficient(omega, x) * xi.norm(); },
                         constants(), 1, spec_.n, VolumeFlags{true, false}, "random_" + to_string(spec_.kind));
}

SurfaceIntegrand StationaryEnsemble::surface() const {
  const double b = spec_.surface_scale;
  return SurfaceIntegrand([b](const Point&, const Vector& zeta, const Vector&) { return b * zeta.norm(); }, constants(),
                          1, spec_.n, true, "iso_norm");
}

DerivedPair StationaryEnsemble::pair(const Omega& omega) const {
  const VolumeIntegrand f = volume(omega);
  const SurfaceIntegrand g = surface();
  return DerivedPair{f, g, f.with_spread(0.0), g.with_spread(0.0)};
}

// ----------------------------------------------------------------- processes

double IntegerBox::volume() const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) v *= static_cast<double>(hi[d] - lo[d]);
  return v;
}

IntegerBox IntegerBox::translated(const std::vector<std::int64_t>& z) const {
  IntegerBox out = *this;
  for (int d = 0; d < dim(); ++d) {
    out.lo[d] += z[d];
    out.hi[d] += z[d];
  }
  return out;
}

IntegerBox cube(int dim, std::int64_t r) {
  return IntegerBox{std::vector<std::int64_t>(dim, 0), std::vector<std::int64_t>(dim, r)};
}

namespace {

std::pair<Matrix, int> rational_frame(const Vector& nu) {
  const RotationMap rot = rotation_matrix(nu);
  const auto M = integer_scale(rot.matrix);
  if (!rot.rational || !M) throw PreconditionError("process: nu must have rational coordinates");
  return {rot.matrix, *M};
}

int lattice_count(double extent, double h_box) {
  const double cells = extent / h_box;
  if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells))
    throw DiscretizationError("process: h_box does not divide the box side");
  return static_cast<int>(std::round(cells));
}

GridDomain process_domain(const Matrix& R, int M, const Eigen::VectorXd& lo, const Eigen::VectorXd& sides,
                          const ProcessOptions& o) {
  const int n = static_cast<int>(R.rows());
  std::array<int, kMaxDim> counts{1, 1, 1};
  for (int d = 0; d < n; ++d) counts[d] = lattice_count(sides(d), o.h_box);
  const Matrix MR = static_cast<double>(M) * R;
  const Matrix MR_int = MR.array().round().matrix();
  const Point corner = MR_int * lo;
  GridDomain domain = box_domain(corner, Matrix(o.h_box * MR_int), counts, o.bc_cells);
  return domain;
}

double solve_process(const CellProblem& p, const ProcessOptions& o) {
  const Quantization q = default_quantization(p, o.refinement);
  const bool exact = o.solver == SolverChoice::exact || (o.solver == SolverChoice::automatic && p.domain.dim() == 1);
  if (exact) return solve_exact_1d(p, q).value;
  return solve_heuristic(p, o.heuristic, q).value;
}

std::array<std::int64_t, kMaxDim> carried(const Matrix& R, int M, const Eigen::VectorXd& z) {
  const Eigen::VectorXd v = (static_cast<double>(M) * R).array().round().matrix() * z;
  std::array<std::int64_t, kMaxDim> out{0, 0, 0};
  for (Eigen::Index d = 0; d < v.size(); ++d) out[d] = static_cast<std::int64_t>(std::llround(v(d)));
  return out;
}

}  // namespace

VolumeProcess::VolumeProcess(const StationaryEnsemble& ensemble, Matrix xi, Vector nu, ProcessOptions options)
    : ensemble_(&ensemble), xi_(std::move(xi)), nu_(std::move(nu)), options_(options) {
  if (nu_.size() != ensemble.dim() || xi_.rows() != 1 || xi_.cols() != ensemble.dim())
    throw PreconditionError("volume process: xi must be 1 x n and nu an n-vector");
  std::tie(R_, M_) = rational_frame(nu_);
}

GridDomain VolumeProcess::domain(const IntegerBox& A) const {
  const int n = ensemble_->dim();
  if (A.dim() != n) throw PreconditionError("volume process: box has wrong dimension");
  Eigen::VectorXd lo(n), sides(n);
  for (int d = 0; d < n; ++d) {
    lo(d) = static_cast<double>(A.lo[d]);
    sides(d) = static_cast<double>(A.hi[d] - A.lo[d]);
  }
  return process_domain(R_, M_, lo, sides, options_);
}

double VolumeProcess::evaluate(const Omega& omega, const IntegerBox& A) const {
  // measuring the datum from the box corner keeps the values identical under lattice shifts
  const GridDomain d = domain(A);
  const CellProblem p = make_cell_problem(PairKind::F_G0, ensemble_->pair(omega), d, LinearDatum{xi_, d.corner()});
  return solve_process(p, options_) / std::pow(M_, ensemble_->dim());
}

double VolumeProcess::bound(const IntegerBox& A) const {
  const IntegrandConstants c = ensemble_->constants();
  return (c.c3 * xi_.norm() + c.c4) * A.volume();
}

std::array<std::int64_t, kMaxDim> VolumeProcess::carried_shift(const std::vector<std::int64_t>& z) const {
  Eigen::VectorXd v(ensemble_->dim());
  for (int d = 0; d < ensemble_->dim(); ++d) v(d) = static_cast<double>(z[d]);
  return carried(R_, M_, v);
}

SurfaceProcess::SurfaceProcess(const StationaryEnsemble& ensemble, Vector zeta, Vector nu, ProcessOptions options)
    : ensemble_(&ensemble), zeta_(std::move(zeta)), nu_(std::move(nu)), options_(options) {
  if (ensemble.dim() < 2)
    throw PreconditionError("surface process: needs n >= 2; in 1D use the direct g_hom cell formula");
  if (nu_.size() != ensemble.dim() || zeta_.size() != 1)
    throw PreconditionError("surface process: zeta must be scalar and nu an n-vector");
  std::tie(R_, M_) = rational_frame(nu_);
}

GridDomain SurfaceProcess::domain(const IntegerBox& A) const {
  const int n = ensemble_->dim();
  if (A.dim() != n - 1) throw PreconditionError("surface process: box must have dimension n - 1");
  double largest = 0.0;
  for (int d = 0; d < n - 1; ++d) largest = std::max(largest, static_cast<double>(A.hi[d] - A.lo[d]));
  const double c = 0.5 * largest;
  Eigen::VectorXd lo(n), sides(n);
  for (int d = 0; d < n - 1; ++d) {
    lo(d) = static_cast<double>(A.lo[d]);
    sides(d) = static_cast<double>(A.hi[d] - A.lo[d]);
  }
  lo(n - 1) = -c;
  sides(n - 1) = 2.0 * c;
  return process_domain(R_, M_, lo, sides, options_);
}

double SurfaceProcess::evaluate(const Omega& omega, const IntegerBox& A) const {
  const int n = ensemble_->dim();
  StepDatum datum{Point::Zero(n), zeta_, nu_};
  const CellProblem p = make_cell_problem(PairKind::FINF_G, ensemble_->pair(omega), domain(A), datum);
  return solve_process(p, options_) / std::pow(M_, n - 1);
}

double SurfaceProcess::bound(const IntegerBox& A) const { return ensemble_->constants().c3 * zeta_.norm() * A.volume(); }

std::array<std::int64_t, kMaxDim> SurfaceProcess::carried_shift(const std::vector<std::int64_t>& z) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ensemble_->dim());
  for (int d = 0; d + 1 < ensemble_->dim(); ++d) v(d) = static_cast<double>(z[d]);
  return carried(R_, M_, v);
}

VolumeProcess process_volume(const StationaryEnsemble& ensemble, const Matrix& xi, const Vector& nu,
                             const ProcessOptions& options) {
  return VolumeProcess(ensemble, xi, nu, options);
}

SurfaceProcess process_surface(const StationaryEnsemble& ensemble, const Vector& zeta, const Vector& nu,
                               const ProcessOptions& options) {
  return SurfaceProcess(ensemble, zeta, nu, options);
}

namespace {

template <class Process>
ErgodicEstimate ergodic_impl(const Process& process, const StationaryEnsemble& ensemble,
                             const std::vector<double>& r_schedule, int n_omega, int tail_window, int workers,
                             int box_dim) {
  if (n_omega < 1) throw PreconditionError("ergodic: need at least one sample");
  if (r_schedule.empty()) throw PreconditionError("ergodic: empty schedule");
  ErgodicEstimate out;
  for (double r : r_schedule) {
    const auto side = static_cast<std::int64_t>(std::llround(r));
    if (side < 1 || std::abs(r - static_cast<double>(side)) > 1e-12)
      throw PreconditionError("ergodic: r must be a positive integer");
    ErgodicRow row;
    row.r = r;
    row.values.resize(n_omega);
    row.normalized.resize(n_omega);
    const IntegerBox box = cube(box_dim, side);
    const double norm = std::pow(r, box_dim);
    parallel_for(static_cast<std::size_t>(n_omega), workers, [&](std::size_t i) {
      row.values[i] = process.evaluate(ensemble.omega(i), box);
      row.normalized[i] = row.values[i] / norm;
    });
    double sum = 0.0;
    for (double v : row.normalized) sum += v;
    row.mean = sum / n_omega;
    double ss = 0.0;
    for (double v : row.normalized) ss += (v - row.mean) * (v - row.mean);
    row.stddev = n_omega > 1 ? std::sqrt(ss / (n_omega - 1)) : 0.0;
    out.rows.push_back(std::move(row));
  }
  out.tail_window = std::clamp(tail_window, 1, static_cast<int>(out.rows.size()));
  double sum = 0.0;
  for (std::size_t i = out.rows.size() - out.tail_window; i < out.rows.size(); ++i) sum += out.rows[i].mean;
  out.limit = sum / out.tail_window;
  return out;
}

}  // namespace

ErgodicEstimate ergodic_estimate(const VolumeProcess& process, const StationaryEnsemble& ensemble,
                                 const std::vector<double>& r_schedule, int n_omega, int tail_window, int workers) {
  return ergodic_impl(process, ensemble, r_schedule, n_omega, tail_window, workers, ensemble.dim());
}

ErgodicEstimate ergodic_estimate(const SurfaceProcess& process, const StationaryEnsemble& ensemble,
                                 const std::vector<double>& r_schedule, int n_omega, int tail_window, int workers) {
  return ergodic_impl(process, ensemble, r_schedule, n_omega, tail_window, workers, ensemble.dim() - 1);
}

}  // namespace fdhom
