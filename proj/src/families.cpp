#include "fdhom/families.hpp"

#include <algorithm>
#include <cmath>

namespace fdhom {

namespace {

std::int64_t floor_index(double v) { return static_cast<std::int64_t>(std::floor(v)); }

std::size_t wrap(std::int64_t i, std::size_t n) {
  const auto m = static_cast<std::int64_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

void require_positive_values(const std::vector<double>& values, const char* what) {
  if (values.empty()) throw PreconditionError(std::string(what) + ": empty coefficient list");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError(std::string(what) + ": coefficients must be positive");
}

// sup over zeta of the Lipschitz ratio of s -> s (2 - e^{-s}), attained at s = 2
const double kExpNormLipschitz = 2.0 + std::exp(-2.0);

}  // namespace

CoefficientField laminate_field(std::vector<double> values, int axis) {
  require_positive_values(values, "laminate");
  return [values = std::move(values), axis](const Point& x) {
    return values[wrap(floor_index(x(axis)), values.size())];
  };
}

CoefficientField checkerboard_field(std::vector<double> values) {
  require_positive_values(values, "checkerboard");
  if (values.size() != 2) throw PreconditionError("checkerboard: exactly two coefficients expected");
  return [values = std::move(values)](const Point& x) {
    std::int64_t sum = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) sum += floor_index(x(i));
    return values[wrap(sum, 2)];
  };
}

VolumeIntegrand iso_norm_volume(double scale, double offset, int m, int n) {
  if (!(scale > 0.0) || offset < 0.0) throw PreconditionError("iso_norm: scale > 0 and offset >= 0 required");
  IntegrandConstants c;
  c.c1 = scale;
  c.c2 = scale;
  c.c3 = scale;
  c.c4 = offset;
  c.c5 = offset;
  VolumeFlags flags{offset == 0.0, true};
  return VolumeIntegrand([scale, offset](const Point&, const Matrix& xi) { return scale * xi.norm() + offset; }, c, m,
                         n, flags, "iso_norm");
}

VolumeIntegrand smoothed_norm_volume(double scale, double linear, int m, int n, double declared_c2) {
  if (scale < 0.0 || linear < 0.0 || scale + linear <= 0.0)
    throw PreconditionError("smoothed_norm: nonnegative scale/linear, not both zero");
  IntegrandConstants c;
  c.c1 = scale + linear;
  c.c2 = declared_c2 > 0.0 ? declared_c2 : linear;
  c.c3 = scale + linear;
  c.c4 = 0.0;
  c.c5 = scale;
  if (!(c.c2 > 0.0)) throw PreconditionError("smoothed_norm: declare c2 when the linear part is zero");
  VolumeFlags flags{scale == 0.0, true};
  return VolumeIntegrand(
      [scale, linear](const Point&, const Matrix& xi) {
        const double r = xi.norm();
        // sqrt(1 + r^2) - 1 without cancellation near r = 0
        return scale * (r * r / (std::sqrt(1.0 + r * r) + 1.0)) + linear * r;
      },
      c, m, n, flags, "smoothed_norm");
}

VolumeIntegrand coefficient_volume(CoefficientField a, double a_min, double a_max, int m, int n, std::string name) {
  IntegrandConstants c;
  c.c1 = a_max;
  c.c2 = a_min;
  c.c3 = a_max;
  VolumeFlags flags{true, false};
  return VolumeIntegrand([a = std::move(a)](const Point& x, const Matrix& xi) { return a(x) * xi.norm(); }, c, m, n,
                         flags, std::move(name));
}

VolumeIntegrand laminate_volume(std::vector<double> values, int m, int n, int axis) {
  require_positive_values(values, "laminate");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return coefficient_volume(laminate_field(values, axis), *lo, *hi, m, n, "laminate");
}

VolumeIntegrand checkerboard_volume(std::vector<double> values, int m, int n) {
  require_positive_values(values, "checkerboard");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return coefficient_volume(checkerboard_field(values), *lo, *hi, m, n, "checkerboard_cellwise");
}

SurfaceIntegrand iso_norm_surface(double scale, int m, int n) {
  if (!(scale > 0.0)) throw PreconditionError("iso_norm: scale must be positive");
  IntegrandConstants c;
  c.c2 = scale;
  c.c3 = scale;
  c.sigma2 = MonotoneTable::capped_linear(1.0, 1.0);
  return SurfaceIntegrand([scale](const Point&, const Vector& zeta, const Vector&) { return scale * zeta.norm(); }, c,
                          m, n, true, "iso_norm");
}

SurfaceIntegrand smoothed_norm_surface(double scale, int m, int n) {
  if (!(scale > 0.0)) throw PreconditionError("smoothed_norm: scale must be positive");
  IntegrandConstants c;
  c.c2 = scale;
  c.c3 = 2.0 * scale;
  c.sigma2 = MonotoneTable::capped_linear(2.0, 2.0);
  return SurfaceIntegrand(
      [scale](const Point&, const Vector& zeta, const Vector&) {
        const double r = zeta.norm();
        return scale * (r + r * r / (std::sqrt(1.0 + r * r) + 1.0));
      },
      c, m, n, false, "smoothed_norm");
}

SurfaceIntegrand exp_norm_surface(double scale, int m, int n) {
  if (!(scale > 0.0)) throw PreconditionError("exp_norm: scale must be positive");
  IntegrandConstants c;
  c.c2 = scale;
  c.c3 = 2.0 * scale;
  c.sigma2 = MonotoneTable::capped_linear(kExpNormLipschitz, kExpNormLipschitz);
  return SurfaceIntegrand(
      [scale](const Point&, const Vector& zeta, const Vector&) {
        const double r = zeta.norm();
        return scale * r * (2.0 - std::exp(-r));
      },
      c, m, n, false, "exp_norm");
}

SurfaceIntegrand coefficient_surface(CoefficientField b, double b_min, double b_max, int m, int n, std::string name) {
  IntegrandConstants c;
  c.c2 = b_min;
  c.c3 = b_max;
  c.sigma2 = MonotoneTable::capped_linear(1.0, 1.0);
  return SurfaceIntegrand([b = std::move(b)](const Point& x, const Vector& zeta, const Vector&) { return b(x) * zeta.norm(); },
                          c, m, n, true, std::move(name));
}

SurfaceIntegrand laminate_surface(std::vector<double> values, int m, int n, int axis) {
  require_positive_values(values, "laminate");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return coefficient_surface(laminate_field(values, axis), *lo, *hi, m, n, "laminate");
}

SurfaceIntegrand checkerboard_surface(std::vector<double> values, int m, int n) {
  require_positive_values(values, "checkerboard");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return coefficient_surface(checkerboard_field(values), *lo, *hi, m, n, "checkerboard_cellwise");
}

void harmonise_constants(VolumeIntegrand& f, SurfaceIntegrand& g) {
  IntegrandConstants c = f.constants();
  const IntegrandConstants& cg = g.constants();
  c.c2 = std::min(c.c2, cg.c2);
  c.c3 = std::max(c.c3, cg.c3);
  c.sigma2 = cg.sigma2;
  f = f.with_constants(c);
  g = g.with_constants(c);
}

VolumeIntegrand rescaled(const VolumeIntegrand& f, double epsilon) {
  if (!(epsilon > 0.0)) throw PreconditionError("rescaled: epsilon must be positive");
  if (f.flags().x_independent) return f;
  const double inv = 1.0 / epsilon;
  VolumeIntegrand base = f;
  return VolumeIntegrand([base, inv](const Point& x, const Matrix& xi) { return base(Point(x * inv), xi); },
                         f.constants(), f.m(), f.n(), f.flags(), f.name() + "_eps");
}

SurfaceIntegrand rescaled(const SurfaceIntegrand& g, double epsilon) {
  if (!(epsilon > 0.0)) throw PreconditionError("rescaled: epsilon must be positive");
  const double inv = 1.0 / epsilon;
  SurfaceIntegrand base = g;
  return SurfaceIntegrand(
      [base, inv](const Point& x, const Vector& zeta, const Vector& nu) { return base(Point(x * inv), zeta, nu); },
      g.constants(), g.m(), g.n(), g.one_homogeneous(), g.name() + "_eps");
}

}  // namespace fdhom
