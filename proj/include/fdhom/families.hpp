#ifndef FDHOM_FAMILIES_HPP
#define FDHOM_FAMILIES_HPP

#include "fdhom/integrands.hpp"

#include <functional>
#include <vector>

namespace fdhom {

/// Scalar coefficient field a(x) >= 0.
using CoefficientField = std::function<double(const Point&)>;

/// a(x) = values[floor(x_axis) mod values.size()]: layers of unit thickness along `axis`.
CoefficientField laminate_field(std::vector<double> values, int axis = 0);

/// a(x) = values[(sum_i floor(x_i)) mod 2].
CoefficientField checkerboard_field(std::vector<double> values);

// Volume families. All constants are derived from the parameters.

/// f = scale |xi| + offset
VolumeIntegrand iso_norm_volume(double scale, double offset = 0.0, int m = 1, int n = 1);

/// f = scale (sqrt(1 + |xi|^2) - 1) + linear |xi|. With linear == 0 the lower bound (f3)
/// only holds away from xi = 0; c2 then has to be declared explicitly.
VolumeIntegrand smoothed_norm_volume(double scale, double linear, int m = 1, int n = 1,
                                     double declared_c2 = 0.0);

/// f = a(x) |xi| with a piecewise constant
VolumeIntegrand coefficient_volume(CoefficientField a, double a_min, double a_max, int m, int n,
                                   std::string name);
VolumeIntegrand laminate_volume(std::vector<double> values, int m = 1, int n = 1, int axis = 0);
VolumeIntegrand checkerboard_volume(std::vector<double> values, int m = 1, int n = 2);

// Surface families.

/// g = scale |zeta|
SurfaceIntegrand iso_norm_surface(double scale, int m = 1, int n = 1);

/// g = scale (|zeta| + sqrt(1 + |zeta|^2) - 1); g_0 = scale |zeta|
SurfaceIntegrand smoothed_norm_surface(double scale, int m = 1, int n = 1);

/// g = scale |zeta| (2 - exp(-|zeta|)); g_0 = scale |zeta|
SurfaceIntegrand exp_norm_surface(double scale, int m = 1, int n = 1);

SurfaceIntegrand coefficient_surface(CoefficientField b, double b_min, double b_max, int m, int n,
                                     std::string name);
SurfaceIntegrand laminate_surface(std::vector<double> values, int m = 1, int n = 1, int axis = 0);
SurfaceIntegrand checkerboard_surface(std::vector<double> values, int m = 1, int n = 2);

/// Smallest common c2 and largest c3 of a pair; continuity data taken from each side.
/// The same constant set is then attached to both integrands.
void harmonise_constants(VolumeIntegrand& f, SurfaceIntegrand& g);

/// Oscillating integrand x -> f(x / epsilon, .)
VolumeIntegrand rescaled(const VolumeIntegrand& f, double epsilon);
SurfaceIntegrand rescaled(const SurfaceIntegrand& g, double epsilon);

}  // namespace fdhom

#endif  // FDHOM_FAMILIES_HPP
