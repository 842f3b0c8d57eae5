#include "fdhom/homogenize.hpp"

#include "fdhom/families.hpp"
#include "fdhom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace fdhom {

ExtrapolationResult extrapolate(std::vector<std::pair<double, double>> samples, std::vector<double> raw,
                                int tail_window, std::optional<double> spread_tolerance) {
  if (samples.empty()) throw PreconditionError("extrapolate: no samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].first > samples[i - 1].first)) throw PreconditionError("extrapolate: schedule must increase");
  ExtrapolationResult out;
  out.samples = std::move(samples);
  out.raw = std::move(raw);
  out.tail_window = std::clamp(tail_window, 1, static_cast<int>(out.samples.size()));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (std::size_t i = out.samples.size() - out.tail_window; i < out.samples.size(); ++i) {
    const double v = out.samples[i].second;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  out.limit = sum / out.tail_window;
  out.spread = hi - lo;
  out.flagged = spread_tolerance && out.spread > *spread_tolerance;
  return out;
}

HomogenizeOptions HomogenizeOptions::defaults_for(int n) {
  HomogenizeOptions o;
  if (n >= 2) {
    o.r_schedule = {4, 8, 16};
    o.tail_window = 2;
  }
  return o;
}

namespace {

struct CellSpec {
  PairKind kind = PairKind::F_G0;
  bool step = false;
  Matrix xi;
  Vector zeta;
  Vector nu;
  Point x;
  int k = 1;
  BoundaryMode bc = BoundaryMode::full;
};

double solve_value(const CellProblem& p, const HomogenizeOptions& o) {
  const Quantization q = default_quantization(p, o.refinement);
  const bool exact = o.solver == SolverChoice::exact || (o.solver == SolverChoice::automatic && p.domain.dim() == 1);
  if (exact) return solve_exact_1d(p, q).value;
  return solve_heuristic(p, o.heuristic, q).value;
}

ExtrapolationResult run_schedule(const DerivedPair& pair, const CellSpec& spec, const HomogenizeOptions& o) {
  const auto& schedule = o.r_schedule;
  if (schedule.empty()) throw PreconditionError("homogenize: empty r schedule");
  const int n = static_cast<int>(spec.nu.size());
  const double bc = o.bc_width.value_or(2.0 * o.h);
  std::vector<std::pair<double, double>> samples(schedule.size());
  std::vector<double> raw(schedule.size());
  parallel_for(schedule.size(), o.workers, [&](std::size_t i) {
    const double r = schedule[i];
    VolumeIntegrand volume = pair.volume(spec.kind);
    SurfaceIntegrand surface = pair.surface(spec.kind);
    Point center;
    double side, spacing, strip;
    if (o.scaling == Scaling::domain_growth) {
      center = r * spec.x;
      side = r;
      spacing = o.h;
      strip = bc;
    } else {
      center = spec.x;
      side = 1.0;
      spacing = o.h / r;
      strip = bc / r;
      volume = rescaled(volume, 1.0 / r);
      surface = rescaled(surface, 1.0 / r);
    }
    GridDomain domain = rotated_rectangle(center, side, spec.k, spec.nu, spacing, strip);
    Datum datum = spec.step ? Datum(StepDatum{center, spec.zeta, spec.nu}) : Datum(LinearDatum{spec.xi, std::nullopt});
    CellProblem p(spec.kind, volume, surface, std::move(domain), std::move(datum), spec.bc);
    const double value = solve_value(p, o);
    const double norm = spec.step ? std::pow(side, n - 1) : std::pow(spec.k, n - 1) * std::pow(side, n);
    raw[i] = value;
    samples[i] = {r, value / norm};
  });
  return extrapolate(std::move(samples), std::move(raw), o.tail_window, o.spread_tolerance);
}

}  // namespace

ExtrapolationResult f_hom(const DerivedPair& pair, const Matrix& xi, const Point& x, const Vector& nu, int k,
                          const HomogenizeOptions& options) {
  CellSpec spec;
  spec.kind = PairKind::F_G0;
  spec.xi = xi;
  spec.nu = nu;
  spec.x = x;
  spec.k = k;
  return run_schedule(pair, spec, options);
}

ExtrapolationResult g_hom(const DerivedPair& pair, const Vector& zeta, const Vector& nu, const Point& x,
                          const HomogenizeOptions& options) {
  CellSpec spec;
  spec.kind = PairKind::FINF_G;
  spec.step = true;
  spec.zeta = zeta;
  spec.nu = nu;
  spec.x = x;
  return run_schedule(pair, spec, options);
}

VolumeIntegrand f_hom_integrand(const DerivedPair& pair, const Point& x, const Vector& nu, int k,
                                const HomogenizeOptions& options) {
  struct Cache {
    std::mutex mutex;
    std::map<std::vector<double>, double> values;
  };
  auto cache = std::make_shared<Cache>();
  VolumeFlags flags{false, true};
  return VolumeIntegrand(
      [pair, x, nu, k, options, cache](const Point&, const Matrix& xi) {
        std::vector<double> key(xi.data(), xi.data() + xi.size());
        {
          std::lock_guard<std::mutex> lock(cache->mutex);
          auto it = cache->values.find(key);
          if (it != cache->values.end()) return it->second;
        }
        const double value = f_hom(pair, xi, x, nu, k, options).limit;
        std::lock_guard<std::mutex> lock(cache->mutex);
        cache->values.emplace(std::move(key), value);
        return value;
      },
      pair.f.constants(), pair.f.m(), pair.f.n(), flags, "f_hom");
}

ExtrapolationResult f_hom_infinity(const DerivedPair& pair, const Matrix& xi, RecessionRoute route, const Point& x,
                                   const Vector& nu, int k, const HomogenizeOptions& options,
                                   const std::vector<double>& t_schedule) {
  if (route == RecessionRoute::cell) {
    CellSpec spec;
    spec.kind = PairKind::FINF_G0;
    spec.xi = xi;
    spec.nu = nu;
    spec.x = x;
    spec.k = k;
    return run_schedule(pair, spec, options);
  }
  const VolumeIntegrand fh = f_hom_integrand(pair, x, nu, k, options);
  const VolumeIntegrand fh_inf = recession(fh, t_schedule);
  std::vector<std::pair<double, double>> samples;
  std::vector<double> raw;
  for (double t : t_schedule) {
    const double value = fh(x, Matrix(t * xi));
    samples.emplace_back(t, value / t);
    raw.push_back(value);
  }
  ExtrapolationResult out = extrapolate(samples, raw, 3, options.spread_tolerance);
  out.limit = fh_inf(x, xi);
  return out;
}

ExtrapolationResult f_hom_infinity_partial(const DerivedPair& pair, const Vector& a, const Vector& nu, int k,
                                           const Point& x, const HomogenizeOptions& options) {
  CellSpec spec;
  spec.kind = PairKind::FINF_G0;
  spec.xi = a * nu.transpose();
  spec.nu = nu;
  spec.x = x;
  spec.k = k;
  spec.bc = BoundaryMode::perpendicular_only;
  return run_schedule(pair, spec, options);
}

ExtrapolationResult f_hom(const DerivedPair& pair, double xi, const HomogenizeOptions& options, double x, int k) {
  return f_hom(pair, scalar_matrix(xi), scalar_vector(x), scalar_vector(1.0), k, options);
}

ExtrapolationResult g_hom(const DerivedPair& pair, double zeta, double nu, const HomogenizeOptions& options, double x) {
  return g_hom(pair, scalar_vector(zeta), scalar_vector(nu), scalar_vector(x), options);
}

ExtrapolationResult f_hom_infinity(const DerivedPair& pair, double xi, RecessionRoute route,
                                   const HomogenizeOptions& options) {
  return f_hom_infinity(pair, scalar_matrix(xi), route, scalar_vector(0.0), scalar_vector(1.0), 1, options);
}

std::string to_string(Formula formula) {
  switch (formula) {
    case Formula::f_hom: return "f_hom";
    case Formula::g_hom: return "g_hom";
    case Formula::f_hom_infinity: return "f_hom_infinity";
  }
  return "?";
}

InvarianceReport invariance_diagnostics(Formula formula, const DerivedPair& pair, const Vector& argument,
                                        const std::vector<Point>& xs, const std::vector<Vector>& nus,
                                        const std::vector<int>& ks, const HomogenizeOptions& options) {
  if (xs.empty() || nus.empty() || ks.empty()) throw PreconditionError("invariance: empty parameter list");
  InvarianceReport report;
  for (const Point& x : xs)
    for (const Vector& nu : nus)
      for (int k : ks) {
        InvarianceRow row{x, nu, k, 0.0};
        const Matrix xi = argument.transpose();
        switch (formula) {
          case Formula::f_hom: row.limit = f_hom(pair, xi, x, nu, k, options).limit; break;
          case Formula::g_hom: row.limit = g_hom(pair, argument, nu, x, options).limit; break;
          case Formula::f_hom_infinity:
            row.limit = f_hom_infinity(pair, xi, RecessionRoute::cell, x, nu, k, options).limit;
            break;
        }
        report.rows.push_back(row);
      }
  const std::size_t nx = xs.size(), nn = nus.size(), nk = ks.size();
  auto at = [&](std::size_t i, std::size_t j, std::size_t l) { return report.rows[(i * nn + j) * nk + l].limit; };
  auto rel_spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    return (*hi - *lo) / std::max(std::abs(mean), 1e-12);
  };
  for (std::size_t j = 0; j < nn; ++j)
    for (std::size_t l = 0; l < nk; ++l) {
      std::vector<double> v;
      for (std::size_t i = 0; i < nx; ++i) v.push_back(at(i, j, l));
      report.spread_x = std::max(report.spread_x, rel_spread(v));
    }
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t l = 0; l < nk; ++l) {
      std::vector<double> v;
      for (std::size_t j = 0; j < nn; ++j) v.push_back(at(i, j, l));
      report.spread_nu = std::max(report.spread_nu, rel_spread(v));
    }
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nn; ++j) {
      std::vector<double> v;
      for (std::size_t l = 0; l < nk; ++l) v.push_back(at(i, j, l));
      report.spread_k = std::max(report.spread_k, rel_spread(v));
    }
  return report;
}

// ------------------------------------------------------------ tabulations

namespace {

double interpolate(const std::vector<double>& nodes, const std::vector<double>& values, bool homogeneous, double s) {
  if (nodes.empty()) throw PreconditionError("tabulation: empty");
  if (s < nodes.front() || s > nodes.back()) {
    if (!homogeneous) throw PreconditionError("tabulation: argument outside the tabulated range");
    const std::size_t end = s > nodes.back() ? nodes.size() - 1 : 0;
    if (nodes[end] == 0.0) throw PreconditionError("tabulation: cannot extend from a zero node");
    return values[end] * s / nodes[end];
  }
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (nodes[j] == s) return values[j];
  const double t = (s - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  return (1.0 - t) * values[j - 1] + t * values[j];
}

std::vector<double> sorted_nodes(std::vector<double> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

}  // namespace

double HomogenizedVolume::operator()(double xi) const { return interpolate(nodes, values, one_homogeneous, xi); }

double HomogenizedSurface::operator()(double zeta, double nu) const {
  return interpolate(nodes, nu > 0.0 ? plus : minus, one_homogeneous, zeta);
}

HomogenizedVolume tabulate_f_hom(const DerivedPair& pair, std::vector<double> nodes, const HomogenizeOptions& options,
                                 bool one_homogeneous) {
  HomogenizedVolume t;
  t.nodes = sorted_nodes(std::move(nodes));
  t.one_homogeneous = one_homogeneous;
  for (double xi : t.nodes) {
    t.results.push_back(f_hom(pair, xi, options));
    t.values.push_back(t.results.back().limit);
  }
  return t;
}

HomogenizedVolume tabulate_f_hom_infinity(const DerivedPair& pair, std::vector<double> nodes,
                                          const HomogenizeOptions& options) {
  HomogenizedVolume t;
  t.nodes = sorted_nodes(std::move(nodes));
  t.one_homogeneous = true;
  for (double xi : t.nodes) {
    t.results.push_back(f_hom_infinity(pair, xi, RecessionRoute::cell, options));
    t.values.push_back(t.results.back().limit);
  }
  return t;
}

HomogenizedSurface tabulate_g_hom(const DerivedPair& pair, std::vector<double> nodes, const HomogenizeOptions& options,
                                  bool one_homogeneous) {
  HomogenizedSurface t;
  t.nodes = sorted_nodes(std::move(nodes));
  t.one_homogeneous = one_homogeneous;
  for (double zeta : t.nodes) {
    t.results_plus.push_back(g_hom(pair, zeta, 1.0, options));
    t.plus.push_back(t.results_plus.back().limit);
    t.results_minus.push_back(g_hom(pair, zeta, -1.0, options));
    t.minus.push_back(t.results_minus.back().limit);
  }
  return t;
}

// ---------------------------------------------------------- closure checks

namespace {

class VerdictBuilder {
 public:
  explicit VerdictBuilder(std::string name) { verdict_.property = std::move(name); }

  void record(double violation, double magnitude, const std::string& witness) {
    if (first_ || violation > verdict_.worst_violation) {
      verdict_.worst_violation = violation;
      verdict_.witness = witness;
      verdict_.witness_magnitude = magnitude;
      first_ = false;
    }
    if (violation > 0.0) verdict_.pass = false;
  }

  PropertyVerdict done() const { return verdict_; }

 private:
  PropertyVerdict verdict_;
  bool first_ = true;
};

std::string pair_witness(const char* name, double a, double b) {
  std::ostringstream s;
  s << name << "1=" << a << " " << name << "2=" << b;
  return s.str();
}

std::string single_witness(const char* name, double a) {
  std::ostringstream s;
  s << name << "=" << a;
  return s.str();
}

}  // namespace

AdmissibilityReport check_volume_closure(const HomogenizedVolume& fh, const IntegrandConstants& c, double tolerance) {
  AdmissibilityReport report;
  report.subject = "f_hom (tabulated)";
  VerdictBuilder cont("aea_continuity"), lower("f3_lower"), upper("f4_upper");
  const auto& x = fh.nodes;
  const auto& v = fh.values;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lower.record(c.c2 * std::abs(x[i]) - v[i] - tolerance, std::abs(x[i]), single_witness("xi", x[i]));
    upper.record(v[i] - c.c3 * std::abs(x[i]) - c.c4 - tolerance, std::abs(x[i]), single_witness("xi", x[i]));
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double d = std::abs(x[i] - x[j]);
      const double rhs = c.sigma1(d) * (v[i] + v[j]) + c.c1 * d + tolerance;
      cont.record(std::abs(v[i] - v[j]) - rhs, d, pair_witness("xi", x[i], x[j]));
    }
  }
  report.verdicts = {cont.done(), lower.done(), upper.done()};
  return report;
}

AdmissibilityReport check_surface_closure(const HomogenizedSurface& gh, const IntegrandConstants& c, double tolerance) {
  AdmissibilityReport report;
  report.subject = "g_hom (tabulated)";
  VerdictBuilder cont("g2_continuity"), lower("g3_lower"), upper("g4_upper"), sym("g6_symmetry");
  const auto& z = gh.nodes;
  for (const auto* values : {&gh.plus, &gh.minus}) {
    const auto& v = *values;
    for (std::size_t i = 0; i < z.size(); ++i) {
      lower.record(c.c2 * std::abs(z[i]) - v[i] - tolerance, std::abs(z[i]), single_witness("zeta", z[i]));
      upper.record(v[i] - c.c3 * std::abs(z[i]) - tolerance, std::abs(z[i]), single_witness("zeta", z[i]));
      for (std::size_t j = i + 1; j < z.size(); ++j) {
        // g is only defined for nonzero jumps
        if (z[i] == 0.0 || z[j] == 0.0) continue;
        const double d = std::abs(z[i] - z[j]);
        const double rhs = c.sigma2(d) * (v[i] + v[j]) + tolerance;
        cont.record(std::abs(v[i] - v[j]) - rhs, d, pair_witness("zeta", z[i], z[j]));
      }
    }
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto it = std::find(z.begin(), z.end(), -z[i]);
    if (it == z.end()) continue;
    const std::size_t j = static_cast<std::size_t>(it - z.begin());
    sym.record(std::abs(gh.plus[i] - gh.minus[j]) - tolerance, std::abs(z[i]), single_witness("zeta", z[i]));
  }
  report.verdicts = {cont.done(), lower.done(), upper.done(), sym.done()};
  return report;
}

double homogenized_energy(const HomogenizedVolume& fh, const HomogenizedSurface& gh, const HomogenizedVolume& fhinf,
                          const BVTestFunction1D& u) {
  double total = 0.0;
  for (std::size_t i = 0; i < u.slopes.size(); ++i)
    total += fh(u.slopes[i]) * (u.breakpoints[i + 1] - u.breakpoints[i]);
  for (const auto& j : u.jumps) total += gh(j.amplitude, 1.0);
  if (u.cantor_mass() > 0.0) total += fhinf(u.cantor_polar()) * u.cantor_mass();
  return total;
}

}  // namespace fdhom
