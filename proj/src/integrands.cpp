#include "fdhom/integrands.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace fdhom {

namespace {

std::string format_vector(const Eigen::Ref<const Eigen::MatrixXd>& v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v.reshaped()(i);
  }
  os << ")";
  return os.str();
}

// Keeps the sample with the largest violation for one property.
class VerdictAccumulator {
 public:
  explicit VerdictAccumulator(std::string property) { verdict_.property = std::move(property); }

  void record(double lhs, double rhs, double scale, double tolerance, const std::string& witness,
              double magnitude) {
    const double violation = lhs - rhs;
    if (!seen_ || violation > verdict_.worst_violation) {
      verdict_.worst_violation = violation;
      verdict_.witness = witness;
      verdict_.witness_magnitude = magnitude;
      seen_ = true;
    }
    if (violation > tolerance * (1.0 + std::abs(scale))) {
      if (verdict_.pass || violation > worst_failure_) {
        worst_failure_ = violation;
        failure_witness_ = witness;
        failure_magnitude_ = magnitude;
      }
      verdict_.pass = false;
    }
  }

  PropertyVerdict finish() const {
    PropertyVerdict out = verdict_;
    if (!out.pass) {
      out.worst_violation = worst_failure_;
      out.witness = failure_witness_;
      out.witness_magnitude = failure_magnitude_;
    }
    return out;
  }

 private:
  PropertyVerdict verdict_;
  bool seen_ = false;
  double worst_failure_ = 0.0;
  std::string failure_witness_;
  double failure_magnitude_ = 0.0;
};

double eval_volume_sample(const VolumeIntegrand& f, const Point& x, const Matrix& xi) {
  try {
    return f(x, xi);
  } catch (const EvaluationError& e) {
    throw EvaluationError(std::string(e.what()) + " at sample x=" + format_vector(x) + " xi=" + format_vector(xi));
  }
}

double eval_surface_sample(const SurfaceIntegrand& g, const Point& x, const Vector& zeta, const Vector& nu) {
  try {
    return g(x, zeta, nu);
  } catch (const EvaluationError& e) {
    throw EvaluationError(std::string(e.what()) + " at sample x=" + format_vector(x) + " zeta=" +
                          format_vector(zeta) + " nu=" + format_vector(nu));
  }
}

std::vector<Vector> default_normals(int n) {
  std::vector<Vector> normals;
  for (const Matrix& d : unit_directions(n, 1, n > 1 ? 2 : 0)) normals.push_back(d.col(0));
  return normals;
}

// sup_{tau in dyadic grid, tau <= 2^k} |g_0 - g(tau zeta)/tau|, running max over k.
constexpr int kLambdaMinExp = -40;
constexpr int kLambdaMaxExp = 20;

std::vector<double> lambda_table(const SurfaceIntegrand& g, const SurfaceIntegrand& g0, const SampleSpec& sample) {
  const std::vector<Vector> normals = sample.normals.empty() ? default_normals(g.n()) : sample.normals;
  const auto zetas = unit_directions(g.m(), 1, g.m() > 1 ? sample.directions : 0);
  std::vector<double> table(kLambdaMaxExp - kLambdaMinExp + 1, 0.0);
  for (const Point& x : sample.points) {
    for (const Vector& nu : normals) {
      for (const Matrix& zm : zetas) {
        const Vector zeta = zm.col(0);
        const double base = eval_surface_sample(g0, x, zeta, nu);
        for (int k = kLambdaMinExp; k <= kLambdaMaxExp; ++k) {
          const double tau = std::ldexp(1.0, k);
          const Vector scaled = tau * zeta;
          const double ratio = eval_surface_sample(g, x, scaled, nu) / tau;
          double& slot = table[k - kLambdaMinExp];
          slot = std::max(slot, std::abs(base - ratio));
        }
      }
    }
  }
  for (std::size_t i = 1; i < table.size(); ++i) table[i] = std::max(table[i], table[i - 1]);
  return table;
}

double lambda_lookup(const std::vector<double>& table, double t) {
  if (t < std::ldexp(1.0, kLambdaMinExp)) return 0.0;
  const int k = std::min(kLambdaMaxExp, static_cast<int>(std::floor(std::log2(t))));
  // guard against log2 rounding just above an exact power of two
  int idx = k - kLambdaMinExp;
  if (std::ldexp(1.0, k) > t) --idx;
  return idx < 0 ? 0.0 : table[idx];
}

}  // namespace

// ---------------------------------------------------------------- MonotoneTable

MonotoneTable::MonotoneTable() : nodes_{0.0}, values_{0.0} {}

MonotoneTable::MonotoneTable(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.empty() || nodes_.size() != values_.size())
    throw PreconditionError("modulus table: nodes and values must be nonempty and of equal length");
  if (nodes_.front() != 0.0 || values_.front() != 0.0)
    throw PreconditionError("modulus table must start at (0, 0)");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw PreconditionError("modulus table nodes must increase strictly");
    if (values_[i] < values_[i - 1]) throw PreconditionError("modulus table values must be nondecreasing");
  }
}

MonotoneTable MonotoneTable::capped_linear(double slope, double cap) {
  if (slope <= 0.0 || cap <= 0.0) return MonotoneTable();
  return MonotoneTable({0.0, cap / slope}, {0.0, cap});
}

double MonotoneTable::operator()(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= nodes_.back()) return values_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
  const double w = (s - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
  return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

void IntegrandConstants::validate() const {
  if (!(c2 > 0.0)) throw PreconditionError("constants: c2 must be positive");
  if (!(c3 >= c2)) throw PreconditionError("constants: c3 must be >= c2");
  if (c1 < 0.0 || c4 < 0.0 || c5 < 0.0) throw PreconditionError("constants: c1, c4, c5 must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("constants: alpha must lie in (0,1)");
}

// ---------------------------------------------------------------- integrands

VolumeIntegrand::VolumeIntegrand(Function fn, IntegrandConstants constants, int m, int n, VolumeFlags flags,
                                 std::string name)
    : fn_(std::make_shared<const Function>(std::move(fn))),
      constants_(std::move(constants)),
      m_(m),
      n_(n),
      flags_(flags),
      name_(std::move(name)) {
  constants_.validate();
  if (m < 1 || n < 1 || m > kMaxDim || n > kMaxDim) throw PreconditionError("volume integrand: bad dimensions");
}

double VolumeIntegrand::operator()(const Point& x, const Matrix& xi) const {
  const double value = (*fn_)(x, xi);
  if (!std::isfinite(value)) throw EvaluationError(name_ + ": non-finite value");
  if (value < 0.0) throw EvaluationError(name_ + ": negative value");
  return value;
}

VolumeIntegrand VolumeIntegrand::with_spread(double spread) const {
  VolumeIntegrand copy = *this;
  copy.spread_ = spread;
  return copy;
}

VolumeIntegrand VolumeIntegrand::with_constants(IntegrandConstants constants) const {
  constants.validate();
  VolumeIntegrand copy = *this;
  copy.constants_ = std::move(constants);
  return copy;
}

SurfaceIntegrand::SurfaceIntegrand(Function fn, IntegrandConstants constants, int m, int n, bool one_homogeneous,
                                   std::string name)
    : fn_(std::make_shared<const Function>(std::move(fn))),
      constants_(std::move(constants)),
      m_(m),
      n_(n),
      one_homogeneous_(one_homogeneous),
      name_(std::move(name)) {
  constants_.validate();
  if (m < 1 || n < 1 || m > kMaxDim || n > kMaxDim) throw PreconditionError("surface integrand: bad dimensions");
}

double SurfaceIntegrand::operator()(const Point& x, const Vector& zeta, const Vector& nu) const {
  const double value = (*fn_)(x, zeta, nu);
  if (!std::isfinite(value)) throw EvaluationError(name_ + ": non-finite value");
  if (value < 0.0) throw EvaluationError(name_ + ": negative value");
  return value;
}

SurfaceIntegrand SurfaceIntegrand::with_spread(double spread) const {
  SurfaceIntegrand copy = *this;
  copy.spread_ = spread;
  return copy;
}

SurfaceIntegrand SurfaceIntegrand::with_constants(IntegrandConstants constants) const {
  constants.validate();
  SurfaceIntegrand copy = *this;
  copy.constants_ = std::move(constants);
  return copy;
}

// ---------------------------------------------------------------- sampling

std::vector<Matrix> unit_directions(int rows, int cols, int extra) {
  std::vector<Matrix> out;
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      for (double sign : {1.0, -1.0}) {
        Matrix d = Matrix::Zero(rows, cols);
        d(i, j) = sign;
        out.push_back(d);
      }
    }
  }
  if (rows * cols == 1) return out;
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  for (int e = 0; e < extra; ++e) {
    Matrix d(rows, cols);
    for (Eigen::Index k = 0; k < d.size(); ++k) d.reshaped()(k) = normal(rng);
    d /= d.norm();
    out.push_back(d);
  }
  return out;
}

SampleSpec SampleSpec::default_for(int m, int n) {
  SampleSpec s;
  const std::vector<double> coords = {0.0, 0.3, 1.7};
  for (double c : coords) s.points.push_back(Point::Constant(n, c));
  if (n > 1) {
    Point p(n);
    p.setZero();
    p(0) = 0.6;
    s.points.push_back(p);
  }
  s.magnitudes = {0.5, 1.0, 2.0, 4.0};
  s.scales = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  (void)m;
  return s;
}

bool AdmissibilityReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const PropertyVerdict& v) { return v.pass; });
}

const PropertyVerdict& AdmissibilityReport::verdict(const std::string& property) const {
  for (const auto& v : verdicts)
    if (v.property == property) return v;
  throw PreconditionError("report has no property " + property);
}

std::string AdmissibilityReport::to_string() const {
  std::ostringstream os;
  os << "admissibility report: " << subject << "\n";
  for (const auto& v : verdicts) {
    os << "  " << v.property << ": " << (v.pass ? "PASS" : "FAIL") << "  worst=" << v.worst_violation;
    if (!v.witness.empty()) os << "  witness " << v.witness;
    os << "\n";
  }
  for (const auto& note : notes) os << "  note: " << note << "\n";
  return os.str();
}

AdmissibilityReport check_volume_admissibility(const VolumeIntegrand& f, const SampleSpec& sample) {
  if (sample.points.empty() || sample.magnitudes.empty())
    throw PreconditionError("volume admissibility: sample spec must have points and magnitudes");
  const IntegrandConstants& c = f.constants();
  const auto dirs = unit_directions(f.m(), f.n(), sample.directions);
  const double tol = sample.tolerance;

  VerdictAccumulator f2("f2"), f3("f3"), f4("f4"), f5("f5"), hom("one_homogeneous");

  for (const Point& x : sample.points) {
    struct Sample {
      Matrix xi;
      double value;
    };
    std::vector<Sample> samples;
    for (const Matrix& d : dirs)
      for (double rho : sample.magnitudes) {
        Matrix xi = rho * d;
        samples.push_back({xi, eval_volume_sample(f, x, xi)});
      }

    for (const Sample& s : samples) {
      const double norm = s.xi.norm();
      const std::string w = "x=" + format_vector(x) + " xi=" + format_vector(s.xi);
      f3.record(c.c2 * norm, s.value, s.value, tol, w, norm);
      f4.record(s.value, c.c3 * norm + c.c4, s.value, tol, w, norm);
    }

    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = i + 1; j < samples.size(); ++j) {
        const double d = (samples[i].xi - samples[j].xi).norm();
        const double fi = samples[i].value, fj = samples[j].value;
        const double rhs = c.sigma1(d) * (fi + fj) + c.c1 * d;
        f2.record(std::abs(fi - fj), rhs, fi + fj, tol,
                  "x=" + format_vector(x) + " xi1=" + format_vector(samples[i].xi) + " xi2=" +
                      format_vector(samples[j].xi),
                  d);
      }

    // Cauchy form of (f5): |f(s xi)/s - f(t xi)/t| <= c5/s (1 + f(s xi)^(1-alpha)) + same at t
    for (const Sample& s : samples) {
      std::vector<double> ratios, bounds;
      for (double t : sample.scales) {
        const Matrix txi = t * s.xi;
        const double ft = eval_volume_sample(f, x, txi);
        ratios.push_back(ft / t);
        bounds.push_back(c.c5 / t + c.c5 / t * std::pow(ft, 1.0 - c.alpha));
      }
      for (std::size_t a = 0; a < ratios.size(); ++a)
        for (std::size_t b = a + 1; b < ratios.size(); ++b)
          f5.record(std::abs(ratios[a] - ratios[b]), bounds[a] + bounds[b], ratios[a] + ratios[b], tol,
                    "x=" + format_vector(x) + " xi=" + format_vector(s.xi) + " s=" +
                        std::to_string(sample.scales[a]) + " t=" + std::to_string(sample.scales[b]),
                    s.xi.norm());
      if (f.flags().one_homogeneous)
        for (std::size_t a = 0; a < ratios.size(); ++a)
          hom.record(std::abs(ratios[a] - s.value), 0.0, s.value, tol,
                     "x=" + format_vector(x) + " xi=" + format_vector(s.xi) + " t=" + std::to_string(sample.scales[a]),
                     s.xi.norm());
    }
  }

  AdmissibilityReport report;
  report.subject = f.name();
  report.verdicts = {f2.finish(), f3.finish(), f4.finish(), f5.finish()};
  if (f.flags().one_homogeneous) report.verdicts.push_back(hom.finish());
  return report;
}

AdmissibilityReport check_surface_admissibility(const SurfaceIntegrand& g, const SampleSpec& sample) {
  if (sample.points.empty() || sample.magnitudes.empty())
    throw PreconditionError("surface admissibility: sample spec must have points and magnitudes");
  const IntegrandConstants& c = g.constants();
  const auto zetas = unit_directions(g.m(), 1, sample.directions);
  const std::vector<Vector> normals = sample.normals.empty() ? default_normals(g.n()) : sample.normals;
  const double tol = sample.tolerance;

  VerdictAccumulator g2("g2"), g3("g3"), g4("g4"), g5("g5"), g6("g6");

  const SurfaceIntegrand g0 = derivative_at_zero(g, default_derivative_schedule());
  const std::vector<double> lambda = lambda_table(g, g0, sample);

  for (const Point& x : sample.points) {
    for (const Vector& nu : normals) {
      struct Sample {
        Vector zeta;
        double value;
      };
      std::vector<Sample> samples;
      for (const Matrix& d : zetas)
        for (double rho : sample.magnitudes) {
          Vector zeta = rho * d.col(0);
          samples.push_back({zeta, eval_surface_sample(g, x, zeta, nu)});
        }

      for (const Sample& s : samples) {
        const double norm = s.zeta.norm();
        const std::string w = "x=" + format_vector(x) + " zeta=" + format_vector(s.zeta) + " nu=" + format_vector(nu);
        g3.record(c.c2 * norm, s.value, s.value, tol, w, norm);
        g4.record(s.value, c.c3 * norm, s.value, tol, w, norm);
        const Vector mz = -s.zeta;
        const Vector mn = -nu;
        const double flipped = eval_surface_sample(g, x, mz, mn);
        g6.record(std::abs(s.value - flipped), 0.0, s.value, tol, w, norm);
      }

      // (g2); zero amplitudes are excluded, the inequality cannot hold there for c2 > 0.
      for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
          const double d = (samples[i].zeta - samples[j].zeta).norm();
          const double gi = samples[i].value, gj = samples[j].value;
          g2.record(std::abs(gi - gj), c.sigma2(d) * (gi + gj), gi + gj, tol,
                    "x=" + format_vector(x) + " zeta1=" + format_vector(samples[i].zeta) + " zeta2=" +
                        format_vector(samples[j].zeta) + " nu=" + format_vector(nu),
                    d);
        }

      // Cauchy form (acg) with the sampled modulus lambda.
      for (const Sample& s : samples) {
        const double norm = s.zeta.norm();
        std::vector<double> ratios, bounds;
        const Vector unit = norm > 0.0 ? Vector(s.zeta / norm) : s.zeta;
        const double g0_unit = norm > 0.0 ? eval_surface_sample(g0, x, unit, nu) : 0.0;
        for (double t : sample.scales) {
          const Vector tz = t * s.zeta;
          const double r = eval_surface_sample(g, x, tz, nu) / t;
          ratios.push_back(r);
          // lambda on the dyadic grid, topped up with the deviation at tau = t|zeta| itself
          double lam = lambda_lookup(lambda, t * norm);
          if (norm > 0.0) lam = std::max(lam, std::abs(g0_unit - r / norm));
          bounds.push_back(lam * r / c.c2);
        }
        for (std::size_t a = 0; a < ratios.size(); ++a)
          for (std::size_t b = a + 1; b < ratios.size(); ++b)
            g5.record(std::abs(ratios[a] - ratios[b]), bounds[a] + bounds[b], ratios[a] + ratios[b], 1e-8,
                      "x=" + format_vector(x) + " zeta=" + format_vector(s.zeta) + " s=" +
                          std::to_string(sample.scales[a]) + " t=" + std::to_string(sample.scales[b]),
                      norm);
      }
    }
  }

  // uniformity of the t -> 0+ limit: lambda at the smallest sampled scale must be small
  const double t_small = sample.scales.empty() ? 1e-3 : *std::min_element(sample.scales.begin(), sample.scales.end());
  const double lam = lambda_lookup(lambda, t_small);
  g5.record(lam, sample.uniformity_tolerance, 0.0, 0.0, "lambda(" + std::to_string(t_small) + ")", t_small);

  AdmissibilityReport report;
  report.subject = g.name();
  report.verdicts = {g2.finish(), g3.finish(), g4.finish(), g5.finish(), g6.finish()};
  report.notes.push_back("uniformity in (g5) is certified on the sampled (x, zeta, nu) only");
  return report;
}

// ---------------------------------------------------------------- f_inf, g_0, lambda

std::vector<double> default_recession_schedule() { return {1e1, 1e2, 1e3, 1e4}; }

std::vector<double> default_derivative_schedule() { return {1e-2, 1e-4, 1e-6, 1e-8}; }

VolumeIntegrand recession(const VolumeIntegrand& f, const std::vector<double>& t_schedule,
                          std::optional<double> tolerance, const std::vector<Point>& sample_points) {
  if (t_schedule.empty()) throw PreconditionError("recession: empty schedule");
  for (std::size_t i = 0; i < t_schedule.size(); ++i) {
    if (!(t_schedule[i] > 0.0)) throw PreconditionError("recession: schedule entries must be positive");
    if (i && !(t_schedule[i] > t_schedule[i - 1])) throw PreconditionError("recession: schedule must increase");
  }
  const double t_max = t_schedule.back();
  if (t_max < 1e3) throw PreconditionError("recession: final schedule entry must be >= 1e3");

  if (f.flags().one_homogeneous) return f.with_spread(0.0);

  std::vector<Point> points = sample_points;
  if (points.empty()) points.push_back(Point::Zero(f.n()));
  const std::size_t first = t_schedule.size() >= 3 ? t_schedule.size() - 3 : 0;
  double spread = 0.0;
  for (const Point& x : points)
    for (const Matrix& d : unit_directions(f.m(), f.n(), 2)) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i = first; i < t_schedule.size(); ++i) {
        const Matrix txi = t_schedule[i] * d;
        const double r = f(x, txi) / t_schedule[i];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      spread = std::max(spread, hi - lo);
    }
  if (tolerance && spread > *tolerance)
    throw NonConvergenceError("recession: spread " + std::to_string(spread) + " exceeds tolerance", spread);

  VolumeFlags flags = f.flags();
  flags.one_homogeneous = true;
  VolumeIntegrand base = f;
  auto fn = [base, t_max](const Point& x, const Matrix& xi) -> double {
    const Matrix scaled = t_max * xi;
    return base(x, scaled) / t_max;
  };
  return VolumeIntegrand(fn, f.constants(), f.m(), f.n(), flags, f.name() + "_inf").with_spread(spread);
}

SurfaceIntegrand derivative_at_zero(const SurfaceIntegrand& g, const std::vector<double>& t_schedule,
                                    std::optional<double> tolerance, const std::vector<Point>& sample_points) {
  if (t_schedule.empty()) throw PreconditionError("derivative_at_zero: empty schedule");
  for (std::size_t i = 0; i < t_schedule.size(); ++i) {
    if (!(t_schedule[i] > 0.0)) throw PreconditionError("derivative_at_zero: schedule entries must be positive");
    if (i && !(t_schedule[i] < t_schedule[i - 1]))
      throw PreconditionError("derivative_at_zero: schedule must decrease");
  }
  const double t_min = t_schedule.back();
  if (t_min > 1e-3) throw PreconditionError("derivative_at_zero: final schedule entry must be <= 1e-3");

  if (g.one_homogeneous()) return g.with_spread(0.0);

  std::vector<Point> points = sample_points;
  if (points.empty()) points.push_back(Point::Zero(g.n()));
  const std::size_t first = t_schedule.size() >= 3 ? t_schedule.size() - 3 : 0;
  double spread = 0.0;
  for (const Point& x : points)
    for (const Vector& nu : default_normals(g.n()))
      for (const Matrix& d : unit_directions(g.m(), 1, 2)) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = first; i < t_schedule.size(); ++i) {
          const Vector tz = t_schedule[i] * d.col(0);
          const double r = g(x, tz, nu) / t_schedule[i];
          lo = std::min(lo, r);
          hi = std::max(hi, r);
        }
        spread = std::max(spread, hi - lo);
      }
  if (tolerance && spread > *tolerance)
    throw NonConvergenceError("derivative_at_zero: spread " + std::to_string(spread) + " exceeds tolerance", spread);

  SurfaceIntegrand base = g;
  auto fn = [base, t_min](const Point& x, const Vector& zeta, const Vector& nu) -> double {
    const double norm = zeta.norm();
    if (norm == 0.0) return 0.0;
    const Vector probe = (t_min / norm) * zeta;
    return norm * (base(x, probe, nu) / t_min);
  };
  return SurfaceIntegrand(fn, g.constants(), g.m(), g.n(), true, g.name() + "_0").with_spread(spread);
}

double modulus_lambda(const SurfaceIntegrand& g, const SurfaceIntegrand& g0, double t, const SampleSpec& sample) {
  if (!(t > 0.0)) throw PreconditionError("modulus_lambda: t must be positive");
  if (sample.points.empty()) throw PreconditionError("modulus_lambda: sample spec needs points");
  return lambda_lookup(lambda_table(g, g0, sample), t);
}

}  // namespace fdhom
