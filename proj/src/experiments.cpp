#include "fdhom/experiments.hpp"

#include "fdhom/families.hpp"
#include "fdhom/parallel.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace fdhom {

using json = nlohmann::json;

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

// ------------------------------------------------------------- families

VolumeIntegrand make_volume(const IntegrandSpec& s, int m, int n) {
  if (s.family == "iso_norm") return iso_norm_volume(s.scale, s.offset, m, n);
  if (s.family == "smoothed_norm") return smoothed_norm_volume(s.scale, s.linear, m, n, s.declared_c2);
  if (s.family == "laminate") return laminate_volume(s.values, m, n, s.axis);
  if (s.family == "checkerboard_cellwise") return checkerboard_volume(s.values, m, n);
  throw ConfigError("unknown volume family '" + s.family + "'");
}

SurfaceIntegrand make_surface(const IntegrandSpec& s, int m, int n) {
  if (s.family == "iso_norm") return iso_norm_surface(s.scale, m, n);
  if (s.family == "smoothed_norm") return smoothed_norm_surface(s.scale, m, n);
  if (s.family == "exp_norm") return exp_norm_surface(s.scale, m, n);
  if (s.family == "laminate") return laminate_surface(s.values, m, n, s.axis);
  if (s.family == "checkerboard_cellwise") return checkerboard_surface(s.values, m, n);
  throw ConfigError("unknown surface family '" + s.family + "'");
}

// --------------------------------------------------------------- parsing

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(path_ + "." + key + ": missing required key");
    return convert<T>(key);
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  Reader child(const std::string& key) {
    used_.insert(key);
    return Reader(j_.at(key), path_ + "." + key);
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(path_ + "." + it.key() + ": unknown key");
  }

 private:
  template <class T>
  T convert(const std::string& key) {
    used_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Vector to_vector(const json& j, const std::string& path) {
  try {
    if (j.is_number()) return scalar_vector(j.get<double>());
    const auto v = j.get<std::vector<double>>();
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) throw ConfigError(path + ": bad vector length");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// number -> 1x1, flat array -> 1 x n, nested arrays -> rows
Matrix to_matrix(const json& j, const std::string& path) {
  try {
    if (j.is_number()) return scalar_matrix(j.get<double>());
    if (j.is_array() && !j.empty() && j.front().is_number()) return Matrix(to_vector(j, path).transpose());
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty() || rows.size() > static_cast<std::size_t>(kMaxDim)) throw ConfigError(path + ": bad matrix shape");
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) throw ConfigError(path + ": ragged matrix");
      for (std::size_t k = 0; k < rows[i].size(); ++k)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<Vector> to_vectors(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_vector(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

IntegrandSpec parse_integrand(Reader r) {
  IntegrandSpec s;
  s.family = r.get<std::string>("family", s.family);
  s.scale = r.get("scale", s.scale);
  s.offset = r.get("offset", s.offset);
  s.linear = r.get("linear", s.linear);
  s.declared_c2 = r.get("declared_c2", s.declared_c2);
  s.values = r.get("values", s.values);
  s.axis = r.get("axis", s.axis);
  r.finish();
  return s;
}

SampleSpec parse_sampling(Reader r, int m, int n) {
  SampleSpec s = SampleSpec::default_for(m, n);
  if (r.has("points")) s.points = to_vectors(r.raw("points"), r.path("points"));
  s.magnitudes = r.get("magnitudes", s.magnitudes);
  s.scales = r.get("scales", s.scales);
  if (r.has("normals")) s.normals = to_vectors(r.raw("normals"), r.path("normals"));
  s.directions = r.get("directions", s.directions);
  s.tolerance = r.get("tolerance", s.tolerance);
  s.uniformity_tolerance = r.get("uniformity_tolerance", s.uniformity_tolerance);
  r.finish();
  return s;
}

DomainSpec parse_domain(Reader r, int n) {
  DomainSpec d;
  d.center = r.has("center") ? to_vector(r.raw("center"), r.path("center")) : Point(Point::Zero(n));
  d.nu = r.has("nu") ? to_vector(r.raw("nu"), r.path("nu")) : Vector(Vector::Unit(n, n - 1));
  d.r = r.get("r", d.r);
  d.k = r.get("k", d.k);
  d.h = r.get("h", d.h);
  d.bc_width = r.optional<double>("bc_width");
  r.finish();
  return d;
}

DatumSpec parse_datum(Reader r, int m, int n) {
  DatumSpec d;
  d.kind = r.get<std::string>("kind", d.kind);
  if (d.kind != "linear" && d.kind != "step") throw ConfigError(r.path("kind") + ": expected 'linear' or 'step'");
  d.xi = r.has("xi") ? to_matrix(r.raw("xi"), r.path("xi")) : Matrix(Matrix::Zero(m, n));
  d.x0 = r.has("x0") ? to_vector(r.raw("x0"), r.path("x0")) : Point(Point::Zero(n));
  d.zeta = r.has("zeta") ? to_vector(r.raw("zeta"), r.path("zeta")) : Vector(Vector::Zero(m));
  d.nu = r.has("nu") ? to_vector(r.raw("nu"), r.path("nu")) : Vector(Vector::Unit(n, n - 1));
  r.finish();
  return d;
}

SolverChoice parse_solver_choice(const std::string& s, const std::string& path) {
  if (s == "auto") return SolverChoice::automatic;
  if (s == "exact") return SolverChoice::exact;
  if (s == "heuristic") return SolverChoice::heuristic;
  throw ConfigError(path + ": expected auto, exact or heuristic");
}

HeuristicSchedule parse_schedule(Reader& r, HeuristicSchedule s) {
  s.sweeps = r.get("sweeps", s.sweeps);
  s.restarts = r.get("restarts", s.restarts);
  s.temperature = r.get("temperature", s.temperature);
  s.line_init = r.get("line_init", s.line_init);
  return s;
}

SolverSpec parse_solver(Reader r) {
  SolverSpec s;
  s.kind = r.get<std::string>("kind", s.kind);
  if (s.kind != "exact" && s.kind != "heuristic" && s.kind != "brute_force")
    throw ConfigError(r.path("kind") + ": expected exact, heuristic or brute_force");
  s.pair = r.get<std::string>("pair", s.pair);
  s.bc = r.get<std::string>("bc", s.bc);
  if (s.bc != "full" && s.bc != "perpendicular_only") throw ConfigError(r.path("bc") + ": expected full or perpendicular_only");
  s.levels = r.optional<int>("levels");
  s.span = r.optional<double>("span");
  s.center = r.optional<double>("center");
  s.refinement = r.get("refinement", s.refinement);
  s.schedule = parse_schedule(r, s.schedule);
  r.finish();
  return s;
}

HomogenizeOptions parse_homogenize_options(Reader& r, int n) {
  HomogenizeOptions o = HomogenizeOptions::defaults_for(n);
  o.r_schedule = r.get("r_schedule", o.r_schedule);
  o.tail_window = r.get("tail_window", o.tail_window);
  o.h = r.get("h", o.h);
  o.bc_width = r.optional<double>("bc_width");
  const std::string scaling = r.get<std::string>("scaling", "domain");
  if (scaling == "domain")
    o.scaling = Scaling::domain_growth;
  else if (scaling == "epsilon")
    o.scaling = Scaling::epsilon;
  else
    throw ConfigError(r.path("scaling") + ": expected domain or epsilon");
  o.refinement = r.get("refinement", o.refinement);
  o.solver = parse_solver_choice(r.get<std::string>("solver", "auto"), r.path("solver"));
  o.spread_tolerance = r.optional<double>("spread_tolerance");
  return o;
}

HomogenizeSpec parse_homogenize(Reader r, int n) {
  HomogenizeSpec s;
  s.formulas = r.get("formulas", s.formulas);
  for (const auto& f : s.formulas)
    if (f != "f_hom" && f != "g_hom" && f != "f_hom_infinity" && f != "f_hom_infinity_recession")
      throw ConfigError(r.path("formulas") + ": unknown formula '" + f + "'");
  s.xi = r.get("xi", s.xi);
  s.zeta = r.get("zeta", s.zeta);
  s.nu = r.get("nu", s.nu);
  s.x = r.get("x", s.x);
  s.k = r.get("k", s.k);
  s.options = parse_homogenize_options(r, n);
  r.finish();
  return s;
}

EnsembleSpec parse_ensemble(Reader r, int n) {
  EnsembleSpec e;
  e.n = n;
  e.kind = ensemble_kind_from(r.get<std::string>("kind", "iid_cell"));
  if (r.has("law")) {
    const auto law = r.get<std::vector<std::vector<double>>>("law", {});
    e.law.clear();
    for (const auto& atom : law) {
      if (atom.size() != 2) throw ConfigError(r.path("law") + ": atoms are [value, probability]");
      e.law.emplace_back(atom[0], atom[1]);
    }
  }
  e.surface_scale = r.get("surface_scale", e.surface_scale);
  e.matrix_value = r.get("matrix_value", e.matrix_value);
  e.inclusion_value = r.get("inclusion_value", e.inclusion_value);
  e.intensity = r.get("intensity", e.intensity);
  e.radius = r.get("radius", e.radius);
  r.finish();
  return e;
}

StochasticSpec parse_stochastic(Reader r, int n) {
  StochasticSpec s;
  s.ensemble = parse_ensemble(r.child("ensemble"), n);
  s.process = r.get<std::string>("process", s.process);
  if (s.process != "volume" && s.process != "surface") throw ConfigError(r.path("process") + ": expected volume or surface");
  s.nu = r.has("nu") ? to_vector(r.raw("nu"), r.path("nu")) : Vector(Vector::Unit(n, n - 1));
  s.xi = r.has("xi") ? to_vector(r.raw("xi"), r.path("xi")) : s.nu;
  s.zeta = r.has("zeta") ? to_vector(r.raw("zeta"), r.path("zeta")) : scalar_vector(1.0);
  s.r_schedule = r.get("r_schedule", s.r_schedule);
  s.n_omega = r.get("n_omega", s.n_omega);
  s.tail_window = r.get("tail_window", s.tail_window);
  s.options.h_box = r.get("h_box", s.options.h_box);
  s.options.bc_cells = r.get("bc_cells", s.options.bc_cells);
  s.options.refinement = r.get("refinement", s.options.refinement);
  s.options.solver = parse_solver_choice(r.get<std::string>("solver", "auto"), r.path("solver"));
  s.options.heuristic = parse_schedule(r, s.options.heuristic);
  r.finish();
  return s;
}

GammaSpec parse_gamma(Reader r, int n) {
  GammaSpec g;
  if (r.has("interval")) {
    const auto iv = r.get<std::vector<double>>("interval", {});
    if (iv.size() != 2 || !(iv[1] > iv[0])) throw ConfigError(r.path("interval") + ": expected [a, b] with a < b");
    g.a = iv[0];
    g.b = iv[1];
  }
  g.h = r.get("h", g.h);
  g.epsilon = r.get("epsilon", g.epsilon);
  g.x0 = r.get("x0", g.x0);
  g.amplitude = r.get("amplitude", g.amplitude);
  g.refinement = r.get("refinement", g.refinement);
  g.xi_nodes = r.get("xi_nodes", g.xi_nodes);
  g.zeta_nodes = r.get("zeta_nodes", g.zeta_nodes);
  g.options = HomogenizeOptions::defaults_for(n);
  g.options.r_schedule = r.get("r_schedule", g.options.r_schedule);
  g.options.tail_window = r.get("tail_window", g.options.tail_window);
  g.options.h = r.get("cell_h", g.options.h);
  g.options.refinement = r.get("cell_refinement", g.options.refinement);
  r.finish();
  return g;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("$: ") + e.what());
  }
  Reader r(j, "$");
  ExperimentConfig c;
  c.hash = fnv1a64(j.dump());
  c.experiment = r.require<std::string>("experiment");
  static const std::set<std::string> kinds{"check", "cell-solve", "homogenize", "stochastic", "gamma"};
  if (!kinds.count(c.experiment)) throw ConfigError("$.experiment: unknown experiment '" + c.experiment + "'");
  c.seed = r.get<std::uint64_t>("seed", c.seed);
  if (r.has("dims")) {
    Reader d = r.child("dims");
    c.m = d.get("m", c.m);
    c.n = d.get("n", c.n);
    d.finish();
  }
  if (c.m < 1 || c.m > kMaxDim || c.n < 1 || c.n > kMaxDim) throw ConfigError("$.dims: m and n must lie in [1, 3]");
  if (r.has("volume")) c.volume = parse_integrand(r.child("volume"));
  if (r.has("surface")) c.surface = parse_integrand(r.child("surface"));
  if (r.has("sampling")) c.sampling = parse_sampling(r.child("sampling"), c.m, c.n);
  if (r.has("domain")) c.domain = parse_domain(r.child("domain"), c.n);
  if (r.has("datum")) c.datum = parse_datum(r.child("datum"), c.m, c.n);
  if (r.has("solver")) c.solver = parse_solver(r.child("solver"));
  if (r.has("homogenize")) c.homogenize = parse_homogenize(r.child("homogenize"), c.n);
  if (r.has("stochastic")) c.stochastic = parse_stochastic(r.child("stochastic"), c.n);
  if (r.has("gamma")) c.gamma = parse_gamma(r.child("gamma"), c.n);
  c.output = r.get<std::string>("output", c.output);
  r.finish();

  if (c.experiment == "cell-solve" && (!c.domain || !c.datum))
    throw ConfigError("$: cell-solve needs 'domain' and 'datum'");
  if (c.experiment == "stochastic" && !c.stochastic) throw ConfigError("$: stochastic needs a 'stochastic' section");
  if (c.experiment == "homogenize" && !c.homogenize) c.homogenize = HomogenizeSpec{};
  if (c.experiment == "gamma" && !c.gamma) c.gamma = GammaSpec{};
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

// ---------------------------------------------------------------- gamma

DiscreteField step_target(double a, double b, double h, double x0, double amplitude) {
  const double cells = (b - a) / h;
  if (!(h > 0.0) || std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells))
    throw ConfigError("gamma: h must divide the interval");
  std::array<int, kMaxDim> counts{static_cast<int>(std::round(cells)), 1, 1};
  GridDomain domain(scalar_vector(a), scalar_matrix(h), counts, h, 0);
  DiscreteField t(domain, 1);
  for (int c = 0; c < t.cell_count(); ++c) t.values(0, c) = domain.cell_center(c)(0) >= x0 ? amplitude : 0.0;
  return t;
}

SolveResult minimize_with_fidelity(const VolumeIntegrand& f, const SurfaceIntegrand& g, const DiscreteField& target,
                                   int refinement) {
  const GridDomain& domain = target.domain;
  if (domain.dim() != 1 || target.m() != 1) throw PreconditionError("fidelity minimisation: scalar 1D only");
  const int N = target.cell_count();
  const double h = domain.h();
  const double top = target.values.cwiseAbs().maxCoeff();
  const double s = top > 0.0 ? top / (8.0 * refinement) : h;
  const long lo = static_cast<long>(std::floor(target.values.minCoeff() / s + 1e-9)) - 2;
  const long hi = static_cast<long>(std::ceil(target.values.maxCoeff() / s - 1e-9)) + 2;
  const int L = static_cast<int>(hi - lo + 1);
  std::vector<double> grid(L);
  for (int k = 0; k < L; ++k) grid[k] = static_cast<double>(lo + k) * s;

  const auto table = face_table(domain);
  std::vector<std::vector<double>> cost(N - 1, std::vector<double>(2 * L - 1));
  std::vector<std::vector<std::uint8_t>> jump(N - 1, std::vector<std::uint8_t>(2 * L - 1));
  for (int i = 0; i + 1 < N; ++i) {
    const FaceInfo& face = table[domain.face_id(0, i)];
    for (int d = -(L - 1); d <= L - 1; ++d) {
      const FaceCost fc = face_costs(f, g, face, scalar_vector(d * s), h, 1);
      jump[i][d + L - 1] = fc.jump < fc.bulk;
      cost[i][d + L - 1] = std::min(fc.jump, fc.bulk);
    }
  }
  auto unary = [&](int c, int k) { return h * std::abs(grid[k] - target.values(0, c)); };

  std::vector<double> best(L), next(L);
  std::vector<std::vector<int>> from(N, std::vector<int>(L, 0));
  for (int k = 0; k < L; ++k) best[k] = unary(0, k);
  for (int c = 1; c < N; ++c) {
    for (int b = 0; b < L; ++b) {
      double v = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int a = 0; a < L; ++a) {
        const double t = best[a] + cost[c - 1][b - a + L - 1];
        if (t < v) {
          v = t;
          arg = a;
        }
      }
      next[b] = v + unary(c, b);
      from[c][b] = arg;
    }
    std::swap(best, next);
  }
  int k = 0;
  for (int b = 1; b < L; ++b)
    if (best[b] < best[k]) k = b;
  SolveResult result;
  result.value = best[k];
  result.argmin = DiscreteField(domain, 1);
  for (int c = N - 1; c >= 0; --c) {
    result.argmin.values(0, c) = grid[k];
    if (c > 0) {
      const int a = from[c][k];
      result.argmin.jumps[domain.face_id(0, c - 1)] = jump[c - 1][k - a + L - 1];
      k = a;
    }
  }
  result.exact = true;
  result.method = "dp+fidelity";
  return result;
}

VolumeIntegrand tabulated_volume(const HomogenizedVolume& fh, const IntegrandConstants& c) {
  return VolumeIntegrand([fh](const Point&, const Matrix& xi) { return fh(xi(0, 0)); }, c, 1, 1,
                         VolumeFlags{fh.one_homogeneous, true}, "f_hom");
}

SurfaceIntegrand tabulated_surface(const HomogenizedSurface& gh, const IntegrandConstants& c) {
  return SurfaceIntegrand([gh](const Point&, const Vector& zeta, const Vector& nu) { return gh(zeta(0), nu(0)); }, c, 1,
                          1, gh.one_homogeneous, "g_hom");
}

std::vector<MinimaConvergenceRow> gamma_minima_experiment(const VolumeIntegrand& f, const SurfaceIntegrand& g,
                                                          const DiscreteField& target,
                                                          const std::vector<double>& epsilon_list,
                                                          const HomogenizedVolume& fh, const HomogenizedSurface& gh,
                                                          int refinement, int workers) {
  const double h = target.domain.h();
  for (double eps : epsilon_list) {
    const double inv = 1.0 / eps;
    const double per = eps / h;
    if (!(eps > 0.0) || std::abs(inv - std::round(inv)) > 1e-9 * inv || std::abs(per - std::round(per)) > 1e-9 * per ||
        std::round(per) < 1.0)
      throw ConfigError("gamma: epsilon must have integer 1/epsilon and be a multiple of h");
  }
  const IntegrandConstants c = f.constants();
  const SolveResult hom = minimize_with_fidelity(tabulated_volume(fh, c), tabulated_surface(gh, c), target, refinement);
  std::vector<MinimaConvergenceRow> rows(epsilon_list.size());
  parallel_for(epsilon_list.size(), workers, [&](std::size_t i) {
    const double eps = epsilon_list[i];
    const SolveResult sol = minimize_with_fidelity(rescaled(f, eps), rescaled(g, eps), target, refinement);
    MinimaConvergenceRow& row = rows[i];
    row.epsilon = eps;
    row.inf_eps = sol.value;
    row.min_hom = hom.value;
    row.gap = hom.value > 0.0 ? std::abs(sol.value - hom.value) / hom.value : std::abs(sol.value);
    row.l1_distance = h * (sol.argmin.values - hom.argmin.values).cwiseAbs().sum();
  });
  return rows;
}

// ------------------------------------------------------------------ run

namespace {

class CsvWriter {
 public:
  CsvWriter(const ExperimentConfig& c, std::uint64_t seed) {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << c.hash;
    out_ << "# fdhom " << kVersion << "\n";
    out_ << "# experiment " << c.experiment << "\n";
    out_ << "# config_hash fnv1a64:" << hash.str() << "\n";
    out_ << "# seed " << seed << "\n";
  }

  CsvWriter& header(std::initializer_list<const char*> names) {
    bool first = true;
    for (const char* n : names) {
      out_ << (first ? "" : ",") << n;
      first = false;
    }
    out_ << "\n";
    return *this;
  }

  template <class... T>
  void row(const T&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(fields), first = false), ...);
    out_ << "\n";
  }

  std::string write(const std::string& dir, const std::string& name) const {
    std::filesystem::create_directories(dir);
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot write '" + path + "'");
    file << out_.str();
    return path;
  }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ostringstream out_;
};

std::string output_name(const ExperimentConfig& c) {
  if (!c.output.empty()) return c.output;
  std::string name = c.experiment;
  std::replace(name.begin(), name.end(), '-', '_');
  return name + ".csv";
}

PairKind parse_pair(const std::string& s) {
  if (s == "f,g0") return PairKind::F_G0;
  if (s == "finf,g") return PairKind::FINF_G;
  if (s == "finf,g0") return PairKind::FINF_G0;
  if (s == "f,g") return PairKind::F_G;
  throw ConfigError("$.solver.pair: expected f,g0 | finf,g | finf,g0 | f,g");
}

int run_check(const ExperimentConfig& c, CsvWriter& csv, std::ostream& log) {
  const VolumeIntegrand f = make_volume(c.volume, c.m, c.n);
  const SurfaceIntegrand g = make_surface(c.surface, c.m, c.n);
  const SampleSpec sample = c.sampling.value_or(SampleSpec::default_for(c.m, c.n));
  csv.header({"subject", "property", "pass", "worst_violation", "witness"});
  bool ok = true;
  for (const AdmissibilityReport& report :
       {check_volume_admissibility(f, sample), check_surface_admissibility(g, sample)}) {
    log << report.to_string() << "\n";
    for (const auto& v : report.verdicts) csv.row(report.subject, v.property, v.pass, v.worst_violation, v.witness);
    ok = ok && report.all_pass();
  }
  return ok ? 0 : 1;
}

int run_cell_solve(const ExperimentConfig& c, std::uint64_t seed, CsvWriter& csv, std::ostream& log,
                   const RunOptions& options) {
  const DerivedPair pair = DerivedPair::from(make_volume(c.volume, c.m, c.n), make_surface(c.surface, c.m, c.n));
  const DomainSpec& d = *c.domain;
  GridDomain domain = rotated_rectangle(d.center, d.r, d.k, d.nu, d.h, d.bc_width);
  const DatumSpec& w = *c.datum;
  Datum datum = w.kind == "linear" ? Datum(LinearDatum{w.xi, std::nullopt}) : Datum(StepDatum{w.x0, w.zeta, w.nu});
  const BoundaryMode bc = c.solver.bc == "full" ? BoundaryMode::full : BoundaryMode::perpendicular_only;
  const CellProblem p = make_cell_problem(parse_pair(c.solver.pair), pair, domain, datum, bc);
  Quantization q = default_quantization(p, c.solver.refinement);
  if (c.solver.levels) {
    q.levels = *c.solver.levels;
    q.span = c.solver.span.value_or(q.span);
    q.center = c.solver.center ? c.solver.center : q.center;
  }
  SolveResult result;
  if (c.solver.kind == "exact") {
    result = solve_exact_1d(p, q);
  } else if (c.solver.kind == "brute_force") {
    result = brute_force_oracle(p, q);
  } else {
    HeuristicSchedule schedule = c.solver.schedule;
    schedule.seed = seed;
    result = solve_heuristic(p, schedule, q);
  }
  log << "m^{" << c.solver.pair << "} = " << format_number(result.value) << " (" << result.method << ")\n";
  csv.header({"solver", "pair", "levels", "span", "value", "exact", "iterations", "restarts"});
  csv.row(result.method, std::string("\"") + c.solver.pair + "\"", q.levels, q.span, result.value, result.exact,
          result.iterations, result.restarts);
  std::ostringstream field;
  write_csv(field, result.argmin);
  std::filesystem::create_directories(options.out_dir);
  std::ofstream(std::filesystem::path(options.out_dir) / "cell_solve_field.csv", std::ios::binary) << field.str();
  return 0;
}

int run_homogenize(const ExperimentConfig& c, CsvWriter& csv, std::ostream& log, int workers) {
  const HomogenizeSpec& s = *c.homogenize;
  if (c.n != 1) throw ConfigError("$.dims: the homogenize runner tabulates scalar 1D formulas");
  const DerivedPair pair = DerivedPair::from(make_volume(c.volume, c.m, c.n), make_surface(c.surface, c.m, c.n));
  struct Task {
    std::string formula;
    std::string param;
    double a = 0.0;
    double nu = 1.0;
  };
  std::vector<Task> tasks;
  for (const auto& formula : s.formulas) {
    if (formula == "g_hom") {
      for (double z : s.zeta)
        for (double nu : s.nu) tasks.push_back({formula, "zeta=" + format_number(z) + ";nu=" + format_number(nu), z, nu});
    } else {
      for (double xi : s.xi) tasks.push_back({formula, "xi=" + format_number(xi), xi, 1.0});
    }
  }
  std::vector<ExtrapolationResult> results(tasks.size());
  HomogenizeOptions inner = s.options;
  inner.workers = 1;
  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    const Task& t = tasks[i];
    if (t.formula == "f_hom")
      results[i] = f_hom(pair, t.a, inner, s.x, s.k);
    else if (t.formula == "g_hom")
      results[i] = g_hom(pair, t.a, t.nu, inner, s.x);
    else if (t.formula == "f_hom_infinity")
      results[i] = f_hom_infinity(pair, t.a, RecessionRoute::cell, inner);
    else
      results[i] = f_hom_infinity(pair, t.a, RecessionRoute::recession, inner);
  });
  csv.header({"formula", "param", "r", "value", "normalized", "limit", "spread"});
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& res = results[i];
    for (std::size_t j = 0; j < res.samples.size(); ++j)
      csv.row(tasks[i].formula, tasks[i].param, res.samples[j].first, res.raw[j], res.samples[j].second, "", "");
    csv.row(tasks[i].formula, tasks[i].param, "tail", "", "", res.limit, res.spread);
    log << tasks[i].formula << "(" << tasks[i].param << ") = " << format_number(res.limit)
        << "  spread " << format_number(res.spread) << (res.flagged ? "  [spread above tolerance]" : "") << "\n";
  }
  return 0;
}

int run_stochastic(const ExperimentConfig& c, std::uint64_t seed, CsvWriter& csv, std::ostream& log, int workers) {
  const StochasticSpec& s = *c.stochastic;
  const StationaryEnsemble ensemble = make_ensemble(s.ensemble, seed);
  ErgodicEstimate est;
  if (s.process == "volume") {
    const VolumeProcess process = process_volume(ensemble, Matrix(s.xi.transpose()), s.nu, s.options);
    est = ergodic_estimate(process, ensemble, s.r_schedule, s.n_omega, s.tail_window, workers);
  } else {
    const SurfaceProcess process = process_surface(ensemble, s.zeta, s.nu, s.options);
    est = ergodic_estimate(process, ensemble, s.r_schedule, s.n_omega, s.tail_window, workers);
  }
  csv.header({"process", "r", "omega", "value", "normalized"});
  for (const auto& row : est.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) csv.row(s.process, row.r, i, row.values[i], row.normalized[i]);
    csv.row(s.process, row.r, "mean", "", row.mean);
    csv.row(s.process, row.r, "std", "", row.stddev);
    log << s.process << " r=" << format_number(row.r) << " mean " << format_number(row.mean) << " std "
        << format_number(row.stddev) << "\n";
  }
  csv.row(s.process, "tail", "limit", "", est.limit);
  log << "limit " << format_number(est.limit) << "\n";
  return 0;
}

int run_gamma(const ExperimentConfig& c, CsvWriter& csv, std::ostream& log, int workers) {
  if (c.n != 1 || c.m != 1) throw ConfigError("$.dims: the gamma experiment is scalar 1D");
  const GammaSpec& s = *c.gamma;
  const VolumeIntegrand f = make_volume(c.volume, 1, 1);
  const SurfaceIntegrand g = make_surface(c.surface, 1, 1);
  const DerivedPair pair = DerivedPair::from(f, g);
  const HomogenizedVolume fh = tabulate_f_hom(pair, s.xi_nodes, s.options, f.flags().one_homogeneous);
  const HomogenizedSurface gh = tabulate_g_hom(pair, s.zeta_nodes, s.options, g.one_homogeneous());
  const DiscreteField target = step_target(s.a, s.b, s.h, s.x0, s.amplitude);
  const auto rows = gamma_minima_experiment(f, g, target, s.epsilon, fh, gh, s.refinement, workers);
  csv.header({"epsilon", "inf_eps", "min_hom", "gap", "l1_distance"});
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : rows) {
    csv.row(row.epsilon, row.inf_eps, row.min_hom, row.gap, row.l1_distance);
    log << "eps=" << format_number(row.epsilon) << " inf=" << format_number(row.inf_eps)
        << " hom=" << format_number(row.min_hom) << " gap=" << format_number(row.gap) << "\n";
    lo = std::min(lo, row.inf_eps);
    hi = std::max(hi, row.inf_eps);
  }
  if (!rows.empty()) {
    const double tol = 1e-2 * std::max(1.0, std::abs(rows.front().min_hom));
    const bool inside = rows.front().min_hom >= lo - tol && rows.front().min_hom <= hi + tol;
    log << "homogenised minimum " << (inside ? "inside" : "outside") << " [min_eps, max_eps] +- " << format_number(tol)
        << "\n";
  }
  return 0;
}

}  // namespace

RunResult run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  const std::uint64_t seed = options.seed_override.value_or(config.seed);
  const int workers = options.workers > 0 ? options.workers : default_workers();
  CsvWriter csv(config, seed);
  RunResult result;
  if (config.experiment == "check")
    result.status = run_check(config, csv, log);
  else if (config.experiment == "cell-solve")
    result.status = run_cell_solve(config, seed, csv, log, options);
  else if (config.experiment == "homogenize")
    result.status = run_homogenize(config, csv, log, workers);
  else if (config.experiment == "stochastic")
    result.status = run_stochastic(config, seed, csv, log, workers);
  else
    result.status = run_gamma(config, csv, log, workers);
  result.artifacts.push_back(csv.write(options.out_dir, output_name(config)));
  if (config.experiment == "cell-solve")
    result.artifacts.push_back((std::filesystem::path(options.out_dir) / "cell_solve_field.csv").string());
  return result;
}

}  // namespace fdhom
