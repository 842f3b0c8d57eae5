// Prints one [PASS]/[FAIL] line per acceptance criterion; exit status is the number of failures.

#include "fdhom/experiments.hpp"
#include "fdhom/families.hpp"
#include "fdhom/parallel.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

using namespace fdhom;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failed;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failed += failed.empty() ? what : ", " + what;
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

GridDomain line(double center, double r, double h) {
  return rotated_rectangle(scalar_vector(center), r, 1, scalar_vector(1.0), h);
}

struct Family {
  std::string name;
  VolumeIntegrand f;
  SurfaceIntegrand g;
};

std::vector<Family> families() {
  return {{"homogeneous", iso_norm_volume(1.0), iso_norm_surface(1.0)},
          {"laminate", laminate_volume({1.0, 3.0}), iso_norm_surface(2.0)},
          {"smoothed", smoothed_norm_volume(1.0, 0.5), exp_norm_surface(1.0)}};
}

const std::vector<double> kArguments{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};

// ---------------------------------------------------------------------------

void oracle_equivalence(Outcome& out) {
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sides[] = {1.25, 1.5, 1.75, 2.0};
  const int level_choices[] = {5, 7, 9};
  const PairKind kinds[] = {PairKind::F_G0, PairKind::FINF_G, PairKind::FINF_G0, PairKind::F_G};
  double worst = 0.0;
  int instances = 0;
  for (int trial = 0; trial < 120; ++trial) {
    VolumeIntegrand f = iso_norm_volume(0.5 + 2.0 * unit(rng), trial % 3 == 0 ? 0.25 * unit(rng) : 0.0);
    SurfaceIntegrand g = iso_norm_surface(0.5 + 2.0 * unit(rng));
    if (trial % 4 == 1) f = laminate_volume({0.5 + 2.0 * unit(rng), 0.5 + 2.0 * unit(rng)});
    if (trial % 4 == 2) {
      f = smoothed_norm_volume(unit(rng), 0.25 + unit(rng));
      g = exp_norm_surface(0.5 + unit(rng));
    }
    const DerivedPair pair = DerivedPair::from(f, g);
    const GridDomain d = line(2.0 * unit(rng) - 1.0, sides[rng() % 4], 0.25);
    const Datum datum = trial % 2 ? Datum(LinearDatum{scalar_matrix(4.0 * unit(rng) - 2.0)})
                                  : Datum(StepDatum{scalar_vector(d.center(0) + 0.5 * unit(rng) - 0.25),
                                                    scalar_vector(4.0 * unit(rng) - 2.0), scalar_vector(1.0)});
    const CellProblem p = make_cell_problem(kinds[rng() % 4], pair, d, datum);
    const DiscreteField w = p.datum_field();
    const double lo = w.values.minCoeff(), hi = w.values.maxCoeff();
    const Quantization q{level_choices[rng() % 3], std::max(hi - lo, 0.25) * (1.0 + unit(rng)), 0.5 * (lo + hi)};
    const double dp = solve_exact_1d(p, q).value;
    const double bf = brute_force_oracle(p, q).value;
    worst = std::max(worst, std::abs(dp - bf));
    ++instances;
  }
  out.require(instances >= 100, "fewer than 100 instances");
  out.require(worst <= 1e-12, "dp and enumeration differ");
  out.detail << instances << " instances, max |dp - enumeration| = " << worst;
}

void homogeneous_exactness(Outcome& out) {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(1.0), iso_norm_surface(1.0));
  const HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  double worst_f = 0.0, worst_g = 0.0;
  for (double a : kArguments) {
    worst_f = std::max(worst_f, rel(f_hom(pair, a, o).limit, std::abs(a)));
    worst_g = std::max(worst_g, rel(g_hom(pair, a, 1.0, o).limit, std::abs(a)));
  }
  out.require(worst_f <= 0.03, "f_hom");
  out.require(worst_g <= 0.03, "g_hom");
  out.detail << "r up to " << o.r_schedule.back() << ", max rel error f_hom " << worst_f << ", g_hom " << worst_g;
}

void volume_surface_interaction(Outcome& out) {
  const HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  const DerivedPair lam = DerivedPair::from(laminate_volume({1.0, 3.0}), iso_norm_surface(2.0));
  double worst_f = 0.0, worst_g = 0.0, g_at_one = 0.0;
  for (double a : kArguments) {
    worst_f = std::max(worst_f, rel(f_hom(lam, a, o).limit, std::abs(a)));
    const double g = g_hom(lam, a, 1.0, o).limit;
    if (a == 1.0) g_at_one = g;
    worst_g = std::max(worst_g, rel(g, 2.0 * std::abs(a)));
  }
  out.require(worst_f <= 0.05, "f_hom = |xi|");
  out.require(worst_g <= 0.05, "g_hom = 2|zeta|");
  out.detail << "laminate {1,3}, g = 2|zeta|: max rel error f_hom vs |xi| " << worst_f << ", g_hom vs 2|zeta| "
             << worst_g << " (g_hom(1) = " << g_at_one << ")";

  const DerivedPair stiff = DerivedPair::from(iso_norm_volume(3.0), iso_norm_surface(2.0));
  double worst_s = 0.0;
  for (double a : kArguments) worst_s = std::max(worst_s, rel(g_hom(stiff, a, 1.0, o).limit, 2.0 * std::abs(a)));
  std::cout << "    supplementary: f = 3|xi|, g = 2|zeta| gives g_hom = 2|zeta| within " << worst_s
            << (worst_s <= 0.05 ? " [ok]" : " [off]") << "\n";
}

void class_closure(Outcome& out) {
  const HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  const std::vector<double> nodes{-2, -1, -0.5, 0, 0.5, 1, 2};
  const double tolerance = 0.03;
  for (const Family& fam : families()) {
    const DerivedPair pair = DerivedPair::from(fam.f, fam.g);
    const auto fh = tabulate_f_hom(pair, nodes, o);
    const auto gh = tabulate_g_hom(pair, nodes, o);
    // the class bounds are shared by f and g
    VolumeIntegrand f = fam.f;
    SurfaceIntegrand g = fam.g;
    harmonise_constants(f, g);
    const auto vr = check_volume_closure(fh, f.constants(), tolerance);
    const auto sr = check_surface_closure(gh, g.constants(), tolerance);
    out.require(vr.all_pass(), fam.name + " f_hom");
    out.require(sr.all_pass(), fam.name + " g_hom");
    if (!vr.all_pass()) std::cout << vr.to_string() << "\n";
    if (!sr.all_pass()) std::cout << sr.to_string() << "\n";
    out.detail << fam.name << " f_hom(1)=" << fh(1.0) << " g_hom(1)=" << gh(1.0, 1.0) << "; ";
  }
  out.detail << "slack " << tolerance;
}

void recession_routes(Outcome& out) {
  const HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  double worst = 0.0;
  for (const Family& fam : families()) {
    const DerivedPair pair = DerivedPair::from(fam.f, fam.g);
    for (double a : kArguments) {
      const double cell = f_hom_infinity(pair, a, RecessionRoute::cell, o).limit;
      const double rec = f_hom_infinity(pair, a, RecessionRoute::recession, o).limit;
      worst = std::max(worst, rel(cell, rec));
    }
  }
  out.require(worst <= 0.02, "routes disagree");
  out.detail << "3 families x " << kArguments.size() << " arguments, max relative difference " << worst;
}

void subadditive_contract(Outcome& out) {
  EnsembleSpec spec;
  spec.law = {{1.0, 0.5}, {3.0, 0.5}};
  spec.surface_scale = 2.0;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> shift_d(-40, 40);

  // 1D: covariance, group laws, subadditivity by DP, boundedness
  const auto e1 = make_ensemble(spec, 77);
  const VolumeProcess v1 = process_volume(e1, scalar_matrix(1.0), scalar_vector(1.0));
  bool covariant = true, group = true, bounded = true;
  double worst_sub_1d = -INFINITY;
  for (int i = 0; i < 50; ++i) {
    const Omega w = e1.omega(i);
    const std::vector<std::int64_t> z{shift_d(rng)}, z2{shift_d(rng)};
    const IntegerBox A{{shift_d(rng)}, {0}};
    const IntegerBox box{{A.lo[0]}, {A.lo[0] + 2 + static_cast<std::int64_t>(rng() % 6)}};
    covariant = covariant && v1.evaluate(w, box.translated(z)) == v1.evaluate(shift(w, v1.carried_shift(z)), box);
    group = group && shift(shift(w, v1.carried_shift(z)), v1.carried_shift(z2)) ==
                         shift(w, v1.carried_shift({z[0] + z2[0]})) &&
            shift(w, {0, 0, 0}) == w;
    const std::int64_t cut = box.lo[0] + 1 + static_cast<std::int64_t>(rng() % (box.hi[0] - box.lo[0] - 1));
    const double whole = v1.evaluate(w, box);
    const double parts = v1.evaluate(w, {{box.lo[0]}, {cut}}) + v1.evaluate(w, {{cut}, {box.hi[0]}});
    worst_sub_1d = std::max(worst_sub_1d, whole - parts);
    const double value = v1.evaluate(w, box);
    bounded = bounded && value >= 0.0 && value <= v1.bound(box) + 1e-12;
  }

  // 2D: rational normal, covariance of both processes, heuristic subadditivity, boundedness
  spec.n = 2;
  const auto e2 = make_ensemble(spec, 78);
  ProcessOptions po;
  po.h_box = 0.25;
  const Vector nu = make_vector({0.6, 0.8});
  const VolumeProcess v2 = process_volume(e2, Matrix(nu.transpose()), nu, po);
  const SurfaceProcess s2 = process_surface(e2, scalar_vector(1.0), nu, po);
  double worst_sub_2d = -INFINITY;
  for (int i = 0; i < 50; ++i) {
    const Omega w = e2.omega(i);
    const std::vector<std::int64_t> z{shift_d(rng), shift_d(rng)};
    const IntegerBox A = cube(2, 1).translated({shift_d(rng), shift_d(rng)});
    covariant = covariant && v2.evaluate(w, A.translated(z)) == v2.evaluate(shift(w, v2.carried_shift(z)), A);
    const IntegerBox face{{0}, {1}};
    covariant = covariant && s2.evaluate(w, face.translated({z[0]})) == s2.evaluate(shift(w, s2.carried_shift({z[0]})), face);
    const double value = v2.evaluate(w, A);
    bounded = bounded && value >= 0.0 && value <= v2.bound(A) + 1e-12;
    const double sv = s2.evaluate(w, face);
    bounded = bounded && sv >= 0.0 && sv <= s2.bound(face) + 1e-12;
  }
  ProcessOptions pa;
  pa.h_box = 0.25;
  const Vector e_2 = make_vector({0.0, 1.0});
  const VolumeProcess va = process_volume(e2, Matrix(e_2.transpose()), e_2, pa);
  for (int i = 0; i < 5; ++i) {
    const Omega w = e2.omega(100 + i);
    const IntegerBox whole{{0, 0}, {4, 2}}, left{{0, 0}, {2, 2}}, right{{2, 0}, {4, 2}};
    const double parts = va.evaluate(w, left) + va.evaluate(w, right);
    worst_sub_2d = std::max(worst_sub_2d, (va.evaluate(w, whole) - parts) / parts);
  }
  out.require(covariant, "covariance");
  out.require(group, "group laws");
  out.require(worst_sub_1d <= 1e-9, "1D subadditivity");
  out.require(worst_sub_2d <= 0.01, "2D subadditivity");
  out.require(bounded, "boundedness");
  out.detail << "bit-exact covariance " << (covariant ? "yes" : "no") << ", max 1D excess " << worst_sub_1d
             << ", max 2D relative excess " << worst_sub_2d << ", bounds on 50 1D, 50 2D volume and 50 surface samples";
}

void ergodic_limit(Outcome& out) {
  EnsembleSpec spec;
  spec.law = {{1.0, 0.5}, {3.0, 0.5}};
  spec.surface_scale = 2.0;
  const auto e = make_ensemble(spec, 4242);
  const VolumeProcess process = process_volume(e, scalar_matrix(1.0), scalar_vector(1.0));
  const auto est = ergodic_estimate(process, e, {16, 32, 64, 128}, 64, 2, default_workers());
  const ErgodicRow& first = est.rows.front();
  const ErgodicRow& last = est.rows.back();
  out.require(last.stddev <= 0.3 * first.stddev, "std ratio");
  out.require(rel(last.mean, 1.0) <= 0.05, "mean");
  out.detail << "std(16) " << first.stddev << ", std(128) " << last.stddev << ", mean(128) " << last.mean;
}

void minima_convergence(Outcome& out) {
  const VolumeIntegrand f = laminate_volume({1.0, 3.0});
  const SurfaceIntegrand g = iso_norm_surface(2.0);
  const DerivedPair pair = DerivedPair::from(f, g);
  const HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  const GammaSpec spec;
  const auto fh = tabulate_f_hom(pair, spec.xi_nodes, o, true);
  const auto gh = tabulate_g_hom(pair, spec.zeta_nodes, o, true);
  const DiscreteField target = step_target(spec.a, spec.b, spec.h, spec.x0, spec.amplitude);
  const auto rows = gamma_minima_experiment(f, g, target, spec.epsilon, fh, gh, spec.refinement, default_workers());
  for (std::size_t i = 1; i < rows.size(); ++i) out.require(rows[i].gap <= rows[i - 1].gap + 0.01, "gap increased");
  out.require(rows.back().gap <= 0.10, "final gap");
  for (const auto& row : rows) out.detail << "eps " << row.epsilon << " gap " << row.gap << "; ";
  out.detail << "min_hom " << rows.front().min_hom;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void reproducibility(Outcome& out) {
  const auto root = std::filesystem::temp_directory_path() / "fdhom_acceptance_repro";
  std::filesystem::remove_all(root);
  int compared = 0;
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(std::string(FDHOM_SOURCE_DIR) + "/configs"))
    if (entry.path().extension() == ".json") configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  for (const auto& path : configs) {
    const ExperimentConfig c = load_config(path.string());
    std::ostringstream log;
    RunOptions a;
    a.out_dir = (root / "a" / path.stem()).string();
    a.workers = 1;
    RunOptions b = a;
    b.out_dir = (root / "b" / path.stem()).string();
    b.workers = 2;
    const auto ra = run(c, a, log);
    const auto rb = run(c, b, log);
    for (std::size_t i = 0; i < ra.artifacts.size(); ++i) {
      out.require(slurp(ra.artifacts[i]) == slurp(rb.artifacts[i]), ra.artifacts[i]);
      ++compared;
    }
  }
  out.detail << compared << " artifacts from " << configs.size() << " configs compared byte for byte";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"1 oracle equivalence", oracle_equivalence},
      {"2 homogeneous exactness", homogeneous_exactness},
      {"3 volume-surface interaction", volume_surface_interaction},
      {"4 class closure", class_closure},
      {"5 recession two-route consistency", recession_routes},
      {"6 subadditive-process contract", subadditive_contract},
      {"7 ergodic constancy and limit", ergodic_limit},
      {"8 minima convergence", minima_convergence},
      {"9 reproducibility", reproducibility},
  };
  int failures = 0;
  for (const auto& [name, body] : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " exception: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !out.pass;
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << name << ": " << out.detail.str();
    if (!out.failed.empty()) std::cout << " [failed: " << out.failed << "]";
    std::cout << " (" << std::fixed
              << std::setprecision(1) << seconds << " s)" << std::defaultfloat << std::setprecision(6) << std::endl;
  }
  return failures;
}
