#include <doctest.h>

#include "fdhom/cell_solver.hpp"
#include "fdhom/families.hpp"

#include <random>

using namespace fdhom;

namespace {

GridDomain line(double center, double r, double h) {
  return rotated_rectangle(scalar_vector(center), r, 1, scalar_vector(1.0), h);
}

CellProblem step_problem(double a, double b) {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(a), iso_norm_surface(b));
  return make_cell_problem(PairKind::FINF_G, pair, line(0.0, 2.0, 0.25),
                           StepDatum{Point::Zero(1), scalar_vector(1.0), scalar_vector(1.0)});
}

}  // namespace

TEST_CASE("affine datum on a homogeneous medium") {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(1.0), iso_norm_surface(1.0));
  const CellProblem p = make_cell_problem(PairKind::F_G0, pair, line(0.5, 1.0, 0.125), LinearDatum{scalar_matrix(1.0)});
  const SolveResult r = solve_exact_1d(p, Quantization{33, 2.0, 0.5});
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.exact);
  CHECK(solve_exact_1d(p, default_quantization(p)).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("step datum: diffuse transition against a jump") {
  const Quantization q{9, 1.0, 0.5};
  const CellProblem cheap_bulk = step_problem(1.0, 2.0);
  CHECK(solve_exact_1d(cheap_bulk, q).value == doctest::Approx(1.0));
  CHECK(brute_force_oracle(cheap_bulk, q).value == doctest::Approx(1.0));

  const CellProblem cheap_jump = step_problem(3.0, 2.0);
  const SolveResult r = solve_exact_1d(cheap_jump, q);
  CHECK(r.value == doctest::Approx(2.0));
  CHECK(brute_force_oracle(cheap_jump, q).value == doctest::Approx(2.0));
  CHECK(std::count(r.argmin.jumps.begin(), r.argmin.jumps.end(), 1) == 1);
}

TEST_CASE("dynamic programming agrees with enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const double a = 0.5 + 3.0 * unit(rng);
    const double b = 0.5 + 3.0 * unit(rng);
    const DerivedPair pair = DerivedPair::from(laminate_volume({a, 1.0 + unit(rng)}), iso_norm_surface(b));
    const CellProblem p = trial % 2 ? make_cell_problem(PairKind::F_G, pair, line(unit(rng), 2.0, 0.25),
                                                        LinearDatum{scalar_matrix(2.0 * unit(rng) - 1.0)})
                                    : make_cell_problem(PairKind::FINF_G, pair, line(0.0, 2.0, 0.25),
                                                        StepDatum{scalar_vector(0.3 * unit(rng)),
                                                                  scalar_vector(2.0 * unit(rng) - 1.0),
                                                                  scalar_vector(1.0)});
    const double lo = p.datum_field().values.minCoeff(), hi = p.datum_field().values.maxCoeff();
    const Quantization q{9, std::max(hi - lo, 0.5) * 1.5, 0.5 * (lo + hi)};
    // only the pinned data need to lie on the grid; enlarge so they are inside the span
    const double dp = solve_exact_1d(p, q).value;
    const double bf = brute_force_oracle(p, q).value;
    CHECK(std::abs(dp - bf) <= 1e-12);
  }
}

TEST_CASE("single free cell between pinned neighbours") {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(1.0), iso_norm_surface(0.5));
  const GridDomain d = line(0.0, 1.25, 0.25);
  const CellProblem p = make_cell_problem(PairKind::F_G, pair, d, LinearDatum{scalar_matrix(2.0)});
  const CellMask pinned = p.pinned_mask();
  CHECK(std::count(pinned.begin(), pinned.end(), 0) == 1);
  const Quantization q = default_quantization(p);
  const DiscreteField w = p.datum_field();
  const auto table = face_table(d);
  double best = INFINITY;
  for (int k = 0; k < q.levels; ++k) {
    const double v = *q.center + (k - (q.levels - 1) / 2) * q.spacing();
    double total = 0.0;
    for (const FaceInfo& f : table) {
      const double lower = f.lower == 2 ? v : w.values(0, f.lower);
      const double upper = f.upper == 2 ? v : w.values(0, f.upper);
      const FaceCost c = face_costs(p.volume, p.surface, f, scalar_vector(upper - lower), d.h(), 1);
      // faces between two pinned cells keep the datum's (absent) jump
      total += pinned[f.lower] && pinned[f.upper] ? c.bulk : std::min(c.bulk, c.jump);
    }
    best = std::min(best, total);
  }
  CHECK(solve_exact_1d(p, q).value == doctest::Approx(best).epsilon(1e-12));
  CHECK(brute_force_oracle(p, q).value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("zero datum") {
  for (double offset : {0.0, 0.5}) {
    const DerivedPair pair = DerivedPair::from(iso_norm_volume(1.0, offset), iso_norm_surface(1.0));
    const GridDomain d = line(0.0, 2.0, 0.25);
    const CellProblem p = make_cell_problem(PairKind::F_G, pair, d, LinearDatum{scalar_matrix(0.0)});
    const Quantization q = default_quantization(p);
    CHECK(solve_exact_1d(p, q).value == doctest::Approx(offset * d.volume()));
    CHECK(brute_force_oracle(p, Quantization{5, 1.0, 0.0}).value == doctest::Approx(offset * d.volume()));
  }
}

TEST_CASE("oracle refuses large problems") {
  const CellProblem p = make_cell_problem(PairKind::F_G, DerivedPair::from(iso_norm_volume(1.0), iso_norm_surface(1.0)),
                                          line(0.0, 4.0, 0.25), LinearDatum{scalar_matrix(1.0)});
  CHECK_THROWS_AS(brute_force_oracle(p, Quantization{9, 4.0, 0.0}), OracleLimitError);
}

TEST_CASE("pinned data outside the quantization span") {
  const CellProblem p = step_problem(1.0, 1.0);
  CHECK_THROWS_AS(solve_exact_1d(p, Quantization{9, 0.5, 0.0}), QuantizationError);
}

TEST_CASE("heuristic against the exact solver") {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(1.0), iso_norm_surface(1.0));
  const CellProblem p = make_cell_problem(PairKind::F_G0, pair, line(0.0, 4.0, 0.25), LinearDatum{scalar_matrix(1.5)});
  const Quantization q = default_quantization(p);
  const double exact = solve_exact_1d(p, q).value;
  const SolveResult h = solve_heuristic(p, {}, q);
  CHECK(h.value >= exact - 1e-12);
  CHECK(h.value <= 1.01 * exact);
  CHECK(h.value <= energy(p.volume, p.surface, p.datum_field()) + 1e-12);

  const CellProblem lam = make_cell_problem(PairKind::FINF_G, DerivedPair::from(laminate_volume({1.0, 3.0}), iso_norm_surface(2.0)),
                                            line(0.0, 4.0, 0.25),
                                            StepDatum{Point::Zero(1), scalar_vector(1.0), scalar_vector(1.0)});
  const Quantization ql = default_quantization(lam);
  CHECK(solve_heuristic(lam, {}, ql).value >= solve_exact_1d(lam, ql).value - 1e-12);
}

TEST_CASE("2D step datum beats the flat interface by at most rounding") {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(1.0, 0.0, 1, 2), iso_norm_surface(1.0, 1, 2));
  const Vector nu = make_vector({0.0, 1.0});
  const GridDomain d = rotated_rectangle(Point::Zero(2), 4.0, 1, nu, 0.25);
  CHECK(d.cell_count() == 256);
  const CellProblem p = make_cell_problem(PairKind::FINF_G, pair, d, StepDatum{Point::Zero(2), scalar_vector(1.0), nu});
  const SolveResult r = solve_heuristic(p);
  CHECK(r.value <= 1.05 * 4.0);
  CHECK(r.value <= energy(p.volume, p.surface, p.datum_field()) + 1e-12);
  CHECK_FALSE(r.exact);
}

TEST_CASE("truncation") {
  const GridDomain d = line(0.0, 2.0, 0.25);
  DiscreteField datum(d, 1);
  CellMask pinned(d.cell_count(), 0);
  pinned[0] = pinned[7] = 1;
  DiscreteField u(d, 1);
  u.values << 0.0, 0.5, -0.5, 1.0, 10.0, 0.2, -1.9, 0.0;
  DiscreteField t = truncate(u, datum, pinned, 2.0);
  CHECK(t.values(0, 4) == 2.0);
  for (int c = 0; c < 8; ++c)
    if (c != 4) CHECK(t.values(0, c) == u.values(0, c));
  u.values(0, 4) = 1.0;
  CHECK(truncate(u, datum, pinned, 2.0).values == u.values);
  datum.values(0, 0) = 3.0;
  CHECK_THROWS_AS(truncate(u, datum, pinned, 2.0), PreconditionError);
}

TEST_CASE("truncation never raises a near-optimal energy") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.3);
  const auto f = iso_norm_volume(1.0);
  const auto g = iso_norm_surface(1.0);
  const CellProblem p = make_cell_problem(PairKind::F_G, DerivedPair::from(f, g), line(0.0, 2.0, 0.25),
                                          LinearDatum{scalar_matrix(0.5)});
  const DiscreteField datum = p.datum_field();
  const double M = 4.0 * datum.values.cwiseAbs().maxCoeff();
  const CellMask pinned = p.pinned_mask();
  for (int trial = 0; trial < 50; ++trial) {
    DiscreteField u = datum;
    for (int c = 0; c < u.cell_count(); ++c)
      if (!pinned[c]) u.values(0, c) += (trial % 5 == 0 ? 10.0 : 1.0) * noise(rng);
    const DiscreteField t = truncate(u, datum, pinned, M);
    CHECK(energy(f, g, t) <= energy(f, g, u) + 1e-3);
  }
}
