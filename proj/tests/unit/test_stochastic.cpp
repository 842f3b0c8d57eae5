#include <doctest.h>

#include "fdhom/stochastic.hpp"

#include <map>
#include <random>

using namespace fdhom;

namespace {

EnsembleSpec checkerboard_13(int n = 1) {
  EnsembleSpec s;
  s.kind = EnsembleKind::iid_cell;
  s.law = {{1.0, 0.5}, {3.0, 0.5}};
  s.surface_scale = 2.0;
  s.n = n;
  return s;
}

Point at(double x) { return scalar_vector(x); }

}  // namespace

TEST_CASE("ensemble validation and naming") {
  EnsembleSpec bad = checkerboard_13();
  bad.law = {{1.0, 0.4}, {3.0, 0.4}};
  CHECK_THROWS_AS(make_ensemble(bad, 1), ConfigError);
  bad.law = {{-1.0, 1.0}};
  CHECK_THROWS_AS(make_ensemble(bad, 1), ConfigError);
  CHECK(ensemble_kind_from(to_string(EnsembleKind::poisson_inclusion)) == EnsembleKind::poisson_inclusion);
  CHECK_THROWS_AS(ensemble_kind_from("lattice"), ConfigError);
}

TEST_CASE("constant law gives identical realisations") {
  EnsembleSpec s;
  s.law = {{2.0, 1.0}};
  const auto e = make_ensemble(s, 5);
  for (int i = 0; i < 4; ++i)
    for (double x : {0.1, 3.7, -12.2}) CHECK(e.coefficient(e.omega(i), at(x)) == 2.0);
}

TEST_CASE("seeded realisations are reproducible and follow the law") {
  const auto a = make_ensemble(checkerboard_13(), 42);
  const auto b = make_ensemble(checkerboard_13(), 42);
  for (int c = 0; c < 8; ++c) CHECK(a.coefficient(a.omega(0), at(c + 0.5)) == b.coefficient(b.omega(0), at(c + 0.5)));

  int ones = 0;
  const int total = 10000;
  for (int c = 0; c < total; ++c) ones += a.coefficient(a.omega(1), at(c + 0.5)) == 1.0;
  CHECK(std::abs(ones / static_cast<double>(total) - 0.5) <= 0.02);
}

TEST_CASE("checkerboard and poisson ensembles") {
  EnsembleSpec cb = checkerboard_13(2);
  cb.kind = EnsembleKind::checkerboard;
  const auto e = make_ensemble(cb, 3);
  const Omega w = e.omega(0);
  const double a00 = e.coefficient(w, make_vector({0.5, 0.5}));
  CHECK(e.coefficient(w, make_vector({1.5, 1.5})) == a00);
  CHECK(e.coefficient(w, make_vector({1.5, 0.5})) != a00);

  EnsembleSpec p;
  p.kind = EnsembleKind::poisson_inclusion;
  p.n = 2;
  const auto pe = make_ensemble(p, 9);
  std::map<double, int> seen;
  for (int i = 0; i < 400; ++i) seen[pe.coefficient(pe.omega(0), make_vector({0.37 * i, 0.11 * i}))]++;
  CHECK(seen.size() == 2);
}

TEST_CASE("shift group laws") {
  Omega w{7, {1, -2, 3}};
  CHECK(shift(w, {0, 0, 0}) == w);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(-50, 50);
  const auto e = make_ensemble(checkerboard_13(), 11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::array<std::int64_t, kMaxDim> z{d(rng), 0, 0}, z2{d(rng), 0, 0};
    CHECK(shift(shift(w, z), z2) == shift(w, {z[0] + z2[0], 0, 0}));
    CHECK(shift(shift(w, z), {-z[0], 0, 0}) == w);
    const double x = 0.25 + d(rng);
    CHECK(e.coefficient(w, at(x)) == e.coefficient(shift(w, z), at(x - z[0])));
  }
}

TEST_CASE("energy covariance under lattice shifts") {
  const auto e = make_ensemble(checkerboard_13(), 17);
  const VolumeProcess process = process_volume(e, scalar_matrix(1.0), scalar_vector(1.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_int_distribution<int> d(-20, 20);
  const IntegerBox A = cube(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<std::int64_t> z{d(rng)};
    const GridDomain base = process.domain(A);
    const GridDomain moved = process.domain(A.translated(z));
    DiscreteField u(base, 1), v(moved, 1);
    for (int c = 0; c < u.cell_count(); ++c) v.values(0, c) = u.values(0, c) = value(rng);
    for (std::size_t f = 0; f < u.jumps.size(); ++f) v.jumps[f] = u.jumps[f] = rng() % 2;
    const Omega w = e.omega(trial);
    const Omega shifted = shift(w, process.carried_shift(z));
    CHECK(energy(e.volume(w), e.surface(), v) == energy(e.volume(shifted), e.surface(), u));
    CHECK(process.evaluate(w, A.translated(z)) == process.evaluate(shifted, A));
  }
}

TEST_CASE("homogeneous ensemble: deterministic normalized values") {
  EnsembleSpec s;
  const auto e = make_ensemble(s, 1);
  const VolumeProcess process = process_volume(e, scalar_matrix(1.0), scalar_vector(1.0));
  const auto est = ergodic_estimate(process, e, {4, 8}, 4);
  for (const auto& row : est.rows) {
    CHECK(row.stddev == 0.0);
    CHECK(row.mean == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("volume process subadditivity and bounds in 1D") {
  const auto e = make_ensemble(checkerboard_13(), 23);
  const VolumeProcess process = process_volume(e, scalar_matrix(1.0), scalar_vector(1.0));
  for (int i = 0; i < 10; ++i) {
    const Omega w = e.omega(i);
    const IntegerBox whole{{0}, {2}}, left{{0}, {1}}, right{{1}, {2}};
    CHECK(process.evaluate(w, whole) <= process.evaluate(w, left) + process.evaluate(w, right) + 1e-9);
    const IntegerBox big{{-3}, {5}};
    CHECK(process.evaluate(w, big) <= process.bound(big) + 1e-12);
  }
}

TEST_CASE("surface process") {
  const auto e1 = make_ensemble(checkerboard_13(), 1);
  CHECK_THROWS_AS(process_surface(e1, scalar_vector(1.0), scalar_vector(1.0)), PreconditionError);

  EnsembleSpec s;
  s.n = 2;
  const auto e = make_ensemble(s, 1);
  ProcessOptions o;
  o.h_box = 0.5;
  const SurfaceProcess process = process_surface(e, scalar_vector(1.0), make_vector({0.0, 1.0}), o);
  const IntegerBox A{{0}, {4}};
  const double value = process.evaluate(e.omega(0), A);
  CHECK(value == doctest::Approx(4.0).epsilon(0.03));
  CHECK(value <= process.bound(A) + 1e-12);
}

TEST_CASE("ergodic estimate on the random laminate") {
  const auto e = make_ensemble(checkerboard_13(), 2024);
  const VolumeProcess process = process_volume(e, scalar_matrix(1.0), scalar_vector(1.0));
  const auto est = ergodic_estimate(process, e, {4, 8, 16, 32}, 16);
  REQUIRE(est.rows.size() == 4);
  for (std::size_t i = 1; i < est.rows.size(); ++i)
    CHECK(est.rows[i].mean <= est.rows[i - 1].mean + est.rows[i - 1].stddev);
  CHECK(est.rows.back().stddev < est.rows.front().stddev);
  CHECK(est.limit == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("mix64 is a fixed bijection-like scrambler") {
  CHECK(mix64(0) != mix64(1));
  CHECK(mix64(12345) == mix64(12345));
}
