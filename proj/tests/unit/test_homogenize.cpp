#include <doctest.h>

#include "fdhom/families.hpp"
#include "fdhom/homogenize.hpp"

using namespace fdhom;

namespace {

HomogenizeOptions quick(std::vector<double> schedule = {4, 8, 16}, int tail = 2) {
  HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  o.r_schedule = std::move(schedule);
  o.tail_window = tail;
  return o;
}

DerivedPair homogeneous() { return DerivedPair::from(iso_norm_volume(1.0), iso_norm_surface(1.0)); }

}  // namespace

TEST_CASE("tail extrapolation") {
  const auto r = extrapolate({{4, 1.2}, {8, 1.1}, {16, 1.05}}, {1, 2, 3}, 2, 0.01);
  CHECK(r.limit == doctest::Approx(1.075));
  CHECK(r.spread == doctest::Approx(0.05));
  CHECK(r.flagged);
  CHECK_THROWS_AS(extrapolate({{8, 1.0}, {4, 1.0}}, {1, 1}, 1), PreconditionError);
}

TEST_CASE("homogeneous medium is its own homogenisation") {
  const DerivedPair pair = homogeneous();
  const HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  CHECK(f_hom(pair, 2.0, o).limit == doctest::Approx(2.0).epsilon(0.03));
  CHECK(f_hom(pair, -0.5, o).limit == doctest::Approx(0.5).epsilon(0.03));
  CHECK(g_hom(pair, 1.0, 1.0, o).limit == doctest::Approx(1.0).epsilon(0.03));
  CHECK(f_hom_infinity(pair, 1.0, RecessionRoute::cell, quick()).limit == doctest::Approx(1.0).epsilon(0.03));
  CHECK(f_hom_infinity(pair, 1.0, RecessionRoute::recession, quick()).limit == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("laminate volume term concentrates in the soft layer") {
  const DerivedPair pair = DerivedPair::from(laminate_volume({1.0, 3.0}), iso_norm_surface(2.0));
  const auto r = f_hom(pair, 1.0, quick());
  CHECK(r.limit == doctest::Approx(1.0).epsilon(0.05));
  const auto c = pair.f.constants();
  CHECK(r.limit >= c.c2 - 1e-9);
  CHECK(r.limit <= c.c3 + c.c4 + 1e-9);
}

TEST_CASE("jumps win when bulk is expensive") {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(3.0), iso_norm_surface(2.0));
  CHECK(g_hom(pair, 1.0, 1.0, quick()).limit == doctest::Approx(2.0).epsilon(0.05));
  CHECK(g_hom(pair, -1.0, -1.0, quick()).limit == doctest::Approx(g_hom(pair, 1.0, 1.0, quick()).limit).epsilon(1e-9));
}

TEST_CASE("epsilon reading matches growing domains") {
  const DerivedPair pair = DerivedPair::from(laminate_volume({1.0, 3.0}), iso_norm_surface(2.0));
  HomogenizeOptions a = quick({4, 8});
  HomogenizeOptions b = a;
  b.scaling = Scaling::epsilon;
  const auto ra = f_hom(pair, 0.5, a);
  const auto rb = f_hom(pair, 0.5, b);
  for (std::size_t i = 0; i < ra.samples.size(); ++i)
    CHECK(ra.samples[i].second == doctest::Approx(rb.samples[i].second).epsilon(1e-9));
}

TEST_CASE("recession of a smooth integrand") {
  const DerivedPair pair = DerivedPair::from(smoothed_norm_volume(1.0, 0.0, 1, 1, 0.5), iso_norm_surface(1.0));
  CHECK(f_hom_infinity(pair, 1.0, RecessionRoute::cell, quick()).limit == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("translation invariance of the laminate limit") {
  const DerivedPair pair = DerivedPair::from(laminate_volume({1.0, 3.0}), iso_norm_surface(2.0));
  const auto report = invariance_diagnostics(Formula::f_hom, pair, scalar_vector(1.0),
                                             {scalar_vector(0.0), scalar_vector(1.0 / 3.0)}, {scalar_vector(1.0)},
                                             {1}, quick({8, 16, 32}));
  CHECK(report.spread_x <= 0.05);
}

TEST_CASE("x, nu and k invariance in two dimensions") {
  const DerivedPair pair =
      DerivedPair::from(iso_norm_volume(1.0, 0.0, 1, 2), iso_norm_surface(1.0, 1, 2));
  HomogenizeOptions o = HomogenizeOptions::defaults_for(2);
  o.r_schedule = {2, 4};
  o.tail_window = 1;
  const auto report = invariance_diagnostics(Formula::f_hom, pair, make_vector({0.0, 1.0}),
                                             {Point::Zero(2), make_vector({1.0, 0.0}), make_vector({0.3, 0.7})},
                                             {make_vector({0.0, 1.0})}, {1, 2}, o);
  CHECK(report.spread_x <= 1e-9);
  CHECK(report.spread_k <= 0.05);
}

TEST_CASE("partial boundary conditions approach the full ones as k grows") {
  const DerivedPair pair = DerivedPair::from(iso_norm_volume(1.0, 0.0, 1, 2), iso_norm_surface(1.0, 1, 2));
  HomogenizeOptions o = HomogenizeOptions::defaults_for(2);
  o.r_schedule = {2, 4};
  o.tail_window = 1;
  const Vector nu = make_vector({0.0, 1.0});
  const double full = f_hom_infinity(pair, Matrix(nu.transpose()), RecessionRoute::cell, Point::Zero(2), nu, 1, o).limit;
  double previous = INFINITY;
  for (int k : {1, 2, 4}) {
    const double gap = std::abs(f_hom_infinity_partial(pair, scalar_vector(1.0), nu, k, Point::Zero(2), o).limit - full);
    CHECK(gap <= previous + 0.01);
    previous = gap;
  }
}

TEST_CASE("tabulations and closure") {
  const DerivedPair pair = homogeneous();
  const HomogenizeOptions o = quick({4, 8});
  const auto fh = tabulate_f_hom(pair, {-2, -1, 0, 1, 2}, o, true);
  const auto gh = tabulate_g_hom(pair, {-1, 0, 1}, o, true);
  CHECK(fh(1.5) == doctest::Approx(1.5).epsilon(0.03));
  CHECK(fh(4.0) == doctest::Approx(4.0).epsilon(0.03));
  CHECK(gh(-1.0, 1.0) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(check_volume_closure(fh, pair.f.constants(), 0.05).all_pass());
  CHECK(check_surface_closure(gh, pair.g.constants(), 0.05).all_pass());

  const auto bounded = tabulate_f_hom(pair, {-1, 0, 1}, o, false);
  CHECK_THROWS_AS(bounded(3.0), PreconditionError);

  const auto finf = tabulate_f_hom_infinity(pair, {-2, -1, 0, 1, 2}, o);
  CHECK(homogenized_energy(fh, gh, finf, affine_test_function(2.0)) == doctest::Approx(2.0).epsilon(0.03));
  CHECK(homogenized_energy(fh, gh, finf, step_test_function(0.5, 1.0)) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(homogenized_energy(fh, gh, finf, cantor_test_function(1.0, 8)) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("formula names") {
  CHECK(to_string(Formula::f_hom) == "f_hom");
  CHECK(to_string(Formula::g_hom) == "g_hom");
  CHECK(to_string(Formula::f_hom_infinity) == "f_hom_infinity");
}
