#include <doctest.h>

#include "fdhom/experiments.hpp"
#include "fdhom/families.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fdhom;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_path(const std::string& name) { return std::string(FDHOM_SOURCE_DIR) + "/configs/" + name; }

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("fdhom_unit_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config schema errors name the offending path") {
  CHECK(error_of(R"({"experiment": "check", "volume": {"family": "iso_norm", "scael": 1}})").find("$.volume.scael") !=
        std::string::npos);
  CHECK(error_of(R"({"experiment": "check", "seed": "x"})").find("$.seed") != std::string::npos);
  CHECK(error_of(R"({"experiment": "explode"})").find("$.experiment") != std::string::npos);
  CHECK(error_of(R"({"seed": 1})").find("$.experiment") != std::string::npos);
  CHECK(error_of("{not json").find("$") != std::string::npos);
  CHECK(error_of(R"({"experiment": "homogenize", "homogenize": {"formulas": ["h_hom"]}})").find("$.homogenize.formulas") !=
        std::string::npos);
}

TEST_CASE("config hash ignores formatting") {
  const auto a = parse_config(R"({"experiment": "check", "seed": 3})");
  const auto b = parse_config("{\n  \"seed\" : 3,\n  \"experiment\" : \"check\"\n}");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != parse_config(R"({"experiment": "check", "seed": 4})").hash);
}

TEST_CASE("family factory") {
  IntegrandSpec s;
  s.family = "laminate";
  s.values = {1.0, 3.0};
  CHECK(make_volume(s, 1, 1)(scalar_vector(1.5), scalar_matrix(1.0)) == 3.0);
  s.family = "exp_norm";
  CHECK_THROWS_AS(make_volume(s, 1, 1), ConfigError);
  CHECK(make_surface(s, 1, 1)(scalar_vector(0.0), scalar_vector(1.0), scalar_vector(1.0)) ==
        doctest::Approx(2.0 - std::exp(-1.0)));
}

TEST_CASE("numbers round-trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("step target") {
  const DiscreteField t = step_target(-2.0, 2.0, 0.25, 0.5, 1.0);
  CHECK(t.cell_count() == 16);
  CHECK(t.values(0, 9) == 0.0);
  CHECK(t.values(0, 10) == 1.0);
  CHECK_THROWS_AS(step_target(0.0, 1.0, 0.3, 0.5, 1.0), ConfigError);
}

TEST_CASE("fidelity minimisation keeps a cheap step") {
  const DiscreteField t = step_target(-2.0, 2.0, 0.125, 0.0, 1.0);
  const SolveResult keep = minimize_with_fidelity(iso_norm_volume(1.0), iso_norm_surface(1.0), t, 1);
  CHECK(keep.value == doctest::Approx(1.0));
  CHECK((keep.argmin.values - t.values).cwiseAbs().maxCoeff() < 1e-12);
  // a jump costing more than the L1 mass on the short side is flattened
  const SolveResult flat = minimize_with_fidelity(iso_norm_volume(10.0), iso_norm_surface(10.0), t, 1);
  CHECK(flat.value == doctest::Approx(2.0));
}

TEST_CASE("homogeneous integrands close no gap") {
  const auto f = iso_norm_volume(1.0);
  const auto g = iso_norm_surface(1.0);
  HomogenizeOptions o = HomogenizeOptions::defaults_for(1);
  o.r_schedule = {4, 8};
  const DerivedPair pair = DerivedPair::from(f, g);
  const auto fh = tabulate_f_hom(pair, {-4, -1, 0, 1, 4}, o, true);
  const auto gh = tabulate_g_hom(pair, {-2, -1, 0, 1, 2}, o, true);
  const DiscreteField target = step_target(-1.0, 1.0, 1.0 / 32.0, 0.15625, 1.0);
  const auto rows = gamma_minima_experiment(f, g, target, {0.25, 0.125, 0.0625}, fh, gh);
  for (const auto& row : rows) {
    CHECK(row.gap <= 1e-9);
    CHECK(row.l1_distance <= 1e-9);
    CHECK(row.inf_eps >= 0.0);
  }
  CHECK_THROWS_AS(gamma_minima_experiment(f, g, target, {0.3}, fh, gh), ConfigError);
}

TEST_CASE("check subcommand on the homogeneous config") {
  const ExperimentConfig c = load_config(config_path("check_homogeneous.json"));
  RunOptions o;
  o.out_dir = temp_dir("check");
  std::ostringstream log;
  const RunResult r = run(c, o, log);
  CHECK(r.status == 0);
  CHECK(log.str().find("FAIL") == std::string::npos);
  CHECK(log.str().find("f4: PASS") != std::string::npos);
  CHECK(log.str().find("g6: PASS") != std::string::npos);
}

TEST_CASE("homogenize subcommand summary rows") {
  ExperimentConfig c = load_config(config_path("homogenize_homogeneous.json"));
  c.homogenize->options.r_schedule = {4, 8, 16};
  c.homogenize->options.tail_window = 2;
  RunOptions o;
  o.out_dir = temp_dir("homogenize");
  o.workers = 1;
  std::ostringstream log;
  const RunResult r = run(c, o, log);
  REQUIRE(r.artifacts.size() == 1);
  std::istringstream csv(read_file(r.artifacts.front()));
  std::string line;
  int summaries = 0;
  while (std::getline(csv, line)) {
    if (line.rfind("#", 0) == 0 || line.find(",tail,") == std::string::npos) continue;
    ++summaries;
    std::vector<std::string> cells;
    std::stringstream s(line);
    for (std::string cell; std::getline(s, cell, ',');) cells.push_back(cell);
    const std::string param = cells[1];
    const double arg = std::stod(param.substr(param.find('=') + 1));
    CHECK(std::stod(cells[5]) == doctest::Approx(std::abs(arg)).epsilon(0.03));
  }
  CHECK(summaries == 6 + 12 + 6 + 6);
}

TEST_CASE("stochastic subcommand is byte-reproducible") {
  const ExperimentConfig c = load_config(config_path("stochastic_checkerboard.json"));
  std::ostringstream log;
  RunOptions a;
  a.out_dir = temp_dir("stoch_a");
  a.workers = 1;
  RunOptions b = a;
  b.out_dir = temp_dir("stoch_b");
  b.workers = 3;
  const auto ra = run(c, a, log);
  const auto rb = run(c, b, log);
  CHECK(read_file(ra.artifacts.front()) == read_file(rb.artifacts.front()));
  RunOptions other = a;
  other.out_dir = temp_dir("stoch_c");
  other.seed_override = 99;
  CHECK(read_file(run(c, other, log).artifacts.front()) != read_file(ra.artifacts.front()));
  const std::string text = read_file(ra.artifacts.front());
  CHECK(text.find("# config_hash fnv1a64:") != std::string::npos);
  CHECK(text.find("process,r,omega,value") != std::string::npos);
}
