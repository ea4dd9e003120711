#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "tstg/config.hpp"
#include "tstg/error.hpp"

using namespace tstg;

namespace {

// Runs the loader and returns the ConfigError it raised.
ConfigError config_error(const std::string &text) {
  try {
    load_config_string(text);
  } catch (const ConfigError &e) {
    return e;
  }
  FAIL("no ConfigError for: " << text);
  return ConfigError("", 0, "");
}

} // namespace

TEST_CASE("numeric expressions") {
  CHECK(eval_expression("8*pi") == doctest::Approx(8 * std::numbers::pi).epsilon(1e-15));
  CHECK(eval_expression("-sqrt(2*1.3544)") == doctest::Approx(-std::sqrt(2 * 1.3544)));
  CHECK(eval_expression("(1+2)*3 - 4/2") == 7.0);
  CHECK(eval_expression("1e-3") == 1e-3);
  CHECK(eval_expression(" -(-2.5) ") == 2.5);
  CHECK(eval_expression("2*-3") == -6.0);
  CHECK_THROWS_AS(eval_expression("2*"), std::invalid_argument);
  CHECK_THROWS_AS(eval_expression("foo"), std::invalid_argument);
  CHECK_THROWS_AS(eval_expression("(1+2"), std::invalid_argument);
  CHECK_THROWS_AS(eval_expression("sqrt 2"), std::invalid_argument);
  CHECK_THROWS_AS(eval_expression("1 2"), std::invalid_argument);
}

TEST_CASE("defaults and a full config") {
  const auto def = load_config_string("{}");
  CHECK(def.experiment == "propagate");
  CHECK(def.epsilon == 1.0);
  CHECK(def.frame.counts == std::vector<int>{64, 32});

  const auto c = load_config_string(R"J({
    "experiment": "propagate",
    "epsilon": 1,
    "seed": 18446744073709551615,
    "frame": {"box": {"q": [-8, 8], "p": ["-8*pi", "8*pi"]}, "counts": [64, 64], "width": [0, 4]},
    "potential": {"name": "double_well", "eta": 1.3544},
    "propagator": {"method": "nonvariational", "tau": 0.01, "h": "1e-3", "n_slices": 2000},
    "initial": {"q": ["-sqrt(2*1.3544)"], "p": [0], "width": [0, 1]},
    "observables": {"every": 100, "grid_points": 256},
    "reference": {"kind": "split_step", "dt": 0.01}
  })J");
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.frame.p_box[0][1] == doctest::Approx(8 * std::numbers::pi));
  CHECK(c.initial.q[0] == doctest::Approx(-std::sqrt(2 * 1.3544)));
  CHECK(c.make_propagator().integrator == Integrator::stoermer_verlet);
  CHECK(c.make_propagator().steps() == 10);
  const auto f = c.make_frame();
  CHECK(f.size() == 4096);
  CHECK(f.spacing(0) == doctest::Approx(0.25));
  CHECK(c.make_grid().size() == 256);
  CHECK(c.make_grid().is_periodic());
  CHECK(c.make_potential().name() == "double_well");
  CHECK(c.make_initial().q()(0) == doctest::Approx(-std::sqrt(2 * 1.3544)));

  const auto poly = load_config_string(
      R"J({"potential": {"name": "polynomial", "terms": [{"coeff": 0.5, "powers": [2]}, {"coeff": "1/3", "powers": [3]}]},
          "reference": {"kind": "none"}})J");
  const auto v = poly.make_potential();
  CHECK(v.value(RVec::Constant(1, 2.0)) == doctest::Approx(2.0 + 8.0 / 3.0));
}

TEST_CASE("effective config round trip") {
  const auto c = load_config_string(R"J({
    "experiment": "convergence",
    "epsilon": 0.1,
    "frame": {"box": {"q": [-6, 6], "p": [-4, 4]}, "counts": [32, 16], "width": [0.5, 2], "drop_tolerance": 1e-12},
    "potential": {"name": "polynomial", "terms": [{"coeff": 0.25, "powers": [4]}]},
    "propagator": {"tau": 0.05, "h": 0.01},
    "initial": {"q": [0.3], "p": [-0.2], "width": [0.1, 1.5], "action": 0.7},
    "convergence": {"sweep": "epsilon", "values": [0.1, 0.01], "t": 1},
    "seed": 42
  })J");
  const auto text = to_json(c);
  const auto back = load_config_string(text);
  CHECK(to_json(back) == text);
  CHECK(back.frame.width == c.frame.width);
  CHECK(back.initial.action == c.initial.action);
  CHECK(back.potential.terms.size() == 1);
  CHECK(back.convergence.values == c.convergence.values);
  CHECK(back.seed == 42);
  CHECK(back.propagator.integrator == "variational_splitting");
}

TEST_CASE("unknown keys and bad values carry path and line") {
  auto e = config_error("{\n  \"epsilon\": 1,\n  \"frame\": {\n    \"cuonts\": [64, 32]\n  }\n}");
  CHECK(e.path() == "frame.cuonts");
  CHECK(e.line() == 4);
  CHECK(std::string(e.what()).find("unknown key") != std::string::npos);

  e = config_error("{\n\"epsilon\": -1\n}");
  CHECK(e.path() == "epsilon");
  CHECK(e.line() == 2);

  e = config_error("{\"propagator\": {\"tau\": \"0.1*\"}}");
  CHECK(e.path() == "propagator.tau");

  e = config_error("{\n\"epsilon\": 1,\n\"frame\": [oops\n}");
  CHECK(e.path().empty());
  CHECK(e.line() == 3);

  CHECK(config_error(R"J({"frame": {"width": [1, 0]}})J").path() == "frame.width");
  CHECK(config_error(R"J({"frame": {"counts": [64]}})J").path() == "frame.counts");
  CHECK(config_error(R"J({"frame": {"counts": [64, 0]}})J").path() == "frame.counts");
  CHECK(config_error(R"J({"frame": {"counts": [64, 32.5]}})J").path() == "frame.counts[1]");
  CHECK(config_error(R"J({"experiment": "plot"})J").path() == "experiment");
  CHECK(config_error(R"J({"potential": {"name": "morse"}})J").path() == "potential.name");
  CHECK(config_error(R"J({"propagator": {"method": "exact"}})J").path() == "propagator.method");
  CHECK(config_error(R"J({"seed": -3})J").path() == "seed");
  CHECK(config_error(R"J({"epsilon": "1/0"})J").path() == "epsilon");
  CHECK(config_error(R"J({"initial": {"q": [1, 2], "p": [0]}})J").path() == "initial.p");
}

TEST_CASE("cross-field checks") {
  CHECK(config_error(R"J({"propagator": {"tau": 0.01, "h": 0.1}})J").path() == "propagator.h");
  CHECK(config_error(R"J({"propagator": {"tau": 0.1, "h": 0.03}})J").path() == "propagator.h");
  CHECK(config_error(R"J({"propagator": {"method": "variational", "integrator": "stoermer_verlet"}})J")
            .path() == "propagator.integrator");
  CHECK(config_error(R"J({"potential": {"name": "double_well"}, "propagator": {"tau": 0.015, "h": 0.005}})J")
            .path() == "reference.dt");
  CHECK(config_error(R"J({"potential": {"name": "double_well"}, "observables": {"grid_points": 200}})J")
            .path() == "observables.grid_points");
  CHECK(config_error(R"J({"potential": {"name": "double_well"}, "reference": {"kind": "analytic"}})J")
            .path() == "reference.kind");
  CHECK(config_error(R"J({"initial": {"q": [0, 0], "p": [0, 0]}})J").path() == "frame.box.q");
  // no split-step reference: any grid size is fine
  CHECK_NOTHROW(load_config_string(
      R"J({"potential": {"name": "double_well"}, "observables": {"grid_points": 200}, "reference": {"kind": "none"}})J"));

  auto c = load_config_string("{}");
  c.propagator.h = 1.0;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
}

TEST_CASE("config files") {
  const auto path = std::filesystem::temp_directory_path() / "tstg_test_config.json";
  {
    std::ofstream out(path);
    out << R"J({"epsilon": 0.5})J";
  }
  CHECK(load_config_file(path.string()).epsilon == 0.5);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config_file(path.string()), ConfigError);

  // every shipped config loads
  for (const auto &entry : std::filesystem::directory_iterator(TSTG_CONFIG_DIR)) {
    if (entry.path().extension() != ".json")
      continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config_file(entry.path().string()));
  }
}
