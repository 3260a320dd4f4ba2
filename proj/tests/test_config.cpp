#include <doctest.h>

#include <numbers>

#include "rotsol/config.hpp"

using namespace rotsol;

TEST_CASE("key value parsing") {
  const auto kv = parse_key_values("# comment\n a.b = 1 \nname = \"two words\" # trailing\n\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("a.b") == "1");
  CHECK(kv.at("name") == "two words");
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), InputError);
  CHECK_THROWS_AS(parse_key_values("just words\n"), InputError);
}

TEST_CASE("run configuration") {
  const auto cfg = parse_run_config(
      "system.name = coupled_pendulum\nenergy.M = 4.5\nrotation.k = \"1,0\"\nsolver.that = auto\nrng.seed = 42\n");
  CHECK(cfg.system.name == "coupled_pendulum");
  CHECK(cfg.M == 4.5);
  REQUIRE(cfg.k.size() == 2);
  CHECK(cfg.k[0] == 1);
  CHECK(cfg.k[1] == 0);
  CHECK(cfg.that_mode == ThatMode::automatic);
  CHECK(cfg.delta == 0.3);
  CHECK(cfg.sign_sweep);
  CHECK(cfg.seed == 42);

  const auto sweep = parse_run_config("energy.M = 3.5\nrotation.k = 1\nsolver.that = 16.5, 18\n");
  CHECK(sweep.that_mode == ThatMode::explicit_values);
  CHECK(sweep.that_values.size() == 2);

  const auto lat = parse_run_config("energy.M = 3.5\nsystem.lattice = 2pi\n", false);
  CHECK(lat.system.lattice[0] == doctest::Approx(2.0 * std::numbers::pi));
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse_run_config("energy.M = 3.5\nrotation.k = 1\nsolver.that = 0\n"), InputError);
  CHECK_THROWS_AS(parse_run_config("energy.M = 3.5\nrotation.k = 0\n"), InputError);
  CHECK_NOTHROW(parse_run_config("energy.M = 3.5\n", false));
  CHECK_THROWS_AS(parse_run_config("rotation.k = 1\n"), InputError);
  CHECK_THROWS_AS(parse_run_config("energy.M = 3.5\nrotation.k = 1\nsolver.tol_fp = -1\n"), InputError);
  CHECK_THROWS_AS(parse_run_config("energy.M = 3.5\nrotation.k = 1\nsolver.colour = red\n"), InputError);
  CHECK_THROWS_AS(parse_run_config("energy.M = x\nrotation.k = 1\n"), InputError);
  CHECK_THROWS_AS(parse_run_config("energy.M = 3.5\nrotation.k = 1\nrng.seed = -3\n"), InputError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.cfg"), InputError);
}

TEST_CASE("echo is stable and round-trips") {
  const auto cfg = parse_run_config("energy.M = 3.5\nrotation.k = 1\nsolver.delta = 0.3\n");
  std::string text;
  for (const auto& [k, v] : cfg.echo()) text += k + " = " + v + "\n";
  const auto again = parse_run_config(text);
  CHECK(again.echo() == cfg.echo());
  bool found = false;
  for (const auto& [k, v] : cfg.echo()) {
    if (k == "solver.delta") {
      CHECK(v == "0.3");
      found = true;
    }
  }
  CHECK(found);
}
