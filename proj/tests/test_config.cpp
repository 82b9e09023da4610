#include <doctest.h>

#include <string>

#include "wsnalloc/config.hpp"
#include "wsnalloc/error.hpp"

using namespace wsnalloc;

namespace {

std::string parse_error(const std::string& text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        return e.what();
    }
    FAIL("expected a parse error");
    return {};
}

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("unit conversions") {
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(dbm_to_watts(30.0) == 1.0);
    CHECK(dbm_to_watts(-90.0) == doctest::Approx(1e-12));
}

TEST_CASE("dB keys are converted at parse time") {
    const auto c = parse_config(R"({"eta0_db": -30, "sigma_c2_dbm": -90, "sigma_o2_range_dbm": [10, 10]})");
    CHECK(c.sim.eta0 == db_to_linear(-30.0));
    CHECK(c.sim.eta0 == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(c.sim.sigma_c2 == dbm_to_watts(-90.0));
    CHECK(c.sim.sigma_o2_low == doctest::Approx(0.01));
}

TEST_CASE("defaults and overrides") {
    const auto d = parse_config("{}");
    CHECK(d.sim.k_grid == std::vector<std::size_t>{50});
    CHECK(d.sim.training_m == 5000);
    CHECK(d.sim.lloyd_epsilon == 1e-4);
    CHECK(d.sim.trials == 10000);

    const auto c = parse_config(R"({"k": [20, 50, 100], "d0_grid": [0.1], "trials": 7, "seed": 9,
        "profile_seed": 5, "codebook_bits": 4, "h_power_target": null,
        "solver": {"lambda_tol": 1e-10}, "output": {"results": "r.csv"}})");
    CHECK(c.sim.k_grid == std::vector<std::size_t>{20, 50, 100});
    CHECK(c.sim.d0_grid == std::vector<double>{0.1});
    CHECK(c.sim.trials == 7);
    CHECK(c.sim.seed == 9);
    CHECK(c.sim.profile_seed == 5u);
    CHECK(c.sim.codebook_bits == 4u);
    CHECK_FALSE(c.sim.h_power_target);
    CHECK(c.sim.solver.lambda_tol == 1e-10);
    CHECK(c.outputs.results == std::string("r.csv"));
}

TEST_CASE("config errors carry locations") {
    CHECK(contains(parse_error("{\n  \"k\": 5,\n  oops\n}"), "cfg.json:3:"));
    CHECK(contains(parse_error(R"({"eta0": 1e-3, "eta0_db": -30})"), "exactly one"));
    CHECK(contains(parse_error(R"({"bogus": 1})"), "/bogus"));
    CHECK(contains(parse_error(R"({"trials": -1})"), "/trials"));
    CHECK(contains(parse_error(R"({"k": [10, "x"]})"), "/k/1"));
    CHECK(contains(parse_error(R"({"dist_range": [150, 50]})"), "/dist_range"));
    CHECK(contains(parse_error(R"({"solver": {"tol": 1}})"), "/solver: /tol"));
    CHECK(contains(parse_error(R"({"output": {"plots": "x"}})"), "/output/plots"));
    CHECK(contains(parse_error(R"({"trials": 0})"), "cfg.json"));
    CHECK(contains(parse_error(R"({"d0_grid": [0.1, -1]})"), "/d0_grid/1"));
}

TEST_CASE("realization files") {
    const auto net = parse_realization(R"({"d0": 0.5, "sensors": [{"h": 1, "sigma_o2_db": 0}],
        "channels": [{"g": 2, "sigma_c2": 1}]})", "r.json", 1.0, 9.0);
    CHECK(net.size() == 1);
    CHECK(net.d0_target == 0.5);
    CHECK(net.sensors[0].sigma_o2 == 1.0);
    CHECK(net.channels[0].g == 2.0);

    const auto dflt = parse_realization(R"({"sensors": [{"h": 1, "sigma_o2": 1}], "channels": [{"g": 1, "sigma_c2": 1}]})",
                                        "r.json", 2.0, 0.3);
    CHECK(dflt.sigma_theta2 == 2.0);
    CHECK(dflt.d0_target == 0.3);

    CHECK_THROWS_AS(parse_realization(R"({"sensors": [{"h": 1}], "channels": [{"g": 1, "sigma_c2": 1}]})", "r", 1, 1), Error);
    CHECK_THROWS_AS(parse_realization(R"({"sensors": [{"h": 1, "sigma_o2": 1}], "channels": []})", "r", 1, 1), Error);
    CHECK_THROWS_AS(parse_realization(R"({"sensors": [], "channels": []})", "r", 1, 1), Error);
    CHECK_THROWS_AS(load_realization("missing.json", 1, 1), Error);
}
