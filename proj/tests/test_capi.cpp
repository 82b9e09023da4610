#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wsnalloc/wsnalloc.h"

namespace {

const std::string fixtures = WSNALLOC_FIXTURES;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("allocate from arrays") {
    const double h[] = {1.0, 1.0}, so[] = {1.0, 1.0}, g[] = {1.0, 1.0}, sc[] = {1.0, 1.0};
    wsnalloc_allocation* a = nullptr;
    REQUIRE(wsnalloc_allocate(2, h, so, g, sc, 1.0, 1.0, &a, nullptr) == WSNALLOC_OK);
    CHECK(wsnalloc_allocation_k(a) == 2);
    CHECK(wsnalloc_allocation_k1(a) == 2);
    CHECK(wsnalloc_allocation_variance(a) == doctest::Approx(1.0));
    double b[2];
    REQUIRE(wsnalloc_allocation_b(a, b, 2) == WSNALLOC_OK);
    CHECK(b[0] == doctest::Approx(0.5));
    CHECK(b[1] == doctest::Approx(0.5));
    CHECK(wsnalloc_allocation_power(a, b, 3) == WSNALLOC_ERR_DIMENSION);
    wsnalloc_allocation_free(a);
}

TEST_CASE("infeasible allocation reports the minimum variance") {
    const double h[] = {1.0}, so[] = {1.0}, g[] = {1.0}, sc[] = {1.0};
    wsnalloc_allocation* a = nullptr;
    double minv = 0.0;
    CHECK(wsnalloc_allocate(1, h, so, g, sc, 1.0, 0.5, &a, &minv) == WSNALLOC_ERR_INFEASIBLE);
    CHECK(a == nullptr);
    CHECK(minv == doctest::Approx(1.0));
    CHECK(std::string(wsnalloc_last_error()).find("sigma_theta2/sum(beta)") != std::string::npos);
}

TEST_CASE("null and bad arguments") {
    CHECK(wsnalloc_allocate(1, nullptr, nullptr, nullptr, nullptr, 1.0, 1.0, nullptr, nullptr) ==
          WSNALLOC_ERR_INVALID_ARGUMENT);
    wsnalloc_config* cfg = nullptr;
    CHECK(wsnalloc_config_parse("{\"trials\": 0}", &cfg) == WSNALLOC_ERR_PARSE);
    CHECK(cfg == nullptr);
    CHECK(wsnalloc_config_load("nope.json", &cfg) == WSNALLOC_ERR_IO);
    wsnalloc_codebook* book = nullptr;
    CHECK(wsnalloc_codebook_load("nope.json", &book) == WSNALLOC_ERR_IO);
    wsnalloc_config_free(nullptr);
    wsnalloc_codebook_free(nullptr);
    wsnalloc_allocation_free(nullptr);
    CHECK(std::string(wsnalloc_status_name(WSNALLOC_ERR_INFEASIBLE)) == "infeasible");
}

TEST_CASE("config accessors") {
    wsnalloc_config* cfg = nullptr;
    REQUIRE(wsnalloc_config_parse(R"({"k": [7, 9], "d0_grid": [0.2], "codebook_bits": 3,
        "output": {"results": "x.csv"}})", &cfg) == WSNALLOC_OK);
    CHECK(wsnalloc_config_k(cfg) == 7);
    CHECK(wsnalloc_config_default_d0(cfg) == 0.2);
    CHECK(wsnalloc_config_codebook_bits(cfg) == 3);
    CHECK(std::string(wsnalloc_config_output(cfg, "results")) == "x.csv");
    CHECK(wsnalloc_config_output(cfg, "summary") == nullptr);
    CHECK(wsnalloc_config_set_trials(cfg, 0) == WSNALLOC_ERR_INVALID_ARGUMENT);
    wsnalloc_config_free(cfg);
}

TEST_CASE("allocate from a file") {
    wsnalloc_config* cfg = nullptr;
    REQUIRE(wsnalloc_config_parse("{}", &cfg) == WSNALLOC_OK);
    wsnalloc_allocation* a = nullptr;
    REQUIRE(wsnalloc_allocate_file(cfg, (fixtures + "/single_sensor.json").c_str(), 0.0, &a, nullptr) ==
            WSNALLOC_OK);
    double b = 0.0;
    REQUIRE(wsnalloc_allocation_b(a, &b, 1) == WSNALLOC_OK);
    CHECK(b == doctest::Approx(0.5));
    CHECK(wsnalloc_allocation_write_json(a, "capi_alloc.json") == WSNALLOC_OK);
    CHECK(slurp("capi_alloc.json").find("\"lambda0\"") != std::string::npos);
    std::remove("capi_alloc.json");
    wsnalloc_allocation_free(a);
    wsnalloc_config_free(cfg);
}

TEST_CASE("train, save, load, simulate and compare") {
    wsnalloc_config* cfg = nullptr;
    REQUIRE(wsnalloc_config_load((fixtures + "/tiny.json").c_str(), &cfg) == WSNALLOC_OK);
    wsnalloc_codebook* book = nullptr;
    REQUIRE(wsnalloc_train_codebook(cfg, 2, 0.0, 1, &book) == WSNALLOC_OK);
    CHECK(wsnalloc_codebook_bits(book) == 2);
    CHECK(wsnalloc_codebook_k(book) == 8);
    CHECK(wsnalloc_codebook_d0(book) == 0.05);
    std::vector<double> row(8);
    CHECK(wsnalloc_codebook_entry(book, 3, row.data(), row.size()) == WSNALLOC_OK);
    CHECK(wsnalloc_codebook_entry(book, 4, row.data(), row.size()) == WSNALLOC_ERR_INVALID_ARGUMENT);
    size_t idx = 99;
    CHECK(wsnalloc_codebook_select(book, 0.0, &idx) == WSNALLOC_OK);
    CHECK(idx < 4);

    REQUIRE(wsnalloc_codebook_save(book, "capi_book.json") == WSNALLOC_OK);
    wsnalloc_codebook* again = nullptr;
    REQUIRE(wsnalloc_codebook_load("capi_book.json", &again) == WSNALLOC_OK);
    REQUIRE(wsnalloc_codebook_save(again, "capi_book2.json") == WSNALLOC_OK);
    CHECK(slurp("capi_book.json") == slurp("capi_book2.json"));

    REQUIRE(wsnalloc_simulate(cfg, again, 1, "capi_sim.csv", "capi_sim.json") == WSNALLOC_OK);
    const std::string csv = slurp("capi_sim.csv");
    CHECK(csv.rfind("trial,d0,k,l,cost_full,cost_equal,cost_quantized,variance_quantized,k1,feasible\n", 0) == 0);

    const wsnalloc_codebook* list[] = {book, again};
    REQUIRE(wsnalloc_eval_feedback(cfg, list, 2, 1, "capi_table.csv", nullptr, nullptr) == WSNALLOC_OK);
    CHECK(slurp("capi_table.csv").rfind("k,d0,full,l2,l2\n", 0) == 0);

    wsnalloc_config* other = nullptr;
    REQUIRE(wsnalloc_config_parse(R"({"k": 5, "trials": 2, "profile_seed": 3})", &other) == WSNALLOC_OK);
    CHECK(wsnalloc_simulate(other, book, 1, "capi_bad.csv", nullptr) == WSNALLOC_ERR_DIMENSION);

    for (const char* f : {"capi_book.json", "capi_book2.json", "capi_sim.csv", "capi_sim.json", "capi_table.csv"}) {
        std::remove(f);
    }
    wsnalloc_config_free(other);
    wsnalloc_codebook_free(again);
    wsnalloc_codebook_free(book);
    wsnalloc_config_free(cfg);
}
