#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "wsnalloc/allocator.hpp"
#include "wsnalloc/codebook.hpp"
#include "wsnalloc/error.hpp"

using namespace wsnalloc;

namespace {

// Training set whose vectors are (J) in one dimension; with beta = 0 the
// cached cost is all that matters to the scalar-J code paths.
TrainingSet scalar_set(std::vector<double> costs) {
    TrainingSet ts;
    for (double c : costs) {
        ts.vectors.push_back({c});
        ts.costs.push_back(c);
    }
    return ts;
}

Codebook scalar_book(std::vector<double> costs) {
    Codebook b;
    b.bits = 0;
    while ((std::size_t{1} << b.bits) < costs.size()) ++b.bits;
    b.k = 1;
    for (double c : costs) {
        b.entries.push_back({c});
        b.cost_cache.push_back(c);
    }
    return b;
}

TrainingSet random_set(std::mt19937_64& rng, std::size_t m, std::size_t k) {
    std::lognormal_distribution<double> ln(0.0, 1.0);
    TrainingSet ts;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> v(k);
        for (auto& x : v) x = ln(rng);
        ts.vectors.push_back(v);
        ts.costs.push_back(cost_j(v));
    }
    return ts;
}

}  // namespace

TEST_CASE("word distortion") {
    CHECK(word_distortion(4.0, 4.0) == 0.0);
    CHECK(word_distortion(5.0, 3.0) == 2.0);
    CHECK(word_distortion(3.0, 5.0) == 2.0);

    SensorView v{1.0, 1.0, 1.0, false};
    std::vector<SensorView> views{v, v};
    const std::vector<double> a{1.0, 0.0}, b{0.0, 0.0};
    CHECK(word_distortion(a, a, views) == 0.0);
    CHECK(word_distortion(a, b, views) == doctest::Approx(2.0));
    CHECK(word_distortion(b, a, views) == word_distortion(a, b, views));
}

TEST_CASE("assign cells") {
    const auto book = scalar_book({1.0, 10.0});
    CHECK(assign_cells(book, scalar_set({2.0}))[0] == 0);
    CHECK(assign_cells(book, scalar_set({5.5}))[0] == 0);
    CHECK(assign_cells(book, scalar_set({5.5000001}))[0] == 1);
}

TEST_CASE("centroid is the medoid") {
    const auto ts = scalar_set({1.0, 2.0, 10.0});
    const std::vector<std::size_t> all{0, 1, 2};
    CHECK(centroid(all, ts) == 1);
    const std::vector<std::size_t> one{2};
    CHECK(centroid(one, ts) == 2);
    const std::vector<std::size_t> pair{2, 0};
    CHECK(centroid(pair, ts) == 0);  // tie, lowest index

    // medoid against exhaustive search
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> c(1 + rep % 9);
        for (auto& x : c) x = u(rng);
        const auto set = scalar_set(c);
        std::vector<std::size_t> members(c.size());
        std::iota(members.begin(), members.end(), 0);
        std::size_t best = 0;
        double best_sum = INFINITY;
        for (std::size_t i = 0; i < c.size(); ++i) {
            double s = 0;
            for (double y : c) s += std::fabs(c[i] - y);
            if (s < best_sum - 1e-12) {
                best_sum = s;
                best = i;
            }
        }
        CHECK(centroid(members, set) == best);
    }
}

TEST_CASE("book distortion") {
    const auto ts = scalar_set({1.0, 3.0});
    CHECK(book_distortion(scalar_book({1.0, 3.0}), ts) == 0.0);
    auto one = scalar_book({1.0});
    CHECK(book_distortion(one, ts) == 1.0);
}

TEST_CASE("training saturates when every vector gets a codeword") {
    std::mt19937_64 rng(32);
    const auto ts = random_set(rng, 8, 3);
    const auto book = train(ts, 3, 1e-4, 5);
    CHECK(book.meta.final_distortion == 0.0);
    CHECK(book.size() == 8);
}

TEST_CASE("one bit on {1, 1, 9, 9}") {
    const auto ts = scalar_set({1.0, 1.0, 9.0, 9.0});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto book = train(ts, 1, 1e-4, seed);
        auto c = book.cost_cache;
        std::sort(c.begin(), c.end());
        CHECK(c[0] == 1.0);
        CHECK(c[1] == 9.0);
        CHECK(book.meta.final_distortion == 0.0);
    }
}

TEST_CASE("Lloyd distortion never increases and final cells are consistent") {
    std::mt19937_64 rng(33);
    const auto ts = random_set(rng, 1000, 5);
    for (unsigned bits : {1u, 2u, 4u, 6u}) {
        const auto book = train(ts, bits, 1e-4, 77);
        const auto& h = book.meta.distortion_history;
        REQUIRE(h.size() == book.meta.iterations + 1);
        for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] + 1e-12);
        CHECK(book.meta.final_distortion == h.back());
        CHECK(book.meta.final_distortion == book_distortion(book, ts));

        const auto cells = final_partition(book, ts);
        for (std::size_t i = 0; i < ts.size(); ++i) CHECK(select_index(book, ts.costs[i]) == cells[i]);

        // cache consistency
        for (std::size_t l = 0; l < book.size(); ++l) CHECK(book.cost_cache[l] == cost_j(book.entries[l]));
    }
}

TEST_CASE("more bits give lower distortion on a shared set") {
    std::mt19937_64 rng(34);
    const auto ts = random_set(rng, 1000, 4);
    const double d2 = train(ts, 2, 1e-4, 9).meta.final_distortion;
    const double d4 = train(ts, 4, 1e-4, 9).meta.final_distortion;
    const double d6 = train(ts, 6, 1e-4, 9).meta.final_distortion;
    CHECK(d6 < d4);
    CHECK(d4 < d2);
}

TEST_CASE("training is deterministic and thread independent") {
    std::mt19937_64 rng(35);
    const auto ts = random_set(rng, 600, 3);
    const auto a = codebook_to_json(train(ts, 4, 1e-4, 3, {10000, 1}));
    const auto b = codebook_to_json(train(ts, 4, 1e-4, 3, {10000, 4}));
    CHECK(a == b);
}

TEST_CASE("training argument checks") {
    const auto ts = scalar_set({1.0, 2.0, 3.0});
    CHECK_THROWS_AS(train(ts, 2, 1e-4, 0), Error);
    CHECK_THROWS_AS(train(ts, 0, 1e-4, 0), Error);
    CHECK_THROWS_AS(train(ts, 1, 0.0, 0), Error);
}

TEST_CASE("select index") {
    const auto book = scalar_book({2.0, 8.0});
    CHECK(select_index(book, 7.0) == 1);
    CHECK(select_index(book, 2.0) == 0);
    SensorView v{1.0, 1.0, 1.0, false};
    std::vector<SensorView> views{v};
    CHECK_THROWS_AS(select_index(book, std::vector<double>{1.0, 1.0}, views), Error);
}

TEST_CASE("codebook json round trip is bit exact") {
    std::mt19937_64 rng(36);
    const auto ts = random_set(rng, 200, 7);
    auto book = train(ts, 3, 1e-4, 11);
    book.meta.d0 = 0.05;
    book.meta.profile_seed = 99;
    book.meta.sensors = {{1.1, 0.07}, {0.3, 0.1}};
    const std::string text = codebook_to_json(book);
    const auto back = codebook_from_json(text);
    CHECK(back.bits == book.bits);
    CHECK(back.k == book.k);
    REQUIRE(back.entries.size() == book.entries.size());
    for (std::size_t l = 0; l < book.size(); ++l) {
        CHECK(back.entries[l] == book.entries[l]);
        CHECK(back.cost_cache[l] == book.cost_cache[l]);
    }
    CHECK(back.meta.distortion_history == book.meta.distortion_history);
    CHECK(back.meta.profile_seed == book.meta.profile_seed);
    CHECK(back.meta.d0 == book.meta.d0);
    CHECK(codebook_to_json(back) == text);

    const std::string path = "roundtrip_codebook.json";
    save_codebook(book, path);
    CHECK(codebook_to_json(load_codebook(path)) == text);
    std::remove(path.c_str());
}

TEST_CASE("codebook parse errors") {
    CHECK_THROWS_AS(codebook_from_json("{"), Error);
    CHECK_THROWS_AS(codebook_from_json("{\"bits\": 1}"), Error);
    CHECK_THROWS_AS(codebook_from_json(R"({"bits": 1, "k": 1, "entries": [[1], [2]], "cost_cache": [1, 2],
        "training_meta": {"m": "many"}})"), Error);
    CHECK_THROWS_AS(codebook_from_json(R"({"bits": 1, "k": 1, "entries": [[1], [-2]], "cost_cache": [1, 2]})"), Error);
    try {
        codebook_from_json(R"({"bits": 1, "k": 2, "entries": [[1, 1], [2]], "cost_cache": [1, 2]})");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find("entries/1") != std::string::npos);
    }
    CHECK_THROWS_AS(load_codebook("does/not/exist.json"), Error);
}
