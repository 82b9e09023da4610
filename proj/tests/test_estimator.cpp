#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "wsnalloc/allocator.hpp"
#include "wsnalloc/error.hpp"
#include "wsnalloc/estimator.hpp"

using namespace wsnalloc;

namespace {

// Independent weighted least squares on y_i = c_i theta + e_i.
double wls(const FusionInput& in) {
    long double num = 0, den = 0;
    for (std::size_t i = 0; i < in.y.size(); ++i) {
        const auto& s = in.realization.sensors[i];
        const auto& c = in.realization.channels[i];
        const long double a = std::sqrt(static_cast<long double>(in.a2[i]));
        const long double coef = s.h * a * c.g;
        const long double var = a * a * c.g * c.g * s.sigma_o2 + c.sigma_c2;
        num += coef * in.y[i] / var;
        den += coef * coef / var;
    }
    return static_cast<double>(num / den);
}

}  // namespace

TEST_CASE("blue estimate small cases") {
    FusionInput in;
    in.realization = testutil::identical_network(1, 1.0);
    in.a2 = {1.0};
    in.y = {3.0};
    CHECK(blue_estimate(in) == doctest::Approx(3.0));

    in.realization = testutil::identical_network(2, 1.0);
    in.a2 = {1.0, 1.0};
    in.y = {1.0, 3.0};
    CHECK(blue_estimate(in) == doctest::Approx(2.0));

    in.a2 = {0.0, 0.0};
    CHECK_THROWS_AS(blue_estimate(in), Error);
}

TEST_CASE("blue estimate matches weighted least squares") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 3.0), y(-5.0, 5.0);
    for (int rep = 0; rep < 50; ++rep) {
        FusionInput in;
        in.realization = testutil::random_network(rng, 3);
        for (int i = 0; i < 3; ++i) {
            in.a2.push_back(u(rng));
            in.y.push_back(y(rng));
        }
        CHECK(testutil::rel_close(blue_estimate(in), wls(in), 1e-12));
    }
}

TEST_CASE("blue variance from gains") {
    NetworkRealization net = testutil::identical_network(1, 1.0);
    const std::vector<double> a2{1.0};
    CHECK(blue_variance_from_gains(net, a2) == doctest::Approx(2.0));
    const std::vector<double> zero{0.0};
    CHECK(std::isinf(blue_variance_from_gains(net, zero)));
}

TEST_CASE("blue variance from b") {
    CHECK(blue_variance_from_b(1.0, std::vector<double>{1.0}) == 1.0);
    CHECK(blue_variance_from_b(1.0, std::vector<double>{0.5, 0.5}) == 1.0);
    CHECK(std::isinf(blue_variance_from_b(1.0, std::vector<double>{0.0})));
}

TEST_CASE("gain and b space variances agree") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> frac(0.0, 0.999);
    for (int rep = 0; rep < 200; ++rep) {
        const auto net = testutil::random_network(rng, 1 + rep % 6);
        const auto views = derive_views(net);
        std::vector<double> b;
        for (const auto& v : views) b.push_back(v.beta * frac(rng));
        const auto a2 = gains_from_b(net, b);
        CHECK(testutil::rel_close(blue_variance_from_b(net.sigma_theta2, b),
                                  blue_variance_from_gains(net, a2), 1e-10));
    }
}

TEST_CASE("variance weakly decreasing in each gain") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto net = testutil::random_network(rng, 4);
        std::vector<double> a2(4);
        for (auto& x : a2) x = u(rng);
        const double base = blue_variance_from_gains(net, a2);
        auto more = a2;
        more[rep % 4] += u(rng);
        CHECK(blue_variance_from_gains(net, more) <= base);
    }
}

TEST_CASE("blue estimate is unbiased") {
    std::mt19937_64 rng(14);
    const auto net = testutil::random_network(rng, 4);
    const std::vector<double> a2{0.7, 1.3, 0.2, 2.0};
    const double theta = 0.8;
    std::normal_distribution<double> n01(0.0, 1.0);
    const std::size_t n = 100000;
    double sum = 0, sum2 = 0;
    FusionInput in{std::vector<double>(4), net, a2};
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < 4; ++i) {
            const auto& s = net.sensors[i];
            const auto& c = net.channels[i];
            const double x = s.h * theta + std::sqrt(s.sigma_o2) * n01(rng);
            in.y[i] = c.g * std::sqrt(a2[i]) * x + std::sqrt(c.sigma_c2) * n01(rng);
        }
        const double e = blue_estimate(in);
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::fabs(mean - theta) < 3.0 * se);
}
