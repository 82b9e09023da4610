#pragma once

#include <cmath>
#include <random>

#include "wsnalloc/model.hpp"

namespace testutil {

inline bool rel_close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

// Random network with moderate SNRs; feasible target at `fraction` of the
// largest achievable sum(b).
inline wsnalloc::NetworkRealization random_network(std::mt19937_64& rng, std::size_t k,
                                                   double fraction = -1.0) {
    std::uniform_real_distribution<double> h(0.3, 2.0), so(0.05, 0.5), g(0.2, 3.0), sc(0.1, 2.0),
        frac(0.05, 0.9);
    wsnalloc::NetworkRealization net;
    net.sigma_theta2 = 1.0;
    double sum_beta = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        wsnalloc::SensorProfile s{h(rng), so(rng)};
        net.sensors.push_back(s);
        net.channels.push_back({g(rng), sc(rng)});
        sum_beta += wsnalloc::observation_snr(s, net.sigma_theta2);
    }
    const double f = fraction > 0.0 ? fraction : frac(rng);
    net.d0_target = net.sigma_theta2 / (f * sum_beta);
    return net;
}

inline wsnalloc::NetworkRealization identical_network(std::size_t k, double d0) {
    wsnalloc::NetworkRealization net;
    net.sigma_theta2 = 1.0;
    net.d0_target = d0;
    for (std::size_t i = 0; i < k; ++i) {
        net.sensors.push_back({1.0, 1.0});
        net.channels.push_back({1.0, 1.0});
    }
    return net;
}

}  // namespace testutil
