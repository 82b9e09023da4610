#pragma once

#include <span>
#include <vector>

#include "wsnalloc/model.hpp"

namespace wsnalloc {

struct FusionInput {
    std::vector<double> y;
    NetworkRealization realization;
    std::vector<double> a2;
};

// BLUE of theta from one snapshot of received signals. Gains are taken as
// a_i = +sqrt(a2_i). Throws Error(AllChannelsSilent) when no sensor carries
// information.
double blue_estimate(const FusionInput& input);

// Conditional variance of the BLUE given gains and fading. Returns +inf when
// every term vanishes.
double blue_variance_from_gains(const NetworkRealization& net, std::span<const double> a2);
double blue_variance_from_gains(std::span<const SensorView> views, double sigma_theta2,
                                std::span<const double> a2);

// sigma_theta2 / sum(b), +inf for a zero sum.
double blue_variance_from_b(double sigma_theta2, std::span<const double> b);

}  // namespace wsnalloc
