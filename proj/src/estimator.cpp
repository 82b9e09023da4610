#include "wsnalloc/estimator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wsnalloc/error.hpp"
#include "wsnalloc/numeric.hpp"

namespace wsnalloc {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has length " +
                                                      std::to_string(got) + ", expected " +
                                                      std::to_string(want));
    }
}

}  // namespace

double blue_estimate(const FusionInput& input) {
    const auto& net = input.realization;
    const std::size_t k = net.size();
    require_size(input.y.size(), k, "y");
    require_size(input.a2.size(), k, "a2");

    CompensatedSum norm;
    CompensatedSum weighted;
    for (std::size_t i = 0; i < k; ++i) {
        const double a2 = input.a2[i];
        if (a2 < 0.0) throw Error(ErrorCode::InvalidArgument, "negative squared gain");
        const double a = std::sqrt(a2);
        const double h = net.sensors[i].h;
        const double g = net.channels[i].g;
        const double g2 = g * g;
        const double denom = a2 * g2 * net.sensors[i].sigma_o2 + net.channels[i].sigma_c2;
        norm += h * h * a2 * g2 / denom;
        weighted += h * a * g * input.y[i] / denom;
    }
    const double n = norm.value();
    if (!(n > 0.0)) {
        throw Error(ErrorCode::AllChannelsSilent,
                    "no sensor has nonzero gain, observation gain and fading");
    }
    return weighted.value() / n;
}

double blue_variance_from_gains(std::span<const SensorView> views, double sigma_theta2,
                                std::span<const double> a2) {
    require_size(a2.size(), views.size(), "a2");
    CompensatedSum info;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const auto& v = views[i];
        if (a2[i] < 0.0) throw Error(ErrorCode::InvalidArgument, "negative squared gain");
        if (v.degenerate || a2[i] == 0.0) continue;
        const double snr = v.gamma * a2[i] * v.sigma_o2;
        // beta * snr / (1 + snr) with the a2 -> inf limit handled.
        info += std::isinf(snr) ? v.beta : v.beta * snr / (1.0 + snr);
    }
    const double s = info.value();
    if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
    return sigma_theta2 / s;
}

double blue_variance_from_gains(const NetworkRealization& net, std::span<const double> a2) {
    const auto views = derive_views(net);
    return blue_variance_from_gains(views, net.sigma_theta2, a2);
}

double blue_variance_from_b(double sigma_theta2, std::span<const double> b) {
    const double s = compensated_sum(b);
    if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
    return sigma_theta2 / s;
}

}  // namespace wsnalloc
