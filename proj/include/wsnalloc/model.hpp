#pragma once

#include <cstddef>
#include <vector>

namespace wsnalloc {

/// Observation side of one sensor: x = h * theta + n, Var(n) = sigma_o2.
struct SensorProfile {
    double h = 1.0;
    double sigma_o2 = 1.0;
};

/// Fading channel from one sensor to the fusion center: y = g * z + w,
/// Var(w) = sigma_c2.
struct ChannelRealization {
    double g = 1.0;
    double sigma_c2 = 1.0;
};

/// One block-fading snapshot of the whole network together with the prior
/// variance of theta and the variance target D0.
struct NetworkRealization {
    std::vector<SensorProfile> sensors;
    std::vector<ChannelRealization> channels;
    double sigma_theta2 = 1.0;
    double d0_target = 1.0;

    std::size_t size() const noexcept { return sensors.size(); }

    /// Throws Error(InvalidArgument) on any violated invariant.
    void validate() const;
};

/// Per-sensor quantities derived once per realization.
struct SensorView {
    double beta = 0.0;
    double gamma = 0.0;
    double sigma_o2 = 1.0;
    // beta == 0 or gamma == 0; such a sensor can never carry information.
    bool degenerate = true;
};

std::vector<SensorView> derive_views(const NetworkRealization& net);

struct AllocationResult {
    std::vector<double> b;
    double lambda0 = 0.0;
    std::size_t k1 = 0;
    std::vector<double> a2;
    std::vector<double> power;
    double cost_j = 0.0;
    double variance = 0.0;
    // Number of closed-form evaluations that failed the stationarity check
    // and were re-solved numerically.
    std::size_t fallback_count = 0;
};

double observation_snr(const SensorProfile& s, double sigma_theta2);
double channel_snr(const ChannelRealization& c);

/// (1 + beta) / (beta * gamma). Throws Error(DegenerateSensor) if either
/// argument is zero.
double delta(double beta, double gamma);

double transmit_power(double a2, const SensorProfile& s, double beta);

}  // namespace wsnalloc
