#include "wsnalloc/model.hpp"

#include <cmath>
#include <string>

#include "wsnalloc/error.hpp"

namespace wsnalloc {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DegenerateSensor: return "DegenerateSensor";
        case ErrorCode::AllChannelsSilent: return "AllChannelsSilent";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::BracketFailure: return "BracketFailure";
        case ErrorCode::NonMonotoneCoupling: return "NonMonotoneCoupling";
        case ErrorCode::BOutOfRange: return "BOutOfRange";
        case ErrorCode::EmptyCell: return "EmptyCell";
        case ErrorCode::TooFewTrainingVectors: return "TooFewTrainingVectors";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

void NetworkRealization::validate() const {
    auto fail = [](const std::string& msg) {
        throw Error(ErrorCode::InvalidArgument, msg);
    };
    if (sensors.empty()) fail("network has no sensors");
    if (sensors.size() != channels.size()) {
        fail("sensor count " + std::to_string(sensors.size()) +
             " differs from channel count " + std::to_string(channels.size()));
    }
    if (!(sigma_theta2 > 0.0) || !std::isfinite(sigma_theta2)) fail("sigma_theta2 must be positive");
    if (!(d0_target > 0.0) || !std::isfinite(d0_target)) fail("d0 target must be positive");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        const auto idx = std::to_string(i);
        if (!std::isfinite(sensors[i].h)) fail("sensor " + idx + ": h is not finite");
        if (!(sensors[i].sigma_o2 > 0.0) || !std::isfinite(sensors[i].sigma_o2)) {
            fail("sensor " + idx + ": sigma_o2 must be positive");
        }
        if (!std::isfinite(channels[i].g)) fail("channel " + idx + ": g is not finite");
        if (!(channels[i].sigma_c2 > 0.0) || !std::isfinite(channels[i].sigma_c2)) {
            fail("channel " + idx + ": sigma_c2 must be positive");
        }
    }
}

std::vector<SensorView> derive_views(const NetworkRealization& net) {
    std::vector<SensorView> views(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        auto& v = views[i];
        v.beta = observation_snr(net.sensors[i], net.sigma_theta2);
        v.gamma = channel_snr(net.channels[i]);
        v.sigma_o2 = net.sensors[i].sigma_o2;
        v.degenerate = !(v.beta > 0.0) || !(v.gamma > 0.0);
    }
    return views;
}

double observation_snr(const SensorProfile& s, double sigma_theta2) {
    return s.h * s.h * sigma_theta2 / s.sigma_o2;
}

double channel_snr(const ChannelRealization& c) { return c.g * c.g / c.sigma_c2; }

double delta(double beta, double gamma) {
    if (!(beta > 0.0) || !(gamma > 0.0)) {
        throw Error(ErrorCode::DegenerateSensor,
                    "delta undefined for beta=" + std::to_string(beta) +
                        ", gamma=" + std::to_string(gamma));
    }
    return (1.0 + beta) / (beta * gamma);
}

double transmit_power(double a2, const SensorProfile& s, double beta) {
    return a2 * s.sigma_o2 * (1.0 + beta);
}

}  // namespace wsnalloc
