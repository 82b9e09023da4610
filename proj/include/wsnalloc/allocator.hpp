#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wsnalloc/model.hpp"

namespace wsnalloc {

struct SolverConfig {
    double lambda_tol = 1e-12;
    double residual_tol = 1e-8;
    int max_bracket_doublings = 200;

    void validate() const;
};

/// A sensor taking part in the lambda0 search, delta = (1 + beta) / (beta gamma).
struct ActiveSensor {
    double beta = 0.0;
    double delta = 0.0;
};

/// Stationarity root for one sensor at a given multiplier.
struct BRoot {
    double b = 0.0;
    // Bracket underflowed to zero; b forced to 0.
    bool clamped = false;
    // Closed form failed its residual check and the cubic was solved by
    // bisection instead.
    bool fallback = false;
};

// Since P_i = b_i (1 + beta_i) / (gamma_i (beta_i - b_i)), stationarity of
// ||P||^2 + lambda0 (target - sum b) reads
//     2 beta^3 delta^2 b / (beta - b)^3 = lambda0.

/// Relative stationarity residual 2 beta^3 delta^2 b / ((beta - b)^3 lambda0) - 1.
double stationarity_residual(double beta, double delta, double b, double lambda0);

/// Closed-form positive root of the stationarity cubic, clamped at zero,
/// residual-checked, with a bisection fallback.
BRoot b_given_lambda(double beta, double delta, double lambda0, const SolverConfig& cfg = {});

/// Left side of the lambda0 / active-set coupling minus `rhs`:
///     sum_i beta_i * cbrt(beta_i delta_i^2 T_i / lambda0)
///           * (1 - 2/3 cbrt(beta_i delta_i^2 / (lambda0 T_i^2))) - rhs
double lambda_residual(std::span<const ActiveSensor> active, double lambda0, double rhs);

/// Multiplier at which the clamped closed-form b values of `active` sum to
/// target_sum_b. Bracket doubling from 1, then bisection in log space.
double solve_lambda0(std::span<const ActiveSensor> active, double target_sum_b,
                     const SolverConfig& cfg = {});

/// Optimal L2-norm power allocation meeting Var = D0. Throws InfeasibleError
/// when sigma_theta2 / D0 is not below sum(beta).
AllocationResult waterfill(const NetworkRealization& net, const SolverConfig& cfg = {});

/// a2_i = b_i / (gamma_i sigma_o2_i (beta_i - b_i)); zero for b_i = 0.
std::vector<double> gains_from_b(const NetworkRealization& net, std::span<const double> b);
std::vector<double> gains_from_b(std::span<const SensorView> views, std::span<const double> b);

/// Inverse of gains_from_b: b_i = beta_i gamma_i a2_i sigma_o2_i / (1 + gamma_i a2_i sigma_o2_i).
std::vector<double> b_from_gains(std::span<const SensorView> views, std::span<const double> a2);

std::vector<double> powers_from_gains(const NetworkRealization& net, std::span<const double> a2);
std::vector<double> powers_from_gains(std::span<const SensorView> views,
                                      std::span<const double> a2);

/// L2 norm of the transmit-power vector.
double cost_j(std::span<const double> power);

struct OracleConfig {
    int starts = 6;
    int max_iterations = 20000;
    double step_tol = 1e-14;
    std::uint64_t seed = 0x5eed;
};

/// Independent check of waterfill: spectral projected gradient on the
/// b-space program from several random feasible starts, finished with
/// pairwise exact line searches. K <= 6 only.
AllocationResult brute_force_oracle(const NetworkRealization& net, const OracleConfig& cfg = {});

/// Feasibility margin: targets within this relative distance of sum(beta)
/// are rejected.
inline constexpr double kFeasibilityMargin = 1e-9;

}  // namespace wsnalloc
