#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wsnalloc/allocator.hpp"
#include "wsnalloc/codebook.hpp"
#include "wsnalloc/model.hpp"

namespace wsnalloc {

struct SimulationConfig {
    std::vector<std::size_t> k_grid{50};
    std::vector<double> d0_grid{0.01, 0.02, 0.05, 0.1};
    double sigma_theta2 = 1.0;
    double h_mean = 1.0;
    double h_var = 0.09;
    // Empirical mean of h_i^2 after rescaling; unset disables rescaling.
    std::optional<double> h_power_target = 1.2;
    double sigma_o2_low = 0.05;
    double sigma_o2_high = 0.15;
    std::optional<double> noise_power_target;
    double sigma_c2 = 1e-12;  // -90 dBm
    double eta0 = 1e-3;       // -30 dB
    double ref_dist = 1.0;
    double alpha = 2.0;
    double dist_min = 50.0;
    double dist_max = 150.0;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    // When set, h, sigma_o2 and distances are drawn once from this seed and
    // only the fading is redrawn per trial.
    std::optional<std::uint64_t> profile_seed;
    std::optional<unsigned> codebook_bits;
    std::optional<double> codebook_d0;
    std::size_t training_m = 5000;
    double lloyd_epsilon = 1e-4;
    std::size_t lloyd_max_iterations = 10000;
    SolverConfig solver;

    void validate() const;
};

enum class Stream : std::uint64_t { Profile = 1, Fading = 2, Training = 3 };

/// Independent engine for (seed, stream, k, index).
std::mt19937_64 substream(std::uint64_t seed, Stream stream, std::uint64_t k, std::uint64_t index);

/// Rayleigh amplitude with E[f^2] = 1.
double rayleigh_unit(std::mt19937_64& rng);

/// Path-loss times small-scale fading: eta0 (d / ref_dist)^-alpha f.
double fading_coefficient(double eta0, double distance, double ref_dist, double alpha, double f);

NetworkRealization sample_realization(const SimulationConfig& cfg, std::size_t k,
                                      std::size_t trial_index, double d0,
                                      Stream stream = Stream::Fading);
NetworkRealization sample_realization(const SimulationConfig& cfg, std::size_t trial_index);

struct EqualPower {
    double power = 0.0;
    double cost = 0.0;
};

/// Smallest common per-sensor power meeting Var = D0.
EqualPower equal_power_baseline(const NetworkRealization& net);

struct TrialRecord {
    std::size_t trial = 0;
    double d0 = 0.0;
    std::size_t k = 0;
    std::optional<unsigned> l;
    double cost_full = 0.0;
    double cost_equal = 0.0;
    std::optional<double> cost_quantized;
    std::optional<double> variance_quantized;
    double variance_full = 0.0;
    std::size_t k1 = 0;
    bool feasible = false;
};

TrialRecord run_trial(const SimulationConfig& cfg, std::size_t k, double d0,
                      std::size_t trial_index, const Codebook* book = nullptr);
TrialRecord run_trial(const SimulationConfig& cfg, std::size_t trial_index,
                      const Codebook* book = nullptr);

struct Stat {
    double mean = 0.0;
    double se = 0.0;  // NaN below two samples
    std::size_t n = 0;
};

struct SummaryCell {
    double d0 = 0.0;
    std::size_t k = 0;
    std::optional<unsigned> l;
    std::size_t trials = 0;
    std::size_t infeasible = 0;
    Stat cost_full;
    Stat cost_equal;
    std::optional<Stat> cost_quantized;
    std::optional<Stat> abs_gap;         // |cost_quantized - cost_full|
    double overshoot_rate = 0.0;         // share of trials with Var_q > D0
    double mean_relative_overshoot = 0.0;  // mean of max(0, Var_q / D0 - 1)
};

struct SweepSummary {
    std::vector<SummaryCell> cells;
};

struct SweepResult {
    std::vector<TrialRecord> records;
    SweepSummary summary;
};

SweepSummary summarize(const std::vector<TrialRecord>& records);

/// Runs trials 0..trials-1 for every (k, d0) cell. With a codebook, the
/// quantized scheme is evaluated on the cells whose d0 matches the one the
/// codebook was trained for (every cell when the codebook carries no d0).
SweepResult monte_carlo(const SimulationConfig& cfg, const Codebook* book = nullptr,
                        unsigned threads = 0);
inline SweepSummary monte_carlo_summary(const SimulationConfig& cfg) {
    return monte_carlo(cfg).summary;
}

/// Optimal allocations for cfg.training_m training realizations.
TrainingSet build_training_set(const SimulationConfig& cfg, std::size_t k, double d0,
                               unsigned threads, std::size_t* skipped = nullptr);

/// Training set + Lloyd training, with codebook metadata filled in.
Codebook train_codebook(const SimulationConfig& cfg, std::size_t k, double d0, unsigned bits,
                        unsigned threads = 0);

struct FeedbackComparison {
    SweepResult full;
    std::vector<SweepResult> quantized;  // one per codebook, same order
};

/// Full-feedback pass plus one pass per codebook on shared realizations.
FeedbackComparison eval_feedback(const SimulationConfig& cfg,
                                 const std::vector<const Codebook*>& books,
                                 unsigned threads = 0);

}  // namespace wsnalloc
