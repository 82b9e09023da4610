#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsnalloc/model.hpp"

namespace wsnalloc {

/// Optimal squared-gain vectors (one row per channel realization) and the
/// cost J of each.
struct TrainingSet {
    std::vector<std::vector<double>> vectors;
    std::vector<double> costs;

    std::size_t size() const noexcept { return vectors.size(); }
    std::size_t dimension() const noexcept { return vectors.empty() ? 0 : vectors.front().size(); }
};

struct TrainingMeta {
    std::size_t m = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    double final_distortion = 0.0;
    std::vector<double> distortion_history;
    // Filled by the simulation driver; training itself does not need them.
    double d0 = 0.0;
    double sigma_theta2 = 1.0;
    std::optional<std::uint64_t> profile_seed;
    std::size_t skipped = 0;
    std::vector<SensorProfile> sensors;
};

struct Codebook {
    unsigned bits = 0;
    std::size_t k = 0;
    std::vector<std::vector<double>> entries;
    std::vector<double> cost_cache;
    TrainingMeta meta;

    std::size_t size() const noexcept { return entries.size(); }
};

/// |J(codeword) - J(target)| with powers taken under `views`.
double word_distortion(std::span<const double> codeword, std::span<const double> target,
                       std::span<const SensorView> views);
inline double word_distortion(double cost_codeword, double cost_target) {
    return cost_codeword > cost_target ? cost_codeword - cost_target : cost_target - cost_codeword;
}

/// Nearest codeword (by cached J) for every training vector; ties go to the
/// lower codeword index.
std::vector<std::size_t> assign_cells(const Codebook& book, const TrainingSet& training,
                                      unsigned threads = 1);

/// Medoid of a cell: the member minimizing mean |J - J_member|, lowest
/// training index on ties. Returns a training index.
std::size_t centroid(std::span<const std::size_t> members, const TrainingSet& training);

/// Mean over the training set of the distance to the nearest codeword.
double book_distortion(const Codebook& book, const TrainingSet& training, unsigned threads = 1);

struct TrainOptions {
    std::size_t max_iterations = 10000;
    unsigned threads = 1;
};

/// Generalized Lloyd iteration with the J-distance, starting from 2^bits
/// distinct training vectors drawn with `seed`.
Codebook train(const TrainingSet& training, unsigned bits, double epsilon, std::uint64_t seed,
               const TrainOptions& opts = {});

/// Final partition of the training set under `book`.
inline std::vector<std::size_t> final_partition(const Codebook& book, const TrainingSet& training) {
    return assign_cells(book, training);
}

std::size_t select_index(const Codebook& book, double optimal_cost);
std::size_t select_index(const Codebook& book, std::span<const double> optimal_a2,
                         std::span<const SensorView> views);

// File format: JSON, numbers written with 17 significant digits.
std::string codebook_to_json(const Codebook& book);
Codebook codebook_from_json(std::string_view text);
void save_codebook(const Codebook& book, const std::string& path);
Codebook load_codebook(const std::string& path);

}  // namespace wsnalloc
