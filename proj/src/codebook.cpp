#include "wsnalloc/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "wsnalloc/allocator.hpp"
#include "wsnalloc/error.hpp"
#include "wsnalloc/numeric.hpp"
#include "wsnalloc/parallel.hpp"

namespace wsnalloc {

namespace {

std::size_t nearest(std::span<const double> book_costs, double cost) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < book_costs.size(); ++l) {
        const double d = word_distortion(book_costs[l], cost);
        if (d < best_d) {
            best_d = d;
            best = l;
        }
    }
    return best;
}

void check_compatible(const Codebook& book, const TrainingSet& training) {
    if (book.entries.empty()) throw Error(ErrorCode::InvalidArgument, "codebook is empty");
    if (training.size() > 0 && training.dimension() != book.k) {
        throw Error(ErrorCode::DimensionMismatch,
                    "training dimension " + std::to_string(training.dimension()) +
                        " differs from codebook dimension " + std::to_string(book.k));
    }
}

}  // namespace

double word_distortion(std::span<const double> codeword, std::span<const double> target,
                       std::span<const SensorView> views) {
    if (codeword.size() != target.size()) {
        throw Error(ErrorCode::DimensionMismatch, "codeword and target lengths differ");
    }
    return word_distortion(cost_j(powers_from_gains(views, codeword)),
                           cost_j(powers_from_gains(views, target)));
}

std::vector<std::size_t> assign_cells(const Codebook& book, const TrainingSet& training,
                                      unsigned threads) {
    check_compatible(book, training);
    std::vector<std::size_t> cells(training.size());
    parallel_for(training.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) cells[m] = nearest(book.cost_cache, training.costs[m]);
    });
    return cells;
}

std::size_t centroid(std::span<const std::size_t> members, const TrainingSet& training) {
    if (members.empty()) throw Error(ErrorCode::EmptyCell, "centroid of an empty cell");
    std::vector<std::size_t> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double ja = training.costs[a];
        const double jb = training.costs[b];
        return ja < jb || (ja == jb && a < b);
    });
    // Sum of |J - c| over the cell is minimized by any c between the two
    // middle order statistics (a single point for odd counts).
    const std::size_t n = sorted.size();
    const double lo = training.costs[sorted[(n - 1) / 2]];
    const double hi = training.costs[sorted[n / 2]];
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t m : sorted) {
        const double j = training.costs[m];
        if (j >= lo && j <= hi) best = std::min(best, m);
    }
    return best;
}

double book_distortion(const Codebook& book, const TrainingSet& training, unsigned threads) {
    check_compatible(book, training);
    if (training.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty training set");
    std::vector<double> d(training.size());
    parallel_for(training.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            const double j = training.costs[m];
            d[m] = word_distortion(book.cost_cache[nearest(book.cost_cache, j)], j);
        }
    });
    return compensated_sum(d) / static_cast<double>(d.size());
}

Codebook train(const TrainingSet& training, unsigned bits, double epsilon, std::uint64_t seed,
               const TrainOptions& opts) {
    if (bits == 0 || bits > 24) {
        throw Error(ErrorCode::InvalidArgument, "codebook bits must be in [1, 24]");
    }
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (training.costs.size() != training.vectors.size()) {
        throw Error(ErrorCode::InvalidArgument, "training costs and vectors differ in length");
    }
    const std::size_t m = training.size();
    const std::size_t n = std::size_t{1} << bits;
    if (m < n) {
        throw Error(ErrorCode::TooFewTrainingVectors,
                    std::to_string(m) + " training vectors for " + std::to_string(n) + " codewords");
    }

    // Partial Fisher-Yates: n distinct training indices.
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(m);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t l = 0; l < n; ++l) {
        std::uniform_int_distribution<std::size_t> pick(l, m - 1);
        std::swap(pool[l], pool[pick(rng)]);
    }
    std::vector<std::size_t> source(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));

    Codebook book;
    book.bits = bits;
    book.k = training.dimension();
    auto load_rows = [&] {
        book.entries.resize(n);
        book.cost_cache.resize(n);
        for (std::size_t l = 0; l < n; ++l) {
            book.entries[l] = training.vectors[source[l]];
            book.cost_cache[l] = training.costs[source[l]];
        }
    };
    load_rows();

    auto& meta = book.meta;
    meta.m = m;
    meta.epsilon = epsilon;
    meta.seed = seed;
    double new_cost = book_distortion(book, training, opts.threads);
    meta.distortion_history.push_back(new_cost);

    std::vector<std::vector<std::size_t>> members(n);
    while (meta.iterations < opts.max_iterations) {
        ++meta.iterations;
        const double old_cost = new_cost;

        const auto cells = assign_cells(book, training, opts.threads);
        for (auto& c : members) c.clear();
        for (std::size_t i = 0; i < m; ++i) members[cells[i]].push_back(i);

        std::vector<std::size_t> empty;
        for (std::size_t l = 0; l < n; ++l) {
            if (members[l].empty()) empty.push_back(l); else source[l] = centroid(members[l], training);
        }
        if (!empty.empty()) {
            // Reseed each empty cell with the vector farthest from its own
            // (updated) codeword.
            std::vector<double> dist(m);
            for (std::size_t i = 0; i < m; ++i) {
                dist[i] = word_distortion(training.costs[source[cells[i]]], training.costs[i]);
            }
            for (std::size_t l : empty) {
                std::size_t worst = 0;
                for (std::size_t i = 1; i < m; ++i) {
                    if (dist[i] > dist[worst]) worst = i;
                }
                source[l] = worst;
                dist[worst] = -1.0;
            }
        }
        load_rows();

        new_cost = book_distortion(book, training, opts.threads);
        meta.distortion_history.push_back(new_cost);
        if (old_cost - new_cost <= epsilon) break;
    }
    meta.final_distortion = new_cost;
    return book;
}

std::size_t select_index(const Codebook& book, double optimal_cost) {
    if (book.cost_cache.empty()) throw Error(ErrorCode::InvalidArgument, "codebook is empty");
    return nearest(book.cost_cache, optimal_cost);
}

std::size_t select_index(const Codebook& book, std::span<const double> optimal_a2,
                         std::span<const SensorView> views) {
    if (optimal_a2.size() != book.k) {
        throw Error(ErrorCode::DimensionMismatch, "gain vector length differs from codebook K");
    }
    return select_index(book, cost_j(powers_from_gains(views, optimal_a2)));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_number(std::ostream& os, double v) {
    if (!std::isfinite(v)) {
        os << "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

void put_array(std::ostream& os, std::span<const double> xs) {
    os << '[';
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ", ";
        put_number(os, xs[i]);
    }
    os << ']';
}

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorCode::Parse, where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

double number_at(const json& v, const std::string& where) {
    if (!v.is_number()) throw Error(ErrorCode::Parse, where + ": expected a number");
    return v.get<double>();
}

}  // namespace

std::string codebook_to_json(const Codebook& book) {
    std::ostringstream os;
    const auto& meta = book.meta;
    os << "{\n  \"bits\": " << book.bits << ",\n  \"k\": " << book.k << ",\n  \"entries\": [";
    for (std::size_t l = 0; l < book.entries.size(); ++l) {
        os << (l ? ",\n    " : "\n    ");
        put_array(os, book.entries[l]);
    }
    os << "\n  ],\n  \"cost_cache\": ";
    put_array(os, book.cost_cache);
    os << ",\n  \"training_meta\": {\n    \"m\": " << meta.m << ",\n    \"epsilon\": ";
    put_number(os, meta.epsilon);
    os << ",\n    \"seed\": " << meta.seed << ",\n    \"iterations\": " << meta.iterations
       << ",\n    \"final_distortion\": ";
    put_number(os, meta.final_distortion);
    os << ",\n    \"distortion_history\": ";
    put_array(os, meta.distortion_history);
    os << ",\n    \"d0\": ";
    put_number(os, meta.d0);
    os << ",\n    \"sigma_theta2\": ";
    put_number(os, meta.sigma_theta2);
    os << ",\n    \"profile_seed\": ";
    if (meta.profile_seed) os << *meta.profile_seed; else os << "null";
    os << ",\n    \"skipped\": " << meta.skipped << ",\n    \"sensors\": [";
    for (std::size_t i = 0; i < meta.sensors.size(); ++i) {
        os << (i ? ", " : "") << "{\"h\": ";
        put_number(os, meta.sensors[i].h);
        os << ", \"sigma_o2\": ";
        put_number(os, meta.sensors[i].sigma_o2);
        os << '}';
    }
    os << "]\n  }\n}\n";
    return os.str();
}

namespace {

Codebook parse_codebook(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("codebook: ") + e.what());
    }
    Codebook book;
    const auto& bits = field(doc, "bits", "codebook");
    const auto& k = field(doc, "k", "codebook");
    if (!bits.is_number_unsigned() || !k.is_number_unsigned()) {
        throw Error(ErrorCode::Parse, "codebook: bits and k must be nonnegative integers");
    }
    book.bits = bits.get<unsigned>();
    book.k = k.get<std::size_t>();
    if (book.bits == 0 || book.bits > 24) throw Error(ErrorCode::Parse, "codebook/bits: out of range");

    const auto& entries = field(doc, "entries", "codebook");
    if (!entries.is_array() || entries.size() != (std::size_t{1} << book.bits)) {
        throw Error(ErrorCode::Parse, "codebook/entries: expected 2^bits rows");
    }
    for (std::size_t l = 0; l < entries.size(); ++l) {
        const std::string where = "codebook/entries/" + std::to_string(l);
        const auto& row = entries[l];
        if (!row.is_array() || row.size() != book.k) {
            throw Error(ErrorCode::Parse, where + ": expected " + std::to_string(book.k) + " numbers");
        }
        std::vector<double> r;
        r.reserve(book.k);
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double v = number_at(row[i], where + "/" + std::to_string(i));
            if (!(v >= 0.0)) throw Error(ErrorCode::Parse, where + ": negative squared gain");
            r.push_back(v);
        }
        book.entries.push_back(std::move(r));
    }

    const auto& costs = field(doc, "cost_cache", "codebook");
    if (!costs.is_array() || costs.size() != book.entries.size()) {
        throw Error(ErrorCode::Parse, "codebook/cost_cache: expected one value per row");
    }
    for (std::size_t l = 0; l < costs.size(); ++l) {
        book.cost_cache.push_back(number_at(costs[l], "codebook/cost_cache/" + std::to_string(l)));
    }

    if (doc.contains("training_meta")) {
        const auto& tm = doc.at("training_meta");
        auto& meta = book.meta;
        const std::string w = "codebook/training_meta";
        if (tm.contains("m")) meta.m = tm.at("m").get<std::size_t>();
        if (tm.contains("epsilon")) meta.epsilon = number_at(tm.at("epsilon"), w + "/epsilon");
        if (tm.contains("seed")) meta.seed = tm.at("seed").get<std::uint64_t>();
        if (tm.contains("iterations")) meta.iterations = tm.at("iterations").get<std::size_t>();
        if (tm.contains("final_distortion")) {
            meta.final_distortion = number_at(tm.at("final_distortion"), w + "/final_distortion");
        }
        if (tm.contains("distortion_history")) {
            for (const auto& v : tm.at("distortion_history")) {
                meta.distortion_history.push_back(number_at(v, w + "/distortion_history"));
            }
        }
        if (tm.contains("d0")) meta.d0 = number_at(tm.at("d0"), w + "/d0");
        if (tm.contains("sigma_theta2")) meta.sigma_theta2 = number_at(tm.at("sigma_theta2"), w + "/sigma_theta2");
        if (tm.contains("profile_seed") && !tm.at("profile_seed").is_null()) {
            meta.profile_seed = tm.at("profile_seed").get<std::uint64_t>();
        }
        if (tm.contains("skipped")) meta.skipped = tm.at("skipped").get<std::size_t>();
        if (tm.contains("sensors")) {
            for (const auto& s : tm.at("sensors")) {
                meta.sensors.push_back({number_at(field(s, "h", w + "/sensors"), w + "/sensors/h"),
                                        number_at(field(s, "sigma_o2", w + "/sensors"),
                                                  w + "/sensors/sigma_o2")});
            }
        }
    }
    return book;
}

}  // namespace

Codebook codebook_from_json(std::string_view text) {
    try {
        return parse_codebook(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("codebook: ") + e.what());
    }
}

void save_codebook(const Codebook& book, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    out << codebook_to_json(book);
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

Codebook load_codebook(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open codebook '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return codebook_from_json(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

}  // namespace wsnalloc
