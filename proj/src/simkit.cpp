#include "wsnalloc/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "wsnalloc/error.hpp"
#include "wsnalloc/estimator.hpp"
#include "wsnalloc/numeric.hpp"
#include "wsnalloc/parallel.hpp"

namespace wsnalloc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool same_d0(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

}  // namespace

void SimulationConfig::validate() const {
    if (k_grid.empty()) invalid("k: at least one sensor count required");
    for (auto k : k_grid) if (k == 0) invalid("k: sensor count must be at least 1");
    if (d0_grid.empty()) invalid("d0_grid: at least one target required");
    for (double d : d0_grid) if (!(d > 0.0) || !std::isfinite(d)) invalid("d0_grid: targets must be positive");
    if (!(sigma_theta2 > 0.0)) invalid("sigma_theta2 must be positive");
    if (!(h_var >= 0.0) || !std::isfinite(h_mean)) invalid("h_mean/h_var invalid");
    if (h_power_target && !(*h_power_target > 0.0)) invalid("h_power_target must be positive");
    if (!(sigma_o2_low > 0.0) || !(sigma_o2_high >= sigma_o2_low)) {
        invalid("sigma_o2_range must satisfy 0 < low <= high");
    }
    if (noise_power_target && !(*noise_power_target > 0.0)) invalid("noise_power_target must be positive");
    if (!(sigma_c2 > 0.0)) invalid("sigma_c2 must be positive");
    if (!(eta0 > 0.0)) invalid("eta0 must be positive");
    if (!(ref_dist > 0.0)) invalid("ref_dist must be positive");
    if (!std::isfinite(alpha)) invalid("alpha must be finite");
    if (!(dist_min > 0.0) || !(dist_max >= dist_min)) invalid("dist_range must satisfy 0 < min <= max");
    if (trials == 0) invalid("trials must be at least 1");
    if (codebook_bits && (*codebook_bits == 0 || *codebook_bits > 24)) invalid("codebook_bits must be in [1, 24]");
    if (codebook_d0 && !(*codebook_d0 > 0.0)) invalid("codebook_d0 must be positive");
    if (training_m == 0) invalid("training_m must be at least 1");
    if (!(lloyd_epsilon > 0.0)) invalid("lloyd_epsilon must be positive");
    solver.validate();
}

std::mt19937_64 substream(std::uint64_t seed, Stream stream, std::uint64_t k, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ k);
    h = splitmix64(h ^ index);
    return std::mt19937_64(h);
}

double rayleigh_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double x = normal(rng);
    const double y = normal(rng);
    return std::sqrt(0.5 * (x * x + y * y));
}

double fading_coefficient(double eta0, double distance, double ref_dist, double alpha, double f) {
    return eta0 * std::pow(distance / ref_dist, -alpha) * f;
}

NetworkRealization sample_realization(const SimulationConfig& cfg, std::size_t k,
                                      std::size_t trial_index, double d0, Stream stream) {
    NetworkRealization net;
    net.sigma_theta2 = cfg.sigma_theta2;
    net.d0_target = d0;
    net.sensors.resize(k);
    net.channels.resize(k);

    auto prof = cfg.profile_seed ? substream(*cfg.profile_seed, Stream::Profile, k, 0)
                                 : substream(cfg.seed, Stream::Profile, k,
                                             (static_cast<std::uint64_t>(stream) << 48) ^ trial_index);
    std::normal_distribution<double> h_dist(cfg.h_mean, cfg.h_var > 0.0 ? std::sqrt(cfg.h_var) : 1.0);
    std::uniform_real_distribution<double> noise_dist(cfg.sigma_o2_low, cfg.sigma_o2_high);
    std::uniform_real_distribution<double> dist_dist(cfg.dist_min, cfg.dist_max);
    std::vector<double> distance(k);
    for (std::size_t i = 0; i < k; ++i) {
        net.sensors[i].h = cfg.h_var > 0.0 ? h_dist(prof) : cfg.h_mean;
        net.sensors[i].sigma_o2 = cfg.sigma_o2_low == cfg.sigma_o2_high ? cfg.sigma_o2_low : noise_dist(prof);
        distance[i] = cfg.dist_min == cfg.dist_max ? cfg.dist_min : dist_dist(prof);
    }
    if (cfg.h_power_target) {
        CompensatedSum p;
        for (const auto& s : net.sensors) p += s.h * s.h;
        const double mean = p.value() / static_cast<double>(k);
        if (mean > 0.0) {
            const double scale = std::sqrt(*cfg.h_power_target / mean);
            for (auto& s : net.sensors) s.h *= scale;
        }
    }
    if (cfg.noise_power_target) {
        CompensatedSum p;
        for (const auto& s : net.sensors) p += s.sigma_o2;
        const double scale = *cfg.noise_power_target / (p.value() / static_cast<double>(k));
        for (auto& s : net.sensors) s.sigma_o2 *= scale;
    }

    auto fade = substream(cfg.seed, stream, k, trial_index);
    for (std::size_t i = 0; i < k; ++i) {
        const double f = rayleigh_unit(fade);
        net.channels[i].g = fading_coefficient(cfg.eta0, distance[i], cfg.ref_dist, cfg.alpha, f);
        net.channels[i].sigma_c2 = cfg.sigma_c2;
    }
    return net;
}

NetworkRealization sample_realization(const SimulationConfig& cfg, std::size_t trial_index) {
    return sample_realization(cfg, cfg.k_grid.front(), trial_index, cfg.d0_grid.front());
}

EqualPower equal_power_baseline(const NetworkRealization& net) {
    net.validate();
    const auto views = derive_views(net);
    CompensatedSum beta_sum;
    for (const auto& v : views) if (!v.degenerate) beta_sum += v.beta;
    const double target = net.sigma_theta2 / net.d0_target;
    const double min_variance = beta_sum.value() > 0.0 ? net.sigma_theta2 / beta_sum.value()
                                                       : std::numeric_limits<double>::infinity();
    if (!(beta_sum.value() > 0.0) || target >= beta_sum.value() * (1.0 - kFeasibilityMargin)) {
        throw InfeasibleError(min_variance, "equal power cannot reach variance " +
                                                std::to_string(net.d0_target) +
                                                "; minimum achievable is " +
                                                std::to_string(min_variance));
    }

    std::vector<double> a2(views.size());
    auto variance_at = [&](double p) {
        for (std::size_t i = 0; i < views.size(); ++i) {
            a2[i] = p / (views[i].sigma_o2 * (1.0 + views[i].beta));
        }
        return blue_variance_from_gains(views, net.sigma_theta2, a2);
    };

    // Variance is strictly decreasing in the common power.
    double lo = 1.0;
    double hi = 1.0;
    if (variance_at(1.0) > net.d0_target) {
        for (int i = 0; i < 2000 && variance_at(hi) > net.d0_target; ++i) {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        for (int i = 0; i < 2000 && variance_at(lo) <= net.d0_target; ++i) {
            hi = lo;
            lo *= 0.5;
        }
    }
    for (int it = 0; it < 400 && hi / lo - 1.0 > 1e-14; ++it) {
        const double mid = std::sqrt(lo) * std::sqrt(hi);
        if (mid <= lo || mid >= hi) break;
        if (variance_at(mid) > net.d0_target) lo = mid; else hi = mid;
    }
    EqualPower out;
    out.power = std::sqrt(lo) * std::sqrt(hi);
    out.cost = std::sqrt(static_cast<double>(views.size())) * out.power;
    return out;
}

namespace {

void evaluate_on(const NetworkRealization& net, const SimulationConfig& cfg, const Codebook* book,
                 TrialRecord& rec) {
    rec.d0 = net.d0_target;
    rec.k = net.size();
    AllocationResult full;
    try {
        full = waterfill(net, cfg.solver);
    } catch (const InfeasibleError&) {
        rec.feasible = false;
        return;
    }
    rec.feasible = true;
    rec.cost_full = full.cost_j;
    rec.variance_full = full.variance;
    rec.k1 = full.k1;
    rec.cost_equal = equal_power_baseline(net).cost;
    if (book) {
        if (book->k != net.size()) {
            throw Error(ErrorCode::DimensionMismatch,
                        "codebook K = " + std::to_string(book->k) + " but network has " +
                            std::to_string(net.size()) + " sensors");
        }
        const auto views = derive_views(net);
        const std::size_t idx = select_index(*book, full.cost_j);
        const auto& word = book->entries[idx];
        rec.l = book->bits;
        rec.cost_quantized = cost_j(powers_from_gains(views, word));
        rec.variance_quantized = blue_variance_from_gains(views, net.sigma_theta2, word);
    }
}

bool book_applies(const Codebook* book, double d0) {
    return book && (!(book->meta.d0 > 0.0) || same_d0(book->meta.d0, d0));
}

}  // namespace

TrialRecord run_trial(const SimulationConfig& cfg, std::size_t k, double d0,
                      std::size_t trial_index, const Codebook* book) {
    const auto net = sample_realization(cfg, k, trial_index, d0);
    TrialRecord rec;
    rec.trial = trial_index;
    evaluate_on(net, cfg, book, rec);
    return rec;
}

TrialRecord run_trial(const SimulationConfig& cfg, std::size_t trial_index, const Codebook* book) {
    return run_trial(cfg, cfg.k_grid.front(), cfg.d0_grid.front(), trial_index, book);
}

namespace {

class StatAccumulator {
public:
    void add(double x) {
        sum_ += x;
        sq_ += x * x;
        ++n_;
    }
    Stat finish() const {
        Stat s;
        s.n = n_;
        if (n_ == 0) {
            s.mean = std::numeric_limits<double>::quiet_NaN();
            s.se = s.mean;
            return s;
        }
        const double n = static_cast<double>(n_);
        s.mean = sum_.value() / n;
        if (n_ < 2) {
            s.se = std::numeric_limits<double>::quiet_NaN();
        } else {
            const double var = std::max(0.0, (sq_.value() - n * s.mean * s.mean) / (n - 1.0));
            s.se = std::sqrt(var / n);
        }
        return s;
    }

private:
    CompensatedSum sum_;
    CompensatedSum sq_;
    std::size_t n_ = 0;
};

}  // namespace

SweepSummary summarize(const std::vector<TrialRecord>& records) {
    struct Acc {
        SummaryCell cell;
        StatAccumulator full, equal, quant, gap;
        std::size_t overshoot = 0;
        CompensatedSum rel_overshoot;
        bool any_quant = false;
    };
    // Cells in order of first appearance.
    std::vector<Acc> accs;
    std::map<std::tuple<double, std::size_t, int>, std::size_t> index;
    for (const auto& r : records) {
        const auto key = std::make_tuple(r.d0, r.k, r.l ? static_cast<int>(*r.l) : -1);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, accs.size()).first;
            Acc a;
            a.cell.d0 = r.d0;
            a.cell.k = r.k;
            a.cell.l = r.l;
            accs.push_back(std::move(a));
        }
        auto& a = accs[it->second];
        ++a.cell.trials;
        if (!r.feasible) {
            ++a.cell.infeasible;
            continue;
        }
        a.full.add(r.cost_full);
        a.equal.add(r.cost_equal);
        if (r.cost_quantized) {
            a.any_quant = true;
            a.quant.add(*r.cost_quantized);
            a.gap.add(std::abs(*r.cost_quantized - r.cost_full));
            const double v = r.variance_quantized.value_or(std::numeric_limits<double>::infinity());
            if (v > r.d0) ++a.overshoot;
            a.rel_overshoot += std::isinf(v) ? std::numeric_limits<double>::infinity()
                                             : std::max(0.0, v / r.d0 - 1.0);
        }
    }
    SweepSummary out;
    for (auto& a : accs) {
        a.cell.cost_full = a.full.finish();
        a.cell.cost_equal = a.equal.finish();
        if (a.any_quant) {
            a.cell.cost_quantized = a.quant.finish();
            a.cell.abs_gap = a.gap.finish();
            const double n = static_cast<double>(a.cell.cost_quantized->n);
            a.cell.overshoot_rate = static_cast<double>(a.overshoot) / n;
            a.cell.mean_relative_overshoot = a.rel_overshoot.value() / n;
        }
        out.cells.push_back(a.cell);
    }
    return out;
}

SweepResult monte_carlo(const SimulationConfig& cfg, const Codebook* book, unsigned threads) {
    cfg.validate();
    std::vector<double> d0s = cfg.d0_grid;
    if (book) {
        for (auto k : cfg.k_grid) {
            if (k != book->k) {
                throw Error(ErrorCode::DimensionMismatch,
                            "codebook K = " + std::to_string(book->k) + " but config K = " +
                                std::to_string(k));
            }
        }
        if (book->meta.profile_seed && cfg.profile_seed && *book->meta.profile_seed != *cfg.profile_seed) {
            throw Error(ErrorCode::InvalidArgument,
                        "codebook was trained for profile_seed " +
                            std::to_string(*book->meta.profile_seed) + ", config has " +
                            std::to_string(*cfg.profile_seed));
        }
        if (book->meta.d0 > 0.0 &&
            std::none_of(d0s.begin(), d0s.end(), [&](double d) { return same_d0(d, book->meta.d0); })) {
            d0s.push_back(book->meta.d0);
        }
    }

    SweepResult out;
    const std::size_t n = cfg.trials;
    for (std::size_t k : cfg.k_grid) {
        std::vector<TrialRecord> block(n * d0s.size());
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                auto net = sample_realization(cfg, k, t, d0s.front());
                for (std::size_t j = 0; j < d0s.size(); ++j) {
                    net.d0_target = d0s[j];
                    auto& rec = block[j * n + t];
                    rec.trial = t;
                    evaluate_on(net, cfg, book_applies(book, d0s[j]) ? book : nullptr, rec);
                }
            }
        });
        out.records.insert(out.records.end(), block.begin(), block.end());
    }
    out.summary = summarize(out.records);
    return out;
}

TrainingSet build_training_set(const SimulationConfig& cfg, std::size_t k, double d0,
                               unsigned threads, std::size_t* skipped) {
    cfg.validate();
    const std::size_t m = cfg.training_m;
    std::vector<std::optional<std::pair<std::vector<double>, double>>> rows(m);
    parallel_for(m, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto net = sample_realization(cfg, k, i, d0, Stream::Training);
            try {
                auto res = waterfill(net, cfg.solver);
                rows[i].emplace(std::move(res.a2), res.cost_j);
            } catch (const InfeasibleError&) {
            }
        }
    });
    TrainingSet ts;
    std::size_t miss = 0;
    for (auto& r : rows) {
        if (!r) {
            ++miss;
            continue;
        }
        ts.vectors.push_back(std::move(r->first));
        ts.costs.push_back(r->second);
    }
    if (skipped) *skipped = miss;
    return ts;
}

Codebook train_codebook(const SimulationConfig& cfg, std::size_t k, double d0, unsigned bits,
                        unsigned threads) {
    std::size_t skipped = 0;
    const auto ts = build_training_set(cfg, k, d0, threads, &skipped);
    TrainOptions opts;
    opts.max_iterations = cfg.lloyd_max_iterations;
    opts.threads = threads;
    auto book = train(ts, bits, cfg.lloyd_epsilon, cfg.seed, opts);
    book.k = k;
    book.meta.d0 = d0;
    book.meta.sigma_theta2 = cfg.sigma_theta2;
    book.meta.profile_seed = cfg.profile_seed;
    book.meta.skipped = skipped;
    if (cfg.profile_seed) book.meta.sensors = sample_realization(cfg, k, 0, d0).sensors;
    return book;
}

FeedbackComparison eval_feedback(const SimulationConfig& cfg,
                                 const std::vector<const Codebook*>& books, unsigned threads) {
    FeedbackComparison out;
    out.full = monte_carlo(cfg, nullptr, threads);
    for (const Codebook* b : books) {
        SimulationConfig at_book = cfg;
        if (b && b->meta.d0 > 0.0) at_book.d0_grid = {b->meta.d0};
        out.quantized.push_back(monte_carlo(at_book, b, threads));
    }
    return out;
}

}  // namespace wsnalloc
