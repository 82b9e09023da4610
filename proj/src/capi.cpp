#include "wsnalloc/wsnalloc.h"

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsnalloc/allocator.hpp"
#include "wsnalloc/codebook.hpp"
#include "wsnalloc/config.hpp"
#include "wsnalloc/error.hpp"
#include "wsnalloc/report.hpp"
#include "wsnalloc/simkit.hpp"

struct wsnalloc_config {
    wsnalloc::CliConfig cli;
};

struct wsnalloc_allocation {
    wsnalloc::NetworkRealization net;
    wsnalloc::AllocationResult result;
};

struct wsnalloc_codebook {
    wsnalloc::Codebook book;
};

namespace {

thread_local std::string g_last_error;

wsnalloc_status status_for(wsnalloc::ErrorCode code) {
    using wsnalloc::ErrorCode;
    switch (code) {
        case ErrorCode::Parse: return WSNALLOC_ERR_PARSE;
        case ErrorCode::Infeasible: return WSNALLOC_ERR_INFEASIBLE;
        case ErrorCode::DimensionMismatch: return WSNALLOC_ERR_DIMENSION;
        case ErrorCode::Io: return WSNALLOC_ERR_IO;
        case ErrorCode::BracketFailure:
        case ErrorCode::NonMonotoneCoupling:
        case ErrorCode::AllChannelsSilent: return WSNALLOC_ERR_NUMERIC;
        default: return WSNALLOC_ERR_INVALID_ARGUMENT;
    }
}

wsnalloc_status fail(wsnalloc_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
wsnalloc_status guarded(Fn&& fn, double* min_variance = nullptr) {
    try {
        fn();
        return WSNALLOC_OK;
    } catch (const wsnalloc::InfeasibleError& e) {
        if (min_variance) *min_variance = e.min_variance();
        return fail(WSNALLOC_ERR_INFEASIBLE, e.what());
    } catch (const wsnalloc::Error& e) {
        return fail(status_for(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(WSNALLOC_ERR_PARSE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(WSNALLOC_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(WSNALLOC_ERR_INTERNAL, e.what());
    }
}

wsnalloc_status copy_vector(const std::vector<double>& src, double* dst, size_t len) {
    if (!dst) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null destination");
    if (len != src.size()) {
        return fail(WSNALLOC_ERR_DIMENSION, "destination length " + std::to_string(len) +
                                                " differs from " + std::to_string(src.size()));
    }
    std::copy(src.begin(), src.end(), dst);
    return WSNALLOC_OK;
}

}  // namespace

extern "C" {

const char* wsnalloc_version(void) { return "1.0.0"; }

const char* wsnalloc_last_error(void) { return g_last_error.c_str(); }

const char* wsnalloc_status_name(wsnalloc_status status) {
    switch (status) {
        case WSNALLOC_OK: return "ok";
        case WSNALLOC_ERR_PARSE: return "parse error";
        case WSNALLOC_ERR_INFEASIBLE: return "infeasible";
        case WSNALLOC_ERR_INVALID_ARGUMENT: return "invalid argument";
        case WSNALLOC_ERR_DIMENSION: return "dimension mismatch";
        case WSNALLOC_ERR_IO: return "i/o error";
        case WSNALLOC_ERR_NUMERIC: return "numerical failure";
        case WSNALLOC_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

wsnalloc_status wsnalloc_config_load(const char* path, wsnalloc_config** out) {
    if (!path || !out) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new wsnalloc_config{wsnalloc::load_config(path)}; });
}

wsnalloc_status wsnalloc_config_parse(const char* json_text, wsnalloc_config** out) {
    if (!json_text || !out) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new wsnalloc_config{wsnalloc::parse_config(json_text)}; });
}

void wsnalloc_config_free(wsnalloc_config* cfg) { delete cfg; }

wsnalloc_status wsnalloc_config_set_seed(wsnalloc_config* cfg, uint64_t seed) {
    if (!cfg) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null config");
    cfg->cli.sim.seed = seed;
    return WSNALLOC_OK;
}

wsnalloc_status wsnalloc_config_set_trials(wsnalloc_config* cfg, uint64_t trials) {
    if (!cfg) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null config");
    if (trials == 0) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "trials must be at least 1");
    cfg->cli.sim.trials = static_cast<std::size_t>(trials);
    return WSNALLOC_OK;
}

size_t wsnalloc_config_k(const wsnalloc_config* cfg) {
    return cfg ? cfg->cli.sim.k_grid.front() : 0;
}

double wsnalloc_config_sigma_theta2(const wsnalloc_config* cfg) {
    return cfg ? cfg->cli.sim.sigma_theta2 : 0.0;
}

double wsnalloc_config_default_d0(const wsnalloc_config* cfg) {
    if (!cfg) return 0.0;
    return cfg->cli.sim.codebook_d0.value_or(cfg->cli.sim.d0_grid.front());
}

unsigned wsnalloc_config_codebook_bits(const wsnalloc_config* cfg) {
    return cfg ? cfg->cli.sim.codebook_bits.value_or(0u) : 0u;
}

const char* wsnalloc_config_output(const wsnalloc_config* cfg, const char* name) {
    if (!cfg || !name) return nullptr;
    const auto& o = cfg->cli.outputs;
    const std::optional<std::string>* slot = nullptr;
    if (!std::strcmp(name, "results")) slot = &o.results;
    else if (!std::strcmp(name, "summary")) slot = &o.summary;
    else if (!std::strcmp(name, "codebook")) slot = &o.codebook;
    else if (!std::strcmp(name, "allocation")) slot = &o.allocation;
    else if (!std::strcmp(name, "table")) slot = &o.table;
    return slot && *slot ? (*slot)->c_str() : nullptr;
}

wsnalloc_status wsnalloc_allocate(size_t k, const double* h, const double* sigma_o2,
                                  const double* g, const double* sigma_c2, double sigma_theta2,
                                  double d0, wsnalloc_allocation** out, double* min_variance) {
    if (!out || (k > 0 && (!h || !sigma_o2 || !g || !sigma_c2))) {
        return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    }
    *out = nullptr;
    return guarded(
        [&] {
            wsnalloc::NetworkRealization net;
            net.sigma_theta2 = sigma_theta2;
            net.d0_target = d0;
            for (size_t i = 0; i < k; ++i) {
                net.sensors.push_back({h[i], sigma_o2[i]});
                net.channels.push_back({g[i], sigma_c2[i]});
            }
            auto res = wsnalloc::waterfill(net);
            *out = new wsnalloc_allocation{std::move(net), std::move(res)};
        },
        min_variance);
}

wsnalloc_status wsnalloc_allocate_file(const wsnalloc_config* cfg, const char* realization_path,
                                       double d0, wsnalloc_allocation** out,
                                       double* min_variance) {
    if (!cfg || !realization_path || !out) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded(
        [&] {
            auto net = wsnalloc::load_realization(realization_path, cfg->cli.sim.sigma_theta2,
                                                  wsnalloc_config_default_d0(cfg));
            if (d0 > 0.0) net.d0_target = d0;
            auto res = wsnalloc::waterfill(net, cfg->cli.sim.solver);
            *out = new wsnalloc_allocation{std::move(net), std::move(res)};
        },
        min_variance);
}

void wsnalloc_allocation_free(wsnalloc_allocation* a) { delete a; }
size_t wsnalloc_allocation_k(const wsnalloc_allocation* a) { return a ? a->net.size() : 0; }
size_t wsnalloc_allocation_k1(const wsnalloc_allocation* a) { return a ? a->result.k1 : 0; }
double wsnalloc_allocation_lambda0(const wsnalloc_allocation* a) { return a ? a->result.lambda0 : 0.0; }
double wsnalloc_allocation_cost(const wsnalloc_allocation* a) { return a ? a->result.cost_j : 0.0; }
double wsnalloc_allocation_variance(const wsnalloc_allocation* a) { return a ? a->result.variance : 0.0; }

wsnalloc_status wsnalloc_allocation_b(const wsnalloc_allocation* a, double* dst, size_t len) {
    if (!a) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null allocation");
    return copy_vector(a->result.b, dst, len);
}

wsnalloc_status wsnalloc_allocation_a2(const wsnalloc_allocation* a, double* dst, size_t len) {
    if (!a) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null allocation");
    return copy_vector(a->result.a2, dst, len);
}

wsnalloc_status wsnalloc_allocation_power(const wsnalloc_allocation* a, double* dst, size_t len) {
    if (!a) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null allocation");
    return copy_vector(a->result.power, dst, len);
}

wsnalloc_status wsnalloc_allocation_write_json(const wsnalloc_allocation* a, const char* path) {
    if (!a || !path) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        wsnalloc::write_text_file(path, wsnalloc::allocation_json(a->net, a->result));
    });
}

wsnalloc_status wsnalloc_train_codebook(const wsnalloc_config* cfg, unsigned bits, double d0,
                                        unsigned threads, wsnalloc_codebook** out) {
    if (!cfg || !out) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const auto& sim = cfg->cli.sim;
        const double target = d0 > 0.0 ? d0 : wsnalloc_config_default_d0(cfg);
        auto book = wsnalloc::train_codebook(sim, sim.k_grid.front(), target, bits, threads);
        *out = new wsnalloc_codebook{std::move(book)};
    });
}

wsnalloc_status wsnalloc_codebook_load(const char* path, wsnalloc_codebook** out) {
    if (!path || !out) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new wsnalloc_codebook{wsnalloc::load_codebook(path)}; });
}

wsnalloc_status wsnalloc_codebook_save(const wsnalloc_codebook* book, const char* path) {
    if (!book || !path) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { wsnalloc::save_codebook(book->book, path); });
}

void wsnalloc_codebook_free(wsnalloc_codebook* book) { delete book; }
unsigned wsnalloc_codebook_bits(const wsnalloc_codebook* b) { return b ? b->book.bits : 0; }
size_t wsnalloc_codebook_k(const wsnalloc_codebook* b) { return b ? b->book.k : 0; }
size_t wsnalloc_codebook_iterations(const wsnalloc_codebook* b) { return b ? b->book.meta.iterations : 0; }
size_t wsnalloc_codebook_skipped(const wsnalloc_codebook* b) { return b ? b->book.meta.skipped : 0; }
double wsnalloc_codebook_final_distortion(const wsnalloc_codebook* b) {
    return b ? b->book.meta.final_distortion : 0.0;
}
double wsnalloc_codebook_d0(const wsnalloc_codebook* b) { return b ? b->book.meta.d0 : 0.0; }

wsnalloc_status wsnalloc_codebook_entry(const wsnalloc_codebook* b, size_t index, double* dst,
                                        size_t len) {
    if (!b) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null codebook");
    if (index >= b->book.size()) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "codeword index out of range");
    return copy_vector(b->book.entries[index], dst, len);
}

wsnalloc_status wsnalloc_codebook_select(const wsnalloc_codebook* b, double optimal_cost,
                                         size_t* index) {
    if (!b || !index) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *index = wsnalloc::select_index(b->book, optimal_cost); });
}

wsnalloc_status wsnalloc_simulate(const wsnalloc_config* cfg, const wsnalloc_codebook* book,
                                  unsigned threads, const char* csv_path,
                                  const char* summary_path) {
    if (!cfg || !csv_path) return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto res = wsnalloc::monte_carlo(cfg->cli.sim, book ? &book->book : nullptr, threads);
        wsnalloc::write_text_file(csv_path, wsnalloc::records_csv(res.records));
        if (summary_path) wsnalloc::write_text_file(summary_path, wsnalloc::summary_json(res.summary));
    });
}

wsnalloc_status wsnalloc_eval_feedback(const wsnalloc_config* cfg,
                                       const wsnalloc_codebook* const* books, size_t n_books,
                                       unsigned threads, const char* table_path,
                                       const char* records_path, const char* summary_path) {
    if (!cfg || !table_path || (n_books > 0 && !books)) {
        return fail(WSNALLOC_ERR_INVALID_ARGUMENT, "null argument");
    }
    return guarded([&] {
        std::vector<const wsnalloc::Codebook*> list;
        std::vector<unsigned> bits;
        for (size_t i = 0; i < n_books; ++i) {
            if (!books[i]) throw wsnalloc::Error(wsnalloc::ErrorCode::InvalidArgument, "null codebook in list");
            if (books[i]->book.k != books[0]->book.k) {
                throw wsnalloc::Error(wsnalloc::ErrorCode::DimensionMismatch,
                                      "codebooks in the list have different K");
            }
            list.push_back(&books[i]->book);
            bits.push_back(books[i]->book.bits);
        }
        const auto cmp = wsnalloc::eval_feedback(cfg->cli.sim, list, threads);
        wsnalloc::write_text_file(table_path, wsnalloc::feedback_table_csv(cmp, bits));
        std::vector<wsnalloc::TrialRecord> all = cmp.full.records;
        wsnalloc::SweepSummary summary = cmp.full.summary;
        for (const auto& q : cmp.quantized) {
            all.insert(all.end(), q.records.begin(), q.records.end());
            for (const auto& c : q.summary.cells) {
                if (c.l) summary.cells.push_back(c);
            }
        }
        if (records_path) wsnalloc::write_text_file(records_path, wsnalloc::records_csv(all));
        if (summary_path) wsnalloc::write_text_file(summary_path, wsnalloc::summary_json(summary));
    });
}

}  // extern "C"
