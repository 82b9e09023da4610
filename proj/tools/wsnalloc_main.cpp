// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsnalloc/wsnalloc.h"

namespace {

struct ConfigDeleter {
    void operator()(wsnalloc_config* c) const { wsnalloc_config_free(c); }
};
struct BookDeleter {
    void operator()(wsnalloc_codebook* b) const { wsnalloc_codebook_free(b); }
};
struct AllocDeleter {
    void operator()(wsnalloc_allocation* a) const { wsnalloc_allocation_free(a); }
};
using ConfigPtr = std::unique_ptr<wsnalloc_config, ConfigDeleter>;
using BookPtr = std::unique_ptr<wsnalloc_codebook, BookDeleter>;
using AllocPtr = std::unique_ptr<wsnalloc_allocation, AllocDeleter>;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

// Exit codes: 0 ok, 1 usage/parse, 2 infeasible. Other library failures map to 1.
int exit_code(wsnalloc_status s) {
    if (s == WSNALLOC_OK) return 0;
    if (s == WSNALLOC_ERR_INFEASIBLE) return 2;
    return 1;
}

int report(wsnalloc_status s) {
    if (s != WSNALLOC_OK) {
        std::fprintf(stderr, "wsnalloc: %s: %s\n", wsnalloc_status_name(s), wsnalloc_last_error());
    }
    return exit_code(s);
}

wsnalloc_status load(const Common& c, ConfigPtr& cfg) {
    wsnalloc_config* raw = nullptr;
    const wsnalloc_status s = c.config.empty() ? wsnalloc_config_parse("{}", &raw)
                                               : wsnalloc_config_load(c.config.c_str(), &raw);
    cfg.reset(raw);
    if (s != WSNALLOC_OK) return s;
    if (c.seed) return wsnalloc_config_set_seed(cfg.get(), *c.seed);
    return WSNALLOC_OK;
}

// --out wins, then the config's output block, then a fallback name.
std::string pick(const std::string& flag, const wsnalloc_config* cfg, const char* key,
                 const char* fallback) {
    if (!flag.empty()) return flag;
    if (const char* p = wsnalloc_config_output(cfg, key)) return p;
    return fallback;
}

std::string sibling(const std::string& path, const char* suffix) {
    std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void add_common(CLI::App* sub, Common& c, bool needs_config) {
    auto* opt = sub->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    if (needs_config) opt->required();
    sub->add_option("--out", c.out, "output path");
    sub->add_option("--seed", c.seed, "override the config seed");
    sub->add_option("--threads", c.threads, "worker cap (0 = all cores)");
}

int cmd_allocate(const Common& c, const std::string& realization, double d0) {
    ConfigPtr cfg;
    if (auto s = load(c, cfg); s != WSNALLOC_OK) return report(s);
    wsnalloc_allocation* raw = nullptr;
    double min_var = 0.0;
    const auto s = wsnalloc_allocate_file(cfg.get(), realization.c_str(), d0, &raw, &min_var);
    AllocPtr alloc(raw);
    if (s == WSNALLOC_ERR_INFEASIBLE) {
        std::fprintf(stderr,
                     "wsnalloc: infeasible: target variance is below the minimum achievable "
                     "sigma_theta2/sum(beta) = %.17g\n",
                     min_var);
        return 2;
    }
    if (s != WSNALLOC_OK) return report(s);
    const std::string out = pick(c.out, cfg.get(), "allocation", "allocation.json");
    if (auto w = wsnalloc_allocation_write_json(alloc.get(), out.c_str()); w != WSNALLOC_OK) return report(w);
    std::printf("k1=%zu/%zu cost=%.17g variance=%.17g -> %s\n", wsnalloc_allocation_k1(alloc.get()),
                wsnalloc_allocation_k(alloc.get()), wsnalloc_allocation_cost(alloc.get()),
                wsnalloc_allocation_variance(alloc.get()), out.c_str());
    return 0;
}

int cmd_train(const Common& c, unsigned bits, double d0) {
    ConfigPtr cfg;
    if (auto s = load(c, cfg); s != WSNALLOC_OK) return report(s);
    if (bits == 0) bits = wsnalloc_config_codebook_bits(cfg.get());
    if (bits == 0) {
        std::fprintf(stderr, "wsnalloc: --bits is required (or set codebook_bits in the config)\n");
        return 1;
    }
    wsnalloc_codebook* raw = nullptr;
    const auto s = wsnalloc_train_codebook(cfg.get(), bits, d0, c.threads, &raw);
    BookPtr book(raw);
    if (s != WSNALLOC_OK) return report(s);
    if (const auto skipped = wsnalloc_codebook_skipped(book.get()); skipped > 0) {
        std::fprintf(stderr, "wsnalloc: warning: %zu training realizations were infeasible and skipped\n",
                     skipped);
    }
    const std::string out = pick(c.out, cfg.get(), "codebook", "codebook.json");
    if (auto w = wsnalloc_codebook_save(book.get(), out.c_str()); w != WSNALLOC_OK) return report(w);
    std::printf("bits=%u k=%zu iterations=%zu distortion=%.17g -> %s\n", bits,
                wsnalloc_codebook_k(book.get()), wsnalloc_codebook_iterations(book.get()),
                wsnalloc_codebook_final_distortion(book.get()), out.c_str());
    return 0;
}

wsnalloc_status load_books(const std::vector<std::string>& paths, std::vector<BookPtr>& books) {
    for (const auto& p : paths) {
        wsnalloc_codebook* raw = nullptr;
        const auto s = wsnalloc_codebook_load(p.c_str(), &raw);
        if (s != WSNALLOC_OK) return s;
        books.emplace_back(raw);
    }
    return WSNALLOC_OK;
}

int cmd_simulate(const Common& c, const std::string& codebook) {
    ConfigPtr cfg;
    if (auto s = load(c, cfg); s != WSNALLOC_OK) return report(s);
    std::vector<BookPtr> books;
    if (!codebook.empty()) {
        if (auto s = load_books({codebook}, books); s != WSNALLOC_OK) return report(s);
    }
    const std::string out = pick(c.out, cfg.get(), "results", "results.csv");
    const std::string summary =
        c.out.empty() && wsnalloc_config_output(cfg.get(), "summary")
            ? wsnalloc_config_output(cfg.get(), "summary")
            : sibling(out, ".summary.json");
    const auto s = wsnalloc_simulate(cfg.get(), books.empty() ? nullptr : books.front().get(),
                                     c.threads, out.c_str(), summary.c_str());
    if (s != WSNALLOC_OK) return report(s);
    std::printf("results -> %s\nsummary -> %s\n", out.c_str(), summary.c_str());
    return 0;
}

int cmd_eval(const Common& c, const std::vector<std::string>& codebooks) {
    ConfigPtr cfg;
    if (auto s = load(c, cfg); s != WSNALLOC_OK) return report(s);
    std::vector<BookPtr> books;
    if (auto s = load_books(codebooks, books); s != WSNALLOC_OK) return report(s);
    std::vector<const wsnalloc_codebook*> list;
    for (const auto& b : books) list.push_back(b.get());
    const std::string table = pick(c.out, cfg.get(), "table", "feedback.csv");
    const std::string records = sibling(table, ".records.csv");
    const std::string summary = sibling(table, ".summary.json");
    const auto s = wsnalloc_eval_feedback(cfg.get(), list.data(), list.size(), c.threads, table.c_str(),
                                          records.c_str(), summary.c_str());
    if (s != WSNALLOC_OK) return report(s);
    std::printf("table -> %s\nrecords -> %s\nsummary -> %s\n", table.c_str(), records.c_str(),
                summary.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"L2-optimal power allocation and limited-feedback codebooks for sensor networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(wsnalloc_version()));

    Common common;

    auto* allocate = app.add_subcommand("allocate", "solve one channel realization");
    add_common(allocate, common, false);
    std::string realization;
    double d0 = 0.0;
    allocate->add_option("--realization", realization, "realization JSON")->required()->check(CLI::ExistingFile);
    allocate->add_option("--d0", d0, "variance target (overrides file and config)")->check(CLI::PositiveNumber);

    auto* train = app.add_subcommand("train-codebook", "sample, solve and train a Lloyd codebook");
    add_common(train, common, true);
    unsigned bits = 0;
    train->add_option("--bits", bits, "feedback bits L")->check(CLI::Range(1u, 24u));
    train->add_option("--d0", d0, "variance target used for training")->check(CLI::PositiveNumber);

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo sweep over the K and D0 grids");
    add_common(simulate, common, true);
    std::string codebook;
    simulate->add_option("--codebook", codebook, "codebook JSON")->check(CLI::ExistingFile);

    auto* eval = app.add_subcommand("eval-feedback", "compare full feedback with one or more codebooks");
    add_common(eval, common, true);
    std::vector<std::string> codebooks;
    eval->add_option("--codebook", codebooks, "codebook JSON (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (allocate->parsed()) return cmd_allocate(common, realization, d0);
    if (train->parsed()) return cmd_train(common, bits, d0);
    if (simulate->parsed()) return cmd_simulate(common, codebook);
    return cmd_eval(common, codebooks);
}
