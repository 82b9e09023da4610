#include "wsnalloc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "wsnalloc/error.hpp"

namespace wsnalloc {

namespace {

using nlohmann::json;

enum Units : unsigned { Linear = 0, Db = 1, Dbm = 2 };

class Reader {
public:
    Reader(const json& doc, std::string source) : doc_(doc), source_(std::move(source)) {
        if (!doc_.is_object()) fail("", "top level must be an object");
    }

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
        throw Error(ErrorCode::Parse, source_ + ": /" + pointer + ": " + msg);
    }

    // Finds `base`, `base_db` or `base_dbm` (as allowed by `units`). Returns
    // the JSON value and which form was used.
    std::optional<std::pair<const json*, Units>> find(const std::string& base, unsigned units) {
        std::optional<std::pair<const json*, Units>> hit;
        std::string used;
        auto probe = [&](const std::string& key, Units u) {
            if (!doc_.contains(key)) return;
            seen_.insert(key);
            if (hit) fail(key, "given together with '" + used + "'; use exactly one form");
            hit.emplace(&doc_.at(key), u);
            used = key;
        };
        probe(base, Linear);
        if (units & 1u) probe(base + "_db", Db);
        if (units & 2u) probe(base + "_dbm", Dbm);
        if (hit) last_key_ = used;
        return hit;
    }

    double to_linear(double v, Units u) const {
        switch (u) {
            case Db: return db_to_linear(v);
            case Dbm: return dbm_to_watts(v);
            default: return v;
        }
    }

    double number(const json& v, const std::string& ptr) const {
        if (!v.is_number()) fail(ptr, "expected a number");
        return v.get<double>();
    }

    void real(const std::string& base, unsigned units, double& out) {
        if (auto hit = find(base, units)) out = to_linear(number(*hit->first, last_key_), hit->second);
    }

    void optional_real(const std::string& base, unsigned units, std::optional<double>& out) {
        if (auto hit = find(base, units)) {
            if (hit->first->is_null()) {
                out.reset();
            } else {
                out = to_linear(number(*hit->first, last_key_), hit->second);
            }
        }
    }

    void range(const std::string& base, unsigned units, double& lo, double& hi) {
        if (auto hit = find(base, units)) {
            const json& v = *hit->first;
            if (!v.is_array() || v.size() != 2) fail(last_key_, "expected [low, high]");
            lo = to_linear(number(v[0], last_key_ + "/0"), hit->second);
            hi = to_linear(number(v[1], last_key_ + "/1"), hit->second);
            if (!(hi >= lo)) fail(last_key_, "high must not be below low");
        }
    }

    std::uint64_t unsigned_integer(const json& v, const std::string& ptr) const {
        if (!v.is_number_unsigned()) fail(ptr, "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    template <typename T>
    void integer(const std::string& key, T& out) {
        if (auto hit = find(key, 0)) out = static_cast<T>(unsigned_integer(*hit->first, key));
    }

    template <typename T>
    void optional_integer(const std::string& key, std::optional<T>& out) {
        if (auto hit = find(key, 0)) {
            if (hit->first->is_null()) out.reset();
            else out = static_cast<T>(unsigned_integer(*hit->first, key));
        }
    }

    const json* object(const std::string& key) {
        if (!doc_.contains(key)) return nullptr;
        seen_.insert(key);
        const json& v = doc_.at(key);
        if (!v.is_object()) fail(key, "expected an object");
        return &v;
    }

    const json* raw(const std::string& key) {
        if (!doc_.contains(key)) return nullptr;
        seen_.insert(key);
        return &doc_.at(key);
    }

    void reject_unknown() const {
        for (const auto& [key, _] : doc_.items()) {
            if (!seen_.count(key)) fail(key, "unknown key");
        }
    }

private:
    const json& doc_;
    std::string source_;
    std::set<std::string> seen_;
    std::string last_key_;
};

json parse_json(std::string_view text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Convert the byte offset into line:column.
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::Parse, source + ":" + std::to_string(line) + ":" +
                                          std::to_string(col) + ": " + e.what());
    }
}

void read_outputs(const json& obj, const std::string& source, OutputPaths& out) {
    static const std::set<std::string> known{"results", "summary", "codebook", "allocation", "table"};
    for (const auto& [key, v] : obj.items()) {
        if (!known.count(key)) throw Error(ErrorCode::Parse, source + ": /output/" + key + ": unknown key");
        if (!v.is_string()) throw Error(ErrorCode::Parse, source + ": /output/" + key + ": expected a string");
    }
    auto get = [&](const char* k, std::optional<std::string>& dst) {
        if (obj.contains(k)) dst = obj.at(k).get<std::string>();
    };
    get("results", out.results);
    get("summary", out.summary);
    get("codebook", out.codebook);
    get("allocation", out.allocation);
    get("table", out.table);
}

}  // namespace

CliConfig parse_config(std::string_view text, const std::string& source) {
    const json doc = parse_json(text, source);
    Reader r(doc, source);
    CliConfig cli;
    auto& c = cli.sim;

    if (const json* k = r.raw("k")) {
        c.k_grid.clear();
        if (k->is_array()) {
            for (std::size_t i = 0; i < k->size(); ++i) {
                c.k_grid.push_back(static_cast<std::size_t>(r.unsigned_integer((*k)[i], "k/" + std::to_string(i))));
            }
        } else {
            c.k_grid.push_back(static_cast<std::size_t>(r.unsigned_integer(*k, "k")));
        }
        if (c.k_grid.empty()) r.fail("k", "empty list");
    }
    if (const json* d = r.raw("d0_grid")) {
        if (!d->is_array() || d->empty()) r.fail("d0_grid", "expected a nonempty array of numbers");
        c.d0_grid.clear();
        for (std::size_t i = 0; i < d->size(); ++i) {
            const double v = r.number((*d)[i], "d0_grid/" + std::to_string(i));
            if (!(v > 0.0)) r.fail("d0_grid/" + std::to_string(i), "must be positive");
            c.d0_grid.push_back(v);
        }
    }
    r.real("sigma_theta2", Db, c.sigma_theta2);
    r.real("h_mean", 0, c.h_mean);
    r.real("h_var", 0, c.h_var);
    r.optional_real("h_power_target", Db, c.h_power_target);
    r.range("sigma_o2_range", Dbm, c.sigma_o2_low, c.sigma_o2_high);
    r.optional_real("noise_power_target", Dbm, c.noise_power_target);
    r.real("sigma_c2", Db | Dbm, c.sigma_c2);
    r.real("eta0", Db, c.eta0);
    r.real("ref_dist", 0, c.ref_dist);
    r.real("alpha", 0, c.alpha);
    r.range("dist_range", 0, c.dist_min, c.dist_max);
    r.integer("trials", c.trials);
    r.integer("seed", c.seed);
    r.optional_integer("profile_seed", c.profile_seed);
    r.optional_integer("codebook_bits", c.codebook_bits);
    r.optional_real("codebook_d0", 0, c.codebook_d0);
    r.integer("training_m", c.training_m);
    r.real("lloyd_epsilon", 0, c.lloyd_epsilon);
    r.integer("lloyd_max_iterations", c.lloyd_max_iterations);

    if (const json* s = r.object("solver")) {
        Reader sr(*s, source + ": /solver");
        sr.real("lambda_tol", 0, c.solver.lambda_tol);
        sr.real("residual_tol", 0, c.solver.residual_tol);
        sr.integer("max_bracket_doublings", c.solver.max_bracket_doublings);
        sr.reject_unknown();
    }
    if (const json* o = r.object("output")) read_outputs(*o, source, cli.outputs);
    r.reject_unknown();

    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Parse, source + ": " + e.what());
    }
    return cli;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliConfig load_config(const std::string& path) { return parse_config(read_text_file(path), path); }

NetworkRealization parse_realization(std::string_view text, const std::string& source,
                                     double default_sigma_theta2, double default_d0) {
    const json doc = parse_json(text, source);
    Reader r(doc, source);
    NetworkRealization net;
    net.sigma_theta2 = default_sigma_theta2;
    net.d0_target = default_d0;
    r.real("sigma_theta2", Db, net.sigma_theta2);
    r.real("d0", 0, net.d0_target);

    const json* sensors = r.raw("sensors");
    const json* channels = r.raw("channels");
    if (!sensors || !sensors->is_array()) r.fail("sensors", "expected an array");
    if (!channels || !channels->is_array()) r.fail("channels", "expected an array");
    for (std::size_t i = 0; i < sensors->size(); ++i) {
        const std::string where = source + ": /sensors/" + std::to_string(i);
        const json& s = (*sensors)[i];
        Reader sr(s, where);
        SensorProfile p;
        if (!s.contains("h")) sr.fail("h", "missing");
        sr.real("h", 0, p.h);
        bool have_noise = s.contains("sigma_o2") || s.contains("sigma_o2_db") || s.contains("sigma_o2_dbm");
        if (!have_noise) sr.fail("sigma_o2", "missing");
        sr.real("sigma_o2", Db | Dbm, p.sigma_o2);
        sr.reject_unknown();
        net.sensors.push_back(p);
    }
    for (std::size_t i = 0; i < channels->size(); ++i) {
        const std::string where = source + ": /channels/" + std::to_string(i);
        const json& s = (*channels)[i];
        Reader cr(s, where);
        ChannelRealization ch;
        if (!s.contains("g")) cr.fail("g", "missing");
        cr.real("g", 0, ch.g);
        bool have_noise = s.contains("sigma_c2") || s.contains("sigma_c2_db") || s.contains("sigma_c2_dbm");
        if (!have_noise) cr.fail("sigma_c2", "missing");
        cr.real("sigma_c2", Db | Dbm, ch.sigma_c2);
        cr.reject_unknown();
        net.channels.push_back(ch);
    }
    r.reject_unknown();
    try {
        net.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Parse, source + ": " + e.what());
    }
    return net;
}

NetworkRealization load_realization(const std::string& path, double default_sigma_theta2,
                                    double default_d0) {
    return parse_realization(read_text_file(path), path, default_sigma_theta2, default_d0);
}

}  // namespace wsnalloc
