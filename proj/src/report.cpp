#include "wsnalloc/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wsnalloc/error.hpp"

namespace wsnalloc {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << kRecordsHeader << '\n';
    for (const auto& r : records) {
        os << r.trial << ',' << format_number(r.d0) << ',' << r.k << ',';
        if (r.l) os << *r.l;
        os << ',';
        if (r.feasible) os << format_number(r.cost_full);
        os << ',';
        if (r.feasible) os << format_number(r.cost_equal);
        os << ',';
        if (r.cost_quantized) os << format_number(*r.cost_quantized);
        os << ',';
        if (r.variance_quantized) os << format_number(*r.variance_quantized);
        os << ',' << r.k1 << ',' << (r.feasible ? 1 : 0) << '\n';
    }
}

std::string records_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    write_records_csv(os, records);
    return os.str();
}

namespace {

using nlohmann::ordered_json;

ordered_json stat_json(const Stat& s) {
    ordered_json j;
    j["mean"] = s.mean;
    j["se"] = s.se;
    j["n"] = s.n;
    return j;
}

std::string cell_key(double d0, std::size_t k, std::optional<unsigned> l) {
    return "d0=" + format_number(d0) + ",k=" + std::to_string(k) +
           ",l=" + (l ? std::to_string(*l) : std::string("full"));
}

}  // namespace

std::string summary_json(const SweepSummary& summary) {
    ordered_json doc = ordered_json::object();
    for (const auto& c : summary.cells) {
        ordered_json j;
        j["d0"] = c.d0;
        j["k"] = c.k;
        if (c.l) j["l"] = *c.l; else j["l"] = nullptr;
        j["trials"] = c.trials;
        j["infeasible"] = c.infeasible;
        j["cost_full"] = stat_json(c.cost_full);
        j["cost_equal"] = stat_json(c.cost_equal);
        if (c.cost_quantized) {
            j["cost_quantized"] = stat_json(*c.cost_quantized);
            j["abs_gap"] = stat_json(*c.abs_gap);
            j["overshoot_rate"] = c.overshoot_rate;
            j["mean_relative_overshoot"] = c.mean_relative_overshoot;
        }
        doc[cell_key(c.d0, c.k, c.l)] = std::move(j);
    }
    return doc.dump(2) + "\n";
}

std::string feedback_table_csv(const FeedbackComparison& cmp, const std::vector<unsigned>& bits) {
    // Rows: (k, d0). Quantized columns are empty where a codebook was not
    // evaluated.
    std::map<std::pair<std::size_t, double>, std::vector<std::string>> rows;
    const std::size_t ncol = 1 + cmp.quantized.size();
    auto cell = [&](std::size_t k, double d0) -> std::vector<std::string>& {
        auto& r = rows[{k, d0}];
        if (r.empty()) r.resize(ncol);
        return r;
    };
    for (const auto& c : cmp.full.summary.cells) cell(c.k, c.d0)[0] = format_number(c.cost_full.mean);
    for (std::size_t b = 0; b < cmp.quantized.size(); ++b) {
        for (const auto& c : cmp.quantized[b].summary.cells) {
            auto& r = cell(c.k, c.d0);
            if (c.cost_quantized) r[1 + b] = format_number(c.cost_quantized->mean);
        }
    }
    std::ostringstream os;
    os << "k,d0,full";
    for (unsigned l : bits) os << ",l" << l;
    os << '\n';
    for (const auto& [key, vals] : rows) {
        os << key.first << ',' << format_number(key.second);
        for (const auto& v : vals) os << ',' << v;
        os << '\n';
    }
    return os.str();
}

std::string allocation_json(const NetworkRealization& net, const AllocationResult& res) {
    ordered_json j;
    j["k"] = net.size();
    j["sigma_theta2"] = net.sigma_theta2;
    j["d0"] = net.d0_target;
    j["k1"] = res.k1;
    j["lambda0"] = res.lambda0;
    j["cost"] = res.cost_j;
    j["variance"] = res.variance;
    j["b"] = res.b;
    j["a2"] = res.a2;
    j["power"] = res.power;
    j["fallback_count"] = res.fallback_count;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace wsnalloc
