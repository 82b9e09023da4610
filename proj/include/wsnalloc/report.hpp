#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wsnalloc/model.hpp"
#include "wsnalloc/simkit.hpp"

namespace wsnalloc {

inline constexpr const char* kRecordsHeader =
    "trial,d0,k,l,cost_full,cost_equal,cost_quantized,variance_quantized,k1,feasible";

/// Shortest exact text for a double ("%.17g"); inf/nan spelled out.
std::string format_number(double v);

void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records);
std::string records_csv(const std::vector<TrialRecord>& records);

/// JSON object keyed "d0=<d0>,k=<k>,l=<l|full>".
std::string summary_json(const SweepSummary& summary);

/// Per-d0 comparison of mean costs: d0,k,full,l<bits>...
std::string feedback_table_csv(const FeedbackComparison& cmp,
                               const std::vector<unsigned>& bits);

std::string allocation_json(const NetworkRealization& net, const AllocationResult& res);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace wsnalloc
