#pragma once

#include "spn/align.hpp"
#include "spn/learn.hpp"
#include "spn/neural.hpp"

#include <string>
#include <vector>

namespace spn {

/// One JSON object per line and per alignment: rank, rows, columns as
/// (row, position) pairs, N_o, N_e, CD, relative probability, encoding.
std::string alignments_jsonl(const std::vector<Alignment>& ranked);

/// Scores table followed by every rendered alignment and its encoding.
std::string render_report(const std::vector<Alignment>& ranked);

/// One line per entry decision, then one line per pass.
std::string learn_trace_jsonl(const LearnResult& result);

/// Assemblies, neurons, connections and bundles as plain text.
std::string network_dump(const Network& network);

/// One line per tick and assembly: tick, pattern, activation, fired.
std::string tick_trace_jsonl(const Recognition& recognition);

} // namespace spn
