#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agvcost/errors.hpp"
#include "agvcost/estimators.hpp"
#include "agvcost/types.hpp"

namespace agvcost {

// Shortest round-trippable-enough decimal form (9 significant digits),
// used for every floating-point field the harness writes.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Series CSV: header `t,arc,agv,duration`.
std::string series_to_csv(const std::vector<TraversalObservation>& series);
std::vector<TraversalObservation> series_from_csv(const std::string& text);

// Estimate CSV: header `t,observed,predicted,residual`; predicted/residual
// stay empty during warm-up. A trailing comment carries the summary stats.
struct EstimateRow {
    double t = 0.0;
    double observed = 0.0;
    std::optional<double> predicted;
    std::optional<double> residual;
};

std::string estimates_to_csv(const std::vector<EstimateRow>& rows, const ErrorStats& stats);

}  // namespace agvcost
