#pragma once

#include <string>

namespace agvcost {

using NodeId = std::string;
using ArcId = std::string;

// One measured arc traversal.
struct TraversalObservation {
    ArcId arc;
    std::string agv;
    double start_time = 0.0;  // seconds since mission epoch
    double duration = 0.0;    // seconds, always > 0
};

}  // namespace agvcost
