#pragma once

#include <stdexcept>
#include <string>

namespace agvcost {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller misuse: bad parameter values, dimension mismatches, wrong call order.
struct UsageError : Error {
    using Error::Error;
};

// Malformed input document (graph, config or CSV); carries a 1-based line number.
struct ParseError : Error {
    ParseError(const std::string& what, int line_no)
        : Error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    int line;
};

// Numeric breakdown inside a filter (singular window matrix, bad update denominator).
struct NumericError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// No admissible route: destination unreachable or every candidate conflicted.
struct PlanningError : Error {
    using Error::Error;
};

// Battery reached the halt threshold; ends a series or aborts a mission.
struct RobotHalted : Error {
    explicit RobotHalted(double when)
        : Error("robot halted at t=" + std::to_string(when)), t(when) {}
    double t;
};

}  // namespace agvcost
