#pragma once

#include <stdexcept>
#include <string>

namespace wmgraph {

// Invalid graph, location or observation input.
struct GraphError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A factorization or linear solve failed (matrix not SPD, singular block).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wmgraph

namespace wmgraph {

// Malformed input file; line is 1-based, 0 when unknown.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line_no)
        : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what), line(line_no) {}
    int line;
};

}  // namespace wmgraph
