#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace glare {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One landmark per row, columns are x/y/z.
using Coords = Eigen::Matrix<double, Eigen::Dynamic, 3>;

using IndexList = std::vector<int>;

// Directed edge: messages flow src -> dst.
struct Edge {
    int src = 0;
    int dst = 0;

    friend bool operator==(const Edge& a, const Edge& b) {
        return a.src == b.src && a.dst == b.dst;
    }
    friend bool operator<(const Edge& a, const Edge& b) {
        return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
    }
};

using EdgeList = std::vector<Edge>;

// Error taxonomy. The CLI maps these onto distinct exit codes.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace glare
