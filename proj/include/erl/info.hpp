#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace erl {

// Natural logarithm throughout; 0 log 0 = 0.
double shannon_entropy(std::span<const double> p);
double binary_entropy(double p);

// Check that p is a probability vector within `tolerance` of summing to 1.
void validate_probabilities(std::span<const double> p, double tolerance = 1e-12);

// Finite joint law of (X, Y), row-major with X indexing rows.
class JointDistribution {
public:
    JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> table);
    static JointDistribution from_channel(std::span<const double> input,
                                          std::span<const double> channel, std::size_t outputs);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double at(std::size_t x, std::size_t y) const noexcept { return table_[x * cols_ + y]; }
    const std::vector<double>& table() const noexcept { return table_; }

    std::vector<double> marginal_x() const;
    std::vector<double> marginal_y() const;
    JointDistribution transposed() const;
    // Merge output columns: column y goes to mapping[y].
    JointDistribution merge_outputs(std::span<const std::size_t> mapping, std::size_t new_cols) const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> table_;
};

double joint_entropy(const JointDistribution& j);
// H(X | Y)
double conditional_entropy(const JointDistribution& j);
// H(X) + H(Y) - H(X,Y)
double mutual_information(const JointDistribution& j);
// Direct sum of p(x,y) log p(x,y)/(p(x)p(y)).
double mutual_information_direct(const JointDistribution& j);

}  // namespace erl
