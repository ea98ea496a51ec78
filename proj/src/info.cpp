#include "erl/info.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "erl/error.hpp"

namespace erl {

double shannon_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

double binary_entropy(double p) {
    const double q[2] = {p, 1.0 - p};
    return shannon_entropy(q);
}

void validate_probabilities(std::span<const double> p, double tolerance) {
    if (p.empty()) throw Error(ErrorCode::InvalidInput, "empty probability vector");
    double total = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidInput, "probabilities must be nonnegative");
        total += v;
    }
    if (std::abs(total - 1.0) > tolerance)
        throw Error(ErrorCode::InvalidInput, "probabilities must sum to 1");
}

JointDistribution::JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> table)
    : rows_(rows), cols_(cols), table_(std::move(table)) {
    if (table_.size() != rows_ * cols_) throw Error(ErrorCode::InvalidInput, "joint table has wrong size");
    validate_probabilities(table_);
}

JointDistribution JointDistribution::from_channel(std::span<const double> input,
                                                  std::span<const double> channel, std::size_t outputs) {
    if (channel.size() != input.size() * outputs)
        throw Error(ErrorCode::InvalidInput, "channel has wrong size");
    std::vector<double> table(channel.size());
    for (std::size_t x = 0; x < input.size(); ++x)
        for (std::size_t y = 0; y < outputs; ++y) table[x * outputs + y] = input[x] * channel[x * outputs + y];
    // Renormalize away rounding so the 1e-12 invariant holds.
    const double total = std::accumulate(table.begin(), table.end(), 0.0);
    for (auto& v : table) v /= total;
    return JointDistribution(input.size(), outputs, std::move(table));
}

std::vector<double> JointDistribution::marginal_x() const {
    std::vector<double> m(rows_, 0.0);
    for (std::size_t x = 0; x < rows_; ++x)
        for (std::size_t y = 0; y < cols_; ++y) m[x] += at(x, y);
    return m;
}

std::vector<double> JointDistribution::marginal_y() const {
    std::vector<double> m(cols_, 0.0);
    for (std::size_t x = 0; x < rows_; ++x)
        for (std::size_t y = 0; y < cols_; ++y) m[y] += at(x, y);
    return m;
}

JointDistribution JointDistribution::transposed() const {
    std::vector<double> t(table_.size());
    for (std::size_t x = 0; x < rows_; ++x)
        for (std::size_t y = 0; y < cols_; ++y) t[y * rows_ + x] = at(x, y);
    return JointDistribution(cols_, rows_, std::move(t));
}

JointDistribution JointDistribution::merge_outputs(std::span<const std::size_t> mapping,
                                                   std::size_t new_cols) const {
    if (mapping.size() != cols_) throw Error(ErrorCode::InvalidInput, "mapping must cover every column");
    std::vector<double> t(rows_ * new_cols, 0.0);
    for (std::size_t x = 0; x < rows_; ++x)
        for (std::size_t y = 0; y < cols_; ++y) {
            if (mapping[y] >= new_cols) throw Error(ErrorCode::InvalidInput, "mapping out of range");
            t[x * new_cols + mapping[y]] += at(x, y);
        }
    return JointDistribution(rows_, new_cols, std::move(t));
}

double joint_entropy(const JointDistribution& j) { return shannon_entropy(j.table()); }

double conditional_entropy(const JointDistribution& j) {
    const auto py = j.marginal_y();
    return joint_entropy(j) - shannon_entropy(py);
}

double mutual_information(const JointDistribution& j) {
    const double mi = shannon_entropy(j.marginal_x()) + shannon_entropy(j.marginal_y()) - joint_entropy(j);
    return std::max(mi, 0.0);
}

double mutual_information_direct(const JointDistribution& j) {
    const auto px = j.marginal_x();
    const auto py = j.marginal_y();
    double mi = 0.0;
    for (std::size_t x = 0; x < j.rows(); ++x)
        for (std::size_t y = 0; y < j.cols(); ++y) {
            const double v = j.at(x, y);
            if (v > 0.0) mi += v * std::log(v / (px[x] * py[y]));
        }
    return mi;
}

}  // namespace erl
