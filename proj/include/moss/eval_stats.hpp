#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "moss/matrix.hpp"

namespace moss {

/// Raw scores per (run, task) plus per-task expert denominators.
struct ScoreMatrix {
    Matrix<double> scores;             // [runs x tasks]
    std::vector<double> expert;        // [tasks], all positive
    std::vector<std::string> tasks;    // optional labels, [tasks] when set

    void validate() const;
    std::size_t runs() const { return scores.rows(); }
    std::size_t task_count() const { return scores.cols(); }
};

/// scores ./ expert, broadcast per task column.
Matrix<double> normalized_scores(const ScoreMatrix& m);

/// Mean of the middle 50%: drops floor(n/4) values from each end of the
/// sorted vector. Requires at least 4 values.
double iqm(std::vector<double> values);

/// Mean of max(0, 1 - v): the average shortfall below expert parity.
double optimality_gap(std::span<const double> normalized);

/// Drops floor(fraction * n) values from each end of the sorted vector and
/// averages the rest.
double trimmed_mean(std::vector<double> values, double fraction = 0.1);

double mean(std::span<const double> values);
double standard_error(std::span<const double> values);
double median(std::vector<double> values);

using Statistic = std::function<double(std::span<const double>)>;

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;
};

/// Percentile 95% interval of `statistic` over task-stratified resampling:
/// each resample redraws the runs of every task column independently with
/// replacement, then evaluates the statistic on the flattened normalized
/// scores. Deterministic under a fixed seed.
ConfidenceInterval stratified_bootstrap_ci(const ScoreMatrix& m, const Statistic& statistic,
                                           std::size_t resamples, std::uint64_t seed);

/// (threshold tau, fraction of normalized scores > tau) pairs, the data
/// behind a performance profile.
std::vector<std::pair<double, double>> performance_profile(std::span<const double> normalized,
                                                           std::span<const double> thresholds);

}  // namespace moss
