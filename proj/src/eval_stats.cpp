#include "moss/eval_stats.hpp"

#include <algorithm>
#include <cmath>

#include "moss/error.hpp"
#include "moss/rng.hpp"

namespace moss {

void ScoreMatrix::validate() const {
    if (scores.rows() == 0 || scores.cols() == 0)
        throw Error(ErrorCode::InvalidArgument, "ScoreMatrix: empty score matrix");
    if (expert.size() != scores.cols())
        throw Error(ErrorCode::InvalidArgument, "ScoreMatrix: expert vector length mismatch");
    for (double e : expert)
        if (!(e > 0))
            throw Error(ErrorCode::InvalidArgument, "ScoreMatrix: expert scores must be positive");
    if (!tasks.empty() && tasks.size() != scores.cols())
        throw Error(ErrorCode::InvalidArgument, "ScoreMatrix: task label count mismatch");
}

Matrix<double> normalized_scores(const ScoreMatrix& m) {
    m.validate();
    Matrix<double> out(m.scores.rows(), m.scores.cols());
    for (std::size_t i = 0; i < m.scores.rows(); ++i)
        for (std::size_t j = 0; j < m.scores.cols(); ++j)
            out(i, j) = m.scores(i, j) / m.expert[j];
    return out;
}

double iqm(std::vector<double> values) {
    if (values.size() < 4)
        throw Error(ErrorCode::InvalidArgument, "iqm: need at least four values");
    std::sort(values.begin(), values.end());
    const std::size_t drop = values.size() / 4;
    double acc = 0;
    for (std::size_t i = drop; i < values.size() - drop; ++i) acc += values[i];
    return acc / static_cast<double>(values.size() - 2 * drop);
}

double optimality_gap(std::span<const double> normalized) {
    if (normalized.empty())
        throw Error(ErrorCode::InvalidArgument, "optimality_gap: empty input");
    double acc = 0;
    for (double v : normalized) acc += std::max(0.0, 1.0 - v);
    return acc / static_cast<double>(normalized.size());
}

double trimmed_mean(std::vector<double> values, double fraction) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "trimmed_mean: empty input");
    if (fraction < 0 || fraction >= 0.5)
        throw Error(ErrorCode::InvalidArgument, "trimmed_mean: fraction outside [0, 0.5)");
    std::sort(values.begin(), values.end());
    const std::size_t drop =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(values.size())));
    double acc = 0;
    for (std::size_t i = drop; i < values.size() - drop; ++i) acc += values[i];
    return acc / static_cast<double>(values.size() - 2 * drop);
}

double mean(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "mean: empty input");
    double acc = 0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values) {
    if (values.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "standard_error: need at least two values");
    const double m = mean(values);
    double acc = 0;
    for (double v : values) acc += (v - m) * (v - m);
    const double var = acc / static_cast<double>(values.size() - 1);
    return std::sqrt(var / static_cast<double>(values.size()));
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ConfidenceInterval stratified_bootstrap_ci(const ScoreMatrix& m, const Statistic& statistic,
                                           std::size_t resamples, std::uint64_t seed) {
    if (resamples < 2)
        throw Error(ErrorCode::InvalidArgument, "bootstrap: need at least two resamples");
    const Matrix<double> normalized = normalized_scores(m);
    const std::size_t runs = normalized.rows(), tasks = normalized.cols();

    Rng rng(seed);
    std::vector<double> stats(resamples);
    std::vector<double> flat(runs * tasks);
    for (std::size_t r = 0; r < resamples; ++r) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < tasks; ++j)
            for (std::size_t i = 0; i < runs; ++i)
                flat[w++] = normalized(rng.uniform_index(runs), j);
        stats[r] = statistic(flat);
    }
    std::sort(stats.begin(), stats.end());
    auto percentile = [&](double q) {
        const double idx = q * static_cast<double>(resamples - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, resamples - 1);
        const double frac = idx - static_cast<double>(lo);
        return stats[lo] * (1.0 - frac) + stats[hi] * frac;
    };
    return {percentile(0.025), percentile(0.975)};
}

std::vector<std::pair<double, double>> performance_profile(
    std::span<const double> normalized, std::span<const double> thresholds) {
    std::vector<std::pair<double, double>> profile;
    profile.reserve(thresholds.size());
    for (double tau : thresholds) {
        std::size_t above = 0;
        for (double v : normalized)
            if (v > tau) ++above;
        profile.emplace_back(tau, normalized.empty()
                                      ? 0.0
                                      : static_cast<double>(above) /
                                            static_cast<double>(normalized.size()));
    }
    return profile;
}

}  // namespace moss
