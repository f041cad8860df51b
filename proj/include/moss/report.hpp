#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moss/eval_stats.hpp"

namespace moss {

/// Aggregate statistics over a normalized score matrix: the IQM/optimality-
/// gap pair the headline results use, plus mean/standard-error, median and
/// the 10% trimmed mean, each labeled so reports state which reduction they
/// quote. Bootstrap CIs accompany every resampled statistic.
struct StatsReport {
    struct Entry {
        std::string name;
        double value = 0.0;
        bool has_ci = false;
        ConfidenceInterval ci;
    };

    std::vector<Entry> entries;
    std::vector<std::pair<double, double>> profile;  // (threshold, fraction above)

    std::string table() const;
    void write_csv(const std::filesystem::path& prefix) const;
};

StatsReport build_stats_report(const ScoreMatrix& matrix, std::size_t resamples,
                               std::uint64_t seed);

/// scores CSV: header "task,seed,score", one row per (task, seed); every task
/// must cover the same seed set. experts CSV: header "task,score".
ScoreMatrix load_score_matrix(const std::filesystem::path& scores_csv,
                              const std::filesystem::path& experts_csv);

void append_score_row(const std::filesystem::path& scores_csv, const std::string& task,
                      std::uint64_t seed, double score);

}  // namespace moss
