#include "moss/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "moss/error.hpp"
#include "moss/harness.hpp"

namespace moss {

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path,
                                                    const std::string& expected_header) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "stats: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "stats: empty " + path.string());
    if (line != expected_header)
        throw Error(ErrorCode::InvalidArgument, "stats: " + path.string() +
                                                    " must start with header '" +
                                                    expected_header + "'");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "stats: bad " + what + " value '" + text + "'");
    }
}

}  // namespace

ScoreMatrix load_score_matrix(const std::filesystem::path& scores_csv,
                              const std::filesystem::path& experts_csv) {
    const auto score_rows = read_csv_rows(scores_csv, "task,seed,score");
    const auto expert_rows = read_csv_rows(experts_csv, "task,score");

    std::map<std::string, double> experts;
    for (const auto& row : expert_rows) {
        if (row.size() != 2)
            throw Error(ErrorCode::InvalidArgument, "stats: malformed expert row");
        experts[row[0]] = parse_double(row[1], "expert score");
    }

    std::map<std::string, std::map<std::uint64_t, double>> by_task;
    std::set<std::uint64_t> seeds;
    for (const auto& row : score_rows) {
        if (row.size() != 3)
            throw Error(ErrorCode::InvalidArgument, "stats: malformed score row");
        const std::uint64_t seed =
            static_cast<std::uint64_t>(parse_double(row[1], "seed"));
        const double score = parse_double(row[2], "score");
        if (by_task[row[0]].contains(seed))
            throw Error(ErrorCode::InvalidArgument,
                        "stats: duplicate (task, seed) row for " + row[0]);
        by_task[row[0]][seed] = score;
        seeds.insert(seed);
    }
    if (by_task.empty()) throw Error(ErrorCode::InvalidArgument, "stats: no score rows");

    ScoreMatrix m;
    m.scores = Matrix<double>(seeds.size(), by_task.size());
    std::size_t t = 0;
    for (const auto& [task, per_seed] : by_task) {
        const auto expert_it = experts.find(task);
        if (expert_it == experts.end())
            throw Error(ErrorCode::InvalidArgument, "stats: no expert score for task " + task);
        m.tasks.push_back(task);
        m.expert.push_back(expert_it->second);
        std::size_t r = 0;
        for (std::uint64_t seed : seeds) {
            const auto it = per_seed.find(seed);
            if (it == per_seed.end())
                throw Error(ErrorCode::InvalidArgument,
                            "stats: task " + task + " is missing seed " +
                                std::to_string(seed));
            m.scores(r++, t) = it->second;
        }
        ++t;
    }
    m.validate();
    return m;
}

StatsReport build_stats_report(const ScoreMatrix& matrix, std::size_t resamples,
                               std::uint64_t seed) {
    const Matrix<double> norm = normalized_scores(matrix);
    const std::vector<double> flat(norm.data(), norm.data() + norm.size());

    const std::vector<std::pair<std::string, Statistic>> bootstrapped = {
        {"iqm", [](std::span<const double> v) {
             return iqm(std::vector<double>(v.begin(), v.end()));
         }},
        {"optimality_gap", [](std::span<const double> v) { return optimality_gap(v); }},
        {"mean", [](std::span<const double> v) { return mean(v); }},
        {"median", [](std::span<const double> v) {
             return median(std::vector<double>(v.begin(), v.end()));
         }},
        {"trimmed_mean_10", [](std::span<const double> v) {
             return trimmed_mean(std::vector<double>(v.begin(), v.end()), 0.1);
         }},
    };

    StatsReport report;
    for (const auto& [name, stat] : bootstrapped) {
        StatsReport::Entry entry;
        entry.name = name;
        try {
            entry.value = stat(flat);
        } catch (const Error&) {
            continue;  // too few values for this statistic; omit its row
        }
        entry.has_ci = true;
        entry.ci = stratified_bootstrap_ci(matrix, stat, resamples, seed);
        report.entries.push_back(std::move(entry));
    }
    try {
        report.entries.push_back({"standard_error", standard_error(flat), false, {}});
    } catch (const Error&) {
    }

    std::vector<double> thresholds;
    for (double tau = 0.0; tau <= 1.501; tau += 0.05) thresholds.push_back(tau);
    report.profile = performance_profile(flat, thresholds);
    return report;
}

std::string StatsReport::table() const {
    std::ostringstream out;
    out << "statistic         value      95% CI\n";
    for (const auto& e : entries) {
        out << e.name;
        for (std::size_t pad = e.name.size(); pad < 18; ++pad) out << ' ';
        out << format_metric(e.value);
        if (e.has_ci)
            out << "   [" << format_metric(e.ci.low) << ", " << format_metric(e.ci.high)
                << "]";
        out << "\n";
    }
    return out.str();
}

void StatsReport::write_csv(const std::filesystem::path& prefix) const {
    const auto report_path = prefix.string() + "report.csv";
    std::ofstream report_csv(report_path, std::ios::trunc);
    report_csv << "statistic,value,ci_low,ci_high\n";
    for (const auto& e : entries) {
        report_csv << e.name << ',' << format_metric(e.value) << ',';
        if (e.has_ci)
            report_csv << format_metric(e.ci.low) << ',' << format_metric(e.ci.high);
        else
            report_csv << ',';
        report_csv << "\n";
    }
    const auto profile_path = prefix.string() + "profile.csv";
    std::ofstream profile_csv(profile_path, std::ios::trunc);
    profile_csv << "threshold,fraction_above\n";
    for (const auto& [tau, fraction] : profile)
        profile_csv << format_metric(tau) << ',' << format_metric(fraction) << "\n";
    if (!report_csv || !profile_csv)
        throw Error(ErrorCode::Io, "stats: cannot write report files with prefix " +
                                       prefix.string());
}

void append_score_row(const std::filesystem::path& scores_csv, const std::string& task,
                      std::uint64_t seed, double score) {
    const bool fresh =
        !std::filesystem::exists(scores_csv) || std::filesystem::file_size(scores_csv) == 0;
    std::ofstream out(scores_csv, std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "stats: cannot open " + scores_csv.string());
    if (fresh) out << "task,seed,score\n";
    out << task << ',' << seed << ',' << format_metric(score) << "\n";
}

}  // namespace moss
