// Command-line front end for the MOSS training library. Talks to the core
// exclusively through the C API in moss.h; JSON handling here is only
// argument assembly, the library re-validates every config it receives.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "moss.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliError : std::runtime_error {
    explicit CliError(const std::string& what) : std::runtime_error(what) {}
};

std::mutex g_print_mutex;

void print_line(const std::string& line) {
    std::lock_guard lock(g_print_mutex);
    std::fputs((line + "\n").c_str(), stdout);
    std::fflush(stdout);
}

[[noreturn]] void fail_status(moss_status status, const std::string& context) {
    throw CliError(context + ": " + moss_status_name(status) + " (" + moss_last_error() + ")");
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Seeds accept "3", "0-5" (inclusive) or "0,2,7".
std::vector<uint64_t> parse_seeds(const std::string& text) {
    std::vector<uint64_t> seeds;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        const std::string part = text.substr(pos, comma == std::string::npos ? comma
                                                                             : comma - pos);
        const std::size_t dash = part.find('-');
        try {
            if (dash == std::string::npos) {
                seeds.push_back(std::stoull(part));
            } else {
                const uint64_t lo = std::stoull(part.substr(0, dash));
                const uint64_t hi = std::stoull(part.substr(dash + 1));
                if (hi < lo) throw std::invalid_argument(part);
                for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
            }
        } catch (const std::exception&) {
            throw CliError("cannot parse seed spec '" + text + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (seeds.empty()) throw CliError("empty seed spec");
    return seeds;
}

std::string substitute_seed(std::string text, uint64_t seed) {
    const std::string token = "{seed}";
    for (std::size_t at = text.find(token); at != std::string::npos;
         at = text.find(token, at))
        text.replace(at, token.size(), std::to_string(seed));
    return text;
}

struct ConfigArgs {
    std::string profile = "desk";
    std::string config_file;
    std::vector<std::string> overrides;  // section.key=json_value
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--profile", args.profile, "Config profile: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    cmd->add_option("--config", args.config_file, "JSON config file merged over the profile");
    cmd->add_option("--set", args.overrides,
                    "Override a config key, e.g. --set cpc.knn_k=16 "
                    "--set skill.schedule=\"fixed_max\"");
}

std::string build_config(const ConfigArgs& args, const json& extra) {
    char* base_text = nullptr;
    if (moss_status s = moss_default_config(args.profile.c_str(), &base_text))
        fail_status(s, "default config");
    json config = json::parse(base_text);
    moss_string_free(base_text);

    if (!args.config_file.empty()) {
        json file = json::parse(slurp(args.config_file), nullptr, false);
        if (file.is_discarded()) throw CliError("invalid JSON in " + args.config_file);
        config.merge_patch(file);
    }
    for (const std::string& entry : args.overrides) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw CliError("--set expects key=value, got '" + entry + "'");
        std::string pointer = "/" + entry.substr(0, eq);
        for (auto& ch : pointer)
            if (ch == '.') ch = '/';
        json value = json::parse(entry.substr(eq + 1), nullptr, false);
        if (value.is_discarded()) value = entry.substr(eq + 1);  // bare string
        config[json::json_pointer(pointer)] = value;
    }
    config.merge_patch(extra);

    const std::string text = config.dump(2);
    if (moss_status s = moss_validate_config(text.c_str())) fail_status(s, "config");
    return text;
}

/// Runs fn(seed) across a fixed-size worker pool; returns the first failure.
int for_each_seed(const std::vector<uint64_t>& seeds, unsigned jobs,
                  const std::function<void(uint64_t)>& fn) {
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                fn(seeds[i]);
            } catch (const std::exception& e) {
                print_line(std::string("error: ") + e.what());
                failures.fetch_add(1);
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, seeds.size()));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return failures.load() == 0 ? 0 : 1;
}

struct OwnedRun {
    moss_run* handle = nullptr;
    ~OwnedRun() { moss_run_close(handle); }
};

void open_run(const std::string& config, uint64_t seed, const fs::path& dir, OwnedRun& run) {
    if (moss_status s = moss_run_open(config.c_str(), seed, dir.string().c_str(),
                                      &run.handle))
        fail_status(s, "open run");
}

json task_patch(const std::string& task, const std::vector<double>& goal,
                std::optional<double> target_speed) {
    json patch = json::object();
    patch["task"]["kind"] = task;
    if (!goal.empty()) {
        if (goal.size() != 2) throw CliError("--goal expects two values");
        patch["task"]["goal"] = goal;
    }
    if (target_speed) patch["task"]["target_speed"] = *target_speed;
    return patch;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("moss ") + moss_version() +
                 " - mixture-of-surprises unsupervised RL on toy control tasks"};
    app.require_subcommand(1);

    // ---- pretrain ----
    auto* pre = app.add_subcommand("pretrain", "Unsupervised pretraining (Alg. 1)");
    ConfigArgs pre_cfg;
    std::string pre_out = "runs/pretrain";
    std::string pre_seeds = "0";
    unsigned pre_jobs = 1;
    std::string pre_resume;
    std::optional<uint64_t> pre_steps;
    bool pre_noise = false, pre_save_replay = false;
    std::optional<double> pre_wind;
    std::optional<std::string> pre_schedule;
    add_config_options(pre, pre_cfg);
    pre->add_option("--out-dir", pre_out, "Output root; per-seed runs in seed_<n>/")
        ->capture_default_str();
    pre->add_option("--seeds,--seed", pre_seeds, "Seed, list or range (e.g. 0-5)")
        ->capture_default_str();
    pre->add_option("--jobs", pre_jobs, "Concurrent seed workers")->capture_default_str();
    pre->add_option("--steps", pre_steps, "Override run.pretrain_steps");
    pre->add_option("--resume", pre_resume,
                    "Checkpoint to resume from ({seed} substituted)");
    pre->add_option("--schedule", pre_schedule,
                    "deterministic|adaptive|fixed_max|fixed_min|same_support");
    pre->add_flag("--noise", pre_noise, "Enable the Bernoulli-Gaussian action noise wrapper");
    pre->add_option("--wind", pre_wind, "Enable OU wind with this process scale");
    pre->add_flag("--save-replay", pre_save_replay, "Snapshot the replay next to checkpoints");

    // ---- finetune ----
    auto* fine = app.add_subcommand("finetune", "Adapt a pretrained agent to a task");
    ConfigArgs fine_cfg;
    std::string fine_out = "runs/finetune";
    std::string fine_seeds = "0";
    unsigned fine_jobs = 1;
    std::string fine_ckpt;
    std::string fine_task = "reach_goal";
    std::vector<double> fine_goal;
    std::optional<double> fine_speed;
    std::optional<uint64_t> fine_steps;
    bool fine_noise = false;
    add_config_options(fine, fine_cfg);
    fine->add_option("--out-dir", fine_out, "Output root")->capture_default_str();
    fine->add_option("--seeds,--seed", fine_seeds, "Seed, list or range")
        ->capture_default_str();
    fine->add_option("--jobs", fine_jobs, "Concurrent seed workers")->capture_default_str();
    fine->add_option("--checkpoint", fine_ckpt,
                     "Pretrained checkpoint ({seed} substituted); omit to train from scratch");
    fine->add_option("--task", fine_task, "reach_goal or run_velocity")
        ->capture_default_str();
    fine->add_option("--goal", fine_goal, "ReachGoal target, two coordinates")->expected(2);
    fine->add_option("--target-speed", fine_speed, "RunVelocity target speed");
    fine->add_option("--steps", fine_steps, "Override run.finetune_steps");
    fine->add_flag("--noise", fine_noise, "Enable the action noise wrapper");

    // ---- expert ----
    auto* expert = app.add_subcommand(
        "expert", "Train the from-scratch normalization baseline on a task");
    ConfigArgs expert_cfg;
    std::string expert_out = "runs/expert";
    std::string expert_seeds = "0";
    unsigned expert_jobs = 1;
    std::string expert_task = "reach_goal";
    std::vector<double> expert_goal;
    std::optional<double> expert_speed;
    bool expert_noise = false;
    add_config_options(expert, expert_cfg);
    expert->add_option("--out-dir", expert_out, "Output root")->capture_default_str();
    expert->add_option("--seeds,--seed", expert_seeds, "Seed, list or range")
        ->capture_default_str();
    expert->add_option("--jobs", expert_jobs, "Concurrent seed workers")
        ->capture_default_str();
    expert->add_option("--task", expert_task, "reach_goal or run_velocity")
        ->capture_default_str();
    expert->add_option("--goal", expert_goal, "ReachGoal target")->expected(2);
    expert->add_option("--target-speed", expert_speed, "RunVelocity target speed");
    expert->add_flag("--noise", expert_noise, "Enable the action noise wrapper");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "Frozen-policy rollouts and entropy proxies");
    ConfigArgs eval_cfg;
    std::string eval_out = "runs/eval";
    uint64_t eval_seed = 0;
    std::string eval_ckpt;
    std::string eval_mode = "both";
    int32_t eval_episodes = 10;
    add_config_options(eval, eval_cfg);
    eval->add_option("--out-dir", eval_out, "Output directory")->capture_default_str();
    eval->add_option("--seed", eval_seed, "Seed for skill draws")->capture_default_str();
    eval->add_option("--checkpoint", eval_ckpt, "Checkpoint to evaluate")->required();
    eval->add_option("--mode", eval_mode, "max, min or both")
        ->check(CLI::IsMember({"max", "min", "both"}))
        ->capture_default_str();
    eval->add_option("--episodes", eval_episodes, "Episodes per mode")->capture_default_str();

    // ---- stats ----
    auto* stats = app.add_subcommand("stats", "Aggregate scores into the report statistics");
    std::string stats_scores, stats_experts, stats_prefix = "stats_";
    uint64_t stats_seed = 1;
    int64_t stats_resamples = 2000;
    stats->add_option("--scores", stats_scores, "CSV with header task,seed,score")->required();
    stats->add_option("--experts", stats_experts, "CSV with header task,score")->required();
    stats->add_option("--out-prefix", stats_prefix, "Prefix for report.csv / profile.csv")
        ->capture_default_str();
    stats->add_option("--boot-seed", stats_seed, "Bootstrap seed")->capture_default_str();
    stats->add_option("--resamples", stats_resamples, "Bootstrap resamples")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) {
            json extra = json::object();
            if (pre_steps) extra["run"]["pretrain_steps"] = *pre_steps;
            if (pre_noise) extra["action_noise"]["enabled"] = true;
            if (pre_save_replay) extra["run"]["save_replay"] = true;
            if (pre_schedule) extra["skill"]["schedule"] = *pre_schedule;
            if (pre_wind) {
                extra["env"]["perturbation"] = "wind";
                extra["env"]["wind_sigma"] = *pre_wind;
            }
            const std::string config = build_config(pre_cfg, extra);
            const auto seeds = parse_seeds(pre_seeds);
            return for_each_seed(seeds, pre_jobs, [&](uint64_t seed) {
                const fs::path dir = fs::path(pre_out) / ("seed_" + std::to_string(seed));
                OwnedRun run;
                open_run(config, seed, dir, run);
                char* ckpt = nullptr;
                const char* resume = nullptr;
                std::string resume_text;
                if (!pre_resume.empty()) {
                    resume_text = substitute_seed(pre_resume, seed);
                    resume = resume_text.c_str();
                }
                if (moss_status s = moss_run_pretrain(run.handle, resume, &ckpt))
                    fail_status(s, "pretrain seed " + std::to_string(seed));
                print_line("pretrain seed " + std::to_string(seed) + " done: " + ckpt);
                moss_string_free(ckpt);
            });
        }

        if (fine->parsed() || expert->parsed()) {
            const bool is_expert = expert->parsed();
            const ConfigArgs& cfg_args = is_expert ? expert_cfg : fine_cfg;
            const std::string& task = is_expert ? expert_task : fine_task;
            const std::string& out_root = is_expert ? expert_out : fine_out;
            json extra = task_patch(task, is_expert ? expert_goal : fine_goal,
                                    is_expert ? expert_speed : fine_speed);
            if (!is_expert && fine_steps) extra["run"]["finetune_steps"] = *fine_steps;
            if (is_expert ? expert_noise : fine_noise) extra["action_noise"]["enabled"] = true;
            const std::string config = build_config(cfg_args, extra);
            const auto seeds = parse_seeds(is_expert ? expert_seeds : fine_seeds);

            std::mutex scores_mutex;
            std::vector<std::pair<uint64_t, double>> scores;
            const int rc = for_each_seed(
                seeds, is_expert ? expert_jobs : fine_jobs, [&](uint64_t seed) {
                    const fs::path dir =
                        fs::path(out_root) / ("seed_" + std::to_string(seed));
                    OwnedRun run;
                    open_run(config, seed, dir, run);
                    double score = 0;
                    moss_status s;
                    if (is_expert) {
                        s = moss_run_expert(run.handle, &score);
                    } else if (!fine_ckpt.empty()) {
                        const std::string ckpt = substitute_seed(fine_ckpt, seed);
                        s = moss_run_finetune(run.handle, ckpt.c_str(), &score);
                    } else {
                        s = moss_run_finetune(run.handle, nullptr, &score);
                    }
                    if (s) fail_status(s, "seed " + std::to_string(seed));
                    print_line((is_expert ? "expert seed " : "finetune seed ") +
                               std::to_string(seed) + " score " + std::to_string(score));
                    std::lock_guard lock(scores_mutex);
                    scores.emplace_back(seed, score);
                });
            if (rc != 0) return rc;

            std::sort(scores.begin(), scores.end());
            if (is_expert) {
                // Per-seed scores plus the mean row consumed by `stats`.
                std::ofstream per_seed(fs::path(out_root) / "expert_scores.csv",
                                       std::ios::trunc);
                per_seed << "task,seed,score\n";
                double sum = 0;
                for (const auto& [seed, score] : scores) {
                    per_seed << task << ',' << seed << ',' << score << "\n";
                    sum += score;
                }
                std::ofstream experts_csv(fs::path(out_root) / "experts.csv",
                                          std::ios::trunc);
                experts_csv << "task,score\n"
                            << task << ',' << sum / scores.size() << "\n";
                print_line("expert score (" + task + ", mean of " +
                           std::to_string(scores.size()) +
                           " seeds): " + std::to_string(sum / scores.size()));
            } else {
                std::ofstream scores_csv(fs::path(out_root) / "scores.csv", std::ios::trunc);
                scores_csv << "task,seed,score\n";
                for (const auto& [seed, score] : scores)
                    scores_csv << task << ',' << seed << ',' << score << "\n";
                print_line("scores written to " +
                           (fs::path(out_root) / "scores.csv").string());
            }
            return 0;
        }

        if (eval->parsed()) {
            const std::string config = build_config(eval_cfg, json::object());
            OwnedRun run;
            open_run(config, eval_seed, eval_out, run);
            const int32_t mode = eval_mode == "max"   ? MOSS_MODE_MAXIMIZE
                                 : eval_mode == "min" ? MOSS_MODE_MINIMIZE
                                                      : MOSS_MODE_BOTH;
            double proxy_max = 0, proxy_min = 0;
            if (moss_status s = moss_run_evaluate(run.handle, eval_ckpt.c_str(), mode,
                                                  eval_episodes, &proxy_max, &proxy_min))
                fail_status(s, "eval");
            if (mode != MOSS_MODE_MINIMIZE)
                print_line("mean entropy proxy (maximize skills): " +
                           std::to_string(proxy_max));
            if (mode != MOSS_MODE_MAXIMIZE)
                print_line("mean entropy proxy (minimize skills): " +
                           std::to_string(proxy_min));
            print_line("per-episode rows in " + (fs::path(eval_out) / "eval.csv").string());
            return 0;
        }

        if (stats->parsed()) {
            char* table = nullptr;
            if (moss_status s = moss_stats_report(stats_scores.c_str(), stats_experts.c_str(),
                                                  stats_prefix.c_str(), stats_seed,
                                                  stats_resamples, &table))
                fail_status(s, "stats");
            std::fputs(table, stdout);
            moss_string_free(table);
            print_line("report written with prefix " + stats_prefix);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
