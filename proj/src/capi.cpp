#include "moss.h"

#include <cstring>
#include <string>

#include "moss/config.hpp"
#include "moss/error.hpp"
#include "moss/harness.hpp"
#include "moss/report.hpp"

namespace {

thread_local std::string g_last_error;

char* duplicate(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

template <class Fn>
moss_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MOSS_OK;
    } catch (const moss::Error& e) {
        g_last_error = e.what();
        return static_cast<moss_status>(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MOSS_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return MOSS_ERR_INTERNAL;
    }
}

moss_status require(bool ok, const char* message) {
    if (ok) return MOSS_OK;
    g_last_error = message;
    return MOSS_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct moss_run {
    moss::RunConfig config;
    std::uint64_t seed;
    std::string out_dir;
};

extern "C" {

const char* moss_version(void) { return "0.1.0"; }

const char* moss_status_name(moss_status status) {
    switch (status) {
        case MOSS_OK: return "ok";
        case MOSS_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case MOSS_ERR_CONFIG: return "config_error";
        case MOSS_ERR_IO: return "io_error";
        case MOSS_ERR_STATE: return "state_error";
        case MOSS_ERR_TRAINING: return "training_error";
        case MOSS_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* moss_last_error(void) { return g_last_error.c_str(); }

void moss_string_free(char* text) { std::free(text); }

moss_status moss_default_config(const char* profile, char** json_out) {
    if (moss_status s = require(profile && json_out, "profile and json_out are required"))
        return s;
    return guarded([&] {
        *json_out = duplicate(moss::config_to_json(moss::default_config(profile)));
        if (!*json_out) throw moss::Error(moss::ErrorCode::Internal, "allocation failed");
    });
}

moss_status moss_validate_config(const char* config_json) {
    if (moss_status s = require(config_json != nullptr, "config_json is required")) return s;
    return guarded([&] { moss::config_from_json(config_json); });
}

moss_status moss_run_open(const char* config_json, uint64_t seed, const char* out_dir,
                          moss_run** run_out) {
    if (moss_status s = require(config_json && out_dir && run_out,
                                "config_json, out_dir and run_out are required"))
        return s;
    return guarded([&] {
        auto config = moss::config_from_json(config_json);
        *run_out = new moss_run{std::move(config), seed, out_dir};
    });
}

void moss_run_close(moss_run* run) { delete run; }

moss_status moss_run_pretrain(moss_run* run, const char* resume_checkpoint,
                              char** checkpoint_path_out) {
    if (moss_status s = require(run != nullptr, "run handle is required")) return s;
    return guarded([&] {
        moss::Trainer trainer(run->config, run->seed, run->out_dir);
        std::optional<std::filesystem::path> resume;
        if (resume_checkpoint) resume = resume_checkpoint;
        auto result = trainer.pretrain(resume);
        if (checkpoint_path_out)
            *checkpoint_path_out = duplicate(result.checkpoint_path.string());
    });
}

moss_status moss_run_finetune(moss_run* run, const char* checkpoint, double* score_out) {
    if (moss_status s = require(run != nullptr, "run handle is required")) return s;
    return guarded([&] {
        moss::Trainer trainer(run->config, run->seed, run->out_dir);
        std::optional<std::filesystem::path> from;
        if (checkpoint) from = checkpoint;
        auto result = trainer.finetune(from, false);
        if (score_out) *score_out = result.final_score;
    });
}

moss_status moss_run_expert(moss_run* run, double* score_out) {
    if (moss_status s = require(run != nullptr, "run handle is required")) return s;
    return guarded([&] {
        moss::Trainer trainer(run->config, run->seed, run->out_dir);
        auto result = trainer.finetune(std::nullopt, true);
        if (score_out) *score_out = result.final_score;
    });
}

moss_status moss_run_evaluate(moss_run* run, const char* checkpoint, int32_t mode,
                              int32_t episodes, double* proxy_max_out,
                              double* proxy_min_out) {
    if (moss_status s = require(run && checkpoint, "run handle and checkpoint are required"))
        return s;
    if (moss_status s = require(episodes >= 0, "episodes must be nonnegative")) return s;
    return guarded([&] {
        moss::Trainer trainer(run->config, run->seed, run->out_dir);
        auto report = trainer.evaluate(checkpoint, mode,
                                       static_cast<std::size_t>(episodes));
        if (proxy_max_out && (mode == MOSS_MODE_MAXIMIZE || mode == MOSS_MODE_BOTH))
            *proxy_max_out = report.mean_proxy(moss::kModeMaximize);
        if (proxy_min_out && (mode == MOSS_MODE_MINIMIZE || mode == MOSS_MODE_BOTH))
            *proxy_min_out = report.mean_proxy(moss::kModeMinimize);
    });
}

moss_status moss_stats_report(const char* scores_csv, const char* experts_csv,
                              const char* out_prefix, uint64_t bootstrap_seed,
                              int64_t resamples, char** table_out) {
    if (moss_status s = require(scores_csv && experts_csv && out_prefix,
                                "scores_csv, experts_csv and out_prefix are required"))
        return s;
    if (moss_status s = require(resamples >= 2, "resamples must be at least 2")) return s;
    return guarded([&] {
        auto matrix = moss::load_score_matrix(scores_csv, experts_csv);
        auto report = moss::build_stats_report(matrix, static_cast<std::size_t>(resamples),
                                               bootstrap_seed);
        report.write_csv(out_prefix);
        if (table_out) *table_out = duplicate(report.table());
    });
}

}  // extern "C"
