#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "moss.h"

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "moss_capi_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Tiny-but-complete config so API round trips stay fast.
std::string tiny_config_json() {
    char* base = nullptr;
    REQUIRE(moss_default_config("desk", &base) == MOSS_OK);
    nlohmann::json config = nlohmann::json::parse(base);
    moss_string_free(base);
    config["agent"]["hidden_dim"] = 16;
    config["agent"]["batch_size"] = 16;
    config["agent"]["seed_frames"] = 60;
    config["skill"]["dim"] = 8;
    config["skill"]["resample_every"] = 10;
    config["env"]["episode_length"] = 100;
    config["cpc"]["knn_k"] = 5;
    config["run"]["pretrain_steps"] = 200;
    config["run"]["finetune_steps"] = 300;
    config["run"]["checkpoint_every"] = 100;
    config["run"]["eval_episodes"] = 4;
    config["run"]["candidate_skills_per_mode"] = 2;
    config["task"]["kind"] = "reach_goal";
    return config.dump();
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and status names are stable strings") {
    CHECK(std::strlen(moss_version()) > 0);
    CHECK(std::string(moss_status_name(MOSS_OK)) == "ok");
    CHECK(std::string(moss_status_name(MOSS_ERR_CONFIG)) == "config_error");
    CHECK(std::string(moss_status_name(MOSS_ERR_STATE)) == "state_error");
}

TEST_CASE("default config is valid for both profiles") {
    for (const char* profile : {"desk", "paper"}) {
        char* text = nullptr;
        REQUIRE(moss_default_config(profile, &text) == MOSS_OK);
        CHECK(moss_validate_config(text) == MOSS_OK);
        moss_string_free(text);
    }
}

TEST_CASE("unknown profile reports a config error with detail") {
    char* text = nullptr;
    CHECK(moss_default_config("galactic", &text) == MOSS_ERR_CONFIG);
    CHECK(std::string(moss_last_error()).find("galactic") != std::string::npos);
}

TEST_CASE("invalid configs are rejected with codes") {
    CHECK(moss_validate_config("{ not json") == MOSS_ERR_CONFIG);
    CHECK(moss_validate_config(R"({"agent": {"gamma": 2.0}})") == MOSS_ERR_CONFIG);
    CHECK(moss_validate_config(R"({"mystery": 1})") == MOSS_ERR_CONFIG);
    CHECK(moss_validate_config(nullptr) == MOSS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("a pretrain-finetune-evaluate cycle works through the C surface") {
    const std::string config = tiny_config_json();

    const auto pre_dir = fresh_dir("pre");
    moss_run* pre = nullptr;
    REQUIRE(moss_run_open(config.c_str(), 1, pre_dir.string().c_str(), &pre) == MOSS_OK);
    char* ckpt = nullptr;
    REQUIRE(moss_run_pretrain(pre, nullptr, &ckpt) == MOSS_OK);
    REQUIRE(ckpt != nullptr);
    CHECK(fs::exists(ckpt));
    moss_run_close(pre);

    const auto ft_dir = fresh_dir("ft");
    moss_run* ft = nullptr;
    REQUIRE(moss_run_open(config.c_str(), 2, ft_dir.string().c_str(), &ft) == MOSS_OK);
    double score = -1;
    CHECK(moss_run_finetune(ft, ckpt, &score) == MOSS_OK);
    CHECK(score >= 0.0);
    moss_run_close(ft);

    const auto eval_dir = fresh_dir("eval");
    moss_run* ev = nullptr;
    REQUIRE(moss_run_open(config.c_str(), 3, eval_dir.string().c_str(), &ev) == MOSS_OK);
    double proxy_max = 0, proxy_min = 0;
    CHECK(moss_run_evaluate(ev, ckpt, MOSS_MODE_BOTH, 2, &proxy_max, &proxy_min) == MOSS_OK);
    CHECK(std::isfinite(proxy_max));
    CHECK(std::isfinite(proxy_min));
    CHECK(fs::exists(eval_dir / "eval.csv"));
    moss_run_close(ev);
    moss_string_free(ckpt);
}

TEST_CASE("missing checkpoints surface as io errors") {
    const std::string config = tiny_config_json();
    const auto dir = fresh_dir("badckpt");
    moss_run* run = nullptr;
    REQUIRE(moss_run_open(config.c_str(), 1, dir.string().c_str(), &run) == MOSS_OK);
    double score = 0;
    CHECK(moss_run_finetune(run, "/nonexistent/path.moss", &score) == MOSS_ERR_IO);
    CHECK(std::strlen(moss_last_error()) > 0);
    moss_run_close(run);
}

TEST_CASE("stats report runs end to end") {
    const auto dir = fresh_dir("stats");
    const auto scores = dir / "scores.csv";
    const auto experts = dir / "experts.csv";
    {
        std::ofstream s(scores);
        s << "task,seed,score\n";
        for (int seed = 0; seed < 6; ++seed) {
            s << "reach_goal," << seed << ',' << 400 + 10 * seed << "\n";
            s << "run_velocity," << seed << ',' << 300 - 5 * seed << "\n";
        }
        std::ofstream e(experts);
        e << "task,score\nreach_goal,500\nrun_velocity,400\n";
    }
    const std::string prefix = (dir / "out_").string();
    char* table = nullptr;
    REQUIRE(moss_stats_report(scores.string().c_str(), experts.string().c_str(),
                              prefix.c_str(), 7, 200, &table) == MOSS_OK);
    REQUIRE(table != nullptr);
    CHECK(std::string(table).find("iqm") != std::string::npos);
    CHECK(std::string(table).find("optimality_gap") != std::string::npos);
    moss_string_free(table);
    CHECK(fs::exists(dir / "out_report.csv"));
    CHECK(fs::exists(dir / "out_profile.csv"));
}

TEST_CASE("stats rejects malformed inputs") {
    const auto dir = fresh_dir("stats_bad");
    const auto scores = dir / "scores.csv";
    const auto experts = dir / "experts.csv";
    {
        std::ofstream s(scores);
        s << "task,seed,score\nreach_goal,0,100\n";
        std::ofstream e(experts);
        e << "task,score\nother_task,500\n";
    }
    char* table = nullptr;
    CHECK(moss_stats_report(scores.string().c_str(), experts.string().c_str(),
                            (dir / "x_").string().c_str(), 7, 100,
                            &table) == MOSS_ERR_INVALID_ARGUMENT);
    CHECK(moss_stats_report(nullptr, nullptr, nullptr, 7, 100, &table) ==
          MOSS_ERR_INVALID_ARGUMENT);
}

}  // TEST_SUITE
