#pragma once

#include <cstdint>
#include <string>

#include "moss/ddpg.hpp"
#include "moss/envs.hpp"
#include "moss/skill_space.hpp"

namespace moss {

/// Which embedding the particle-entropy reward runs on: the transition-pair
/// projection g_s(h, h') (default), or the raw state embedding f(s).
enum class RewardEmbedding { Pair, State };

/// Every knob of a run, mirroring the JSON config file one-to-one. Defaults
/// match the full-scale "paper" profile; the "desk" profile shrinks the
/// expensive ones.
struct RunConfig {
    // environment
    PointMassConfig env;
    NoiseWrapperConfig action_noise;
    TaskSpec task;

    // skills and mode schedule
    std::size_t skill_dim = 64;
    SkillEncoding encoding = SkillEncoding::Disjoint;
    ScheduleVariant schedule = ScheduleVariant::Deterministic;
    double max_fraction = 0.5;
    std::size_t resample_every = 50;
    double beta = 1.1;
    std::size_t probe_skills = 64;

    // agent
    std::size_t hidden_dim = 1024;
    double gamma = 0.99;
    double lr = 1e-4;
    double tau = 0.01;
    std::size_t n_step = 3;
    std::size_t batch_size = 1048;
    std::size_t update_every = 2;
    std::size_t cpc_update_every = 2;
    std::size_t seed_frames = 4000;
    double exploration_stddev = 0.2;
    double exploration_clip = 0.3;
    double grad_clip = 0.0;  // <= 0 disables clipping

    // contrastive head and particle reward
    double temperature = 0.5;
    std::size_t knn_k = 12;
    double knn_c = 1.0;
    RewardEmbedding reward_embedding = RewardEmbedding::Pair;

    // replay
    std::size_t replay_capacity = 1000000;

    // run lengths and outputs
    std::size_t pretrain_steps = 2000000;
    std::size_t finetune_steps = 100000;
    std::size_t checkpoint_every = 100000;
    std::size_t eval_episodes = 10;
    std::size_t candidate_skills_per_mode = 8;
    std::size_t expert_multiplier = 5;
    bool save_replay = false;

    void validate() const;

    ModeSchedule mode_schedule() const {
        return {env.episode_length, max_fraction, schedule};
    }
    SkillConfig skill_config() const {
        return {skill_dim, encoding, schedule == ScheduleVariant::SameSupport};
    }
    ExplorationSpec exploration() const { return {exploration_stddev, exploration_clip}; }
};

/// Named presets: "paper" keeps the defaults, "desk" is the laptop-scale
/// profile (hidden 128, batch 256, 100k pretrain / 20k finetune).
RunConfig default_config(const std::string& profile);

RunConfig config_from_json(const std::string& json_text);
std::string config_to_json(const RunConfig& config);

/// FNV-1a over the canonical JSON dump. Seeds and output paths live outside
/// RunConfig, so the hash identifies the experiment, not the run.
std::uint64_t config_hash(const RunConfig& config);

/// Hash of the subset that fixes parameter-array shapes (dims, encoding).
/// Checkpoints from configs with equal architecture hashes are loadable into
/// each other's runs.
std::uint64_t architecture_hash(const RunConfig& config);

std::uint64_t fnv1a(const std::string& text);

std::string to_string(SkillEncoding encoding);
std::string to_string(ScheduleVariant variant);
std::string to_string(RewardEmbedding embedding);
std::string to_string(Perturbation perturbation);

}  // namespace moss
