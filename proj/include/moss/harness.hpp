#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "moss/checkpoint.hpp"
#include "moss/config.hpp"
#include "moss/cpc.hpp"
#include "moss/ddpg.hpp"
#include "moss/replay.hpp"

namespace moss {

/// Fixed-schema per-update metrics CSV; one file per run.
class MetricsWriter {
  public:
    static constexpr const char* kHeader =
        "step,mode,intrinsic_reward_mean,nce_loss,extrinsic_return,entropy_proxy";

    MetricsWriter(const std::filesystem::path& path, bool append);
    void write(std::uint64_t step, int mode, double intrinsic_reward_mean, double nce_loss,
               double extrinsic_return, double entropy_proxy);

  private:
    std::ofstream out_;
};

struct PretrainResult {
    std::filesystem::path checkpoint_path;
    std::uint64_t steps = 0;
    std::uint64_t updates = 0;
};

struct FinetuneResult {
    double final_score = 0.0;
    int frozen_mode = 0;
    std::vector<float> frozen_skill;
    std::vector<double> eval_returns;
};

struct EvalEpisode {
    int mode = 0;
    double entropy_proxy = 0.0;
    double extrinsic_return = 0.0;
};

struct EvalReport {
    std::vector<EvalEpisode> episodes;

    double mean_proxy(int mode) const;
    double mean_return(int mode) const;
};

/// One seeded run: owns the nets, the replay buffer, the rng stream, and the
/// output directory. Each instance is single-threaded; concurrent seeds use
/// separate instances.
class Trainer {
  public:
    Trainer(RunConfig config, std::uint64_t seed, std::filesystem::path out_dir);

    /// Reward-free pretraining: resample (mode, skill) at every resample
    /// boundary, act, store, and from seed_frames on run the agent + CPC
    /// updates every update_every steps on recomputed intrinsic rewards.
    PretrainResult pretrain(const std::optional<std::filesystem::path>& resume = std::nullopt);

    /// Downstream adaptation: candidate skills from both priors are scored
    /// on extrinsic return inside the seed-frame budget, the argmax skill is
    /// frozen, then actor/critics train on extrinsic rewards only. Without a
    /// checkpoint this is the from-scratch baseline; expert_budget multiplies
    /// the step budget by config.expert_multiplier.
    FinetuneResult finetune(const std::optional<std::filesystem::path>& checkpoint_path,
                            bool expert_budget = false);

    /// Frozen-policy rollouts with one skill per episode from the requested
    /// mode prior (mode -1 = both). Reports the particle-entropy proxy and
    /// extrinsic return per episode, and writes eval.csv.
    EvalReport evaluate(const std::filesystem::path& checkpoint_path, int mode,
                        std::size_t num_episodes);

    const RunConfig& config() const { return config_; }

  private:
    struct IntrinsicBatch {
        Matrix<float> rewards;  // [N x n], signed
        double signed_mean = 0.0;
        double proxy_mean = 0.0;  // unsigned log(c + radius) mean
    };

    void build_networks();
    Checkpoint make_checkpoint(std::uint64_t global_step, std::uint64_t episodes) const;
    void restore_from(const Checkpoint& ckpt, bool restore_optimizers);
    std::filesystem::path write_checkpoint(std::uint64_t global_step, std::uint64_t episodes,
                                           const std::string& stem);
    Matrix<float> reward_embeddings(const Matrix<float>& states,
                                    const Matrix<float>& next_states) const;
    IntrinsicBatch intrinsic_rewards(const NStepBatch& batch) const;
    std::vector<float> random_action();
    double rollout_return(PointMassEnv& env, std::span<const float> skill,
                          std::size_t max_steps, bool explore, std::uint64_t episode_id,
                          int mode, bool store);
    void write_run_metadata() const;

    RunConfig config_;
    std::uint64_t seed_;
    std::filesystem::path out_dir_;
    Rng rng_;

    AgentNets<float> agent_;
    AgentAdam<float> agent_adam_;
    CpcNets<float> cpc_;
    CpcAdam<float> cpc_adam_;
    ReplayBuffer replay_;
    std::vector<float> obs_probe_;  // state visible to the adaptive variance probe
};

/// Formats a double the way every CSV in the project does ("%.9g").
std::string format_metric(double value);

}  // namespace moss
