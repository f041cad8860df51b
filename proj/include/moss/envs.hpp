#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "moss/rng.hpp"

namespace moss {

enum class Perturbation { None, Wind };

/// 2-D point mass in a box. The Wind toggle switches the family between low
/// dynamics entropy (calm) and high dynamics entropy (an Ornstein-Uhlenbeck
/// force the agent does not observe).
struct PointMassConfig {
    double dt = 0.02;
    double mass = 1.0;
    double friction = 0.5;     // viscous drag coefficient
    double force_scale = 1.0;  // action-to-force gain
    double half_width = 1.0;
    std::size_t episode_length = 1000;
    Perturbation perturbation = Perturbation::None;
    double wind_sigma = 0.0;   // OU process scale
    double wind_theta = 1.0;   // OU mean reversion rate

    void validate() const;
};

/// Bernoulli(p)-gated Gaussian action corruption used by the stochasticity
/// ablation.
struct NoiseWrapperConfig {
    bool enabled = false;
    double p = 0.3;
    double sigma = 0.2;

    void validate() const;
};

enum class TaskKind { None, ReachGoal, RunVelocity };

struct TaskSpec {
    TaskKind kind = TaskKind::None;
    std::array<double, 2> goal = {0.7, 0.7};
    double target_speed = 1.0;
};

TaskKind task_kind_from_string(const std::string& name);
std::string to_string(TaskKind kind);

/// Per-step reward in [0, 1]. ReachGoal decays linearly with distance over
/// the arena diagonal; RunVelocity is a triangular kernel around the target
/// speed with width equal to the target.
double task_reward(std::span<const double, 2> pos, std::span<const double, 2> vel,
                   const TaskSpec& task, double half_width);

/// With probability p, adds N(0, sigma^2) per component and clamps to
/// [-1, 1]; otherwise passes the action through untouched.
std::vector<float> wrap_noise(std::vector<float> action, const NoiseWrapperConfig& cfg,
                              Rng& rng);

struct StepResult {
    std::vector<float> observation;
    float reward = 0.0f;
    bool done = false;
};

class PointMassEnv {
  public:
    static constexpr std::size_t kObsDim = 4;  // position, velocity; wind unobserved
    static constexpr std::size_t kActionDim = 2;

    PointMassEnv(PointMassConfig config, TaskSpec task);

    /// Deterministic reset to the arena center at rest, so calm-environment
    /// trajectories are bitwise reproducible from the action sequence alone.
    std::vector<float> reset();

    /// Semi-implicit Euler step. Only wind consumes randomness; a calm
    /// environment never touches the rng.
    StepResult step(std::span<const float> action, Rng& rng);

    std::size_t steps_taken() const { return step_count_; }
    const PointMassConfig& config() const { return config_; }
    const TaskSpec& task() const { return task_; }

  private:
    std::vector<float> observation() const;

    PointMassConfig config_;
    TaskSpec task_;
    std::array<double, 2> pos_ = {0.0, 0.0};
    std::array<double, 2> vel_ = {0.0, 0.0};
    std::array<double, 2> wind_ = {0.0, 0.0};
    std::size_t step_count_ = 0;
};

}  // namespace moss
