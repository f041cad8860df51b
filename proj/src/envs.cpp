#include "moss/envs.hpp"

#include <algorithm>
#include <cmath>

#include "moss/error.hpp"

namespace moss {

void PointMassConfig::validate() const {
    if (dt <= 0) throw Error(ErrorCode::Config, "PointMassConfig: dt must be positive");
    if (mass <= 0) throw Error(ErrorCode::Config, "PointMassConfig: mass must be positive");
    if (friction < 0) throw Error(ErrorCode::Config, "PointMassConfig: negative friction");
    if (half_width <= 0) throw Error(ErrorCode::Config, "PointMassConfig: empty arena");
    if (episode_length == 0)
        throw Error(ErrorCode::Config, "PointMassConfig: episode length must be positive");
    if (perturbation == Perturbation::Wind && wind_sigma <= 0)
        throw Error(ErrorCode::Config, "PointMassConfig: wind needs a positive sigma");
}

void NoiseWrapperConfig::validate() const {
    if (p < 0 || p > 1) throw Error(ErrorCode::Config, "NoiseWrapperConfig: p outside [0, 1]");
    if (sigma < 0) throw Error(ErrorCode::Config, "NoiseWrapperConfig: negative sigma");
}

TaskKind task_kind_from_string(const std::string& name) {
    if (name == "none") return TaskKind::None;
    if (name == "reach_goal") return TaskKind::ReachGoal;
    if (name == "run_velocity") return TaskKind::RunVelocity;
    throw Error(ErrorCode::Config, "unknown task: " + name);
}

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::None: return "none";
        case TaskKind::ReachGoal: return "reach_goal";
        case TaskKind::RunVelocity: return "run_velocity";
    }
    return "none";
}

double task_reward(std::span<const double, 2> pos, std::span<const double, 2> vel,
                   const TaskSpec& task, double half_width) {
    switch (task.kind) {
        case TaskKind::None: return 0.0;
        case TaskKind::ReachGoal: {
            const double dx = pos[0] - task.goal[0];
            const double dy = pos[1] - task.goal[1];
            const double diameter = 2.0 * half_width * std::sqrt(2.0);  // arena diagonal
            const double frac = std::clamp(std::sqrt(dx * dx + dy * dy) / diameter, 0.0, 1.0);
            return 1.0 - frac;
        }
        case TaskKind::RunVelocity: {
            if (task.target_speed <= 0)
                throw Error(ErrorCode::Config, "task_reward: target speed must be positive");
            const double speed = std::sqrt(vel[0] * vel[0] + vel[1] * vel[1]);
            const double miss = std::abs(speed - task.target_speed) / task.target_speed;
            return std::max(0.0, 1.0 - miss);
        }
    }
    return 0.0;
}

std::vector<float> wrap_noise(std::vector<float> action, const NoiseWrapperConfig& cfg,
                              Rng& rng) {
    if (!cfg.enabled) return action;
    if (rng.uniform() >= cfg.p) return action;
    for (float& a : action) {
        a += static_cast<float>(rng.normal(0.0, cfg.sigma));
        a = std::clamp(a, -1.0f, 1.0f);
    }
    return action;
}

PointMassEnv::PointMassEnv(PointMassConfig config, TaskSpec task)
    : config_(config), task_(task) {
    config_.validate();
}

std::vector<float> PointMassEnv::reset() {
    pos_ = {0.0, 0.0};
    vel_ = {0.0, 0.0};
    wind_ = {0.0, 0.0};
    step_count_ = 0;
    return observation();
}

StepResult PointMassEnv::step(std::span<const float> action, Rng& rng) {
    if (action.size() != kActionDim)
        throw Error(ErrorCode::InvalidArgument, "PointMassEnv: action must be 2-D");
    for (float a : action)
        if (!std::isfinite(a) || a < -1.0f || a > 1.0f)
            throw Error(ErrorCode::InvalidArgument, "PointMassEnv: action outside [-1, 1]");

    if (config_.perturbation == Perturbation::Wind) {
        const double sqrt_dt = std::sqrt(config_.dt);
        for (std::size_t c = 0; c < 2; ++c)
            wind_[c] += -config_.wind_theta * wind_[c] * config_.dt +
                        config_.wind_sigma * sqrt_dt * rng.normal();
    }

    for (std::size_t c = 0; c < 2; ++c) {
        const double force = config_.force_scale * static_cast<double>(action[c]) + wind_[c] -
                             config_.friction * vel_[c];
        vel_[c] += config_.dt * force / config_.mass;
        pos_[c] += config_.dt * vel_[c];
        if (pos_[c] > config_.half_width) {
            pos_[c] = config_.half_width;
            vel_[c] = 0.0;
        } else if (pos_[c] < -config_.half_width) {
            pos_[c] = -config_.half_width;
            vel_[c] = 0.0;
        }
    }
    step_count_ += 1;

    for (double v : pos_)
        if (!std::isfinite(v))
            throw Error(ErrorCode::Internal, "PointMassEnv: non-finite state");

    StepResult result;
    result.observation = observation();
    result.reward = static_cast<float>(
        task_reward(std::span<const double, 2>(pos_), std::span<const double, 2>(vel_), task_,
                    config_.half_width));
    result.done = step_count_ >= config_.episode_length;
    return result;
}

std::vector<float> PointMassEnv::observation() const {
    return {static_cast<float>(pos_[0]), static_cast<float>(pos_[1]),
            static_cast<float>(vel_[0]), static_cast<float>(vel_[1])};
}

}  // namespace moss
