#include "moss/skill_space.hpp"

#include <cmath>

namespace moss {

std::size_t max_mode_steps(const ModeSchedule& schedule) {
    return static_cast<std::size_t>(
        std::ceil(schedule.max_fraction * static_cast<double>(schedule.episode_length)));
}

int mode_at(const ModeSchedule& schedule, std::size_t step_in_episode) {
    if (step_in_episode >= schedule.episode_length)
        throw Error(ErrorCode::InvalidArgument, "mode_at: step outside the episode");
    switch (schedule.variant) {
        case ScheduleVariant::FixedMax: return kModeMaximize;
        case ScheduleVariant::FixedMin: return kModeMinimize;
        case ScheduleVariant::Deterministic:
        case ScheduleVariant::SameSupport:
            return step_in_episode < max_mode_steps(schedule) ? kModeMaximize : kModeMinimize;
        case ScheduleVariant::Adaptive:
            throw Error(ErrorCode::InvalidArgument,
                        "mode_at: adaptive runs select modes through AdaptiveSwitchState");
    }
    throw Error(ErrorCode::Internal, "mode_at: unknown schedule variant");
}

int adaptive_switch(AdaptiveSwitchState& state, int current_mode, double v_now_opposite) {
    if (current_mode != kModeMaximize && current_mode != kModeMinimize)
        throw Error(ErrorCode::InvalidArgument, "adaptive_switch: mode must be 0 or 1");
    const int opposite = 1 - current_mode;
    int next = current_mode;
    if (state.last_variance[opposite].has_value() &&
        state.beta * *state.last_variance[opposite] <= v_now_opposite)
        next = opposite;
    state.last_variance[opposite] = v_now_opposite;
    return next;
}

SkillScheduler::SkillScheduler(ModeSchedule schedule, SkillConfig skills,
                               std::size_t resample_every)
    : schedule_(schedule), skills_(skills), resample_every_(resample_every) {
    if (resample_every_ == 0)
        throw Error(ErrorCode::Config, "SkillScheduler: resample period must be positive");
    if (schedule_.max_fraction < 0.0 || schedule_.max_fraction > 1.0)
        throw Error(ErrorCode::Config, "SkillScheduler: max_fraction outside [0, 1]");
    skills_.shared_support = (schedule_.variant == ScheduleVariant::SameSupport);
}

bool SkillScheduler::begin_step(std::size_t step_in_episode, Rng& rng,
                                const VarianceProbe& probe) {
    if (step_in_episode == 0) {
        adaptive_.reset();
        episode_modes_.clear();
    }
    if (step_in_episode % resample_every_ != 0) return false;

    if (schedule_.variant == ScheduleVariant::Adaptive) {
        if (step_in_episode == 0) {
            mode_ = kModeMaximize;
            if (probe) adaptive_.last_variance[kModeMinimize] = probe(kModeMinimize);
        } else {
            if (!probe)
                throw Error(ErrorCode::Config,
                            "SkillScheduler: adaptive schedule needs a variance probe");
            mode_ = adaptive_switch(adaptive_, mode_, probe(1 - mode_));
        }
    } else {
        mode_ = mode_at(schedule_, step_in_episode);
    }
    skill_ = sample_skill<float>(mode_, rng, skills_);
    resample_count_ += 1;
    episode_modes_.push_back(mode_);
    return true;
}

}  // namespace moss
