#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "moss/matrix.hpp"
#include "moss/nn.hpp"
#include "moss/rng.hpp"

namespace moss {

inline constexpr int kModeMaximize = 0;
inline constexpr int kModeMinimize = 1;

/// Disjoint: the two priors live on [0,1]^d and [-1,0]^d.
/// HalfVector: both live on [0,1]^d but each mode only populates its half of
/// the vector, the other half staying exactly zero.
enum class SkillEncoding { Disjoint, HalfVector };

enum class ScheduleVariant {
    Deterministic,  // maximize for the first ceil(fraction * length) steps
    Adaptive,       // variance-probe switching
    FixedMax,       // always maximize (plain CIC)
    FixedMin,       // always minimize (NegativeCIC)
    SameSupport,    // deterministic modes, but both modes share the max prior
};

struct SkillConfig {
    std::size_t dim = 64;
    SkillEncoding encoding = SkillEncoding::Disjoint;
    bool shared_support = false;  // SameSupport ablation: ignore mode when sampling
};

struct ModeSchedule {
    std::size_t episode_length = 1000;
    double max_fraction = 0.5;
    ScheduleVariant variant = ScheduleVariant::Deterministic;
};

/// Number of steps at the start of an episode spent in the maximize mode
/// under the deterministic schedule.
std::size_t max_mode_steps(const ModeSchedule& schedule);

/// Mode for a step of the episode. Adaptive runs pick modes through
/// AdaptiveSwitchState instead and must not call this.
int mode_at(const ModeSchedule& schedule, std::size_t step_in_episode);

/// One draw from P(z | m). Components are sampled in index order, one rng
/// draw each (inactive half-vector components draw nothing).
template <class T>
std::vector<T> sample_skill(int mode, Rng& rng, const SkillConfig& cfg) {
    if (mode != kModeMaximize && mode != kModeMinimize)
        throw Error(ErrorCode::InvalidArgument, "sample_skill: mode must be 0 or 1");
    if (cfg.dim == 0) throw Error(ErrorCode::Config, "sample_skill: zero skill dimension");
    const int support = cfg.shared_support ? kModeMaximize : mode;
    std::vector<T> z(cfg.dim, T(0));
    switch (cfg.encoding) {
        case SkillEncoding::Disjoint:
            for (auto& v : z) {
                const double u = rng.uniform();
                v = static_cast<T>(support == kModeMaximize ? u : u - 1.0);
            }
            break;
        case SkillEncoding::HalfVector: {
            if (cfg.dim < 2)
                throw Error(ErrorCode::Config, "sample_skill: half-vector needs dim >= 2");
            const std::size_t half = cfg.dim / 2;
            const std::size_t lo = (support == kModeMaximize) ? 0 : half;
            const std::size_t hi = (support == kModeMaximize) ? half : cfg.dim;
            for (std::size_t i = lo; i < hi; ++i) z[i] = static_cast<T>(rng.uniform());
            break;
        }
    }
    return z;
}

/// Unbiased sample variance (N-1 denominator).
template <class T>
double sample_variance(std::span<const T> values) {
    if (values.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "sample_variance: need at least two values");
    double mean = 0;
    for (T v : values) mean += static_cast<double>(v);
    mean /= static_cast<double>(values.size());
    double acc = 0;
    for (T v : values) {
        const double diff = static_cast<double>(v) - mean;
        acc += diff * diff;
    }
    return acc / static_cast<double>(values.size() - 1);
}

/// Variance of Q(s, pi(s, z_i), z_i) over a batch of probe skills: the
/// uncertainty proxy driving the adaptive switcher. The state is broadcast
/// across rows; probe_skills is [N x d].
template <class T>
double q_variance(const Mlp<T>& critic, const Mlp<T>& actor, std::span<const T> state,
                  const Matrix<T>& probe_skills) {
    const std::size_t n = probe_skills.rows();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "q_variance: need at least two probes");
    Matrix<T> states(n, state.size());
    for (std::size_t i = 0; i < n; ++i)
        std::copy(state.begin(), state.end(), states.row(i).begin());
    Matrix<T> actions = forward(actor, hcat(states, probe_skills));
    Matrix<T> q = forward(critic, hcat(states, probe_skills, actions));
    if (q.cols() != 1) throw Error(ErrorCode::Config, "q_variance: critic must emit a scalar");
    return sample_variance<T>({q.data(), n});
}

/// Records the most recent per-mode variance probe. Reset at every episode
/// start; the first probe of an episode is recorded without switching.
struct AdaptiveSwitchState {
    double beta = 1.1;
    std::size_t probe_count = 64;
    std::array<std::optional<double>, 2> last_variance;

    void reset() { last_variance = {std::nullopt, std::nullopt}; }
};

/// Appendix-style rule: switch to the opposite mode iff
///   beta * V_recorded(opposite) <= V_now(opposite),
/// then record V_now for the opposite mode. Without a recorded value the mode
/// is kept and the probe only recorded.
int adaptive_switch(AdaptiveSwitchState& state, int current_mode, double v_now_opposite);

/// Per-episode mode/skill bookkeeping shared by the training loop and the
/// schedule tests: resamples (m, z) at every multiple of `resample_every`
/// inside an episode, delegating mode choice to the schedule variant.
class SkillScheduler {
  public:
    /// Probe producing the opposite-mode Q-variance for adaptive runs.
    using VarianceProbe = std::function<double(int opposite_mode)>;

    SkillScheduler(ModeSchedule schedule, SkillConfig skills, std::size_t resample_every);

    /// Call once per step, before acting. Returns true when (m, z) was
    /// resampled at this step. The probe may be empty for non-adaptive runs.
    bool begin_step(std::size_t step_in_episode, Rng& rng, const VarianceProbe& probe = {});

    int mode() const { return mode_; }
    const std::vector<float>& skill() const { return skill_; }
    std::uint64_t resample_count() const { return resample_count_; }
    const std::vector<int>& episode_modes() const { return episode_modes_; }

    AdaptiveSwitchState& adaptive_state() { return adaptive_; }

  private:
    ModeSchedule schedule_;
    SkillConfig skills_;
    std::size_t resample_every_;
    AdaptiveSwitchState adaptive_;
    int mode_ = kModeMaximize;
    std::vector<float> skill_;
    std::uint64_t resample_count_ = 0;
    std::vector<int> episode_modes_;  // realized mode at each resample boundary
};

}  // namespace moss
