#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "moss/adam.hpp"
#include "moss/matrix.hpp"
#include "moss/nn.hpp"
#include "moss/rng.hpp"

namespace moss {

struct ExplorationSpec {
    double stddev = 0.2;
    double clip = 0.3;
};

/// Skill-conditioned DDPG with clipped double-Q targets. The actor maps
/// (state, skill) to a Tanh-bounded action; the twin critics map
/// (state, skill, action) to scalar Q-values. Targets start equal to their
/// online critics and trail them by EMA.
template <class T>
struct AgentNets {
    Mlp<T> actor;
    Mlp<T> critic1;
    Mlp<T> critic2;
    Mlp<T> target1;
    Mlp<T> target2;
};

template <class T>
struct AgentAdam {
    AdamState<T> actor;
    AdamState<T> critic1;
    AdamState<T> critic2;

    static AgentAdam init(const AgentNets<T>& nets, AdamConfig cfg = {}) {
        return {AdamState<T>::init(nets.actor, cfg), AdamState<T>::init(nets.critic1, cfg),
                AdamState<T>::init(nets.critic2, cfg)};
    }
};

template <class T>
AgentNets<T> make_agent(std::size_t obs_dim, std::size_t action_dim, std::size_t skill_dim,
                        std::size_t hidden_dim, Rng& rng) {
    AgentNets<T> nets;
    nets.actor = make_mlp<T>({obs_dim + skill_dim, hidden_dim, hidden_dim, action_dim},
                             Activation::ReLU, Activation::Tanh, InitScheme::Orthogonal, rng);
    const std::vector<std::size_t> critic_dims = {obs_dim + skill_dim + action_dim, hidden_dim,
                                                  hidden_dim, 1};
    nets.critic1 = make_mlp<T>(critic_dims, Activation::ReLU, Activation::Identity,
                               InitScheme::Orthogonal, rng);
    nets.critic2 = make_mlp<T>(critic_dims, Activation::ReLU, Activation::Identity,
                               InitScheme::Orthogonal, rng);
    nets.target1 = nets.critic1;
    nets.target2 = nets.critic2;
    return nets;
}

/// Adds per-component noise already drawn by the caller: each component is
/// clipped to [-clip, clip], added, and the result clamped to [-1, 1].
template <class T>
std::vector<T> apply_exploration_noise(std::vector<T> action, std::span<const T> raw_noise,
                                       const ExplorationSpec& spec) {
    if (raw_noise.size() != action.size())
        throw Error(ErrorCode::InvalidArgument, "apply_exploration_noise: size mismatch");
    for (std::size_t i = 0; i < action.size(); ++i) {
        const T clipped = std::clamp(raw_noise[i], static_cast<T>(-spec.clip),
                                     static_cast<T>(spec.clip));
        action[i] = std::clamp(action[i] + clipped, T(-1), T(1));
    }
    return action;
}

/// Deterministic Tanh policy; optionally perturbed by clipped Gaussian noise.
template <class T>
std::vector<T> act(const Mlp<T>& actor, std::span<const T> state, std::span<const T> skill,
                   bool explore, const ExplorationSpec& spec, Rng& rng) {
    Matrix<T> input(1, state.size() + skill.size());
    std::copy(state.begin(), state.end(), input.row(0).begin());
    std::copy(skill.begin(), skill.end(), input.row(0).begin() + state.size());
    Matrix<T> out = forward(actor, input);
    if (!out.all_finite()) throw Error(ErrorCode::Training, "act: non-finite actor output");
    std::vector<T> action(out.row(0).begin(), out.row(0).end());
    if (!explore) return action;
    std::vector<T> noise(action.size());
    for (auto& v : noise) v = static_cast<T>(rng.normal(0.0, spec.stddev));
    return apply_exploration_noise(std::move(action), std::span<const T>(noise), spec);
}

/// sum_{i<n} gamma^i r_i + gamma^n * bootstrap_q
template <class T>
T n_step_target(std::span<const T> rewards, T discount, T bootstrap_q) {
    if (rewards.empty())
        throw Error(ErrorCode::InvalidArgument, "n_step_target: empty reward window");
    T value = T(0);
    T scale = T(1);
    for (T r : rewards) {
        value += scale * r;
        scale *= discount;
    }
    return value + scale * bootstrap_q;
}

template <class T>
struct CriticBatch {
    Matrix<T> states;            // [N x obs]
    Matrix<T> skills;            // [N x d]
    Matrix<T> actions;           // [N x act]
    Matrix<T> rewards;           // [N x n], already the signed training reward
    Matrix<T> bootstrap_states;  // [N x obs]
};

/// Clipped double-Q TD update: targets bootstrap min(targetQ1, targetQ2) at
/// the actor's noiseless action for the bootstrap state; MSE on both online
/// critics; one Adam step each. Returns the pre-step TD loss.
template <class T>
double critic_update(AgentNets<T>& nets, AgentAdam<T>& adam, const CriticBatch<T>& batch,
                     T gamma, double grad_clip = 0.0) {
    const std::size_t n_rows = batch.states.rows();
    if (n_rows == 0) throw Error(ErrorCode::InvalidArgument, "critic_update: empty batch");

    Matrix<T> next_actions = forward(nets.actor, hcat(batch.bootstrap_states, batch.skills));
    Matrix<T> target_in = hcat(batch.bootstrap_states, batch.skills, next_actions);
    Matrix<T> q1t = forward(nets.target1, target_in);
    Matrix<T> q2t = forward(nets.target2, target_in);

    std::vector<T> targets(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const T boot = std::min(q1t(i, 0), q2t(i, 0));
        targets[i] = n_step_target<T>(batch.rewards.row(i), gamma, boot);
    }

    Matrix<T> critic_in = hcat(batch.states, batch.skills, batch.actions);
    ForwardCache<T> cache1, cache2;
    Matrix<T> q1 = forward(nets.critic1, critic_in, &cache1);
    Matrix<T> q2 = forward(nets.critic2, critic_in, &cache2);

    double loss = 0.0;
    Matrix<T> up1(n_rows, 1), up2(n_rows, 1);
    const T inv_n = T(1) / static_cast<T>(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const T d1 = q1(i, 0) - targets[i];
        const T d2 = q2(i, 0) - targets[i];
        loss += (double(d1) * d1 + double(d2) * d2) / n_rows;
        up1(i, 0) = T(2) * d1 * inv_n;
        up2(i, 0) = T(2) * d2 * inv_n;
    }

    MlpGrads<T> g1 = MlpGrads<T>::zeros_like(nets.critic1);
    MlpGrads<T> g2 = MlpGrads<T>::zeros_like(nets.critic2);
    backward(nets.critic1, cache1, up1, g1);
    backward(nets.critic2, cache2, up2, g2);
    clip_grad_norm(g1, grad_clip);
    clip_grad_norm(g2, grad_clip);
    adam_step(nets.critic1, g1, adam.critic1);
    adam_step(nets.critic2, g2, adam.critic2);
    return loss;
}

/// Deterministic policy gradient through min(Q1, Q2) with frozen critics:
/// maximizes the min-Q of the actor's own actions. Returns the actor loss
/// (negative mean min-Q before the step).
template <class T>
double actor_update(AgentNets<T>& nets, AgentAdam<T>& adam, const Matrix<T>& states,
                    const Matrix<T>& skills, double grad_clip = 0.0) {
    const std::size_t n_rows = states.rows();
    if (n_rows == 0) throw Error(ErrorCode::InvalidArgument, "actor_update: empty batch");

    ForwardCache<T> cache_actor;
    Matrix<T> actions = forward(nets.actor, hcat(states, skills), &cache_actor);
    Matrix<T> critic_in = hcat(states, skills, actions);
    ForwardCache<T> cache1, cache2;
    Matrix<T> q1 = forward(nets.critic1, critic_in, &cache1);
    Matrix<T> q2 = forward(nets.critic2, critic_in, &cache2);

    double loss = 0.0;
    Matrix<T> up1(n_rows, 1), up2(n_rows, 1);
    const T inv_n = T(1) / static_cast<T>(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const bool first = q1(i, 0) <= q2(i, 0);
        loss -= double(first ? q1(i, 0) : q2(i, 0)) / n_rows;
        up1(i, 0) = first ? -inv_n : T(0);
        up2(i, 0) = first ? T(0) : -inv_n;
    }

    // Critics stay frozen: their parameter gradients are computed into
    // scratch and dropped; only the input gradient flows to the actor.
    MlpGrads<T> scratch1 = MlpGrads<T>::zeros_like(nets.critic1);
    MlpGrads<T> scratch2 = MlpGrads<T>::zeros_like(nets.critic2);
    Matrix<T> din1 = backward(nets.critic1, cache1, up1, scratch1);
    Matrix<T> din2 = backward(nets.critic2, cache2, up2, scratch2);

    const std::size_t action_offset = states.cols() + skills.cols();
    Matrix<T> dactions(n_rows, actions.cols());
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t j = 0; j < actions.cols(); ++j)
            dactions(i, j) = din1(i, action_offset + j) + din2(i, action_offset + j);

    MlpGrads<T> g_actor = MlpGrads<T>::zeros_like(nets.actor);
    backward(nets.actor, cache_actor, dactions, g_actor);
    clip_grad_norm(g_actor, grad_clip);
    adam_step(nets.actor, g_actor, adam.actor);
    return loss;
}

/// target <- (1 - tau) * target + tau * online, elementwise, both critics.
template <class T>
void soft_update_targets(AgentNets<T>& nets, T tau) {
    auto blend = [tau](Mlp<T>& target, const Mlp<T>& online) {
        for (std::size_t l = 0; l < target.layers.size(); ++l) {
            auto& tw = target.layers[l].weight;
            const auto& ow = online.layers[l].weight;
            for (std::size_t i = 0; i < tw.size(); ++i)
                tw.data()[i] = (T(1) - tau) * tw.data()[i] + tau * ow.data()[i];
            for (std::size_t i = 0; i < target.layers[l].bias.size(); ++i)
                target.layers[l].bias[i] = (T(1) - tau) * target.layers[l].bias[i] +
                                           tau * online.layers[l].bias[i];
        }
    };
    blend(nets.target1, nets.critic1);
    blend(nets.target2, nets.critic2);
}

}  // namespace moss
