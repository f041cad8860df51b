#include "moss/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "moss/error.hpp"
#include "moss/eval_stats.hpp"
#include "moss/knn_entropy.hpp"

namespace moss {

namespace {

constexpr const char* kEpisodesHeader = "episode,extrinsic_return,modes";

std::string join_modes(const std::vector<int>& modes) {
    std::string out;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(modes[i]);
    }
    return out;
}

}  // namespace

std::string format_metric(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    return buffer;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::Io, "metrics: cannot open " + path.string());
    if (!append || std::filesystem::file_size(path) == 0) out_ << kHeader << "\n";
}

void MetricsWriter::write(std::uint64_t step, int mode, double intrinsic_reward_mean,
                          double nce_loss, double extrinsic_return, double entropy_proxy) {
    out_ << step << ',' << mode << ',' << format_metric(intrinsic_reward_mean) << ','
         << format_metric(nce_loss) << ',' << format_metric(extrinsic_return) << ','
         << format_metric(entropy_proxy) << "\n";
    out_.flush();
}

double EvalReport::mean_proxy(int mode) const {
    double acc = 0;
    std::size_t n = 0;
    for (const auto& e : episodes)
        if (e.mode == mode) {
            acc += e.entropy_proxy;
            ++n;
        }
    return n ? acc / static_cast<double>(n) : 0.0;
}

double EvalReport::mean_return(int mode) const {
    double acc = 0;
    std::size_t n = 0;
    for (const auto& e : episodes)
        if (e.mode == mode) {
            acc += e.extrinsic_return;
            ++n;
        }
    return n ? acc / static_cast<double>(n) : 0.0;
}

Trainer::Trainer(RunConfig config, std::uint64_t seed, std::filesystem::path out_dir)
    : config_(std::move(config)),
      seed_(seed),
      out_dir_(std::move(out_dir)),
      rng_(seed),
      replay_(1) {
    config_.validate();
    std::filesystem::create_directories(out_dir_);
    replay_ = ReplayBuffer(config_.replay_capacity);
    build_networks();
    write_run_metadata();
}

void Trainer::build_networks() {
    // Fixed construction order so a seed pins every initial weight: actor,
    // critics (orthogonal), then the three projection nets (uniform fan-in).
    agent_ = make_agent<float>(PointMassEnv::kObsDim, PointMassEnv::kActionDim,
                               config_.skill_dim, config_.hidden_dim, rng_);
    AdamConfig adam_cfg;
    adam_cfg.lr = config_.lr;
    agent_adam_ = AgentAdam<float>::init(agent_, adam_cfg);

    const std::size_t d = config_.skill_dim, h = config_.hidden_dim;
    cpc_.state_net = make_mlp<float>({PointMassEnv::kObsDim, h, h, d}, Activation::ReLU,
                                     Activation::Identity, InitScheme::UniformFanIn, rng_);
    cpc_.skill_net = make_mlp<float>({d, h, h, d}, Activation::ReLU, Activation::Identity,
                                     InitScheme::UniformFanIn, rng_);
    cpc_.pair_net = make_mlp<float>({2 * d, h, h, d}, Activation::ReLU, Activation::Identity,
                                    InitScheme::UniformFanIn, rng_);
    cpc_.temperature = static_cast<float>(config_.temperature);
    cpc_.validate();
    cpc_adam_ = CpcAdam<float>::init(cpc_, adam_cfg);
}

void Trainer::write_run_metadata() const {
    nlohmann::json j{{"seed", seed_},
                     {"config_hash", config_hash(config_)},
                     {"arch_hash", architecture_hash(config_)},
                     {"config", nlohmann::json::parse(config_to_json(config_))}};
    std::ofstream run_file(out_dir_ / "run.json", std::ios::trunc);
    run_file << j.dump(2) << "\n";
    std::ofstream config_file(out_dir_ / "config.json", std::ios::trunc);
    config_file << config_to_json(config_) << "\n";
    if (!run_file || !config_file)
        throw Error(ErrorCode::Io, "cannot write run metadata under " + out_dir_.string());
}

Checkpoint Trainer::make_checkpoint(std::uint64_t global_step, std::uint64_t episodes) const {
    Checkpoint ckpt;
    ckpt.config_hash = config_hash(config_);
    ckpt.arch_hash = architecture_hash(config_);
    ckpt.config_json = config_to_json(config_);
    ckpt.global_step = global_step;
    ckpt.rng_state = rng_.serialize();
    ckpt.counters["episodes"] = static_cast<std::int64_t>(episodes);
    pack_mlp(ckpt, "actor", agent_.actor);
    pack_mlp(ckpt, "critic1", agent_.critic1);
    pack_mlp(ckpt, "critic2", agent_.critic2);
    pack_mlp(ckpt, "target1", agent_.target1);
    pack_mlp(ckpt, "target2", agent_.target2);
    pack_mlp(ckpt, "cpc/state", cpc_.state_net);
    pack_mlp(ckpt, "cpc/skill", cpc_.skill_net);
    pack_mlp(ckpt, "cpc/pair", cpc_.pair_net);
    pack_adam(ckpt, "adam/actor", agent_adam_.actor);
    pack_adam(ckpt, "adam/critic1", agent_adam_.critic1);
    pack_adam(ckpt, "adam/critic2", agent_adam_.critic2);
    pack_adam(ckpt, "adam/cpc_state", cpc_adam_.state_net);
    pack_adam(ckpt, "adam/cpc_skill", cpc_adam_.skill_net);
    pack_adam(ckpt, "adam/cpc_pair", cpc_adam_.pair_net);
    return ckpt;
}

void Trainer::restore_from(const Checkpoint& ckpt, bool restore_optimizers) {
    unpack_mlp(ckpt, "actor", agent_.actor);
    unpack_mlp(ckpt, "critic1", agent_.critic1);
    unpack_mlp(ckpt, "critic2", agent_.critic2);
    unpack_mlp(ckpt, "target1", agent_.target1);
    unpack_mlp(ckpt, "target2", agent_.target2);
    unpack_mlp(ckpt, "cpc/state", cpc_.state_net);
    unpack_mlp(ckpt, "cpc/skill", cpc_.skill_net);
    unpack_mlp(ckpt, "cpc/pair", cpc_.pair_net);
    if (restore_optimizers) {
        unpack_adam(ckpt, "adam/actor", agent_adam_.actor);
        unpack_adam(ckpt, "adam/critic1", agent_adam_.critic1);
        unpack_adam(ckpt, "adam/critic2", agent_adam_.critic2);
        unpack_adam(ckpt, "adam/cpc_state", cpc_adam_.state_net);
        unpack_adam(ckpt, "adam/cpc_skill", cpc_adam_.skill_net);
        unpack_adam(ckpt, "adam/cpc_pair", cpc_adam_.pair_net);
        rng_.deserialize(ckpt.rng_state);
    }
}

std::filesystem::path Trainer::write_checkpoint(std::uint64_t global_step,
                                                std::uint64_t episodes,
                                                const std::string& stem) {
    const auto path = out_dir_ / (stem + ".moss");
    make_checkpoint(global_step, episodes).save(path);
    if (config_.save_replay) {
        std::ofstream snap(out_dir_ / (stem + ".replay"), std::ios::binary | std::ios::trunc);
        replay_.save(snap);
    }
    return path;
}

Matrix<float> Trainer::reward_embeddings(const Matrix<float>& states,
                                         const Matrix<float>& next_states) const {
    if (config_.reward_embedding == RewardEmbedding::Pair)
        return pair_embedding(cpc_, states, next_states);
    return forward(cpc_.state_net, states);
}

Trainer::IntrinsicBatch Trainer::intrinsic_rewards(const NStepBatch& batch) const {
    const Matrix<float> emb = reward_embeddings(batch.step_states, batch.step_next_states);
    const std::vector<float> radii = knn_radii(emb, config_.knn_k);
    const float c = static_cast<float>(config_.knn_c);

    IntrinsicBatch out;
    out.rewards = Matrix<float>(batch.size(), batch.n);
    double signed_sum = 0, proxy_sum = 0;
    for (std::size_t i = 0; i < batch.size(); ++i)
        for (std::size_t j = 0; j < batch.n; ++j) {
            const float r = std::log(c + radii[i * batch.n + j]);
            const float value = batch.modes[i] == kModeMaximize ? r : -r;
            out.rewards(i, j) = value;
            signed_sum += value;
            proxy_sum += r;
        }
    const double count = static_cast<double>(batch.size() * batch.n);
    out.signed_mean = signed_sum / count;
    out.proxy_mean = proxy_sum / count;
    return out;
}

std::vector<float> Trainer::random_action() {
    std::vector<float> action(PointMassEnv::kActionDim);
    for (auto& a : action) a = static_cast<float>(rng_.uniform(-1.0, 1.0));
    return action;
}

PretrainResult Trainer::pretrain(const std::optional<std::filesystem::path>& resume) {
    std::uint64_t global_step = 0;
    std::uint64_t episode = 0;
    if (resume) {
        Checkpoint ckpt = Checkpoint::load(*resume);
        check_compatibility(ckpt, config_hash(config_), architecture_hash(config_),
                            LoadPolicy::Strict);
        restore_from(ckpt, true);
        global_step = ckpt.global_step;
        episode = static_cast<std::uint64_t>(ckpt.counters.at("episodes"));
        auto snapshot = resume->parent_path() / (resume->stem().string() + ".replay");
        if (std::filesystem::exists(snapshot)) {
            std::ifstream in(snapshot, std::ios::binary);
            replay_ = ReplayBuffer::load(in);
        }
    }

    PointMassEnv env(config_.env, config_.task);
    SkillScheduler scheduler(config_.mode_schedule(), config_.skill_config(),
                             config_.resample_every);
    MetricsWriter metrics(out_dir_ / "metrics.csv", resume.has_value());
    const auto episodes_path = out_dir_ / "episodes.csv";
    const bool episodes_fresh = !resume || !std::filesystem::exists(episodes_path) ||
                                std::filesystem::file_size(episodes_path) == 0;
    std::ofstream episodes_csv(episodes_path, resume ? std::ios::app : std::ios::trunc);
    if (episodes_fresh) episodes_csv << kEpisodesHeader << "\n";

    auto probe = [&](int opposite_mode) {
        Matrix<float> probes(config_.probe_skills, config_.skill_dim);
        for (std::size_t i = 0; i < config_.probe_skills; ++i) {
            auto z = sample_skill<float>(opposite_mode, rng_, config_.skill_config());
            std::copy(z.begin(), z.end(), probes.row(i).begin());
        }
        return q_variance<float>(agent_.critic1, agent_.actor, obs_probe_, probes);
    };

    std::vector<float> obs = env.reset();
    std::size_t step_in_episode = 0;
    double episode_return = 0, last_episode_return = 0;
    double last_nce = 0;
    std::uint64_t updates = 0;
    std::uint64_t next_checkpoint = (global_step / config_.checkpoint_every + 1) *
                                    config_.checkpoint_every;

    const std::uint64_t total = config_.pretrain_steps;
    while (global_step < total) {
        try {
            obs_probe_ = obs;
            scheduler.begin_step(step_in_episode, rng_,
                                 config_.schedule == ScheduleVariant::Adaptive
                                     ? SkillScheduler::VarianceProbe(probe)
                                     : SkillScheduler::VarianceProbe{});

            std::vector<float> action =
                global_step < config_.seed_frames
                    ? random_action()
                    : act<float>(agent_.actor, obs, scheduler.skill(), true,
                                 config_.exploration(), rng_);
            std::vector<float> applied = wrap_noise(action, config_.action_noise, rng_);
            StepResult result = env.step(applied, rng_);

            replay_.push(Transition{obs, action, result.observation,
                                    static_cast<std::uint8_t>(scheduler.mode()),
                                    scheduler.skill(), result.reward, result.done, episode,
                                    static_cast<std::uint32_t>(step_in_episode)});
            global_step += 1;
            episode_return += result.reward;
            obs = result.observation;
            step_in_episode += 1;

            if (global_step >= config_.seed_frames && global_step % config_.update_every == 0) {
                auto batch = replay_.sample_nstep(config_.batch_size, config_.n_step, rng_);
                if (batch) {
                    IntrinsicBatch intrinsic = intrinsic_rewards(*batch);
                    CriticBatch<float> critic_batch{batch->states, batch->skills,
                                                    batch->actions, intrinsic.rewards,
                                                    batch->bootstrap_states};
                    critic_update(agent_, agent_adam_, critic_batch,
                                  static_cast<float>(config_.gamma), config_.grad_clip);
                    actor_update(agent_, agent_adam_, batch->states, batch->skills,
                                 config_.grad_clip);
                    soft_update_targets(agent_, static_cast<float>(config_.tau));
                    if (global_step % config_.cpc_update_every == 0)
                        last_nce = cpc_update(cpc_, batch->states, batch->first_next_states,
                                              batch->skills, cpc_adam_, config_.grad_clip);
                    updates += 1;
                    metrics.write(global_step, scheduler.mode(), intrinsic.signed_mean,
                                  last_nce, last_episode_return, intrinsic.proxy_mean);
                }
            }

            if (result.done) {
                episodes_csv << episode << ',' << format_metric(episode_return) << ','
                             << join_modes(scheduler.episode_modes()) << "\n";
                episodes_csv.flush();
                last_episode_return = episode_return;
                episode_return = 0;
                episode += 1;
                step_in_episode = 0;
                obs = env.reset();
                if (global_step >= next_checkpoint && global_step < total) {
                    write_checkpoint(global_step, episode,
                                     "checkpoint_" + std::to_string(global_step));
                    next_checkpoint = (global_step / config_.checkpoint_every + 1) *
                                      config_.checkpoint_every;
                }
            }
        } catch (const Error& e) {
            throw Error(e.code(), "pretrain aborted at step " + std::to_string(global_step) +
                                      ": " + e.what());
        }
    }

    PretrainResult out;
    out.checkpoint_path = write_checkpoint(global_step, episode, "final");
    out.steps = global_step;
    out.updates = updates;
    return out;
}

double Trainer::rollout_return(PointMassEnv& env, std::span<const float> skill,
                               std::size_t max_steps, bool explore, std::uint64_t episode_id,
                               int mode, bool store) {
    std::vector<float> obs = env.reset();
    double total = 0;
    for (std::size_t t = 0; t < max_steps; ++t) {
        std::vector<float> action =
            act<float>(agent_.actor, obs, skill, explore, config_.exploration(), rng_);
        std::vector<float> applied = wrap_noise(action, config_.action_noise, rng_);
        StepResult result = env.step(applied, rng_);
        if (store)
            replay_.push(Transition{obs, action, result.observation,
                                    static_cast<std::uint8_t>(mode),
                                    {skill.begin(), skill.end()}, result.reward, result.done,
                                    episode_id, static_cast<std::uint32_t>(t)});
        total += result.reward;
        obs = result.observation;
        if (result.done) break;
    }
    return total;
}

FinetuneResult Trainer::finetune(const std::optional<std::filesystem::path>& checkpoint_path,
                                 bool expert_budget) {
    if (config_.task.kind == TaskKind::None)
        throw Error(ErrorCode::Config, "finetune: config.task must name a downstream task");
    if (checkpoint_path) {
        Checkpoint ckpt = Checkpoint::load(*checkpoint_path);
        check_compatibility(ckpt, config_hash(config_), architecture_hash(config_),
                            LoadPolicy::AllowCompatible);
        restore_from(ckpt, false);  // weights only; optimizers restart
    }

    const std::uint64_t budget =
        config_.finetune_steps * (expert_budget ? config_.expert_multiplier : 1);
    PointMassEnv env(config_.env, config_.task);

    // Candidate grid from both priors, scored on extrinsic return within the
    // seed-frame budget. "One episode each" is truncated so the whole grid
    // fits into seed_frames environment steps.
    const std::size_t candidates = 2 * config_.candidate_skills_per_mode;
    const std::size_t selection_len = std::clamp<std::size_t>(
        config_.seed_frames / candidates, config_.n_step, config_.env.episode_length);
    if (candidates * selection_len >= budget)
        throw Error(ErrorCode::Config, "finetune: budget too small for skill selection");

    SkillConfig skill_cfg = config_.skill_config();
    skill_cfg.shared_support = false;  // candidates come from both priors
    std::vector<std::vector<float>> skills;
    std::vector<int> modes;
    std::vector<double> returns;
    for (std::size_t c = 0; c < candidates; ++c) {
        const int mode = c < config_.candidate_skills_per_mode ? kModeMaximize : kModeMinimize;
        auto z = sample_skill<float>(mode, rng_, skill_cfg);
        const double ret = rollout_return(env, z, selection_len, false, c, mode, true);
        skills.push_back(std::move(z));
        modes.push_back(mode);
        returns.push_back(ret);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates; ++c)
        if (returns[c] > returns[best]) best = c;

    FinetuneResult result;
    result.frozen_mode = modes[best];
    result.frozen_skill = skills[best];

    {
        nlohmann::json j{{"frozen_mode", result.frozen_mode},
                         {"frozen_skill", result.frozen_skill},
                         {"candidate_modes", modes},
                         {"candidate_returns", returns},
                         {"selection_episode_length", selection_len}};
        std::ofstream out(out_dir_ / "selection.json", std::ios::trunc);
        out << j.dump(2) << "\n";
    }

    // Extrinsic-reward training with the frozen skill.
    MetricsWriter metrics(out_dir_ / "metrics.csv", false);
    std::uint64_t global_step = candidates * selection_len;
    std::uint64_t episode = candidates;
    std::size_t step_in_episode = 0;
    double episode_return = 0, last_episode_return = 0;
    std::vector<float> obs = env.reset();
    while (global_step < budget) {
        try {
            std::vector<float> action =
                global_step < config_.seed_frames
                    ? random_action()
                    : act<float>(agent_.actor, obs, result.frozen_skill, true,
                                 config_.exploration(), rng_);
            std::vector<float> applied = wrap_noise(action, config_.action_noise, rng_);
            StepResult step = env.step(applied, rng_);
            replay_.push(Transition{obs, action, step.observation,
                                    static_cast<std::uint8_t>(result.frozen_mode),
                                    result.frozen_skill, step.reward, step.done, episode,
                                    static_cast<std::uint32_t>(step_in_episode)});
            global_step += 1;
            episode_return += step.reward;
            obs = step.observation;
            step_in_episode += 1;

            if (global_step >= config_.seed_frames && global_step % config_.update_every == 0) {
                auto batch = replay_.sample_nstep(config_.batch_size, config_.n_step, rng_);
                if (batch) {
                    CriticBatch<float> critic_batch{batch->states, batch->skills,
                                                    batch->actions, batch->rewards_ext,
                                                    batch->bootstrap_states};
                    critic_update(agent_, agent_adam_, critic_batch,
                                  static_cast<float>(config_.gamma), config_.grad_clip);
                    actor_update(agent_, agent_adam_, batch->states, batch->skills,
                                 config_.grad_clip);
                    soft_update_targets(agent_, static_cast<float>(config_.tau));
                    metrics.write(global_step, result.frozen_mode, 0.0, 0.0,
                                  last_episode_return, 0.0);
                }
            }
            if (step.done) {
                last_episode_return = episode_return;
                episode_return = 0;
                episode += 1;
                step_in_episode = 0;
                obs = env.reset();
            }
        } catch (const Error& e) {
            throw Error(e.code(), "finetune aborted at step " + std::to_string(global_step) +
                                      ": " + e.what());
        }
    }

    // Final greedy evaluation episodes; the reported score is their IQM.
    std::ofstream eval_csv(out_dir_ / "eval_returns.csv", std::ios::trunc);
    eval_csv << "episode,extrinsic_return\n";
    for (std::size_t e = 0; e < config_.eval_episodes; ++e) {
        const double ret = rollout_return(env, result.frozen_skill,
                                          config_.env.episode_length, false, 0, 0, false);
        result.eval_returns.push_back(ret);
        eval_csv << e << ',' << format_metric(ret) << "\n";
    }
    result.final_score = result.eval_returns.size() >= 4
                             ? iqm(result.eval_returns)
                             : mean(result.eval_returns);

    {
        nlohmann::json j{{"task", to_string(config_.task.kind)},
                         {"seed", seed_},
                         {"score", result.final_score},
                         {"expert_budget", expert_budget},
                         {"steps", budget}};
        std::ofstream out(out_dir_ / "score.json", std::ios::trunc);
        out << j.dump(2) << "\n";
    }
    write_checkpoint(budget, episode, "final");
    return result;
}

EvalReport Trainer::evaluate(const std::filesystem::path& checkpoint_path, int mode,
                             std::size_t num_episodes) {
    Checkpoint ckpt = Checkpoint::load(checkpoint_path);
    check_compatibility(ckpt, config_hash(config_), architecture_hash(config_),
                        LoadPolicy::AllowCompatible);
    restore_from(ckpt, false);

    if (mode != -1 && mode != kModeMaximize && mode != kModeMinimize)
        throw Error(ErrorCode::InvalidArgument, "evaluate: mode must be 0, 1 or -1 (both)");
    const std::size_t steps = config_.env.episode_length;
    if (steps <= config_.knn_k + 1)
        throw Error(ErrorCode::Config, "evaluate: episode too short for the entropy proxy");

    PointMassEnv env(config_.env, config_.task);
    std::ofstream eval_csv(out_dir_ / "eval.csv", std::ios::trunc);
    eval_csv << "episode,mode,entropy_proxy,extrinsic_return\n";

    EvalReport report;
    std::vector<int> modes;
    if (mode == -1)
        modes = {kModeMaximize, kModeMinimize};
    else
        modes = {mode};

    std::size_t row = 0;
    for (int m : modes) {
        for (std::size_t e = 0; e < num_episodes; ++e) {
            const std::vector<float> skill = sample_skill<float>(m, rng_, config_.skill_config());
            std::vector<float> obs = env.reset();
            Matrix<float> states(steps, PointMassEnv::kObsDim);
            Matrix<float> next_states(steps, PointMassEnv::kObsDim);
            double total = 0;
            for (std::size_t t = 0; t < steps; ++t) {
                std::vector<float> action = act<float>(agent_.actor, obs, skill, false,
                                                       config_.exploration(), rng_);
                std::vector<float> applied = wrap_noise(action, config_.action_noise, rng_);
                StepResult result = env.step(applied, rng_);
                std::copy(obs.begin(), obs.end(), states.row(t).begin());
                std::copy(result.observation.begin(), result.observation.end(),
                          next_states.row(t).begin());
                total += result.reward;
                obs = result.observation;
                if (result.done) break;
            }
            const Matrix<float> emb = reward_embeddings(states, next_states);
            const std::vector<float> radii = knn_radii(emb, config_.knn_k);
            double proxy = 0;
            for (float r : radii) proxy += std::log(static_cast<float>(config_.knn_c) + r);
            proxy /= static_cast<double>(radii.size());

            report.episodes.push_back({m, proxy, total});
            eval_csv << row++ << ',' << m << ',' << format_metric(proxy) << ','
                     << format_metric(total) << "\n";
        }
    }
    return report;
}

}  // namespace moss
