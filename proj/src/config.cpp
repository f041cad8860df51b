#include "moss/config.hpp"

#include <set>

#include "json.hpp"
#include "moss/error.hpp"

namespace moss {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& scope,
                  const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items())
        if (!known.contains(key))
            throw Error(ErrorCode::Config, "config: unknown key '" + scope + key + "'");
}

SkillEncoding encoding_from_string(const std::string& s) {
    if (s == "disjoint") return SkillEncoding::Disjoint;
    if (s == "half_vector") return SkillEncoding::HalfVector;
    throw Error(ErrorCode::Config, "config: unknown skill encoding '" + s + "'");
}

ScheduleVariant schedule_from_string(const std::string& s) {
    if (s == "deterministic") return ScheduleVariant::Deterministic;
    if (s == "adaptive") return ScheduleVariant::Adaptive;
    if (s == "fixed_max") return ScheduleVariant::FixedMax;
    if (s == "fixed_min") return ScheduleVariant::FixedMin;
    if (s == "same_support") return ScheduleVariant::SameSupport;
    throw Error(ErrorCode::Config, "config: unknown schedule variant '" + s + "'");
}

RewardEmbedding embedding_from_string(const std::string& s) {
    if (s == "pair") return RewardEmbedding::Pair;
    if (s == "state") return RewardEmbedding::State;
    throw Error(ErrorCode::Config, "config: unknown reward embedding '" + s + "'");
}

Perturbation perturbation_from_string(const std::string& s) {
    if (s == "none") return Perturbation::None;
    if (s == "wind") return Perturbation::Wind;
    throw Error(ErrorCode::Config, "config: unknown perturbation '" + s + "'");
}

json env_to_json(const RunConfig& c) {
    return json{{"dt", c.env.dt},
                {"mass", c.env.mass},
                {"friction", c.env.friction},
                {"force_scale", c.env.force_scale},
                {"half_width", c.env.half_width},
                {"episode_length", c.env.episode_length},
                {"perturbation", to_string(c.env.perturbation)},
                {"wind_sigma", c.env.wind_sigma},
                {"wind_theta", c.env.wind_theta}};
}

json noise_to_json(const RunConfig& c) {
    return json{{"enabled", c.action_noise.enabled},
                {"p", c.action_noise.p},
                {"sigma", c.action_noise.sigma}};
}

json task_to_json(const RunConfig& c) {
    return json{{"kind", to_string(c.task.kind)},
                {"goal", {c.task.goal[0], c.task.goal[1]}},
                {"target_speed", c.task.target_speed}};
}

}  // namespace

std::string to_string(SkillEncoding encoding) {
    return encoding == SkillEncoding::Disjoint ? "disjoint" : "half_vector";
}

std::string to_string(ScheduleVariant variant) {
    switch (variant) {
        case ScheduleVariant::Deterministic: return "deterministic";
        case ScheduleVariant::Adaptive: return "adaptive";
        case ScheduleVariant::FixedMax: return "fixed_max";
        case ScheduleVariant::FixedMin: return "fixed_min";
        case ScheduleVariant::SameSupport: return "same_support";
    }
    return "deterministic";
}

std::string to_string(RewardEmbedding embedding) {
    return embedding == RewardEmbedding::Pair ? "pair" : "state";
}

std::string to_string(Perturbation perturbation) {
    return perturbation == Perturbation::None ? "none" : "wind";
}

void RunConfig::validate() const {
    env.validate();
    action_noise.validate();
    if (skill_dim == 0 || skill_dim > 4096)
        throw Error(ErrorCode::Config, "config: skill_dim outside (0, 4096]");
    if (encoding == SkillEncoding::HalfVector && skill_dim < 2)
        throw Error(ErrorCode::Config, "config: half_vector needs skill_dim >= 2");
    if (max_fraction < 0 || max_fraction > 1)
        throw Error(ErrorCode::Config, "config: max_fraction outside [0, 1]");
    if (resample_every == 0 || resample_every > env.episode_length)
        throw Error(ErrorCode::Config, "config: resample_every outside (0, episode_length]");
    if (beta <= 1.0) throw Error(ErrorCode::Config, "config: beta must exceed 1");
    if (probe_skills < 2) throw Error(ErrorCode::Config, "config: probe_skills must be >= 2");
    if (hidden_dim == 0 || hidden_dim > 8192)
        throw Error(ErrorCode::Config, "config: hidden_dim outside (0, 8192]");
    if (gamma < 0 || gamma >= 1) throw Error(ErrorCode::Config, "config: gamma outside [0, 1)");
    if (lr <= 0 || lr > 1) throw Error(ErrorCode::Config, "config: lr outside (0, 1]");
    if (tau <= 0 || tau > 1) throw Error(ErrorCode::Config, "config: tau outside (0, 1]");
    if (n_step == 0 || n_step > 16)
        throw Error(ErrorCode::Config, "config: n_step outside (0, 16]");
    if (batch_size < 2) throw Error(ErrorCode::Config, "config: batch_size must be >= 2");
    if (update_every == 0) throw Error(ErrorCode::Config, "config: update_every must be > 0");
    if (cpc_update_every == 0)
        throw Error(ErrorCode::Config, "config: cpc_update_every must be > 0");
    if (exploration_stddev <= 0)
        throw Error(ErrorCode::Config, "config: exploration_stddev must be positive");
    if (exploration_clip <= 0)
        throw Error(ErrorCode::Config, "config: exploration_clip must be positive");
    if (temperature <= 0) throw Error(ErrorCode::Config, "config: temperature must be positive");
    if (knn_k == 0) throw Error(ErrorCode::Config, "config: knn_k must be positive");
    if (knn_c <= 0) throw Error(ErrorCode::Config, "config: knn_c must be positive");
    if (knn_k + 1 >= batch_size * n_step)
        throw Error(ErrorCode::Config, "config: knn_k too large for the update batch");
    if (replay_capacity < batch_size)
        throw Error(ErrorCode::Config, "config: replay_capacity below batch_size");
    if (pretrain_steps == 0) throw Error(ErrorCode::Config, "config: pretrain_steps must be > 0");
    if (finetune_steps == 0) throw Error(ErrorCode::Config, "config: finetune_steps must be > 0");
    if (checkpoint_every == 0)
        throw Error(ErrorCode::Config, "config: checkpoint_every must be > 0");
    if (candidate_skills_per_mode == 0)
        throw Error(ErrorCode::Config, "config: candidate_skills_per_mode must be > 0");
    if (expert_multiplier == 0)
        throw Error(ErrorCode::Config, "config: expert_multiplier must be > 0");
    if (seed_frames <= n_step)
        throw Error(ErrorCode::Config, "config: seed_frames must exceed n_step");
}

RunConfig default_config(const std::string& profile) {
    RunConfig c;
    if (profile == "paper") return c;
    if (profile == "desk") {
        c.hidden_dim = 128;
        c.batch_size = 256;
        c.pretrain_steps = 100000;
        c.finetune_steps = 20000;
        c.checkpoint_every = 10000;
        return c;
    }
    throw Error(ErrorCode::Config, "unknown profile '" + profile + "' (expected desk|paper)");
}

std::string config_to_json(const RunConfig& c) {
    json j;
    j["env"] = env_to_json(c);
    j["action_noise"] = noise_to_json(c);
    j["task"] = task_to_json(c);
    j["skill"] = json{{"dim", c.skill_dim},
                      {"encoding", to_string(c.encoding)},
                      {"schedule", to_string(c.schedule)},
                      {"max_fraction", c.max_fraction},
                      {"resample_every", c.resample_every},
                      {"beta", c.beta},
                      {"probe_skills", c.probe_skills}};
    j["agent"] = json{{"hidden_dim", c.hidden_dim},
                      {"gamma", c.gamma},
                      {"lr", c.lr},
                      {"tau", c.tau},
                      {"n_step", c.n_step},
                      {"batch_size", c.batch_size},
                      {"update_every", c.update_every},
                      {"cpc_update_every", c.cpc_update_every},
                      {"seed_frames", c.seed_frames},
                      {"exploration_stddev", c.exploration_stddev},
                      {"exploration_clip", c.exploration_clip},
                      {"grad_clip", c.grad_clip}};
    j["cpc"] = json{{"temperature", c.temperature},
                    {"knn_k", c.knn_k},
                    {"knn_c", c.knn_c},
                    {"reward_embedding", to_string(c.reward_embedding)}};
    j["replay"] = json{{"capacity", c.replay_capacity}};
    j["run"] = json{{"pretrain_steps", c.pretrain_steps},
                    {"finetune_steps", c.finetune_steps},
                    {"checkpoint_every", c.checkpoint_every},
                    {"eval_episodes", c.eval_episodes},
                    {"candidate_skills_per_mode", c.candidate_skills_per_mode},
                    {"expert_multiplier", c.expert_multiplier},
                    {"save_replay", c.save_replay}};
    return j.dump(2);
}

RunConfig config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw Error(ErrorCode::Config, "config: top level must be a JSON object");
    RunConfig c;
    try {
        require_keys(j, "", {"env", "action_noise", "task", "skill", "agent", "cpc", "replay",
                             "run"});
        if (j.contains("env")) {
            const auto& e = j["env"];
            require_keys(e, "env.",
                         {"dt", "mass", "friction", "force_scale", "half_width",
                          "episode_length", "perturbation", "wind_sigma", "wind_theta"});
            c.env.dt = e.value("dt", c.env.dt);
            c.env.mass = e.value("mass", c.env.mass);
            c.env.friction = e.value("friction", c.env.friction);
            c.env.force_scale = e.value("force_scale", c.env.force_scale);
            c.env.half_width = e.value("half_width", c.env.half_width);
            c.env.episode_length = e.value("episode_length", c.env.episode_length);
            if (e.contains("perturbation"))
                c.env.perturbation = perturbation_from_string(e["perturbation"]);
            c.env.wind_sigma = e.value("wind_sigma", c.env.wind_sigma);
            c.env.wind_theta = e.value("wind_theta", c.env.wind_theta);
        }
        if (j.contains("action_noise")) {
            const auto& e = j["action_noise"];
            require_keys(e, "action_noise.", {"enabled", "p", "sigma"});
            c.action_noise.enabled = e.value("enabled", c.action_noise.enabled);
            c.action_noise.p = e.value("p", c.action_noise.p);
            c.action_noise.sigma = e.value("sigma", c.action_noise.sigma);
        }
        if (j.contains("task")) {
            const auto& e = j["task"];
            require_keys(e, "task.", {"kind", "goal", "target_speed"});
            if (e.contains("kind")) c.task.kind = task_kind_from_string(e["kind"]);
            if (e.contains("goal")) {
                if (!e["goal"].is_array() || e["goal"].size() != 2)
                    throw Error(ErrorCode::Config, "config: task.goal must be [x, y]");
                c.task.goal = {e["goal"][0].get<double>(), e["goal"][1].get<double>()};
            }
            c.task.target_speed = e.value("target_speed", c.task.target_speed);
        }
        if (j.contains("skill")) {
            const auto& e = j["skill"];
            require_keys(e, "skill.",
                         {"dim", "encoding", "schedule", "max_fraction", "resample_every",
                          "beta", "probe_skills"});
            c.skill_dim = e.value("dim", c.skill_dim);
            if (e.contains("encoding")) c.encoding = encoding_from_string(e["encoding"]);
            if (e.contains("schedule")) c.schedule = schedule_from_string(e["schedule"]);
            c.max_fraction = e.value("max_fraction", c.max_fraction);
            c.resample_every = e.value("resample_every", c.resample_every);
            c.beta = e.value("beta", c.beta);
            c.probe_skills = e.value("probe_skills", c.probe_skills);
        }
        if (j.contains("agent")) {
            const auto& e = j["agent"];
            require_keys(e, "agent.",
                         {"hidden_dim", "gamma", "lr", "tau", "n_step", "batch_size",
                          "update_every", "cpc_update_every", "seed_frames",
                          "exploration_stddev", "exploration_clip", "grad_clip"});
            c.hidden_dim = e.value("hidden_dim", c.hidden_dim);
            c.gamma = e.value("gamma", c.gamma);
            c.lr = e.value("lr", c.lr);
            c.tau = e.value("tau", c.tau);
            c.n_step = e.value("n_step", c.n_step);
            c.batch_size = e.value("batch_size", c.batch_size);
            c.update_every = e.value("update_every", c.update_every);
            c.cpc_update_every = e.value("cpc_update_every", c.cpc_update_every);
            c.seed_frames = e.value("seed_frames", c.seed_frames);
            c.exploration_stddev = e.value("exploration_stddev", c.exploration_stddev);
            c.exploration_clip = e.value("exploration_clip", c.exploration_clip);
            c.grad_clip = e.value("grad_clip", c.grad_clip);
        }
        if (j.contains("cpc")) {
            const auto& e = j["cpc"];
            require_keys(e, "cpc.", {"temperature", "knn_k", "knn_c", "reward_embedding"});
            c.temperature = e.value("temperature", c.temperature);
            c.knn_k = e.value("knn_k", c.knn_k);
            c.knn_c = e.value("knn_c", c.knn_c);
            if (e.contains("reward_embedding"))
                c.reward_embedding = embedding_from_string(e["reward_embedding"]);
        }
        if (j.contains("replay")) {
            const auto& e = j["replay"];
            require_keys(e, "replay.", {"capacity"});
            c.replay_capacity = e.value("capacity", c.replay_capacity);
        }
        if (j.contains("run")) {
            const auto& e = j["run"];
            require_keys(e, "run.",
                         {"pretrain_steps", "finetune_steps", "checkpoint_every",
                          "eval_episodes", "candidate_skills_per_mode", "expert_multiplier",
                          "save_replay"});
            c.pretrain_steps = e.value("pretrain_steps", c.pretrain_steps);
            c.finetune_steps = e.value("finetune_steps", c.finetune_steps);
            c.checkpoint_every = e.value("checkpoint_every", c.checkpoint_every);
            c.eval_episodes = e.value("eval_episodes", c.eval_episodes);
            c.candidate_skills_per_mode =
                e.value("candidate_skills_per_mode", c.candidate_skills_per_mode);
            c.expert_multiplier = e.value("expert_multiplier", c.expert_multiplier);
            c.save_replay = e.value("save_replay", c.save_replay);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, std::string("config: malformed value: ") + e.what());
    }
    c.validate();
    return c;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a(config_to_json(config)); }

std::uint64_t architecture_hash(const RunConfig& config) {
    const std::string signature =
        "point_mass/obs=4/act=2/skill=" + std::to_string(config.skill_dim) +
        "/hidden=" + std::to_string(config.hidden_dim) +
        "/encoding=" + to_string(config.encoding);
    return fnv1a(signature);
}

}  // namespace moss
