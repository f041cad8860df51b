#include <cmath>

#include "doctest.h"
#include "moss/envs.hpp"
#include "moss/error.hpp"

using namespace moss;

namespace {

PointMassConfig calm_config() {
    PointMassConfig cfg;
    cfg.episode_length = 100;
    return cfg;
}

std::vector<float> run_trajectory(PointMassEnv& env, Rng& rng, int steps,
                                  std::span<const float> action) {
    std::vector<float> trace;
    env.reset();
    for (int t = 0; t < steps; ++t) {
        auto result = env.step(action, rng);
        trace.insert(trace.end(), result.observation.begin(), result.observation.end());
    }
    return trace;
}

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("zero action at rest stays put") {
    PointMassEnv env(calm_config(), TaskSpec{});
    Rng rng(1);
    env.reset();
    const float action[2] = {0.0f, 0.0f};
    auto result = env.step(action, rng);
    CHECK(result.observation[0] == 0.0f);
    CHECK(result.observation[1] == 0.0f);
    CHECK(result.observation[2] == 0.0f);
    CHECK(result.observation[3] == 0.0f);
}

TEST_CASE("constant force without friction integrates like the closed form") {
    PointMassConfig cfg = calm_config();
    cfg.friction = 0.0;
    PointMassEnv env(cfg, TaskSpec{});
    Rng rng(2);
    env.reset();

    // Semi-implicit Euler with constant accel a: v_t = t*dt*a exactly.
    const float action[2] = {1.0f, 0.0f};
    double v = 0.0, x = 0.0;
    for (int t = 1; t <= 10; ++t) {
        auto result = env.step(action, rng);
        v += cfg.dt * cfg.force_scale / cfg.mass;
        x += cfg.dt * v;
        CHECK(result.observation[2] == doctest::Approx(v).epsilon(1e-6));
        CHECK(result.observation[0] == doctest::Approx(x).epsilon(1e-6));
        CHECK(result.observation[2] ==
              doctest::Approx(t * cfg.dt * cfg.force_scale / cfg.mass).epsilon(1e-6));
    }
}

TEST_CASE("calm trajectories are bitwise identical across seeds") {
    PointMassEnv env_a(calm_config(), TaskSpec{});
    PointMassEnv env_b(calm_config(), TaskSpec{});
    Rng rng_a(1), rng_b(999);
    const float action[2] = {0.3f, -0.7f};
    CHECK(run_trajectory(env_a, rng_a, 50, action) == run_trajectory(env_b, rng_b, 50, action));
}

TEST_CASE("windy trajectories diverge across seeds") {
    PointMassConfig cfg = calm_config();
    cfg.perturbation = Perturbation::Wind;
    cfg.wind_sigma = 0.5;
    PointMassEnv env_a(cfg, TaskSpec{});
    PointMassEnv env_b(cfg, TaskSpec{});
    Rng rng_a(1), rng_b(999);
    const float action[2] = {0.0f, 0.0f};
    CHECK(run_trajectory(env_a, rng_a, 50, action) != run_trajectory(env_b, rng_b, 50, action));
}

TEST_CASE("positions stay inside the arena with velocity zeroed at walls") {
    PointMassConfig cfg = calm_config();
    cfg.friction = 0.0;
    cfg.force_scale = 10.0;
    PointMassEnv env(cfg, TaskSpec{});
    Rng rng(3);
    env.reset();
    const float action[2] = {1.0f, 1.0f};
    StepResult last;
    for (int t = 0; t < 100; ++t) last = env.step(action, rng);
    CHECK(last.observation[0] == doctest::Approx(1.0));
    CHECK(last.observation[1] == doctest::Approx(1.0));
    CHECK(last.observation[2] == 0.0f);
}

TEST_CASE("done is raised exactly at the episode length") {
    PointMassConfig cfg = calm_config();
    cfg.episode_length = 5;
    PointMassEnv env(cfg, TaskSpec{});
    Rng rng(4);
    env.reset();
    const float action[2] = {0.1f, 0.1f};
    for (int t = 0; t < 4; ++t) CHECK_FALSE(env.step(action, rng).done);
    CHECK(env.step(action, rng).done);
}

TEST_CASE("out-of-range actions are rejected") {
    PointMassEnv env(calm_config(), TaskSpec{});
    Rng rng(5);
    env.reset();
    const float action[2] = {1.5f, 0.0f};
    CHECK_THROWS_AS(env.step(action, rng), Error);
}

TEST_CASE("reach-goal reward is 1 at the goal and 0 at the far corner") {
    TaskSpec task{TaskKind::ReachGoal, {0.5, 0.5}, 1.0};
    const std::array<double, 2> vel = {0.0, 0.0};
    const std::array<double, 2> at_goal = {0.5, 0.5};
    CHECK(task_reward(at_goal, vel, task, 1.0) == doctest::Approx(1.0));

    // Opposite corner of the unit arena: distance exceeds half the diagonal.
    TaskSpec corner{TaskKind::ReachGoal, {1.0, 1.0}, 1.0};
    const std::array<double, 2> far = {-1.0, -1.0};
    CHECK(task_reward(far, vel, corner, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("reach-goal reward is 0.5 at half the arena diagonal") {
    TaskSpec task{TaskKind::ReachGoal, {0.0, 0.0}, 1.0};
    const std::array<double, 2> vel = {0.0, 0.0};
    const double half_diag = std::sqrt(2.0);  // diameter 2*sqrt(2), half of it
    const std::array<double, 2> pos = {half_diag, 0.0};
    CHECK(task_reward(pos, vel, task, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("run-velocity reward peaks at the target speed") {
    TaskSpec task{TaskKind::RunVelocity, {0.0, 0.0}, 1.5};
    const std::array<double, 2> pos = {0.0, 0.0};
    const std::array<double, 2> at_target = {1.5, 0.0};
    CHECK(task_reward(pos, at_target, task, 1.0) == doctest::Approx(1.0));
    const std::array<double, 2> at_rest = {0.0, 0.0};
    CHECK(task_reward(pos, at_rest, task, 1.0) == doctest::Approx(0.0));
    const std::array<double, 2> halfway = {0.75, 0.0};
    CHECK(task_reward(pos, halfway, task, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("rewards stay in [0,1] along random rollouts") {
    PointMassConfig cfg = calm_config();
    cfg.perturbation = Perturbation::Wind;
    cfg.wind_sigma = 1.0;
    PointMassEnv env(cfg, TaskSpec{TaskKind::ReachGoal, {0.3, -0.4}, 1.0});
    Rng rng(6);
    env.reset();
    for (int t = 0; t < 200; ++t) {
        const float action[2] = {static_cast<float>(rng.uniform(-1, 1)),
                                 static_cast<float>(rng.uniform(-1, 1))};
        auto result = env.step(action, rng);
        CHECK(result.reward >= 0.0f);
        CHECK(result.reward <= 1.0f);
        if (result.done) env.reset();
    }
}

TEST_CASE("noise wrapper with p=0 is the identity") {
    NoiseWrapperConfig cfg{true, 0.0, 0.2};
    Rng rng(7);
    std::vector<float> action = {0.4f, -0.9f};
    CHECK(wrap_noise(action, cfg, rng) == action);
}

TEST_CASE("noise wrapper with sigma=0 is the identity") {
    NoiseWrapperConfig cfg{true, 1.0, 0.0};
    Rng rng(8);
    std::vector<float> action = {0.4f, -0.9f};
    CHECK(wrap_noise(action, cfg, rng) == action);
}

TEST_CASE("disabled wrapper consumes no randomness") {
    NoiseWrapperConfig cfg{false, 0.3, 0.2};
    Rng rng_a(9), rng_b(9);
    std::vector<float> action = {0.1f, 0.2f};
    wrap_noise(action, cfg, rng_a);
    CHECK(rng_a == rng_b);
}

TEST_CASE("perturbation frequency matches p=0.3 over many steps") {
    NoiseWrapperConfig cfg{true, 0.3, 0.2};
    Rng rng(10);
    const int draws = 100000;
    int perturbed = 0;
    for (int i = 0; i < draws; ++i) {
        std::vector<float> action = {0.0f, 0.0f};
        auto out = wrap_noise(action, cfg, rng);
        if (out != action) ++perturbed;
    }
    const double fraction = static_cast<double>(perturbed) / draws;
    CHECK(std::abs(fraction - 0.3) < 0.01);
}

TEST_CASE("wrapped actions stay within bounds") {
    NoiseWrapperConfig cfg{true, 1.0, 5.0};
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        std::vector<float> action = {0.99f, -0.99f};
        auto out = wrap_noise(action, cfg, rng);
        for (float a : out) {
            CHECK(a <= 1.0f);
            CHECK(a >= -1.0f);
        }
    }
}

}  // TEST_SUITE
