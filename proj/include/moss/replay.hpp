#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "moss/matrix.hpp"
#include "moss/rng.hpp"

namespace moss {

/// One environment step, exactly what the pretraining loop stores. Intrinsic
/// rewards are never kept here; they are recomputed from the current
/// embeddings at update time.
struct Transition {
    std::vector<float> state;
    std::vector<float> action;
    std::vector<float> next_state;
    std::uint8_t mode = 0;
    std::vector<float> skill;
    float reward_ext = 0.0f;
    bool done = false;
    std::uint64_t episode_id = 0;
    std::uint32_t step_index = 0;

    bool operator==(const Transition&) const = default;
};

/// Batch of n-step windows. Row i of the [N x ...] blocks describes window i:
/// its first transition's state/action/skill, the per-step extrinsic rewards,
/// and the bootstrap state after the last step. step_states/step_next_states
/// stack every window transition (window i, offset j at row i*n + j) for
/// reward recomputation over the whole sampled batch.
struct NStepBatch {
    std::size_t n = 0;
    Matrix<float> states;
    Matrix<float> skills;
    Matrix<float> actions;
    Matrix<float> rewards_ext;       // [N x n]
    Matrix<float> bootstrap_states;  // [N x obs]
    std::vector<std::uint8_t> modes;
    Matrix<float> step_states;       // [N*n x obs]
    Matrix<float> step_next_states;  // [N*n x obs]
    Matrix<float> first_next_states; // [N x obs]

    std::size_t size() const { return states.rows(); }
};

/// FIFO transition store with uniform sampling over valid n-step windows.
/// A window is valid when its transitions are consecutive steps of one
/// episode and share both the mode and the stored skill vector, so no window
/// ever spans an episode boundary, a mode switch, or a skill resample.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_pushed() const { return total_pushed_; }

    /// Logical index 0 is the oldest stored transition.
    const Transition& at(std::size_t logical) const;

    bool window_valid(std::size_t logical_start, std::size_t n) const;
    std::size_t count_valid_windows(std::size_t n) const;

    /// Uniform over valid windows, sampled with replacement via rejection.
    /// Returns nullopt while the buffer cannot serve the request (not ready).
    std::optional<NStepBatch> sample_nstep(std::size_t batch_size, std::size_t n,
                                           Rng& rng) const;

    void save(std::ostream& out) const;
    static ReplayBuffer load(std::istream& in);

  private:
    std::size_t ring_index(std::size_t logical) const {
        return items_.size() < capacity_ ? logical : (head_ + logical) % capacity_;
    }

    std::size_t capacity_;
    std::vector<Transition> items_;
    std::size_t head_ = 0;  // slot holding the oldest item once full
    std::uint64_t total_pushed_ = 0;
};

}  // namespace moss
