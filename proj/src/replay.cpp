#include "moss/replay.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "moss/error.hpp"

namespace moss {

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_floats(std::ostream& out, const std::vector<float>& v) {
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> read_floats(std::istream& in) {
    std::vector<float> v(read_u64(in));
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
    return v;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::Config, "ReplayBuffer: zero capacity");
}

void ReplayBuffer::push(Transition t) {
    if (t.state.empty() || t.next_state.size() != t.state.size() || t.action.empty())
        throw Error(ErrorCode::InvalidArgument, "ReplayBuffer: malformed transition");
    if (!items_.empty()) {
        const Transition& ref = items_.front();
        if (t.state.size() != ref.state.size() || t.action.size() != ref.action.size() ||
            t.skill.size() != ref.skill.size())
            throw Error(ErrorCode::InvalidArgument,
                        "ReplayBuffer: transition layout differs from stored ones");
    }
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
    total_pushed_ += 1;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
    if (logical >= items_.size())
        throw Error(ErrorCode::InvalidArgument, "ReplayBuffer: index out of range");
    return items_[ring_index(logical)];
}

bool ReplayBuffer::window_valid(std::size_t logical_start, std::size_t n) const {
    if (n == 0 || logical_start + n > items_.size()) return false;
    const Transition& first = at(logical_start);
    for (std::size_t j = 1; j < n; ++j) {
        const Transition& t = at(logical_start + j);
        if (t.episode_id != first.episode_id) return false;
        if (t.step_index != first.step_index + j) return false;
        if (t.mode != first.mode) return false;
        if (t.skill != first.skill) return false;
    }
    return true;
}

std::size_t ReplayBuffer::count_valid_windows(std::size_t n) const {
    if (n == 0 || items_.size() < n) return 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + n <= items_.size(); ++i)
        if (window_valid(i, n)) ++count;
    return count;
}

std::optional<NStepBatch> ReplayBuffer::sample_nstep(std::size_t batch_size, std::size_t n,
                                                     Rng& rng) const {
    if (batch_size == 0 || n == 0)
        throw Error(ErrorCode::InvalidArgument, "sample_nstep: batch and window must be positive");
    if (items_.size() < n) return std::nullopt;

    const std::size_t starts = items_.size() - n + 1;
    const std::size_t obs_dim = items_.front().state.size();
    const std::size_t act_dim = items_.front().action.size();
    const std::size_t skill_dim = items_.front().skill.size();

    NStepBatch batch;
    batch.n = n;
    batch.states = Matrix<float>(batch_size, obs_dim);
    batch.skills = Matrix<float>(batch_size, skill_dim);
    batch.actions = Matrix<float>(batch_size, act_dim);
    batch.rewards_ext = Matrix<float>(batch_size, n);
    batch.bootstrap_states = Matrix<float>(batch_size, obs_dim);
    batch.modes.resize(batch_size);
    batch.step_states = Matrix<float>(batch_size * n, obs_dim);
    batch.step_next_states = Matrix<float>(batch_size * n, obs_dim);
    batch.first_next_states = Matrix<float>(batch_size, obs_dim);

    // Rejection sampling keeps the draw exactly uniform over valid windows.
    const std::size_t max_attempts = 1000 * batch_size + 1000;
    std::size_t attempts = 0;
    for (std::size_t i = 0; i < batch_size; ++i) {
        std::size_t start = 0;
        while (true) {
            if (++attempts > max_attempts) return std::nullopt;
            start = rng.uniform_index(starts);
            if (window_valid(start, n)) break;
        }
        const Transition& first = at(start);
        std::copy(first.state.begin(), first.state.end(), batch.states.row(i).begin());
        std::copy(first.skill.begin(), first.skill.end(), batch.skills.row(i).begin());
        std::copy(first.action.begin(), first.action.end(), batch.actions.row(i).begin());
        std::copy(first.next_state.begin(), first.next_state.end(),
                  batch.first_next_states.row(i).begin());
        batch.modes[i] = first.mode;
        for (std::size_t j = 0; j < n; ++j) {
            const Transition& t = at(start + j);
            batch.rewards_ext(i, j) = t.reward_ext;
            auto srow = batch.step_states.row(i * n + j);
            auto nrow = batch.step_next_states.row(i * n + j);
            std::copy(t.state.begin(), t.state.end(), srow.begin());
            std::copy(t.next_state.begin(), t.next_state.end(), nrow.begin());
        }
        const Transition& last = at(start + n - 1);
        std::copy(last.next_state.begin(), last.next_state.end(),
                  batch.bootstrap_states.row(i).begin());
    }
    return batch;
}

void ReplayBuffer::save(std::ostream& out) const {
    write_u64(out, capacity_);
    write_u64(out, items_.size());
    write_u64(out, total_pushed_);
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const Transition& t = at(i);  // oldest-first, so load() rebuilds in order
        write_floats(out, t.state);
        write_floats(out, t.action);
        write_floats(out, t.next_state);
        write_floats(out, t.skill);
        const std::uint64_t packed =
            (static_cast<std::uint64_t>(t.mode) << 1) | (t.done ? 1u : 0u);
        write_u64(out, packed);
        float r = t.reward_ext;
        out.write(reinterpret_cast<const char*>(&r), sizeof r);
        write_u64(out, t.episode_id);
        write_u64(out, t.step_index);
    }
    if (!out) throw Error(ErrorCode::Io, "ReplayBuffer: write failed");
}

ReplayBuffer ReplayBuffer::load(std::istream& in) {
    const std::uint64_t capacity = read_u64(in);
    const std::uint64_t count = read_u64(in);
    const std::uint64_t total = read_u64(in);
    if (!in) throw Error(ErrorCode::Io, "ReplayBuffer: truncated snapshot");
    ReplayBuffer buffer(capacity);
    for (std::uint64_t i = 0; i < count; ++i) {
        Transition t;
        t.state = read_floats(in);
        t.action = read_floats(in);
        t.next_state = read_floats(in);
        t.skill = read_floats(in);
        const std::uint64_t packed = read_u64(in);
        t.mode = static_cast<std::uint8_t>(packed >> 1);
        t.done = (packed & 1u) != 0;
        float r = 0;
        in.read(reinterpret_cast<char*>(&r), sizeof r);
        t.reward_ext = r;
        t.episode_id = read_u64(in);
        t.step_index = static_cast<std::uint32_t>(read_u64(in));
        if (!in) throw Error(ErrorCode::Io, "ReplayBuffer: truncated snapshot");
        buffer.push(std::move(t));
    }
    buffer.total_pushed_ = total;
    return buffer;
}

}  // namespace moss
