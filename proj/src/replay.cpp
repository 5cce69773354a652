#include "fsorf/replay.hpp"

#include <stdexcept>

namespace fsorf {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim)
    : capacity_(capacity), state_dim_(state_dim) {
  if (capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
  if (state_dim < 1) throw std::invalid_argument("replay state_dim must be >= 1");
}

void ReplayBuffer::push(std::span<const std::int8_t> state, int action,
                        int reward, std::span<const std::int8_t> next_state) {
  if (state.size() != static_cast<std::size_t>(state_dim_) ||
      next_state.size() != static_cast<std::size_t>(state_dim_))
    throw std::invalid_argument("replay push: state width mismatch");
  if (action < 0 || action > 127)
    throw std::invalid_argument("replay push: action out of range");
  if (reward < -128 || reward > 127)
    throw std::invalid_argument("replay push: reward out of range");
  const std::size_t dim = static_cast<std::size_t>(state_dim_);
  if (size_ < capacity_ && next_ == size_) {
    states_.resize(states_.size() + dim);
    next_states_.resize(next_states_.size() + dim);
    actions_.push_back(0);
    rewards_.push_back(0);
  }
  const std::size_t off = next_ * dim;
  std::copy(state.begin(), state.end(), states_.begin() + off);
  std::copy(next_state.begin(), next_state.end(), next_states_.begin() + off);
  actions_[next_] = static_cast<std::int8_t>(action);
  rewards_[next_] = static_cast<std::int8_t>(reward);
  next_ = (next_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

std::size_t ReplayBuffer::slot_offset(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index outside buffer");
  // Before wrap-around the ring start is slot 0; afterwards it is next_,
  // which then points at the oldest entry.
  return size_ < capacity_ ? i : (next_ + i) % capacity_;
}

ReplayBuffer::View ReplayBuffer::at(std::size_t i) const {
  const std::size_t s = slot_offset(i);
  const std::size_t dim = static_cast<std::size_t>(state_dim_);
  return {std::span<const std::int8_t>(states_.data() + s * dim, dim),
          actions_[s], rewards_[s],
          std::span<const std::int8_t>(next_states_.data() + s * dim, dim)};
}

void ReplayBuffer::sample(int batch, Rng& rng, Eigen::MatrixXf& states,
                          std::vector<int>& actions, std::vector<int>& rewards,
                          Eigen::MatrixXf& next_states) const {
  if (!can_sample(batch))
    throw std::logic_error("replay sample: fewer stored transitions than batch");
  states.resize(state_dim_, batch);
  next_states.resize(state_dim_, batch);
  actions.resize(batch);
  rewards.resize(batch);
  for (int c = 0; c < batch; ++c) {
    const std::size_t s =
        slot_offset(static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size_))));
    const std::size_t off = s * static_cast<std::size_t>(state_dim_);
    for (int r = 0; r < state_dim_; ++r) {
      states(r, c) = static_cast<float>(states_[off + r]);
      next_states(r, c) = static_cast<float>(next_states_[off + r]);
    }
    actions[c] = actions_[s];
    rewards[c] = rewards_[s];
  }
}

}  // namespace fsorf
