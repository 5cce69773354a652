#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "fsorf/rng.hpp"

namespace fsorf {

// Fixed-capacity FIFO store of (state, action, reward, next_state)
// transitions. States are the tri-valued observation windows, kept as int8 so
// a million-entry buffer stays small; sampling widens them to float batches
// ready for the network.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim);

  void push(std::span<const std::int8_t> state, int action, int reward,
            std::span<const std::int8_t> next_state);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int state_dim() const { return state_dim_; }
  bool can_sample(int batch) const {
    return batch > 0 && size_ >= static_cast<std::size_t>(batch);
  }

  // Uniform sampling with replacement. Output matrices are state_dim x batch.
  void sample(int batch, Rng& rng, Eigen::MatrixXf& states,
              std::vector<int>& actions, std::vector<int>& rewards,
              Eigen::MatrixXf& next_states) const;

  // Entry i in insertion order, oldest surviving entry first.
  struct View {
    std::span<const std::int8_t> state;
    int action;
    int reward;
    std::span<const std::int8_t> next_state;
  };
  View at(std::size_t i) const;

 private:
  std::size_t slot_offset(std::size_t i) const;

  std::size_t capacity_;
  int state_dim_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;  // ring position of the next write
  // Storage grows on demand up to capacity, so huge capacities cost nothing
  // until filled.
  std::vector<std::int8_t> states_;
  std::vector<std::int8_t> next_states_;
  std::vector<std::int8_t> actions_;
  std::vector<std::int8_t> rewards_;
};

}  // namespace fsorf
