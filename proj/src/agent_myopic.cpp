#include "fsorf/agent_myopic.hpp"

#include <cmath>
#include <stdexcept>

namespace fsorf {

namespace {

// Exact ties flip to the alternative; beyond this width, argmax decides.
constexpr double kTieWidth = 1e-12;

// One slot of the symmetric two-state flip chain.
double propagate(double ready, double flip_p) {
  return ready * (1.0 - flip_p) + (1.0 - ready) * flip_p;
}

}  // namespace

MyopicAgent::MyopicAgent(MyopicConfig cfg) : cfg_(cfg) {
  const auto errs = cfg_.validate();
  if (!errs.empty()) throw std::invalid_argument(errs.front());
}

Belief MyopicAgent::update(Belief b, LinkId selected, int reward, double flip_p) {
  if (reward != 1 && reward != -1)
    throw std::invalid_argument("belief update expects a +1/-1 outcome");
  // The outcome reveals the selected link's state exactly; condition first,
  // then advance both links one slot.
  const double observed = reward == 1 ? 1.0 : 0.0;
  if (selected == LinkId::kFso)
    b.fso_ready = observed;
  else
    b.rf_ready = observed;
  b.fso_ready = propagate(b.fso_ready, flip_p);
  b.rf_ready = propagate(b.rf_ready, flip_p);
  return b;
}

LinkId MyopicAgent::select(const Belief& b, std::optional<LinkId> prev) {
  const double diff = b.fso_ready - b.rf_ready;
  if (std::abs(diff) <= kTieWidth) {
    if (!prev) return LinkId::kFso;
    return *prev == LinkId::kFso ? LinkId::kRf : LinkId::kFso;
  }
  return diff > 0 ? LinkId::kFso : LinkId::kRf;
}

LinkId MyopicAgent::act(const Observation& obs, Rng& rng) {
  (void)obs;  // the belief already summarizes the observed history
  (void)rng;
  const LinkId sel = select(belief_, prev_);
  if (prev_ && sel != *prev_) ++switch_count_;
  prev_ = sel;
  return sel;
}

void MyopicAgent::on_transition(const Observation& state, LinkId action,
                                int reward, const Observation& next_state,
                                Rng& rng) {
  (void)state;
  (void)next_state;
  (void)rng;
  belief_ = update(belief_, action, reward, cfg_.flip_p);
}

void MyopicAgent::on_episode_end(Rng& rng) {
  (void)rng;
  // The environment resets its channel per episode; restart from ignorance
  // and count link changes within episodes only.
  belief_ = Belief{};
  prev_.reset();
}

}  // namespace fsorf
