#include "emgrl/rl/replay.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "emgrl/error.hpp"

namespace emgrl::rl {

void Transition::validate() const {
    if (state.size() != next_state.size())
        throw DimensionError("transition: state vs next state", state.size(), next_state.size());
    double total = 0.0;
    for (double a : action) {
        if (!(a >= 0.0)) throw std::invalid_argument("transition: negative or NaN action weight");
        total += a;
    }
    if (action.empty() || std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("transition: action is not on the probability simplex");
}

InsufficientTransitions::InsufficientTransitions(std::size_t requested, std::size_t available)
    : std::runtime_error("replay buffer holds " + std::to_string(available) + " transitions; batch of " +
                         std::to_string(requested) + " requested"),
      requested_(requested),
      available_(available) {}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch) { return sample(batch, rng_); }

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    if (batch == 0) throw std::invalid_argument("replay buffer: batch size must be positive");
    if (items_.size() < batch) throw InsufficientTransitions(batch, items_.size());
    // Partial Fisher-Yates over indices.
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t j = i + rng.index(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out.push_back(&items_[idx[i]]);
    }
    return out;
}

}  // namespace emgrl::rl
