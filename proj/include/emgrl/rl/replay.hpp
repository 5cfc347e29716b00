#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "emgrl/embed/embedding.hpp"
#include "emgrl/rng.hpp"

namespace emgrl::rl {

struct Transition {
    embed::StateEmbedding state;
    std::vector<double> action;  // on the probability simplex
    double reward = 0.0;
    embed::StateEmbedding next_state;
    bool terminal = false;  // last step of a farm's episode; no bootstrap

    void validate() const;
};

/// Raised when a batch is requested from a buffer holding too few transitions.
class InsufficientTransitions : public std::runtime_error {
public:
    InsufficientTransitions(std::size_t requested, std::size_t available);
    std::size_t requested() const noexcept { return requested_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t requested_;
    std::size_t available_;
};

/// Fixed-capacity FIFO of transitions with a seeded batch sampler.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    /// Evicts the oldest transition when full.
    void push(Transition t);

    /// Uniform sample of `batch` distinct transitions from the buffer's own stream.
    std::vector<const Transition*> sample(std::size_t batch);
    /// Same, drawing from an external generator.
    std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool empty() const noexcept { return items_.empty(); }
    /// Oldest first.
    const Transition& at(std::size_t i) const { return items_.at(i); }

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
    Rng rng_;
};

}  // namespace emgrl::rl
