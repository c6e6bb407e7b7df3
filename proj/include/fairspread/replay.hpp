#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "fairspread/graph.hpp"
#include "fairspread/rng.hpp"

namespace fairspread {

/// One step of experience: the seed set before and after taking `action`
/// on the pool graph `graph_id`, with the observed marginal reward.
struct Transition {
    std::size_t graph_id = 0;
    std::vector<NodeId> seeds_before;  // sorted
    NodeId action = 0;
    double reward = 0.0;
    std::vector<NodeId> seeds_after;   // sorted, seeds_before + action
    bool terminal = false;

    void validate() const {
        if (std::binary_search(seeds_before.begin(), seeds_before.end(), action))
            throw std::invalid_argument("transition action already in seed set");
        if (seeds_after.size() != seeds_before.size() + 1 ||
            !std::binary_search(seeds_after.begin(), seeds_after.end(), action))
            throw std::invalid_argument("seeds_after must be seeds_before plus the action");
    }
};

/// Bounded FIFO of transitions with uniform batch sampling.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    }

    void push(Transition t) {
        t.validate();
        if (buffer_.size() == capacity_) buffer_.pop_front();
        buffer_.push_back(std::move(t));
    }

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return buffer_[i]; }

    /// Sample batch_size distinct indices uniformly (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t batch_size, RngStream& rng) const {
        if (batch_size > buffer_.size())
            throw std::invalid_argument("batch requested before replay holds enough transitions");
        std::vector<std::size_t> idx(buffer_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < batch_size; ++i) {
            std::size_t j = i + rng.next_below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(batch_size);
        return idx;
    }

private:
    std::size_t capacity_;
    std::deque<Transition> buffer_;
};

}  // namespace fairspread
