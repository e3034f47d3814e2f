// Exhaustive interleaving check of the SPSC ring algorithm on an abstract
// two-context schedule. Each push/pop is split into its shared-memory steps
// and every interleaving is explored with state deduplication.
#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

namespace ktsn::testing {

struct RingModelResult {
    std::size_t states_explored = 0;
    bool completed = false;  // at least one path consumed everything
    bool fifo_violation = false;
    bool bound_violation = false;
};

template <std::size_t Capacity>
RingModelResult model_check_ring(std::uint64_t items) {
    struct State {
        int pc_p = 0, pc_c = 0;
        std::uint64_t head = 0, tail = 0;
        std::uint64_t produced = 0, consumed = 0;
        std::uint64_t pending = 0;
        std::array<std::uint64_t, Capacity> slots{};
        auto operator<=>(const State&) const = default;
    };

    RingModelResult result;
    std::set<State> visited;
    std::vector<State> stack{State{}};

    auto step_producer = [&](State s) -> State {
        if (s.pc_p == 0) {
            if (s.produced < items && s.head - s.tail < Capacity) {
                s.slots[s.head % Capacity] = s.produced; // write slot first
                s.pc_p = 1;
            }
            // full or done: no state change (bounded retry)
        } else {
            s.head += 1; // publish
            s.produced += 1;
            s.pc_p = 0;
        }
        return s;
    };
    auto step_consumer = [&](State s) -> State {
        if (s.pc_c == 0) {
            if (s.tail != s.head) {
                s.pending = s.slots[s.tail % Capacity]; // read slot before freeing it
                s.pc_c = 1;
            }
        } else {
            if (s.pending != s.consumed) result.fifo_violation = true;
            s.tail += 1;
            s.consumed += 1;
            s.pc_c = 0;
        }
        return s;
    };

    while (!stack.empty()) {
        State s = stack.back();
        stack.pop_back();
        if (!visited.insert(s).second) continue;
        ++result.states_explored;

        if (s.head < s.tail || s.head - s.tail > Capacity) result.bound_violation = true;
        if (s.consumed == items) {
            result.completed = true;
            continue;
        }
        for (State next : {step_producer(s), step_consumer(s)}) {
            if (!(next == s)) stack.push_back(next);
        }
        // If neither context can move and we are not done, that is a lost
        // descriptor: the ring would deadlock.
        if (step_producer(s) == s && step_consumer(s) == s) result.fifo_violation = true;
    }
    return result;
}

} // namespace ktsn::testing
