#pragma once

#include <cstdint>
#include <vector>

#include "fewb/dsprites.hpp"
#include "fewb/rng.hpp"

namespace fewb::agent {

/// One transition of the action-perception cycle. Frames are stored as
/// packed 0/1 bytes; batches convert to real tensors on demand.
struct Experience {
    std::vector<std::uint8_t> obs;       // o_t, stacked frames
    int action = 0;                      // a_t
    std::vector<std::uint8_t> obs_next;  // o_{t+1}
    real reward_next = 0;                // r_{t+1}
    bool done = false;
};

std::vector<std::uint8_t> pack_observation(const env::Observation& obs);

/// FIFO ring with uniform with-replacement sampling. Until the warmup fill
/// is reached, sample() returns an empty batch and no learning happens.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t warmup);

    void push(Experience exp);
    std::vector<const Experience*> sample(std::size_t batch_size, Rng& rng) const;

    std::size_t size() const { return full_ ? capacity_ : head_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t warmup() const { return warmup_; }
    /// Element i in logical order, 0 = oldest surviving experience.
    const Experience& at(std::size_t i) const;

private:
    std::size_t capacity_;
    std::size_t warmup_;
    std::size_t head_ = 0;
    bool full_ = false;
    std::vector<Experience> storage_;
};

/// Appends the experience (evicting the oldest at capacity) and returns a
/// uniform batch, or an empty batch while the buffer is still warming up.
std::vector<const Experience*> push_and_sample(ReplayBuffer& buffer, Experience exp,
                                               std::size_t batch_size, Rng& rng);

}  // namespace fewb::agent
