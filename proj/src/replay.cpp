#include "fewb/replay.hpp"

namespace fewb::agent {

std::vector<std::uint8_t> pack_observation(const env::Observation& obs) {
    std::vector<std::uint8_t> packed(obs.data.size());
    for (std::size_t i = 0; i < obs.data.size(); ++i)
        packed[i] = obs.data[i] > real(0.5) ? 1 : 0;
    return packed;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t warmup)
    : capacity_(capacity), warmup_(warmup) {
    if (capacity_ == 0) throw ContractError("replay buffer capacity must be positive");
    storage_.reserve(capacity_);
}

void ReplayBuffer::push(Experience exp) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(exp));
        head_ = storage_.size() % capacity_;
        full_ = storage_.size() == capacity_;
    } else {
        storage_[head_] = std::move(exp);
        head_ = (head_ + 1) % capacity_;
    }
}

const Experience& ReplayBuffer::at(std::size_t i) const {
    if (i >= size()) throw ContractError("replay buffer index out of range");
    if (!full_) return storage_[i];
    return storage_[(head_ + i) % capacity_];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    std::vector<const Experience*> batch;
    if (size() < warmup_ || storage_.empty()) return batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        batch.push_back(&storage_[rng.uniform_int(size())]);
    return batch;
}

std::vector<const Experience*> push_and_sample(ReplayBuffer& buffer, Experience exp,
                                               std::size_t batch_size, Rng& rng) {
    if (batch_size < 1) throw ContractError("push_and_sample: batch_size must be >= 1");
    buffer.push(std::move(exp));
    return buffer.sample(batch_size, rng);
}

}  // namespace fewb::agent
