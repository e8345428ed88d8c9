#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "aac/persistence.hpp"

namespace aac {

// Batched view of sampled transitions, one row per sample.
struct Batch {
  Matrix state;
  Matrix action;
  Matrix reward_array;
  Matrix next_state;
  Vector done;         // 0/1
  std::vector<int> k;  // commanded persistence per row
  int size() const { return static_cast<int>(state.rows()); }
};

// Fixed-capacity FIFO ring shared by the whole population. Pushes are atomic
// at record granularity; samples copy under the same lock, so a reader never
// observes a half-written record.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long capacity = 2'000'000);
  ReplayBuffer(ReplayBuffer&& other) noexcept
      : capacity_(other.capacity_),
        count_(other.count_),
        cursor_(other.cursor_),
        store_(std::move(other.store_)) {}

  long capacity() const { return capacity_; }
  long size() const;

  void push(Transition tr);
  Transition get(long index) const;  // 0 = oldest surviving record

  // Uniform with replacement; throws std::logic_error when empty.
  std::vector<long> sample_indices(int batch_size, Rng& rng) const;
  Batch sample(int batch_size, Rng& rng) const;
  Batch gather(const std::vector<long>& indices) const;

  void save(const std::string& path) const;
  static ReplayBuffer load(const std::string& path);

 private:
  long capacity_;
  long count_ = 0;
  long cursor_ = 0;
  std::vector<Transition> store_;
  mutable std::mutex mu_;
};

// Fills the buffer with uniform-random-policy transitions, cycling the
// collection persistence evenly across [k_min, k_max]. Episode boundaries
// make per-k counts differ by at most one episode.
void warmup(ReplayBuffer& buffer, PersistenceWrapper& wrapper, int k_min,
            int k_max, long n, Rng& rng);

}  // namespace aac
