#include "aac/replay.hpp"

#include "aac/checkpoint.hpp"

namespace aac {

namespace {
constexpr char kMagic[4] = {'A', 'A', 'C', 'B'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

ReplayBuffer::ReplayBuffer(long capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw std::invalid_argument("capacity must be >= 1");
  store_.resize(capacity_);
}

long ReplayBuffer::size() const {
  std::lock_guard lock(mu_);
  return count_;
}

void ReplayBuffer::push(Transition tr) {
  std::lock_guard lock(mu_);
  store_[cursor_] = std::move(tr);
  cursor_ = (cursor_ + 1) % capacity_;
  if (count_ < capacity_) count_ += 1;
}

Transition ReplayBuffer::get(long index) const {
  std::lock_guard lock(mu_);
  if (index < 0 || index >= count_) throw std::out_of_range("replay index");
  const long oldest = count_ < capacity_ ? 0 : cursor_;
  return store_[(oldest + index) % capacity_];
}

std::vector<long> ReplayBuffer::sample_indices(int batch_size, Rng& rng) const {
  std::lock_guard lock(mu_);
  if (count_ == 0) throw std::logic_error("sample from empty replay buffer");
  std::vector<long> idx(batch_size);
  for (auto& i : idx) i = rng.uniform_int(0, count_ - 1);
  return idx;
}

Batch ReplayBuffer::gather(const std::vector<long>& indices) const {
  std::lock_guard lock(mu_);
  if (count_ == 0) throw std::logic_error("gather from empty replay buffer");
  const long oldest = count_ < capacity_ ? 0 : cursor_;
  const int n = static_cast<int>(indices.size());
  const Transition& first = store_[(oldest + indices.at(0)) % capacity_];
  Batch b;
  b.state.resize(n, first.state.size());
  b.action.resize(n, first.action.size());
  b.reward_array.resize(n, first.reward_array.size());
  b.next_state.resize(n, first.next_state.size());
  b.done.resize(n);
  b.k.resize(n);
  for (int r = 0; r < n; ++r) {
    const long i = indices[r];
    if (i < 0 || i >= count_) throw std::out_of_range("replay index");
    const Transition& tr = store_[(oldest + i) % capacity_];
    b.state.row(r) = tr.state.transpose();
    b.action.row(r) = tr.action.transpose();
    b.reward_array.row(r) = tr.reward_array.transpose();
    b.next_state.row(r) = tr.next_state.transpose();
    b.done(r) = tr.done ? 1.0 : 0.0;
    b.k[r] = tr.k;
  }
  return b;
}

Batch ReplayBuffer::sample(int batch_size, Rng& rng) const {
  return gather(sample_indices(batch_size, rng));
}

void ReplayBuffer::save(const std::string& path) const {
  std::lock_guard lock(mu_);
  BinaryWriter w(path, kMagic, kVersion);
  w.write_i64(capacity_);
  w.write_i64(count_);
  const long oldest = count_ < capacity_ ? 0 : cursor_;
  for (long i = 0; i < count_; ++i) {
    const Transition& tr = store_[(oldest + i) % capacity_];
    w.write_vector(tr.state);
    w.write_vector(tr.action);
    w.write_vector(tr.reward_array);
    w.write_vector(tr.next_state);
    w.write_u32(tr.done ? 1 : 0);
    w.write_i64(tr.k);
  }
  if (!w.good()) throw std::runtime_error("failed writing buffer snapshot");
}

ReplayBuffer ReplayBuffer::load(const std::string& path) {
  BinaryReader r(path, kMagic, kVersion);
  ReplayBuffer buf(r.read_i64());
  const long count = r.read_i64();
  for (long i = 0; i < count; ++i) {
    Transition tr;
    tr.state = r.read_vector();
    tr.action = r.read_vector();
    tr.reward_array = r.read_vector();
    tr.next_state = r.read_vector();
    tr.done = r.read_u32() != 0;
    tr.k = static_cast<int>(r.read_i64());
    buf.push(std::move(tr));
  }
  return buf;
}

void warmup(ReplayBuffer& buffer, PersistenceWrapper& wrapper, int k_min,
            int k_max, long n, Rng& rng) {
  if (n <= 0) return;
  const int num_k = k_max - k_min + 1;
  const int adim = wrapper.base_spec().action_dim;
  for (int ki = 0; ki < num_k; ++ki) {
    const long quota = n / num_k + (ki < n % num_k ? 1 : 0);
    wrapper.set_persistence(k_min + ki);
    long collected = 0;
    while (collected < quota) {
      wrapper.reset(rng);
      while (wrapper.episode_active() && collected < quota) {
        Vector a(adim);
        for (int d = 0; d < adim; ++d) a(d) = rng.uniform(-1.0, 1.0);
        PersistentStep step = wrapper.step(a, rng);
        buffer.push(std::move(step.transition));
        collected += 1;
      }
    }
  }
}

}  // namespace aac
