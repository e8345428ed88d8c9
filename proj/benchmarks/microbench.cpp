#include <benchmark/benchmark.h>

#include "aac/agent.hpp"
#include "aac/replay.hpp"

using namespace aac;

namespace {

DenseNet make_net(int in, int hidden, int out) {
  Rng rng(1);
  return DenseNet({in, hidden, hidden, out}, rng);
}

ReplayBuffer filled_buffer(long n, int k_max = 3) {
  ReplayBuffer buf(n);
  Rng rng(2);
  for (long i = 0; i < n; ++i) {
    Transition tr;
    tr.state = Vector::Random(4);
    tr.state(3) = 1.0;
    tr.action = Vector::Random(1);
    tr.reward_array = Vector::Zero(k_max);
    tr.reward_array(0) = rng.uniform(-1, 1);
    tr.next_state = Vector::Random(4);
    tr.k = 1;
    buf.push(tr);
  }
  return buf;
}

void BM_NetForward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  DenseNet net = make_net(5, 256, 1);
  const Matrix x = Matrix::Random(batch, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(x));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_NetForward)->Arg(1)->Arg(128)->Arg(512);

void BM_NetForwardBackward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  DenseNet net = make_net(5, 256, 1);
  const Matrix x = Matrix::Random(batch, 5);
  for (auto _ : state) {
    NetCache cache;
    const Matrix y = net.forward(x, &cache);
    NetGrads grads = net.zero_grads();
    benchmark::DoNotOptimize(net.backward(cache, y, &grads));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_NetForwardBackward)->Arg(128)->Arg(512);

void BM_BufferPush(benchmark::State& state) {
  ReplayBuffer buf(1 << 20);
  Transition tr;
  tr.state = Vector::Random(4);
  tr.action = Vector::Random(1);
  tr.reward_array = Vector::Zero(3);
  tr.next_state = Vector::Random(4);
  tr.k = 1;
  for (auto _ : state) {
    buf.push(tr);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BufferPush);

void BM_BufferSample(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  ReplayBuffer buf = filled_buffer(100000);
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(buf.sample(batch, rng));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_BufferSample)->Arg(128)->Arg(512);

void BM_TrainStep(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  AgentConfig cfg;
  cfg.obs_dim = 4;
  cfg.action_dim = 1;
  cfg.hidden = {256, 256};
  cfg.batch_size = batch;
  Rng rng(4);
  Agent agent(cfg, rng);
  ReplayBuffer buf = filled_buffer(10000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent.train_step(buf, rng));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStep)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
