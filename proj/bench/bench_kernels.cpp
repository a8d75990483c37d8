// Serial reference vs OpenMP kernels on simulated data.
//   zimed_bench --benchmark_filter=ZILoN

#include <benchmark/benchmark.h>

#include <map>

#include "zimed/likelihood.hpp"
#include "zimed/simulate.hpp"

using namespace zimed;

namespace {

struct Fixture {
  Dataset data;
  Theta theta;
};

const Fixture& fixture(const char* preset_name, std::size_t n) {
  static std::map<std::pair<std::string, std::size_t>, Fixture> cache;
  auto key = std::make_pair(std::string(preset_name), n);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Scenario s = preset(preset_name);
    s.n = n;
    it = cache.emplace(key, Fixture{generate_dataset(s, 0).data, s.theta_true}).first;
  }
  return it->second;
}

const char* preset_for(int family) {
  return family == 0 ? "zilon-50" : family == 1 ? "zinb-30" : "zip-70";
}

void label(benchmark::State& state, int family, Exec exec) {
  state.SetLabel(std::string(family == 0 ? "ZILoN" : family == 1 ? "ZINB" : "ZIP") +
                 (exec == Exec::serial ? "/serial" : "/parallel"));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <Exec E>
void BM_ObservedLoglik(benchmark::State& state) {
  const int family = static_cast<int>(state.range(0));
  const Fixture& f = fixture(preset_for(family), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(observed_loglik(f.theta, f.data, kDefaultCap, E));
  label(state, family, E);
}

template <Exec E>
void BM_ObservedLoglikGradient(benchmark::State& state) {
  const int family = static_cast<int>(state.range(0));
  const Fixture& f = fixture(preset_for(family), static_cast<std::size_t>(state.range(1)));
  Eigen::VectorXd g;
  for (auto _ : state) benchmark::DoNotOptimize(observed_loglik_grad(f.theta, f.data, kDefaultCap, E, g));
  label(state, family, E);
}

template <Exec E>
void BM_EStep(benchmark::State& state) {
  const int family = static_cast<int>(state.range(0));
  const Fixture& f = fixture(preset_for(family), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(e_step(f.theta, f.data, kDefaultCap, E));
  label(state, family, E);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int family : {0, 1, 2}) {
    for (int n : {1000, 10000}) b->Args({family, n});
  }
}

}  // namespace

BENCHMARK(BM_ObservedLoglik<Exec::serial>)->Apply(sizes);
BENCHMARK(BM_ObservedLoglik<Exec::parallel>)->Apply(sizes);
BENCHMARK(BM_ObservedLoglikGradient<Exec::serial>)->Apply(sizes);
BENCHMARK(BM_ObservedLoglikGradient<Exec::parallel>)->Apply(sizes);
BENCHMARK(BM_EStep<Exec::serial>)->Apply(sizes);
BENCHMARK(BM_EStep<Exec::parallel>)->Apply(sizes);

BENCHMARK_MAIN();
