#include <benchmark/benchmark.h>

#include <cmath>

#include "hfke/basis.hpp"
#include "hfke/filter.hpp"
#include "hfke/fke.hpp"

namespace {

using namespace hfke;

void BM_GaussHermiteRule(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gauss_hermite_rule(m));
  }
}
BENCHMARK(BM_GaussHermiteRule)->Arg(50)->Arg(92)->Arg(184);

void BM_Project(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BasisSpec spec{2.4637, 0.0, n};
  const QuadratureRule rule = projection_rule(spec);
  auto f = [](double x) { return std::exp(-0.25 * x * x * x * x); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(project(f, spec, rule));
  }
}
BENCHMARK(BM_Project)->Arg(24)->Arg(45);

WindowBank cubic_bank() {
  ObservationModel model;
  model.f = [](double, double) { return 0.0; };
  model.g = [](double, double) { return 1.0; };
  model.h = [](double x, double) { return x * x * x; };
  model.Q = [](double) { return 1.0; };
  model.S = [](double) { return 1.0; };
  model.sigma0 = [](double x) { return std::exp(-0.25 * x * x * x * x); };
  model.f_x = [](double, double) { return 0.0; };
  model.g_x = [](double, double) { return 0.0; };
  model.g_xx = [](double, double) { return 0.0; };
  BankBuildOptions opt;
  opt.dt_obs = 0.01;
  return build_window_bank(model, AsymptoticProfile{0.25, 4.0}, 3.0, opt);
}

// The per-observation online cost: one (N+1)^2 propagation product plus the
// exponential update and re-projection.
void BM_OnlineStep(benchmark::State& state) {
  const WindowBank bank = cubic_bank();
  ObservationModel model;
  model.f = [](double, double) { return 0.0; };
  model.g = [](double, double) { return 1.0; };
  model.h = [](double x, double) { return x * x * x; };
  model.Q = [](double) { return 1.0; };
  model.S = [](double) { return 1.0; };
  model.sigma0 = [](double x) { return std::exp(-0.25 * x * x * x * x); };
  FilterState st = init_filter(bank, model);
  double y = 0.0;
  for (auto _ : state) {
    st = predict(st, bank);
    y += 1e-4;
    st = correct(st, y, bank, model);
    benchmark::DoNotOptimize(st.coeffs.values.data());
    st.time = 0.0;  // keep h(x,t)/S(t) lookups in range for long runs
  }
}
BENCHMARK(BM_OnlineStep);

void BM_PropagatorBuild(benchmark::State& state) {
  const BasisSpec spec{2.4637, 0.0, 45};
  CanonicalFke fke;
  fke.nu = 0.5;
  fke.potential = [](double x, double) { return -0.5 * std::pow(x, 6); };
  StepperConfig st;
  for (auto _ : state) {
    benchmark::DoNotOptimize(precompute_propagator(spec, fke, 0.01, st));
  }
}
BENCHMARK(BM_PropagatorBuild);

}  // namespace

BENCHMARK_MAIN();
