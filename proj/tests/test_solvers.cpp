#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "rail/hybrid.hpp"
#include "rail/solvers.hpp"

using namespace rail;

namespace {

QuboModel random_model(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_int_distribution<int> var(0, n - 1);
  QuboModel m;
  m.n = n;
  m.offset = coeff(rng);
  for (int i = 0; i < n; ++i) m.linear[i] = coeff(rng);
  for (int k = 0; k < 3 * n; ++k) {
    int i = var(rng), j = var(rng);
    if (i == j) continue;
    m.quadratic[{std::min(i, j), std::max(i, j)}] += coeff(rng);
  }
  return m;
}

QuboEncoding micro_encoding() {
  // one train over two stations with a little slack: six x variables, no aux
  auto inst = rail::testing::full_shared_instance(1, 2, /*d_max=*/2);
  return assemble(inst, inst.default_routing);
}

}  // namespace

TEST_CASE("restricted and full enumeration agree on a micro model") {
  auto enc = micro_encoding();
  CHECK(enc.model.n == 6);
  auto onehot = brute_force_onehot(enc.model, enc.index);
  auto full = brute_force_full(enc.model);
  REQUIRE(!onehot.records.empty());
  REQUIRE(!full.records.empty());
  CHECK(onehot.best().energy == doctest::Approx(full.best().energy).epsilon(1e-12));
  CHECK(onehot.best().bits == full.best().bits);
}

TEST_CASE("a lone one-hot group has a threefold degenerate ground state") {
  QuboModel m;
  m.n = 3;
  const double p = 4.0;
  for (int i = 0; i < 3; ++i) {
    m.linear[i] = -p;
    for (int j = i + 1; j < 3; ++j) m.quadratic[{i, j}] = 2.0 * p;
  }
  auto set = brute_force_full(m);
  CHECK(set.records.size() == 3);
  for (const auto& s : set.records) CHECK(s.energy == doctest::Approx(-p));
}

TEST_CASE("zero coefficients leave only the offset") {
  QuboModel m;
  m.n = 4;
  m.offset = 2.5;
  auto set = brute_force_full(m);
  CHECK(set.records.size() == 16);  // every state ties at the offset
  for (const auto& s : set.records) CHECK(s.energy == doctest::Approx(2.5));
}

TEST_CASE("empty model yields a single empty sample") {
  QuboModel m;
  m.offset = 1.25;
  VarIndex index;
  auto set = brute_force_onehot(m, index);
  REQUIRE(set.records.size() == 1);
  CHECK(set.records[0].bits.empty());
  CHECK(set.records[0].energy == doctest::Approx(1.25));
}

TEST_CASE("enumeration caps are enforced") {
  auto inst = rail::testing::demo_instance();
  auto enc = assemble(inst, inst.default_routing);
  BruteForceOptions opts;
  opts.state_cap = 10;
  CHECK_THROWS_AS(brute_force_onehot(enc.model, enc.index, opts), RailError);
  CHECK_THROWS_AS(brute_force_full(enc.model), RailError);
}

TEST_CASE("energy rejects a wrong bit-vector length") {
  QuboModel m;
  m.n = 3;
  CHECK_THROWS_AS(energy(m, {0, 1}), RailError);
}

TEST_CASE("sample energies always match a full recomputation") {
  // the solvers track energies incrementally; stored values must agree with
  // an independent evaluation of the returned bits
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto m = random_model(seed, 12);
    AnnealParams params;
    params.seed = seed;
    params.sweeps = 200;
    params.restarts = 4;
    auto set = simulated_annealing(m, params);
    for (const auto& s : set.records)
      CHECK(s.energy == doctest::Approx(energy(m, s.bits)).epsilon(1e-9));
    auto full = brute_force_full(m);
    for (const auto& s : full.records)
      CHECK(s.energy == doctest::Approx(energy(m, s.bits)).epsilon(1e-9));
    CHECK(set.best().energy >= full.best().energy - 1e-9);
  }
}

TEST_CASE("gray-code enumeration matches direct evaluation on a tiny model") {
  auto m = random_model(99, 10);
  auto full = brute_force_full(m);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> bits(m.n, 0);
  for (int mask = 0; mask < (1 << m.n); ++mask) {
    for (int i = 0; i < m.n; ++i) bits[i] = (mask >> i) & 1;
    best = std::min(best, energy(m, bits));
  }
  CHECK(full.best().energy == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("sample sets are ordered by energy with ties toward earlier bits") {
  QuboModel m;
  m.n = 2;  // all four states tie at zero energy
  auto set = brute_force_full(m);
  REQUIRE(set.records.size() == 4);
  for (std::size_t i = 1; i < set.records.size(); ++i)
    CHECK(set.records[i - 1].energy <= set.records[i].energy);
  CHECK(set.records[0].bits == std::vector<std::uint8_t>{1, 1});
  CHECK(set.records[1].bits == std::vector<std::uint8_t>{1, 0});
  CHECK(set.records[2].bits == std::vector<std::uint8_t>{0, 1});
  CHECK(set.records[3].bits == std::vector<std::uint8_t>{0, 0});
}

TEST_CASE("annealing is deterministic for a fixed seed") {
  auto inst = rail::testing::demo_instance();
  auto enc = assemble(inst, rail::testing::demo_rerouted(inst));
  AnnealParams params;
  params.seed = 7;
  params.sweeps = 300;
  params.restarts = 4;
  auto a = simulated_annealing(enc.model, params);
  auto b = simulated_annealing(enc.model, params);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].bits == b.records[i].bits);
    CHECK(a.records[i].energy == b.records[i].energy);
    CHECK(a.records[i].multiplicity == b.records[i].multiplicity);
  }
}

TEST_CASE("at the cold limit annealing never moves uphill") {
  auto inst = rail::testing::demo_instance();
  auto enc = assemble(inst, inst.default_routing);
  // feasible but suboptimal warm start: the slower train goes first
  auto lm = build_linear_model(inst, inst.default_routing,
                               derive_conflict_sets(inst, inst.default_routing));
  SolveOptions opts;
  opts.forced[{YKey::Kind::StationOrder, "j1", "j2", "s1", ""}] = 0;
  auto warm_schedule = solve_order_enumeration(lm, opts);
  REQUIRE(warm_schedule.feasible);
  std::vector<std::uint8_t> warm(enc.model.n, 0);
  for (const auto& [key, t] : warm_schedule.departure) warm[enc.index.at(key, t)] = 1;
  for (const auto& a : enc.index.aux)
    if (warm[a.x1] && warm[a.x2]) warm[a.index] = 1;

  AnnealParams params;
  params.seed = 3;
  params.sweeps = 50;
  params.restarts = 1;
  params.beta_schedule.beta_min = 1e8;
  params.beta_schedule.beta_max = 1e9;
  params.warm_start = warm;
  std::vector<double> trace;
  params.energy_trace = &trace;
  auto set = simulated_annealing(enc.model, params);
  REQUIRE(!trace.empty());
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
  CHECK(set.best().energy <= energy(enc.model, warm) + 1e-9);
}

TEST_CASE("annealing finds the rerouted optimum") {
  auto inst = rail::testing::demo_instance();
  auto enc = assemble(inst, rail::testing::demo_rerouted(inst));
  AnnealParams params;
  params.seed = 2024;
  auto set = simulated_annealing(enc.model, params);
  auto oracle = brute_force_onehot(enc.model, enc.index);
  CHECK(set.best().energy == doctest::Approx(oracle.best().energy).epsilon(1e-9));
}

TEST_CASE("enumeration oracles agree with the order oracle on the demo") {
  auto inst = rail::testing::demo_instance();
  for (const Routing& routing : {inst.default_routing, rail::testing::demo_rerouted(inst)}) {
    auto sets = derive_conflict_sets(inst, routing);
    auto lm = build_linear_model(inst, routing, sets);
    auto schedule = solve_order_enumeration(lm);
    auto enc = assemble(inst, routing, sets, default_penalty_constants(inst));
    auto samples = brute_force_onehot(enc.model, enc.index);
    auto decoded = decode(samples.best().bits, enc, inst);
    REQUIRE(schedule.feasible);
    REQUIRE(decoded.schedule.feasible);
    CHECK(decoded.schedule.objective == doctest::Approx(schedule.objective).epsilon(1e-9));
    CHECK(decoded.schedule.departure == schedule.departure);
  }
}
