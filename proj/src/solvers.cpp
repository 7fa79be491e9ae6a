#include "rail/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <random>
#include <thread>
#include <unordered_map>

namespace rail {

namespace {

// Adjacency view for incremental energy evaluation.
struct Evaluator {
  int n;
  std::vector<double> linear;
  std::vector<std::vector<std::pair<int, double>>> adj;

  explicit Evaluator(const QuboModel& model) : n(model.n), linear(model.n, 0.0), adj(model.n) {
    for (const auto& [i, c] : model.linear) linear[i] = c;
    for (const auto& [key, c] : model.quadratic) {
      adj[key.first].push_back({key.second, c});
      adj[key.second].push_back({key.first, c});
    }
  }

  double full(const std::vector<std::uint8_t>& bits, double offset) const {
    double e = offset;
    for (int i = 0; i < n; ++i) {
      if (!bits[i]) continue;
      e += linear[i];
      for (const auto& [j, c] : adj[i])
        if (j > i && bits[j]) e += c;
    }
    return e;
  }

  // Energy change of flipping bit i.
  double delta(const std::vector<std::uint8_t>& bits, int i) const {
    double d = linear[i];
    for (const auto& [j, c] : adj[i])
      if (bits[j]) d += c;
    return bits[i] ? -d : d;
  }

  // Energy change of flipping bits i and j together: the independent deltas
  // plus a sign-corrected coupling term.
  double delta2(const std::vector<std::uint8_t>& bits, int i, int j) const {
    double c = 0.0;
    for (const auto& [k, w] : adj[i])
      if (k == j) c = w;
    double si = bits[i] ? -1.0 : 1.0;
    double sj = bits[j] ? -1.0 : 1.0;
    return delta(bits, i) + delta(bits, j) + si * sj * c;
  }
};

bool earlier_bits(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    if (a[i] != b[i]) return a[i] > b[i];  // a set bit sorts before a clear one
  return a.size() < b.size();
}

void sort_samples(SampleSet& set) {
  std::sort(set.records.begin(), set.records.end(), [](const Sample& a, const Sample& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return earlier_bits(a.bits, b.bits);
  });
}

}  // namespace

double energy(const QuboModel& model, const std::vector<std::uint8_t>& bits) {
  if (static_cast<int>(bits.size()) != model.n)
    throw RailError("length-mismatch", "bit vector length does not match the model");
  double e = model.offset;
  for (const auto& [i, c] : model.linear)
    if (bits[i]) e += c;
  for (const auto& [key, c] : model.quadratic)
    if (bits[key.first] && bits[key.second]) e += c;
  return e;
}

SampleSet brute_force_onehot(const QuboModel& model, const VarIndex& index,
                             const BruteForceOptions& opts) {
  SampleSet out;
  const std::size_t n_groups = index.groups.size();

  double states = 1.0;
  for (const auto& g : index.groups) states *= static_cast<double>(g.size());
  if (states > opts.state_cap)
    throw RailError("cap-exceeded", "one-hot state space exceeds the enumeration cap");

  std::vector<std::uint8_t> bits(model.n, 0);
  if (n_groups == 0) {
    out.records.push_back({bits, energy(model, bits), 1});
    return out;
  }

  // Pairwise lookups touch only the few set bits per state.
  std::unordered_map<std::uint64_t, double> quad;
  quad.reserve(model.quadratic.size() * 2);
  for (const auto& [key, c] : model.quadratic)
    quad[(static_cast<std::uint64_t>(key.first) << 32) | static_cast<std::uint64_t>(key.second)] = c;
  std::vector<double> lin(model.n, 0.0);
  for (const auto& [i, c] : model.linear) lin[i] = c;
  auto pair_coeff = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    auto it = quad.find((static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j));
    return it == quad.end() ? 0.0 : it->second;
  };

  std::vector<int> choice(n_groups, 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> set_bits_of_best;

  std::vector<int> active;
  active.reserve(n_groups + index.aux.size());
  while (true) {
    active.clear();
    for (std::size_t g = 0; g < n_groups; ++g)
      active.push_back(index.groups[g].start + choice[g]);
    std::fill(bits.begin(), bits.end(), 0);
    for (int i : active) bits[i] = 1;
    for (const auto& a : index.aux)
      if (bits[a.x1] && bits[a.x2]) { bits[a.index] = 1; active.push_back(a.index); }

    double e = model.offset;
    for (std::size_t i = 0; i < active.size(); ++i) {
      e += lin[active[i]];
      for (std::size_t j = i + 1; j < active.size(); ++j)
        e += pair_coeff(active[i], active[j]);
    }

    if (e < best - 1e-12) {
      best = e;
      set_bits_of_best.clear();
      set_bits_of_best.push_back(active);
    } else if (std::abs(e - best) <= 1e-12) {
      set_bits_of_best.push_back(active);
    }

    std::size_t g = 0;
    while (g < n_groups) {
      if (++choice[g] < index.groups[g].size()) break;
      choice[g] = 0;
      ++g;
    }
    if (g == n_groups) break;
  }

  for (const auto& set_bits : set_bits_of_best) {
    Sample s;
    s.bits.assign(model.n, 0);
    for (int i : set_bits) s.bits[i] = 1;
    s.energy = best;
    out.records.push_back(std::move(s));
  }
  sort_samples(out);
  return out;
}

SampleSet brute_force_full(const QuboModel& model, int max_bits) {
  if (model.n > max_bits)
    throw RailError("cap-exceeded", "model too large for full enumeration");
  SampleSet out;
  Evaluator eval(model);
  std::vector<std::uint8_t> bits(model.n, 0);
  double e = model.offset;
  double best = e;
  std::vector<std::vector<std::uint8_t>> ground{bits};

  const std::uint64_t total = model.n == 0 ? 1 : (1ULL << model.n);
  for (std::uint64_t k = 1; k < total; ++k) {
    // Gray code: flip the lowest set bit of k.
    int flip = std::countr_zero(k);
    e += eval.delta(bits, flip);
    bits[flip] ^= 1;
    if (e < best - 1e-12) {
      best = e;
      ground.clear();
      ground.push_back(bits);
    } else if (std::abs(e - best) <= 1e-12) {
      ground.push_back(bits);
    }
  }
  for (auto& g : ground) out.records.push_back({std::move(g), best, 1});
  sort_samples(out);
  return out;
}

SampleSet simulated_annealing(const QuboModel& model, const AnnealParams& params) {
  if (params.sweeps < 1 || params.restarts < 1)
    throw RailError("bad-params", "sweeps and restarts must be at least 1");
  if (!(params.beta_schedule.beta_min < params.beta_schedule.beta_max))
    throw RailError("bad-params", "beta_min must be below beta_max");

  Evaluator eval(model);
  const int n = model.n;

  struct ChainResult { std::vector<std::uint8_t> bits; double energy; };
  std::vector<ChainResult> results(params.restarts);

  // Moving a departure by single flips means paying the one-hot penalty in
  // between, which freezes the chain long before the small delay terms are
  // resolved. Pairing each flip attempt with an in-group two-bit hop keeps
  // the schedule mobile at low temperature.
  const bool hops = !model.groups.empty();

  auto run_chain = [&](int chain) {
    std::mt19937_64 rng(params.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(chain + 1));
    std::uniform_int_distribution<int> pick(0, std::max(0, n - 1));
    std::uniform_int_distribution<int> pick_group(
        0, std::max<int>(0, static_cast<int>(model.groups.size()) - 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<std::uint8_t> bits(n, 0);
    if (!params.warm_start.empty()) {
      if (static_cast<int>(params.warm_start.size()) != n)
        throw RailError("length-mismatch", "warm start length does not match the model");
      bits = params.warm_start;
    } else {
      for (int i = 0; i < n; ++i) bits[i] = rng() & 1;
    }
    double e = eval.full(bits, model.offset);
    std::vector<std::uint8_t> best_bits = bits;
    double best_e = e;
    double beta_now = params.beta_schedule.beta_min;

    auto accept = [&](double d) { return d <= 0.0 || unif(rng) < std::exp(-beta_now * d); };

    for (int sweep = 0; sweep < params.sweeps; ++sweep) {
      double frac = params.sweeps == 1 ? 1.0
                                       : static_cast<double>(sweep) /
                                             static_cast<double>(params.sweeps - 1);
      if (params.beta_schedule.shape == BetaSchedule::Shape::Geometric)
        beta_now = params.beta_schedule.beta_min *
                   std::pow(params.beta_schedule.beta_max / params.beta_schedule.beta_min, frac);
      else
        beta_now = params.beta_schedule.beta_min +
                   frac * (params.beta_schedule.beta_max - params.beta_schedule.beta_min);

      for (int step = 0; step < n; ++step) {
        int i = pick(rng);
        double d = eval.delta(bits, i);
        if (accept(d)) {
          bits[i] ^= 1;
          e += d;
          if (e < best_e) { best_e = e; best_bits = bits; }
        }
        if (!hops) continue;
        const auto& group = model.groups[pick_group(rng)];
        if (group.size() < 2) continue;
        std::uniform_int_distribution<int> in_group(0, static_cast<int>(group.size()) - 1);
        int a = group[in_group(rng)];
        int b = group[in_group(rng)];
        if (a == b) continue;
        double d2 = eval.delta2(bits, a, b);
        if (accept(d2)) {
          bits[a] ^= 1;
          bits[b] ^= 1;
          e += d2;
          if (e < best_e) { best_e = e; best_bits = bits; }
        }
      }
      if (chain == 0 && params.energy_trace) params.energy_trace->push_back(e);
    }
    results[chain] = {std::move(best_bits), best_e};
  };

  if (n == 0) {
    SampleSet out;
    out.records.push_back({{}, model.offset, params.restarts});
    return out;
  }

  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int chain = next.fetch_add(1);
      if (chain >= params.restarts) return;
      run_chain(chain);
    }
  };
  if (params.energy_trace) {
    // Keep the traced chain deterministic relative to the others.
    for (int chain = 0; chain < params.restarts; ++chain) run_chain(chain);
  } else {
    for (unsigned w = 0; w < std::min<unsigned>(workers, params.restarts); ++w)
      pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SampleSet out;
  for (auto& r : results) {
    bool merged = false;
    for (auto& s : out.records)
      if (s.bits == r.bits) { ++s.multiplicity; merged = true; break; }
    if (!merged) out.records.push_back({std::move(r.bits), r.energy, 1});
  }
  sort_samples(out);
  return out;
}

}  // namespace rail
