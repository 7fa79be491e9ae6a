#pragma once

#include <cstdint>
#include <functional>

#include "rail/qubo.hpp"

namespace rail {

struct BetaSchedule {
  double beta_min = 0.1, beta_max = 10.0;
  enum class Shape { Geometric, Linear } shape = Shape::Geometric;
};

struct AnnealParams {
  int sweeps = 2000;
  int restarts = 10;
  BetaSchedule beta_schedule;
  std::uint64_t seed = 0;
  // optional warm start shared by every chain
  std::vector<std::uint8_t> warm_start;
  // test hook: records the running energy of chain 0 after every sweep
  std::vector<double>* energy_trace = nullptr;
};

struct Sample {
  std::vector<std::uint8_t> bits;
  double energy = 0.0;
  int multiplicity = 1;
};

// Records sorted ascending by energy; ties ordered toward the earliest set
// bits so degenerate optima decode to the earliest departures first.
struct SampleSet {
  std::vector<Sample> records;
  const Sample& best() const {
    if (records.empty()) throw RailError("empty-sampleset", "no samples");
    return records.front();
  }
};

double energy(const QuboModel& model, const std::vector<std::uint8_t>& bits);

struct BruteForceOptions {
  double state_cap = 1e7;
};

// Enumerates every one-hot assignment with auxiliary variables forced
// consistent; returns all tied ground states. Lossless under the penalty
// constants' ground-state-safety margin.
SampleSet brute_force_onehot(const QuboModel& model, const VarIndex& index,
                             const BruteForceOptions& opts = {});

SampleSet brute_force_full(const QuboModel& model, int max_bits = 24);

SampleSet simulated_annealing(const QuboModel& model, const AnnealParams& params);

}  // namespace rail
