#pragma once

#include "rail/core.hpp"
#include "rail/linear.hpp"
#include "rail/rules.hpp"

namespace rail {

// Time-indexed binary variables: one x per (train, station, grid point of the
// departure window), indexed densely group by group; auxiliary variables from
// the cubic reduction follow after all x variables.
struct VarIndex {
  struct Group {
    EventKey event;
    int start = 0;     // first dense index
    GridTime lb = 0;   // time of the first index (= unavoidable departure)
    GridTime ub = 0;
    int size() const { return static_cast<int>(ub - lb + 1); }
  };
  struct Aux {
    int index = 0;
    int x1 = 0, x2 = 0;  // z is consistent when z == x1 * x2
  };

  std::vector<Group> groups;
  std::map<EventKey, int> group_of;
  std::vector<Aux> aux;
  std::map<std::pair<int, int>, int> aux_of;  // unordered (min,max) pair -> z index
  int num_x = 0;

  int total() const { return num_x + static_cast<int>(aux.size()); }
  int at(const EventKey& event, GridTime t) const;
  // (train, station, time) of an x index
  std::tuple<std::string, std::string, GridTime> describe(int index) const;
};

struct PenaltyConstants {
  double p_sum = 1.0, p_pair = 1.0, p_qubic = 2.0;
};

// Defaults chosen so that a single violated penalty always outweighs the
// whole objective range.
PenaltyConstants default_penalty_constants(const DispatchInstance& instance);

struct QuboModel {
  int n = 0;
  std::map<std::pair<int, int>, double> quadratic;  // keys i < j, no zeros
  std::map<int, double> linear;
  double offset = 0.0;
  PenaltyConstants constants;
  std::vector<std::vector<int>> groups;  // one-hot groups over x indices
};

enum class PenaltyFamily {
  Objective,
  OneHot,
  Span,
  SingleTrack,
  Stay,
  Circulation,
  Switch,
  TrackOccupationPair,
  TrackOccupationCubic,  // raw cubic terms, kept for reporting
  TrackOccupationResidual,
  Quadratization,  // consistency polynomial h per auxiliary variable
};

std::string to_string(PenaltyFamily f);

struct Term {
  std::vector<int> vars;  // 1..3 distinct indices
  double coeff = 0.0;
};

struct QuboEncoding {
  QuboModel model;
  VarIndex index;
  std::map<PenaltyFamily, std::vector<Term>> families;
  double floor = 0.0;  // energy of any feasible state minus its objective
};

VarIndex index_variables(const DispatchInstance& instance, const Routing& routing);

std::vector<Term> encode_objective(const VarIndex& index, const DispatchInstance& instance);

std::vector<Term> encode_sum_constraint(const VarIndex& index, double p_sum);

std::vector<Term> emit_pairwise_penalty(const ForbiddenWindow& window, const VarIndex& index,
                                        double p_pair);

std::vector<Term> emit_track_occupation_cubic(const std::string& leaver,
                                              const std::string& arriver,
                                              const std::string& s, const std::string& s_prev,
                                              const VarIndex& index, const TimingParams& timing,
                                              double p_pair);

// Rosenberg consistency polynomial, zero exactly when z == x1 * x2.
inline int rosenberg_h(int x1, int x2, int z) {
  return 3 * z + x1 * x2 - 2 * x1 * z - 2 * x2 * z;
}

struct Reduction {
  std::vector<Term> residual;        // p_pair-weighted (z, x3) pairs
  std::vector<Term> quadratization;  // p_qubic-weighted h terms
};

// Substitute the shared-station product of every cubic term by an auxiliary
// variable; one z per distinct product pair, shared across families.
Reduction reduce_to_qubo(const std::vector<Term>& cubic_terms, VarIndex& index,
                         double p_pair, double p_qubic);

QuboEncoding assemble(const DispatchInstance& instance, const Routing& routing,
                      const ConflictSets& sets, const PenaltyConstants& constants);
QuboEncoding assemble(const DispatchInstance& instance, const Routing& routing);

struct DecodedSample {
  Schedule schedule;
  bool one_hot = false;
  bool aux_consistent = false;
  std::vector<Diagnostic> diagnostics;
  std::map<PenaltyFamily, double> family_energy;
};

DecodedSample decode(const std::vector<std::uint8_t>& bits, const QuboEncoding& encoding,
                     const DispatchInstance& instance);

}  // namespace rail
