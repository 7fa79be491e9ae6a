#pragma once

#include <limits>
#include <optional>

#include "rail/core.hpp"

namespace rail {

// Precedence variable identity. For StationOrder keys the trains are id-sorted
// and value 1 means `a` acts before `b` at station s. For LineEntry keys `a`
// enters the single-track line at s heading s2 and value 1 means it enters
// first; y(j,j',m) = 1 - y(j',j,m) holds by construction, only one variable
// is ever stored per conflict.
struct YKey {
  enum class Kind { StationOrder, LineEntry };
  Kind kind = Kind::StationOrder;
  std::string a, b;
  std::string s, s2;  // s2 only for LineEntry

  auto operator<=>(const YKey&) const = default;
  std::string name() const;
};

// Forbidden open interval lo < t_b - t_a < hi between two departure events.
// Unconditional rules (stay, circulation) have lo = -infinity and no y.
struct PairRule {
  ConflictKind kind{};  // resource family; Stay/Circulation reuse RollingStock/none
  bool is_stay = false;
  bool is_circulation = false;
  EventKey a, b;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = 0;
  std::optional<YKey> y;  // present for disjunctive resource rules
  std::string ja, jb;     // participants (ja == jb for stay)
  std::string resource;

  bool forbids(GridTime ta, GridTime tb) const {
    double d = static_cast<double>(tb - ta);
    return lo < d && d < hi;
  }
};

// Station-track occupation needs a cubic pattern: if `leaver` departs s while
// `arriver` departs s later, the arriver must reach s only after the leaver
// has cleared the track. Forbidden: t_prior + pass - res < t_leaver < t_arriver.
struct TripleRule {
  EventKey leaver;    // x1: departure of the earlier train from s
  EventKey arriver;   // x2: departure of the later (arriving) train from s
  EventKey prior;     // x3: the arriving train's departure from its prior station
  GridTime shift = 0;  // res - pass; linear form: t_prior >= t_leaver + shift
  YKey y;              // shared with the pair's station-order variable
  int active_when = 1; // y value meaning "leaver departs first"
  std::string ja, jb, resource;

  bool forbids(GridTime t_leaver, GridTime t_arriver, GridTime t_prior) const {
    return t_prior - shift < t_leaver && t_leaver < t_arriver;
  }
};

struct RuleSet {
  std::vector<PairRule> pairs;
  std::vector<TripleRule> triples;
  // span variable at the upstream station == station-order variable downstream
  std::vector<std::pair<YKey, YKey>> order_equalities;
};

// Window helpers, one per condition family. Bounds are on t' - t for the
// argument order given; all intervals are open.
struct ForbiddenWindow {
  EventKey var_a, var_b;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

ForbiddenWindow span_window(const std::string& j, const std::string& j2,
                            const std::string& s, const std::string& s2,
                            const TimingParams& timing);
ForbiddenWindow single_track_window(const std::string& j, const std::string& j2,
                                    const std::string& s, const std::string& s2,
                                    const TimingParams& timing);
ForbiddenWindow stay_window(const std::string& j, const std::string& s,
                            const std::string& s2, const TimingParams& timing);
// j terminates at s (arriving from s_prior), j2 departs s as the follow-up
// service; forbidden until arrival plus preparation time.
ForbiddenWindow circulation_window(const std::string& j, const std::string& j2,
                                   const std::string& s_prior, const std::string& s,
                                   const TimingParams& timing);
ForbiddenWindow switch_window(const std::string& j, const std::string& j2,
                              const std::string& s, const TimingParams& timing);

// The full constraint inventory induced by a routing. Both the big-M model
// and the time-indexed penalty encoder are generated from this one list, so
// the two solution paths agree on semantics by construction.
RuleSet build_rules(const DispatchInstance& instance, const Routing& routing,
                    const ConflictSets& sets);

}  // namespace rail
