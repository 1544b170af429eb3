// ============================================================================
// levta/zone.hpp — difference-bound-matrix zones and symbolic reachability
// for the discrete flow map
// ============================================================================

#ifndef LEVTA_ZONE_HPP
#define LEVTA_ZONE_HPP

#include "levta/ta.hpp"

#include <set>
#include <vector>

namespace levta {

/// Bound of a DBM entry: x_i - x_j <= value (or < when strict).
struct DbmBound {
    double value = 0.0;
    bool strict = false;

    static DbmBound infinity();
    bool is_infinity() const;
    bool operator==(const DbmBound&) const = default;
};

/// Convex set of clock valuations over the automaton clocks plus an
/// auxiliary elapsed-time clock tau that is never reset. Index 0 is the
/// reference clock, index 1 is tau, clock i maps to index i + 2.
/// Kept in canonical (shortest-path closed) form by every operation.
class Zone {
public:
    /// Point zone: every clock and tau equal to zero.
    static Zone initial(int num_clocks);
    /// All valuations with nonnegative clocks.
    static Zone universe(int num_clocks);

    int num_clocks() const { return dim_ - 2; }

    bool empty() const;
    /// Intersect with an atom over an automaton clock; recanonicalizes.
    void intersect(const ClockAtom& atom);
    void intersect(const ClockConstraint& constraint);
    /// Time elapse: drop the upper bounds of every clock and tau.
    void up();
    /// Set one automaton clock to zero.
    void reset_clock(int clock);

    double tau_min() const;
    double tau_max() const;  // +inf when unbounded
    /// Some valuation in the zone has tau = t.
    bool admits_tau(double t) const;
    /// Some valuation has tau in [t1, t2].
    bool admits_tau_range(double t1, double t2) const;

    bool subset_of(const Zone& other) const;
    bool operator==(const Zone& other) const;

    void canonicalize();
    /// True when a further canonicalization pass is a no-op.
    bool is_canonical() const;

    DbmBound bound(int i, int j) const { return at(i, j); }
    std::string str(const std::vector<std::string>& clock_names) const;

private:
    explicit Zone(int dim);
    DbmBound& at(int i, int j) { return m_[static_cast<std::size_t>(i * dim_ + j)]; }
    const DbmBound& at(int i, int j) const { return m_[static_cast<std::size_t>(i * dim_ + j)]; }

    int dim_ = 0;
    std::vector<DbmBound> m_;
    bool empty_ = false;
};

// ── Reachability ────────────────────────────────────────────────────────────

/// Zones reachable from (e0, all clocks zero), indexed by location. Every
/// stored zone is time-elapsed and invariant-constrained; exploration is
/// breadth-first with inclusion subsumption, pruned at tau_min > tau_cap.
struct ReachableZones {
    std::vector<std::vector<Zone>> by_location;
};

ReachableZones explore_zones(const TimedAutomaton& ta, int e0, double tau_cap);

/// Locations reachable from the exploration at exactly time t.
std::set<int> locations_at(const ReachableZones& rz, double t);

/// Discrete flow map Phi(t, e0): locations some run reaches at exactly
/// time t, computed by forward zone exploration.
std::set<int> discrete_flow(const TimedAutomaton& ta, int e0, double t);

/// Union of the discrete flow over initial locations and t in [t1, t2].
std::set<int> reachable_locations(const TimedAutomaton& ta, const std::vector<int>& from,
                                  double t1, double t2);

}  // namespace levta

#endif  // LEVTA_ZONE_HPP
