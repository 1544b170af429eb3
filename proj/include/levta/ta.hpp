// ============================================================================
// levta/ta.hpp — timed automaton: clock constraints, valuations, transition
// semantics, and runs
// ============================================================================

#ifndef LEVTA_TA_HPP
#define LEVTA_TA_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace levta {

// ── Clock constraints ───────────────────────────────────────────────────────

enum class Rel { Le, Lt, Eq, Gt, Ge };

const char* rel_name(Rel rel);  // "<=", "<", "=", ">", ">="

/// Atomic constraint c <rel> bound over clock index c. Bounds are
/// nonnegative reals (kept as doubles; no rational conversion).
struct ClockAtom {
    int clock = 0;
    Rel rel = Rel::Le;
    double bound = 0.0;
};

/// Conjunction of atoms; empty conjunction is true.
struct ClockConstraint {
    std::vector<ClockAtom> atoms;

    bool is_true() const { return atoms.empty(); }
};

/// Clock valuation, aligned with TimedAutomaton::clocks. All entries >= 0.
using ClockValuation = std::vector<double>;

bool satisfies(const ClockValuation& v, const ClockConstraint& c);

/// v + d: uniform shift of every clock. Requires d >= 0.
ClockValuation delayed(const ClockValuation& v, double d);

/// v[R]: zero exactly the clocks in resets.
ClockValuation reset(ClockValuation v, const std::vector<int>& resets);

// ── Automaton ───────────────────────────────────────────────────────────────

struct TaLocation {
    std::string id;
    std::vector<int> g;  // slice-index vector for generated automata; may be empty
    int h = 0;
    ClockConstraint invariant;
};

struct TaEdge {
    int src = 0;
    int dst = 0;
    int symbol = 0;
    ClockConstraint guard;
    std::vector<int> resets;  // clock indices, sorted
};

/// (E, E0, C, Sigma, I, Delta). Immutable after construction by convention;
/// all semantic operations are const.
struct TimedAutomaton {
    std::vector<std::string> clocks;
    std::vector<std::string> symbols;
    std::vector<TaLocation> locations;
    std::vector<int> initial;
    std::vector<TaEdge> edges;

    /// Structural invariants: ids unique, indices in range, constants >= 0.
    /// Throws std::invalid_argument.
    void validate() const;

    int location_index(const std::string& id) const;  // -1 when absent
    int clock_index(const std::string& name) const;
    std::vector<int> edges_from(int location) const;
};

// ── Transition-system steps ─────────────────────────────────────────────────

struct TaState {
    int location = 0;
    ClockValuation valuation;
};

/// Delay step: the single successor (e, v+d) if v+d' satisfies I(e) for all
/// d' in [0, d]; empty vector otherwise.
std::vector<TaState> step_delay(const TimedAutomaton& ta, const TaState& state, double d);

/// Discrete step: every (e', v[R]) over transitions labeled `symbol` whose
/// guard v satisfies and whose target invariant v[R] satisfies.
std::vector<TaState> step_symbol(const TimedAutomaton& ta, const TaState& state, int symbol);

// ── Runs ────────────────────────────────────────────────────────────────────

/// One location visit: entry valuation (after any reset), dwell time, and
/// the edge taken on exit (-1 for the final segment).
struct RunSegment {
    int location = 0;
    ClockValuation entry;
    double dwell = 0.0;
    int exit_edge = -1;
};

/// Alternating delay/discrete sequence. switch_times() gives the cumulative
/// time of each discrete switch.
struct Run {
    std::vector<RunSegment> segments;
    bool deadlocked = false;

    std::vector<double> switch_times() const;
    double total_time() const;
};

/// Seeded random run: repeatedly samples a delay uniformly within the
/// window permitted by the invariant and the enabled-guard windows, then a
/// uniformly chosen enabled discrete step. Ends at the horizon, or earlier
/// (deadlocked = true) when the invariant ceiling is reached with no edge
/// enabled. Deterministic for a fixed seed.
Run simulate_run(const TimedAutomaton& ta, int e0, std::uint64_t seed, double horizon);

/// Mechanical check of the run invariants: alternation, invariants along
/// delays, guards at switches, resets zero exactly R.
bool run_is_valid(const TimedAutomaton& ta, const Run& run, std::string* why = nullptr);

}  // namespace levta

#endif  // LEVTA_TA_HPP
