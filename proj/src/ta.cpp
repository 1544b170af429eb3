#include "levta/ta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace levta {

const char* rel_name(Rel rel) {
    switch (rel) {
        case Rel::Le: return "<=";
        case Rel::Lt: return "<";
        case Rel::Eq: return "=";
        case Rel::Gt: return ">";
        case Rel::Ge: return ">=";
    }
    return "?";
}

bool satisfies(const ClockValuation& v, const ClockConstraint& c) {
    for (const ClockAtom& a : c.atoms) {
        if (a.clock < 0 || a.clock >= static_cast<int>(v.size()))
            throw std::invalid_argument("clock index out of range in constraint");
        double x = v[static_cast<std::size_t>(a.clock)];
        bool ok = false;
        switch (a.rel) {
            case Rel::Le: ok = x <= a.bound; break;
            case Rel::Lt: ok = x < a.bound; break;
            case Rel::Eq: ok = x == a.bound; break;
            case Rel::Gt: ok = x > a.bound; break;
            case Rel::Ge: ok = x >= a.bound; break;
        }
        if (!ok) return false;
    }
    return true;
}

ClockValuation delayed(const ClockValuation& v, double d) {
    if (d < 0.0) throw std::invalid_argument("delay must be nonnegative");
    ClockValuation out(v);
    for (double& x : out) x += d;
    return out;
}

ClockValuation reset(ClockValuation v, const std::vector<int>& resets) {
    for (int c : resets) {
        if (c < 0 || c >= static_cast<int>(v.size()))
            throw std::invalid_argument("reset clock index out of range");
        v[static_cast<std::size_t>(c)] = 0.0;
    }
    return v;
}

// ── TimedAutomaton ──────────────────────────────────────────────────────────

void TimedAutomaton::validate() const {
    std::set<std::string> ids;
    for (const TaLocation& loc : locations) {
        if (!ids.insert(loc.id).second)
            throw std::invalid_argument("duplicate location id '" + loc.id + "'");
        for (const ClockAtom& a : loc.invariant.atoms) {
            if (a.clock < 0 || a.clock >= static_cast<int>(clocks.size()))
                throw std::invalid_argument("invariant clock out of range in '" + loc.id + "'");
            if (a.bound < 0.0)
                throw std::invalid_argument("negative constant in invariant of '" + loc.id + "'");
        }
    }
    for (int e0 : initial)
        if (e0 < 0 || e0 >= static_cast<int>(locations.size()))
            throw std::invalid_argument("initial location index out of range");
    for (const TaEdge& e : edges) {
        if (e.src < 0 || e.src >= static_cast<int>(locations.size()) || e.dst < 0 ||
            e.dst >= static_cast<int>(locations.size()))
            throw std::invalid_argument("edge endpoint out of range");
        if (e.symbol < 0 || e.symbol >= static_cast<int>(symbols.size()))
            throw std::invalid_argument("edge symbol out of range");
        for (const ClockAtom& a : e.guard.atoms) {
            if (a.clock < 0 || a.clock >= static_cast<int>(clocks.size()))
                throw std::invalid_argument("guard clock out of range");
            if (a.bound < 0.0) throw std::invalid_argument("negative constant in guard");
        }
        for (int c : e.resets)
            if (c < 0 || c >= static_cast<int>(clocks.size()))
                throw std::invalid_argument("reset clock out of range");
    }
}

int TimedAutomaton::location_index(const std::string& id) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
        if (locations[i].id == id) return static_cast<int>(i);
    return -1;
}

int TimedAutomaton::clock_index(const std::string& name) const {
    for (std::size_t i = 0; i < clocks.size(); ++i)
        if (clocks[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<int> TimedAutomaton::edges_from(int location) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].src == location) out.push_back(static_cast<int>(i));
    return out;
}

// ── Steps ───────────────────────────────────────────────────────────────────

std::vector<TaState> step_delay(const TimedAutomaton& ta, const TaState& state, double d) {
    if (d < 0.0) throw std::invalid_argument("delay must be nonnegative");
    const ClockConstraint& inv = ta.locations[static_cast<std::size_t>(state.location)].invariant;
    if (!satisfies(state.valuation, inv))
        throw std::invalid_argument("step_delay: source state violates the invariant");
    ClockValuation moved = delayed(state.valuation, d);
    // Along a delay each atom's feasible set is an interval, so holding at
    // both endpoints implies holding throughout.
    if (!satisfies(moved, inv)) return {};
    return {TaState{state.location, std::move(moved)}};
}

std::vector<TaState> step_symbol(const TimedAutomaton& ta, const TaState& state, int symbol) {
    const ClockConstraint& inv = ta.locations[static_cast<std::size_t>(state.location)].invariant;
    if (!satisfies(state.valuation, inv))
        throw std::invalid_argument("step_symbol: source state violates the invariant");
    std::vector<TaState> out;
    for (const TaEdge& e : ta.edges) {
        if (e.src != state.location || e.symbol != symbol) continue;
        if (!satisfies(state.valuation, e.guard)) continue;
        ClockValuation v2 = reset(state.valuation, e.resets);
        if (!satisfies(v2, ta.locations[static_cast<std::size_t>(e.dst)].invariant)) continue;
        out.push_back(TaState{e.dst, std::move(v2)});
    }
    return out;
}

// ── Runs ────────────────────────────────────────────────────────────────────

std::vector<double> Run::switch_times() const {
    std::vector<double> out;
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        t += segments[i].dwell;
        out.push_back(t);
    }
    return out;
}

double Run::total_time() const {
    double t = 0.0;
    for (const RunSegment& s : segments) t += s.dwell;
    return t;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Window {
    double lo = 0.0;
    double hi = kInf;

    bool empty() const { return lo > hi; }
};

/// Feasible delays d >= 0 keeping every atom of c satisfied at v + d.
/// Treats strict bounds as closed; sampled delays are re-validated exactly.
Window delay_window(const ClockValuation& v, const ClockConstraint& c) {
    Window w;
    for (const ClockAtom& a : c.atoms) {
        double x = v[static_cast<std::size_t>(a.clock)];
        switch (a.rel) {
            case Rel::Le:
            case Rel::Lt: w.hi = std::min(w.hi, a.bound - x); break;
            case Rel::Ge:
            case Rel::Gt: w.lo = std::max(w.lo, a.bound - x); break;
            case Rel::Eq:
                w.lo = std::max(w.lo, a.bound - x);
                w.hi = std::min(w.hi, a.bound - x);
                break;
        }
    }
    w.lo = std::max(w.lo, 0.0);
    return w;
}

}  // namespace

Run simulate_run(const TimedAutomaton& ta, int e0, std::uint64_t seed, double horizon) {
    if (e0 < 0 || e0 >= static_cast<int>(ta.locations.size()))
        throw std::invalid_argument("simulate_run: bad initial location");
    std::mt19937_64 rng(seed);
    Run run;
    TaState state{e0, ClockValuation(ta.clocks.size(), 0.0)};
    if (!satisfies(state.valuation, ta.locations[static_cast<std::size_t>(e0)].invariant)) {
        run.deadlocked = true;
        return run;
    }
    double elapsed = 0.0;
    constexpr std::size_t kMaxSegments = 100000;

    while (run.segments.size() < kMaxSegments) {
        const auto& loc = ta.locations[static_cast<std::size_t>(state.location)];
        double remaining = horizon - elapsed;
        Window inv_win = delay_window(state.valuation, loc.invariant);
        double cap = std::min(inv_win.hi, remaining);

        // Candidate switch windows per outgoing edge.
        struct Choice {
            int edge;
            Window win;
        };
        std::vector<Choice> choices;
        for (int ei : ta.edges_from(state.location)) {
            const TaEdge& e = ta.edges[static_cast<std::size_t>(ei)];
            Window w = delay_window(state.valuation, e.guard);
            w.lo = std::max(w.lo, 0.0);
            w.hi = std::min(w.hi, cap);
            if (!w.empty()) choices.push_back({ei, w});
        }

        if (choices.empty()) {
            // No discrete step will become enabled: dwell out the window.
            double dwell = std::min(cap, remaining);
            if (dwell < 0.0) dwell = 0.0;
            run.segments.push_back({state.location, state.valuation, dwell, -1});
            run.deadlocked = elapsed + dwell < horizon;
            return run;
        }

        // Sample a delay uniformly over the union of the switch windows.
        double total = 0.0;
        for (const Choice& c : choices) total += c.win.hi - c.win.lo;
        double d = 0.0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> dist(0.0, total);
            double u = dist(rng);
            for (const Choice& c : choices) {
                double len = c.win.hi - c.win.lo;
                if (u <= len) {
                    d = c.win.lo + u;
                    break;
                }
                u -= len;
            }
        } else {
            // All windows are points.
            std::uniform_int_distribution<std::size_t> dist(0, choices.size() - 1);
            d = choices[dist(rng)].win.lo;
        }

        // Enabled edges at v + d, target invariant included.
        ClockValuation at = delayed(state.valuation, d);
        std::vector<int> enabled;
        for (const Choice& c : choices) {
            const TaEdge& e = ta.edges[static_cast<std::size_t>(c.edge)];
            if (!satisfies(at, e.guard)) continue;
            if (!satisfies(reset(at, e.resets),
                           ta.locations[static_cast<std::size_t>(e.dst)].invariant))
                continue;
            enabled.push_back(c.edge);
        }
        if (enabled.empty()) {
            // Strict-bound corner; end the run as a dwell.
            double dwell = std::min(cap, remaining);
            run.segments.push_back({state.location, state.valuation, dwell, -1});
            run.deadlocked = elapsed + dwell < horizon;
            return run;
        }
        std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
        int ei = enabled[pick(rng)];
        const TaEdge& e = ta.edges[static_cast<std::size_t>(ei)];

        run.segments.push_back({state.location, state.valuation, d, ei});
        elapsed += d;
        state = TaState{e.dst, reset(at, e.resets)};
        if (elapsed >= horizon) {
            run.segments.push_back({state.location, state.valuation, 0.0, -1});
            return run;
        }
    }
    return run;
}

bool run_is_valid(const TimedAutomaton& ta, const Run& run, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (run.segments.empty()) return fail("empty run");
    for (std::size_t i = 0; i < run.segments.size(); ++i) {
        const RunSegment& s = run.segments[i];
        if (s.location < 0 || s.location >= static_cast<int>(ta.locations.size()))
            return fail("segment location out of range");
        if (s.entry.size() != ta.clocks.size()) return fail("valuation size mismatch");
        for (double x : s.entry)
            if (x < 0.0) return fail("negative clock value");
        if (s.dwell < 0.0) return fail("negative dwell");
        const ClockConstraint& inv = ta.locations[static_cast<std::size_t>(s.location)].invariant;
        if (!satisfies(s.entry, inv)) return fail("invariant violated at segment entry");
        if (!satisfies(delayed(s.entry, s.dwell), inv))
            return fail("invariant violated during dwell");
        bool last = i + 1 == run.segments.size();
        if (last) {
            if (s.exit_edge != -1) return fail("final segment has an exit edge");
            continue;
        }
        if (s.exit_edge < 0 || s.exit_edge >= static_cast<int>(ta.edges.size()))
            return fail("exit edge out of range");
        const TaEdge& e = ta.edges[static_cast<std::size_t>(s.exit_edge)];
        if (e.src != s.location) return fail("exit edge source mismatch");
        ClockValuation at = delayed(s.entry, s.dwell);
        if (!satisfies(at, e.guard)) return fail("guard violated at switch");
        ClockValuation expect = reset(at, e.resets);
        const RunSegment& next = run.segments[i + 1];
        if (next.location != e.dst) return fail("exit edge target mismatch");
        if (next.entry != expect) return fail("reset mismatch at switch");
    }
    if (why) why->clear();
    return true;
}

}  // namespace levta
