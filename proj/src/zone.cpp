#include "levta/zone.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace levta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Strict ordering of bounds by tightness: smaller value, then strict
/// before non-strict.
bool tighter(const DbmBound& a, const DbmBound& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.strict && !b.strict;
}

DbmBound add_bounds(const DbmBound& a, const DbmBound& b) {
    if (a.is_infinity() || b.is_infinity()) return DbmBound::infinity();
    return {a.value + b.value, a.strict || b.strict};
}

const DbmBound kZeroBound{0.0, false};

// Clock constants are kept as reals, so shortest-path sums carry rounding
// noise of a few ulp. Diagonal entries this far below zero are rounding,
// not genuine negative cycles.
constexpr double kDbmSlack = 1e-12;

}  // namespace

DbmBound DbmBound::infinity() { return {kInf, false}; }
bool DbmBound::is_infinity() const { return value == kInf; }

Zone::Zone(int dim) : dim_(dim), m_(static_cast<std::size_t>(dim * dim)) {}

Zone Zone::initial(int num_clocks) {
    Zone z(num_clocks + 2);
    // All differences exactly zero: the origin point.
    return z;
}

Zone Zone::universe(int num_clocks) {
    Zone z(num_clocks + 2);
    for (int i = 0; i < z.dim_; ++i)
        for (int j = 0; j < z.dim_; ++j)
            if (i != j && j != 0) z.at(i, j) = DbmBound::infinity();
    // Row i, column 0 keeps x_i - 0 unbounded above except x_0 - x_0.
    for (int i = 1; i < z.dim_; ++i) z.at(i, 0) = DbmBound::infinity();
    for (int j = 1; j < z.dim_; ++j) z.at(0, j) = kZeroBound;  // 0 - x_j <= 0
    return z;
}

bool Zone::empty() const { return empty_; }

void Zone::canonicalize() {
    if (empty_) return;
    for (int k = 0; k < dim_; ++k)
        for (int i = 0; i < dim_; ++i) {
            if (at(i, k).is_infinity()) continue;
            for (int j = 0; j < dim_; ++j) {
                DbmBound through = add_bounds(at(i, k), at(k, j));
                if (tighter(through, at(i, j))) at(i, j) = through;
            }
        }
    for (int i = 0; i < dim_; ++i)
        if (tighter(at(i, i), kZeroBound)) {
            // A strict zero cycle is exact infeasibility; only a value
            // below zero by at most the slack is rounding.
            if (at(i, i).value < 0.0 && at(i, i).value >= -kDbmSlack) {
                at(i, i) = kZeroBound;
                continue;
            }
            empty_ = true;
            return;
        }
}

bool Zone::is_canonical() const {
    if (empty_) return true;
    for (int k = 0; k < dim_; ++k)
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                DbmBound through = add_bounds(at(i, k), at(k, j));
                // Improvements within the rounding slack do not count.
                if (tighter(through, at(i, j)) &&
                    at(i, j).value - through.value > kDbmSlack)
                    return false;
            }
    return true;
}

void Zone::intersect(const ClockAtom& atom) {
    if (empty_) return;
    int c = atom.clock + 2;
    if (c < 2 || c >= dim_) throw std::invalid_argument("zone: clock index out of range");
    auto tighten = [this](int i, int j, DbmBound b) {
        if (tighter(b, at(i, j))) at(i, j) = b;
    };
    switch (atom.rel) {
        case Rel::Le: tighten(c, 0, {atom.bound, false}); break;
        case Rel::Lt: tighten(c, 0, {atom.bound, true}); break;
        case Rel::Ge: tighten(0, c, {-atom.bound, false}); break;
        case Rel::Gt: tighten(0, c, {-atom.bound, true}); break;
        case Rel::Eq:
            tighten(c, 0, {atom.bound, false});
            tighten(0, c, {-atom.bound, false});
            break;
    }
    canonicalize();
}

void Zone::intersect(const ClockConstraint& constraint) {
    for (const ClockAtom& a : constraint.atoms) {
        intersect(a);
        if (empty_) return;
    }
}

void Zone::up() {
    if (empty_) return;
    for (int i = 1; i < dim_; ++i) at(i, 0) = DbmBound::infinity();
    // Difference bounds are unchanged by uniform delay; the result stays
    // canonical, but closing again is cheap and keeps the contract simple.
    canonicalize();
}

void Zone::reset_clock(int clock) {
    if (empty_) return;
    int c = clock + 2;
    if (c < 2 || c >= dim_) throw std::invalid_argument("zone: clock index out of range");
    for (int j = 0; j < dim_; ++j) {
        if (j == c) continue;
        at(c, j) = at(0, j);
        at(j, c) = at(j, 0);
    }
    at(c, c) = kZeroBound;
    canonicalize();
}

double Zone::tau_min() const {
    const DbmBound& b = at(0, 1);  // 0 - tau <= v  =>  tau >= -v
    return b.is_infinity() ? 0.0 : -b.value;
}

double Zone::tau_max() const {
    const DbmBound& b = at(1, 0);
    return b.is_infinity() ? kInf : b.value;
}

bool Zone::admits_tau(double t) const {
    if (empty_) return false;
    const DbmBound& hi = at(1, 0);
    const DbmBound& lo = at(0, 1);
    bool below = hi.is_infinity() || t < hi.value || (t == hi.value && !hi.strict);
    bool above = lo.is_infinity() || -t < lo.value || (-t == lo.value && !lo.strict);
    return below && above;
}

bool Zone::admits_tau_range(double t1, double t2) const {
    if (empty_) return false;
    double lo = tau_min();
    double hi = tau_max();
    // Strictness at the window ends only matters for zero-width overlaps;
    // handle those through admits_tau.
    if (t2 < lo || t1 > hi) return false;
    if (t2 == lo) return admits_tau(lo);
    if (t1 == hi) return admits_tau(hi);
    return true;
}

bool Zone::subset_of(const Zone& other) const {
    if (empty_) return true;
    if (other.empty_) return false;
    if (dim_ != other.dim_) throw std::invalid_argument("zone dimension mismatch");
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            if (tighter(other.at(i, j), at(i, j))) return false;
    return true;
}

bool Zone::operator==(const Zone& other) const {
    if (empty_ || other.empty_) return empty_ == other.empty_;
    return dim_ == other.dim_ && m_ == other.m_;
}

std::string Zone::str(const std::vector<std::string>& clock_names) const {
    if (empty_) return "false";
    auto name = [&](int i) -> std::string {
        if (i == 0) return "0";
        if (i == 1) return "tau";
        std::size_t c = static_cast<std::size_t>(i - 2);
        return c < clock_names.size() ? clock_names[c] : "c?" + std::to_string(i);
    };
    std::ostringstream out;
    bool first = true;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
            if (i == j || at(i, j).is_infinity()) continue;
            if (i == 0 && at(i, j) == kZeroBound) continue;
            if (!first) out << " & ";
            first = false;
            out << name(i) << " - " << name(j) << (at(i, j).strict ? " < " : " <= ")
                << at(i, j).value;
        }
    return first ? "true" : out.str();
}

// ── Reachability ────────────────────────────────────────────────────────────

ReachableZones explore_zones(const TimedAutomaton& ta, int e0, double tau_cap) {
    if (e0 < 0 || e0 >= static_cast<int>(ta.locations.size()))
        throw std::invalid_argument("explore_zones: bad initial location");
    const int n = static_cast<int>(ta.clocks.size());
    ReachableZones rz;
    rz.by_location.resize(ta.locations.size());

    Zone z0 = Zone::initial(n);
    z0.intersect(ta.locations[static_cast<std::size_t>(e0)].invariant);
    if (z0.empty()) return rz;  // v0 violates the invariant: no runs at all
    z0.up();
    z0.intersect(ta.locations[static_cast<std::size_t>(e0)].invariant);

    struct Node {
        int location;
        Zone zone;
    };
    std::deque<Node> queue;

    auto store = [&](int loc, Zone z) {
        if (z.empty() || z.tau_min() > tau_cap) return;
        auto& zones = rz.by_location[static_cast<std::size_t>(loc)];
        for (const Zone& existing : zones)
            if (z.subset_of(existing)) return;
        std::erase_if(zones, [&](const Zone& existing) { return existing.subset_of(z); });
        zones.push_back(z);
        queue.push_back({loc, std::move(z)});
    };

    store(e0, std::move(z0));
    std::size_t budget = 200000;
    while (!queue.empty()) {
        if (budget-- == 0) throw std::runtime_error("zone exploration budget exceeded");
        Node node = std::move(queue.front());
        queue.pop_front();
        for (int ei : ta.edges_from(node.location)) {
            const TaEdge& e = ta.edges[static_cast<std::size_t>(ei)];
            Zone z = node.zone;
            z.intersect(e.guard);
            if (z.empty()) continue;
            for (int c : e.resets) z.reset_clock(c);
            const ClockConstraint& inv = ta.locations[static_cast<std::size_t>(e.dst)].invariant;
            z.intersect(inv);
            if (z.empty()) continue;
            z.up();
            z.intersect(inv);
            store(e.dst, std::move(z));
        }
    }
    return rz;
}

std::set<int> locations_at(const ReachableZones& rz, double t) {
    std::set<int> out;
    for (std::size_t loc = 0; loc < rz.by_location.size(); ++loc)
        for (const Zone& z : rz.by_location[loc])
            if (z.admits_tau(t)) {
                out.insert(static_cast<int>(loc));
                break;
            }
    return out;
}

std::set<int> discrete_flow(const TimedAutomaton& ta, int e0, double t) {
    if (t < 0.0) throw std::invalid_argument("discrete_flow: negative time");
    return locations_at(explore_zones(ta, e0, t), t);
}

std::set<int> reachable_locations(const TimedAutomaton& ta, const std::vector<int>& from,
                                  double t1, double t2) {
    if (t1 > t2) throw std::invalid_argument("reachable_locations: t1 > t2");
    std::set<int> out;
    for (int e0 : from) {
        ReachableZones rz = explore_zones(ta, e0, t2);
        for (std::size_t loc = 0; loc < rz.by_location.size(); ++loc) {
            if (out.count(static_cast<int>(loc))) continue;
            for (const Zone& z : rz.by_location[loc])
                if (z.admits_tau_range(t1, t2)) {
                    out.insert(static_cast<int>(loc));
                    break;
                }
        }
    }
    return out;
}

}  // namespace levta
