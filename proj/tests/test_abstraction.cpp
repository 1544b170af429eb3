#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "levta/abstraction.hpp"
#include "levta/ta_json.hpp"
#include "levta/zone.hpp"

#include <cmath>
#include <set>

using namespace levta;
using levta::testing::saddle_phi1;
using levta::testing::saddle_phi2;
using levta::testing::saddle_system;

namespace {

const double kLn2 = std::log(2.0);

struct SaddleFixture {
    DynSystem sys;
    GridSampling grid;
    Partition partition;
    std::vector<TransitTimeTable> tables;

    explicit SaddleFixture(int samples = 80)
        : sys(saddle_system()),
          grid(sys.domain, 201),
          partition(build_cells({saddle_phi1(sys), saddle_phi2(sys)}, grid)) {
        TransitOptions opts;
        opts.samples_per_level = samples;
        for (const PartitionFunction& pf : partition.families)
            tables.push_back(estimate_transit_times(sys, pf, grid, opts));
    }
};

const SaddleFixture& fixture() {
    static SaddleFixture f;
    return f;
}

}  // namespace

TEST_CASE("transit times reproduce the closed-form log ratios") {
    const auto& f = fixture();
    const TransitTimeTable& t1 = f.tables[0];
    REQUIRE(t1.entries.size() == 3);

    // Slice [4,16]: entry x1 = +-4, target x1 = +-2, t = ln 2.
    CHECK(std::abs(t1.entries[2].t_low - kLn2) < 1e-6);
    CHECK(std::abs(t1.entries[2].t_high - kLn2) < 1e-6);
    CHECK(t1.entries[2].spread() < 1e-6);
    CHECK_FALSE(t1.entries[2].critical);

    // Slice [1,4] likewise.
    CHECK(std::abs(t1.entries[1].t_low - kLn2) < 1e-6);
    CHECK(std::abs(t1.entries[1].t_high - kLn2) < 1e-6);

    // Slice [0,1]: the target level 0 is critical and never reached from
    // inside; samples either leave the box or stall on the stable axis.
    CHECK(t1.entries[0].critical);
    CHECK(std::isinf(t1.entries[0].t_high));
    CHECK(t1.entries[0].crossed == 0);
    CHECK(t1.entries[0].stalled > 0);

    const TransitTimeTable& t2 = f.tables[1];
    CHECK(std::abs(t2.entries[0].t_low - kLn2) < 1e-6);   // [-16,-4]
    CHECK(std::abs(t2.entries[1].t_low - kLn2) < 1e-6);   // [-4,-1]
    CHECK(std::abs(t2.entries[1].t_high - kLn2) < 1e-6);
    CHECK(t2.entries[2].critical);                        // [-1,0]
    CHECK(std::isinf(t2.entries[2].t_high));
}

TEST_CASE("intermediate regular pairs share the same transit law") {
    const auto& f = fixture();
    auto critical = critical_values_on_grid(f.partition.families[0], f.grid);
    TransitOptions opts;
    opts.samples_per_level = 60;
    TransitEntry e =
        estimate_pair_transit(f.sys, f.partition.families[0], f.grid, 8.0, 2.0, critical, opts);
    CHECK_FALSE(e.critical);
    CHECK(std::abs(e.t_low - 0.5 * std::log(8.0 / 2.0)) < 1e-6);
    CHECK(e.spread() < 1e-6);

    // Pairs touching the critical value 0 are flagged.
    TransitEntry c =
        estimate_pair_transit(f.sys, f.partition.families[0], f.grid, 0.5, 0.0, critical, opts);
    CHECK(c.critical);

    // Infinite level: unusable entry, sound fallback.
    TransitEntry u = estimate_pair_transit(
        f.sys, f.partition.families[0], f.grid,
        std::numeric_limits<double>::infinity(), 4.0, critical, opts);
    CHECK(u.unbounded);
    CHECK(u.t_low == 0.0);
    CHECK(std::isinf(u.t_high));

    // Level outside the domain range: empty level set.
    TransitEntry m =
        estimate_pair_transit(f.sys, f.partition.families[0], f.grid, 60.0, 4.0, critical, opts);
    CHECK(m.empty_level);
}

TEST_CASE("generated automaton realizes the construction") {
    const auto& f = fixture();
    TimedAutomaton ta = generate_ta(f.partition, f.tables, f.sys);

    CHECK(ta.locations.size() == 25);
    CHECK(ta.clocks == std::vector<std::string>{"c1", "c2"});
    CHECK(ta.symbols == std::vector<std::string>{"s1", "s2"});
    CHECK(ta.initial.size() == 25);  // no init box: every cell is initial
    CHECK(ta.edges.size() == f.partition.adjacency.size());

    // Invariant constants are the table values, bit for bit.
    for (const TaLocation& loc : ta.locations) {
        std::set<int> clocks_present;
        for (const ClockAtom& a : loc.invariant.atoms) {
            clocks_present.insert(a.clock);
            double expect =
                f.tables[static_cast<std::size_t>(a.clock)]
                    .entries[static_cast<std::size_t>(loc.g[static_cast<std::size_t>(a.clock)] - 1)]
                    .t_high;
            CHECK(a.bound == expect);
            CHECK(a.rel == Rel::Le);
        }
        // Infinite ceilings are omitted conjuncts.
        for (int i = 0; i < 2; ++i) {
            const TransitEntry& e =
                f.tables[static_cast<std::size_t>(i)]
                    .entries[static_cast<std::size_t>(loc.g[static_cast<std::size_t>(i)] - 1)];
            CHECK(clocks_present.count(i) == (std::isfinite(e.t_high) ? 1u : 0u));
        }
    }

    // Cells with g = (2,.) carry the conjunct c1 <= ln 2.
    bool found_g2 = false;
    for (const TaLocation& loc : ta.locations) {
        if (loc.g[0] != 2) continue;
        found_g2 = true;
        bool has_c1 = false;
        for (const ClockAtom& a : loc.invariant.atoms)
            if (a.clock == 0) {
                has_c1 = true;
                CHECK(std::abs(a.bound - kLn2) < 1e-6);
            }
        CHECK(has_c1);
    }
    CHECK(found_g2);

    // Edge g=(2,2) -> (1,2): guard c1 >= ln 2, symbol s1, reset {c1}.
    bool found_edge = false;
    for (const TaEdge& e : ta.edges) {
        const TaLocation& src = ta.locations[static_cast<std::size_t>(e.src)];
        const TaLocation& dst = ta.locations[static_cast<std::size_t>(e.dst)];
        if (src.g != std::vector<int>{2, 2} || dst.g != std::vector<int>{1, 2}) continue;
        found_edge = true;
        CHECK(e.symbol == 0);
        CHECK(e.resets == std::vector<int>{0});
        REQUIRE(e.guard.atoms.size() == 1);
        CHECK(e.guard.atoms[0].clock == 0);
        CHECK(e.guard.atoms[0].rel == Rel::Ge);
        CHECK(e.guard.atoms[0].bound ==
              f.tables[0].entries[1].t_low);  // bit-identical table value
        CHECK(std::abs(e.guard.atoms[0].bound - kLn2) < 1e-6);
    }
    CHECK(found_edge);

    // Every transition decreases the g sum by exactly one: a DAG.
    for (const TaEdge& e : ta.edges) {
        int sum_src = 0, sum_dst = 0;
        for (int g : ta.locations[static_cast<std::size_t>(e.src)].g) sum_src += g;
        for (int g : ta.locations[static_cast<std::size_t>(e.dst)].g) sum_dst += g;
        CHECK(sum_src - sum_dst == 1);
    }

    // The equilibrium cell g=(1,3) is absorbing: no invariant ceiling.
    bool found_absorbing = false;
    for (const TaLocation& loc : ta.locations)
        if (loc.g == std::vector<int>{1, 3}) {
            found_absorbing = true;
            CHECK(loc.invariant.atoms.empty());
        }
    CHECK(found_absorbing);
}

TEST_CASE("discrete flow over the generated automaton follows the g order") {
    const auto& f = fixture();
    TimedAutomaton ta = generate_ta(f.partition, f.tables, f.sys);
    auto loc_with_g = [&](std::vector<int> g) {
        for (std::size_t i = 0; i < ta.locations.size(); ++i)
            if (ta.locations[i].g == g) return static_cast<int>(i);
        return -1;
    };

    // The center cell has no invariant ceiling: it stays reachable at any
    // time, and its flow only ever moves down in g2 (free sigma-2 edges).
    int center = loc_with_g({1, 3});
    auto from_center = discrete_flow(ta, center, 5.0);
    CHECK(from_center.count(center) == 1);
    for (int loc : from_center) CHECK(ta.locations[static_cast<std::size_t>(loc)].g[0] == 1);

    // From an outermost corner cell, both clocks reach their ceilings at
    // ln 2 and no sigma-2 edge exists below g2 = 1: past that instant the
    // automaton has no states at all (the matching trajectories have left
    // the domain box).
    int corner = loc_with_g({3, 1});
    REQUIRE(corner >= 0);
    CHECK(discrete_flow(ta, corner, 0.5).count(corner) == 1);
    CHECK(discrete_flow(ta, corner, kLn2 + 0.01).empty());

    // From g = (3,3): one sigma-1 switch by ln 2 + 0.01; the start cell is
    // gone and no location with the full g sum remains.
    int start = loc_with_g({3, 3});
    auto at = discrete_flow(ta, start, kLn2 + 0.01);
    CHECK(at.count(loc_with_g({2, 3})) == 1);
    CHECK(at.count(start) == 0);
    for (int loc : at) {
        int sum = 0;
        for (int g : ta.locations[static_cast<std::size_t>(loc)].g) sum += g;
        CHECK(sum < 6);
    }

    // Reachability never increases any g component.
    for (int loc : reachable_locations(ta, {start}, 0.0, 10.0)) {
        const auto& g = ta.locations[static_cast<std::size_t>(loc)].g;
        CHECK(g[0] <= 3);
        CHECK(g[1] <= 3);
    }
    // With every cell initial, the whole location set is reachable.
    CHECK(reachable_locations(ta, ta.initial, 0.0, 10.0).size() == ta.locations.size());
}

TEST_CASE("E0 follows the sampled init box through alpha") {
    const auto& f = fixture();
    DynSystem sys = f.sys;
    sys.init_box = Box{{3.999, 0.099}, {4.0, 0.101}};
    TimedAutomaton ta = generate_ta(f.partition, f.tables, sys);
    REQUIRE(ta.initial.size() == 1);
    const TaLocation& e0 = ta.locations[static_cast<std::size_t>(ta.initial[0])];
    CHECK(e0.g == std::vector<int>{3, 3});
    // It is the right-hand component: every cell point has x1 >= 2.
    const Cell& cell = f.partition.cells[static_cast<std::size_t>(ta.initial[0])];
    for (std::uint32_t p : cell.points) CHECK(f.partition.grid.point(p)[0] >= 2.0);
}

TEST_CASE("regeneration is deterministic and table gaps are rejected") {
    const auto& f = fixture();
    TimedAutomaton a = generate_ta(f.partition, f.tables, f.sys);
    TimedAutomaton b = generate_ta(f.partition, f.tables, f.sys);
    CHECK(ta_to_json(a) == ta_to_json(b));

    auto broken = f.tables;
    broken[0].entries.pop_back();
    CHECK_THROWS_AS(generate_ta(f.partition, broken, f.sys), std::invalid_argument);
    CHECK_THROWS_AS(generate_ta(f.partition, {f.tables[0]}, f.sys), std::invalid_argument);
}
