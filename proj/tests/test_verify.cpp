#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "levta/abstraction.hpp"
#include "levta/verify.hpp"

#include <cmath>
#include <sstream>

using namespace levta;
using levta::testing::saddle_phi1;
using levta::testing::saddle_phi2;
using levta::testing::saddle_system;

namespace {

const double kLn2 = std::log(2.0);

struct VerifyFixture {
    DynSystem sys;
    GridSampling grid;
    Partition partition;
    std::vector<TransitTimeTable> tables;
    TimedAutomaton ta;

    VerifyFixture()
        : sys(make_sys()),
          grid(sys.domain, 201),
          partition(build_cells({saddle_phi1(sys), saddle_phi2(sys)}, grid)) {
        TransitOptions opts;
        opts.samples_per_level = 80;
        for (const PartitionFunction& pf : partition.families)
            tables.push_back(estimate_transit_times(sys, pf, grid, opts));
        ta = generate_ta(partition, tables, sys);
    }

    static DynSystem make_sys() {
        DynSystem sys = saddle_system();
        sys.init_box = Box{{3.999, 0.099}, {4.0, 0.101}};
        return sys;
    }
};

const VerifyFixture& fixture() {
    static VerifyFixture f;
    return f;
}

std::string dump(const Verdict& v) {
    std::ostringstream out;
    out.precision(17);
    out << verdict_kind_name(v.kind) << '|' << v.pass << '|' << v.applicable << '|'
        << v.tolerances << '|' << v.coverage;
    for (const Witness& w : v.witnesses) {
        out << "|w:";
        for (double c : w.point) out << c << ',';
        out << w.value << ',' << w.time << ',' << w.note;
    }
    return out.str();
}

}  // namespace

TEST_CASE("soundness holds for the generated saddle automaton") {
    const auto& f = fixture();
    SoundnessOptions opts;
    opts.n_traj = 50;
    opts.t_grid = linspace(0.0, 2.0, 50);
    Verdict v = check_soundness(f.sys, f.partition, f.ta, opts);
    INFO(v.coverage);
    CHECK(v.pass);
    CHECK(v.witnesses.empty());
}

TEST_CASE("tenfold guards break soundness with a witness trajectory") {
    const auto& f = fixture();
    TimedAutomaton mutated = f.ta;
    for (TaEdge& e : mutated.edges)
        for (ClockAtom& a : e.guard.atoms) a.bound *= 10.0;
    SoundnessOptions opts;
    opts.n_traj = 20;
    opts.t_grid = linspace(0.0, 2.0, 50);
    Verdict v = check_soundness(f.sys, f.partition, mutated, opts);
    CHECK_FALSE(v.pass);
    CHECK_FALSE(v.witnesses.empty());
}

TEST_CASE("soundness at t = 0 alone is trivial") {
    const auto& f = fixture();
    SoundnessOptions opts;
    opts.n_traj = 10;
    opts.t_grid = {0.0};
    Verdict v = check_soundness(f.sys, f.partition, f.ta, opts);
    CHECK(v.pass);
}

TEST_CASE("completeness passes on the saddle and is deterministic") {
    const auto& f = fixture();
    CompletenessOptions opts;
    opts.samples_per_level = 60;
    Verdict v = check_completeness(f.sys, f.partition.families, f.tables, f.grid, opts);
    INFO(v.coverage);
    CHECK(v.pass);
    // Critical pairs were excluded and reported.
    CHECK(v.coverage.find("excluded") != std::string::npos);

    Verdict again = check_completeness(f.sys, f.partition.families, f.tables, f.grid, opts);
    CHECK(dump(v) == dump(again));
}

TEST_CASE("a sound-only table fails completeness on the offending slice") {
    const auto& f = fixture();
    auto tables = f.tables;
    tables[0].entries[2].t_low = 0.5;  // widen [t_low, t_high] on slice [4,16]
    CompletenessOptions opts;
    opts.extra_level_pairs = 0;
    Verdict v = check_completeness(f.sys, f.partition.families, tables, f.grid, opts);
    CHECK_FALSE(v.pass);
    REQUIRE_FALSE(v.witnesses.empty());
    CHECK(v.witnesses[0].note.find("phi1") != std::string::npos);
}

TEST_CASE("a shifted parabola is rejected by the nonincreasing validation") {
    DynSystem sys = saddle_system();
    auto pf = PartitionFunction::make("shifted", parse_expr("(x1 - 1)^2", 2),
                                      {0.0, 1.0, 4.0}, sys);
    GridSampling grid(sys.domain, 101);
    Verdict v = validate_nonincreasing(pf, sys, grid);
    CHECK_FALSE(v.pass);
    REQUIRE_FALSE(v.witnesses.empty());
    // psi = -2 x1 (x1 - 1) is positive strictly between the roots.
    double x1 = v.witnesses[0].point[0];
    CHECK(x1 > 0.0);
    CHECK(x1 < 1.0);
}

TEST_CASE("level-set synchronization distinguishes phi1 from the circle") {
    const auto& f = fixture();
    const PartitionFunction& phi1 = f.partition.families[0];

    for (double a : {1.0, 4.0, 16.0}) {
        Verdict v = check_levelset_sync(f.sys, phi1, a, 200, f.grid);
        INFO("a = " << a << ": " << v.coverage);
        CHECK(v.applicable);
        CHECK(v.pass);
        // psi = -2 phi on the level set.
        for (const Witness& w : v.witnesses)
            CHECK(std::abs(w.value - (-2.0 * a)) < 1e-7);
    }

    auto circle = PartitionFunction::make("circle", parse_expr("x1^2 + x2^2", 2),
                                          {0.0, 1.0, 16.0}, f.sys);
    Verdict bad = check_levelset_sync(f.sys, circle, 1.0, 200, f.grid);
    CHECK(bad.applicable);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.witnesses.size() == 2);
    // Witnesses near (+-1, 0) with psi = -2 and (0, +-1) with psi = +2.
    const Witness& wmin = bad.witnesses[0];
    const Witness& wmax = bad.witnesses[1];
    CHECK(wmin.value == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(wmax.value == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(std::abs(std::abs(wmin.point[0]) - 1.0) < 0.05);
    CHECK(std::abs(wmin.point[1]) < 0.05);
    CHECK(std::abs(wmax.point[0]) < 0.05);
    CHECK(std::abs(std::abs(wmax.point[1]) - 1.0) < 0.05);

    // Level set outside the domain range.
    Verdict empty = check_levelset_sync(f.sys, phi1, 100.0, 50, f.grid);
    CHECK_FALSE(empty.applicable);
    CHECK(empty.coverage.find("empty") != std::string::npos);

    // Critical value: refused, not judged.
    Verdict crit = check_levelset_sync(f.sys, phi1, 0.0, 50, f.grid);
    CHECK_FALSE(crit.applicable);
    CHECK(crit.coverage.find("critical") != std::string::npos);
}

TEST_CASE("critical-point check (equilibria vs gradients)") {
    DynSystem sys = saddle_system();
    auto phi1 = saddle_phi1(sys);
    Verdict ok = check_critical_points(sys, phi1);
    CHECK(ok.pass);

    auto linear = PartitionFunction::make("lin", parse_expr("x1", 2), {-4.0, 4.0}, sys);
    Verdict bad = check_critical_points(sys, linear);
    CHECK_FALSE(bad.pass);
    REQUIRE_FALSE(bad.witnesses.empty());
    CHECK(norm2(bad.witnesses[0].point) < 1e-9);  // the equilibrium
    CHECK(bad.witnesses[0].value == doctest::Approx(1.0));  // |grad| = |(1,0)|

    DynSystem drift;
    drift.n = 2;
    drift.f = {parse_expr("1", 2), parse_expr("1", 2)};
    drift.domain = {{-2.0, -2.0}, {2.0, 2.0}};
    auto pf = PartitionFunction::make("p", parse_expr("x1", 2), {-2.0, 2.0}, drift);
    Verdict vac = check_critical_points(drift, pf);
    CHECK(vac.pass);  // vacuous: no equilibria
}

TEST_CASE("unstable-manifold containment: equality, proper, and failure") {
    const auto& f = fixture();
    auto eqs = find_equilibria(f.sys);
    REQUIRE(eqs.size() == 1);
    const Equilibrium& saddle = eqs[0];

    Verdict equal = check_unstable_manifold_containment(
        f.sys, f.partition.families[0], saddle, f.grid);
    CHECK(equal.applicable);
    CHECK(equal.pass);
    CHECK(equal.coverage.find("equality") != std::string::npos);

    auto bump = PartitionFunction::make("bump", levta::testing::bump_phi(),
                                        {0.0, 1.0, 4.0, 16.0}, f.sys);
    Verdict proper = check_unstable_manifold_containment(f.sys, bump, saddle, f.grid);
    CHECK(proper.applicable);
    CHECK(proper.pass);
    CHECK(proper.coverage.find("PROPER") != std::string::npos);
    // The plateau witness (0.3, 0): on the level set, far from the axis.
    CHECK(bump.phi.eval(Vec{0.3, 0.0}) == 0.0);
    bool far_witness = false;
    for (const Witness& w : proper.witnesses)
        if (!w.point.empty() && std::abs(w.point[0]) > 0.1 && std::abs(w.value) <= 1e-8)
            far_witness = true;
    CHECK(far_witness);

    auto circle = PartitionFunction::make("circle", parse_expr("x1^2 + x2^2", 2),
                                          {0.0, 16.0}, f.sys);
    Verdict fail = check_unstable_manifold_containment(f.sys, circle, saddle, f.grid);
    CHECK(fail.applicable);
    CHECK_FALSE(fail.pass);
    REQUIRE_FALSE(fail.witnesses.empty());
    CHECK(fail.witnesses[0].value > 1.0);  // phi far from phi(p) = 0 on the axis

    // Hypothesis not met: grad phi vanishes on the whole stable manifold.
    auto vertical = PartitionFunction::make("vert", parse_expr("x2^2", 2),
                                            {0.0, 16.0}, f.sys);
    Verdict na = check_unstable_manifold_containment(f.sys, vertical, saddle, f.grid);
    CHECK_FALSE(na.applicable);
    CHECK(na.coverage.find("hypothesis") != std::string::npos);

    DynSystem node;
    node.n = 2;
    node.f = {parse_expr("-x1", 2), parse_expr("-x2", 2)};
    node.domain = {{-2, -2}, {2, 2}};
    auto eq2 = find_equilibria(node);
    REQUIRE(eq2.size() == 1);
    CHECK_THROWS_AS(check_unstable_manifold_containment(node, f.partition.families[0],
                                                        eq2[0], f.grid),
                    std::invalid_argument);
}

TEST_CASE("positive invariance of sublevel sets") {
    const auto& f = fixture();
    Expr p1 = parse_expr("x1^2", 2);
    Verdict ok = check_positive_invariance(f.sys, p1, 1.0, 100, 3.0, f.grid);
    CHECK(ok.pass);

    Expr p2 = parse_expr("x2^2", 2);
    Verdict bad = check_positive_invariance(f.sys, p2, 1.0, 100, 3.0, f.grid);
    CHECK_FALSE(bad.pass);
    REQUIRE_FALSE(bad.witnesses.empty());
    CHECK(bad.witnesses[0].value > 1.0 + 1e-8);

    // Whole domain: trajectories clipped at the exit pass by convention.
    Verdict whole = check_positive_invariance(f.sys, p1, 16.0, 50, 3.0, f.grid);
    CHECK(whole.pass);
}

TEST_CASE("a sync failure forces a transit spread on the same level pair") {
    const auto& f = fixture();
    auto circle = PartitionFunction::make("circle", parse_expr("x1^2 + x2^2", 2),
                                          {0.0, 1.0, 16.0}, f.sys);
    Verdict sync = check_levelset_sync(f.sys, circle, 1.0, 200, f.grid);
    REQUIRE_FALSE(sync.pass);

    TransitOptions opts;
    opts.samples_per_level = 60;
    TransitEntry pair = estimate_pair_transit(f.sys, circle, f.grid, 1.0, 0.5, {}, opts);
    // Spread far beyond the completeness tolerance (or no finite t_high).
    bool fails = !std::isfinite(pair.t_high) ||
                 pair.spread() > std::max(1e-4, 1e-3 * pair.t_low);
    CHECK(fails);
}

TEST_CASE("fixed seeds reproduce byte-identical verdicts") {
    const auto& f = fixture();
    SoundnessOptions opts;
    opts.n_traj = 10;
    opts.t_grid = linspace(0.0, 1.0, 10);
    opts.seed = 7;
    Verdict a = check_soundness(f.sys, f.partition, f.ta, opts);
    Verdict b = check_soundness(f.sys, f.partition, f.ta, opts);
    CHECK(dump(a) == dump(b));
}
