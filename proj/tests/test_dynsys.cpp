#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "levta/dynsys.hpp"

#include <cmath>

using namespace levta;
using levta::testing::saddle_system;

namespace {

// Closed form of the saddle flow: x1(t) = a e^-t, x2(t) = b e^t.
Vec saddle_exact(const Vec& x0, double t) {
    return {x0[0] * std::exp(-t), x0[1] * std::exp(t)};
}

}  // namespace

TEST_CASE("rk4 flow matches the saddle closed form") {
    DynSystem sys = saddle_system();
    const double ln2 = std::log(2.0);

    FlowSample fs = flow(sys, {4.0, 0.1}, ln2);
    CHECK(fs.times.front() == 0.0);
    CHECK(fs.times.back() == doctest::Approx(ln2).epsilon(1e-15));
    CHECK(std::abs(fs.states.back()[0] - 2.0) < 1e-8);
    CHECK(std::abs(fs.states.back()[1] - 0.2) < 1e-8);

    // Whole-trajectory agreement for t <= 5 at h = 1e-3.
    FlowSample longfs = flow(sys, {4.0, 0.01}, 5.0);
    CHECK_FALSE(longfs.truncated);
    double worst = 0.0;
    for (std::size_t i = 0; i < longfs.times.size(); ++i) {
        Vec exact = saddle_exact({4.0, 0.01}, longfs.times[i]);
        worst = std::max(worst, std::abs(longfs.states[i][0] - exact[0]));
        worst = std::max(worst, std::abs(longfs.states[i][1] - exact[1]));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("flow edge cases") {
    DynSystem sys = saddle_system();

    FlowSample still = flow(sys, {1.0, 1.0}, 0.0);
    CHECK(still.times.size() == 1);
    CHECK(still.states[0] == Vec{1.0, 1.0});

    FlowSample origin = flow(sys, {0.0, 0.0}, 3.0);
    for (const Vec& x : origin.states) {
        CHECK(std::abs(x[0]) < 1e-12);
        CHECK(std::abs(x[1]) < 1e-12);
    }

    // Domain exit truncates; all recorded states stay inside.
    FlowSample exits = flow(sys, {0.1, 3.0}, 5.0);
    CHECK(exits.truncated);
    for (const Vec& x : exits.states) CHECK(sys.domain.contains(x));

    CHECK_THROWS_AS(flow(sys, {1.0, 1.0}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("flow is deterministic") {
    DynSystem sys = saddle_system();
    FlowSample a = flow(sys, {1.5, 0.25}, 2.0);
    FlowSample b = flow(sys, {1.5, 0.25}, 2.0);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(a.states[i] == b.states[i]);
        CHECK(a.times[i] == b.times[i]);
    }
}

TEST_CASE("flow_at_times lands exactly on probe times") {
    DynSystem sys = saddle_system();
    std::vector<double> times{0.0, 0.1, 0.7854, 1.3};
    FlowSample fs = flow_at_times(sys, {2.0, 0.05}, times);
    REQUIRE(fs.times == times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        Vec exact = saddle_exact({2.0, 0.05}, times[i]);
        CHECK(std::abs(fs.states[i][0] - exact[0]) < 1e-8);
        CHECK(std::abs(fs.states[i][1] - exact[1]) < 1e-8);
    }
}

TEST_CASE("level crossings are refined to the stated tolerance") {
    DynSystem sys = saddle_system();
    Expr phi = parse_expr("x1^2", 2);
    const double ln2 = std::log(2.0);

    auto hit = flow_until_level(sys, {4.0, 0.1}, phi, 4.0);
    REQUIRE(hit.has_value());
    CHECK(std::abs(hit->time - ln2) < 1e-6);
    CHECK(std::abs(phi.eval(hit->state) - 4.0) <= 1e-8);

    // The x2-axis is invariant: phi stays 0, never reaching 1.
    CHECK_FALSE(flow_until_level(sys, {0.0, 0.1}, phi, 1.0).has_value());

    // Asymptotic approach: the closed form never reaches 0.
    CHECK_FALSE(flow_until_level(sys, {1.0, 0.1}, phi, 0.0, 50.0).has_value());

    CHECK_THROWS_AS(flow_until_level(sys, {2.0, 0.1}, phi, 4.0), std::invalid_argument);

    // Crossing time is monotone in the target along a strictly decreasing phi.
    double previous = 0.0;
    for (double target : {8.0, 6.0, 4.0, 2.0}) {
        auto c = flow_until_level(sys, {4.0, 1e-3}, phi, target);
        REQUIRE(c.has_value());
        CHECK(c->time > previous);
        previous = c->time;
        CHECK(std::abs(c->time - 0.5 * std::log(16.0 / target)) < 1e-6);
    }
}

TEST_CASE("equilibria are found, deduplicated, and classified") {
    DynSystem sys = saddle_system();
    auto eqs = find_equilibria(sys);
    REQUIRE(eqs.size() == 1);
    CHECK(norm2(eqs[0].point) < 1e-9);
    CHECK(eqs[0].kind == EquilibriumKind::Saddle);
    CHECK(norm2(sys.field_at(eqs[0].point)) < 1e-10);
    CHECK(eqs[0].jacobian == std::vector<double>{-1.0, 0.0, 0.0, 1.0});

    DynSystem stable;
    stable.n = 1;
    stable.f = {parse_expr("-x1", 1)};
    stable.domain = {{-2.0}, {2.0}};
    auto seqs = find_equilibria(stable);
    REQUIRE(seqs.size() == 1);
    CHECK(std::abs(seqs[0].point[0]) < 1e-10);
    CHECK(seqs[0].kind == EquilibriumKind::Stable);

    DynSystem drift;
    drift.n = 1;
    drift.f = {parse_expr("1", 1)};
    drift.domain = {{-2.0}, {2.0}};
    CHECK(find_equilibria(drift).empty());

    CHECK_THROWS_AS(find_equilibria(sys, 1), std::invalid_argument);
}

TEST_CASE("eigenvalue real parts for small matrices") {
    CHECK(eigenvalue_real_parts({-3.0}, 1) == std::vector<double>{-3.0});
    auto two = eigenvalue_real_parts({-1.0, 0.0, 0.0, 1.0}, 2);
    CHECK(two[0] == doctest::Approx(-1.0));
    CHECK(two[1] == doctest::Approx(1.0));
    // Rotation: complex pair with zero real part.
    auto rot = eigenvalue_real_parts({0.0, -1.0, 1.0, 0.0}, 2);
    CHECK(rot[0] == doctest::Approx(0.0));
    // diag(-1, 2, 5) in a full 3x3.
    auto three = eigenvalue_real_parts({-1.0, 0, 0, 0, 2.0, 0, 0, 0, 5.0}, 3);
    std::sort(three.begin(), three.end());
    CHECK(three[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(three[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(three[2] == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("manifold approximation by eigenvector shooting") {
    DynSystem sys = saddle_system();
    auto eqs = find_equilibria(sys);
    REQUIRE(eqs.size() == 1);

    auto unstable = approximate_manifold(sys, eqs[0], ManifoldBranch::Unstable);
    REQUIRE(unstable.size() == 2);
    for (const ManifoldApprox& branch : unstable) {
        REQUIRE_FALSE(branch.points.empty());
        double worst = 0.0;
        for (const Vec& x : branch.points) {
            worst = std::max(worst, std::abs(x[0]));
            CHECK(sys.domain.contains(x));
        }
        CHECK(worst < 1e-6);  // W^u is the x2-axis
        // The polyline actually leaves the seed neighborhood.
        CHECK(std::abs(branch.points.back()[1]) > 1.0);
    }

    auto stable = approximate_manifold(sys, eqs[0], ManifoldBranch::Stable);
    REQUIRE(stable.size() == 2);
    for (const ManifoldApprox& branch : stable) {
        double worst = 0.0;
        for (const Vec& x : branch.points) worst = std::max(worst, std::abs(x[1]));
        CHECK(worst < 1e-6);  // W^s is the x1-axis
    }

    CHECK_THROWS_AS(approximate_manifold(sys, eqs[0], ManifoldBranch::Unstable, 0.0),
                    std::invalid_argument);

    DynSystem node;
    node.n = 2;
    node.f = {parse_expr("-x1", 2), parse_expr("-x2", 2)};
    node.domain = {{-2.0, -2.0}, {2.0, 2.0}};
    auto node_eqs = find_equilibria(node);
    REQUIRE(node_eqs.size() == 1);
    CHECK(node_eqs[0].kind == EquilibriumKind::Stable);
    CHECK_THROWS_AS(approximate_manifold(node, node_eqs[0], ManifoldBranch::Unstable),
                    std::invalid_argument);
}

TEST_CASE("system validation catches structural mistakes") {
    DynSystem sys = saddle_system();
    sys.init_box = Box{{-5.0, 0.0}, {0.0, 1.0}};  // sticks out of the domain
    CHECK_THROWS_AS(sys.validate(), std::invalid_argument);

    DynSystem wrong;
    wrong.n = 2;
    wrong.f = {parse_expr("-x1", 2)};
    wrong.domain = {{-1.0, -1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(wrong.validate(), std::invalid_argument);
}
