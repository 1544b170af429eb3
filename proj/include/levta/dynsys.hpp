// ============================================================================
// levta/dynsys.hpp — continuous dynamical system: RK4 flow, level crossings,
// equilibria, stable/unstable manifold approximation
// ============================================================================

#ifndef LEVTA_DYNSYS_HPP
#define LEVTA_DYNSYS_HPP

#include "levta/expr.hpp"

#include <optional>
#include <vector>

namespace levta {

using Vec = std::vector<double>;

/// Axis-aligned box [lo_i, hi_i]^n.
struct Box {
    Vec lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x) const;
    /// True if this box is contained in other.
    bool inside(const Box& other) const;
};

/// Dynamical system: dimension, vector field dx/dt = f(x), state-space box,
/// optional initial box.
struct DynSystem {
    int n = 0;
    std::vector<Expr> f;
    Box domain;
    std::optional<Box> init_box;

    /// Validates dimensions and containment; throws std::invalid_argument.
    void validate() const;
    Vec field_at(const Vec& x) const;
};

/// Sampled trajectory. states[0] is the initial state, times[0] = 0.
/// truncated is set when integration stopped because the state left the
/// domain box; all recorded states are inside it.
struct FlowSample {
    std::vector<double> times;
    std::vector<Vec> states;
    bool truncated = false;
};

enum class EquilibriumKind { Stable, Unstable, Saddle, Degenerate };

struct Equilibrium {
    Vec point;
    std::vector<double> jacobian;  // row-major n x n
    EquilibriumKind kind = EquilibriumKind::Degenerate;
};

enum class ManifoldBranch { Stable, Unstable };

/// Polyline approximation of one branch of W^s(p) or W^u(p).
struct ManifoldApprox {
    Vec equilibrium;
    ManifoldBranch branch = ManifoldBranch::Unstable;
    std::vector<Vec> points;
};

struct LevelCrossing {
    double time = 0.0;
    Vec state;
};

// ── Flow ────────────────────────────────────────────────────────────────────

/// Classical fixed-step RK4 from x0 to t_end, sampling at multiples of h
/// plus a final partial step. Halts early (truncated = true) if a step
/// leaves the domain box. Throws EvalError on expression domain violations
/// and std::runtime_error on non-finite states.
FlowSample flow(const DynSystem& sys, const Vec& x0, double t_end, double h = 1e-3);

/// Integrate and report states at the given increasing times (which need
/// not be multiples of h). times must start at >= 0.
FlowSample flow_at_times(const DynSystem& sys, const Vec& x0,
                         const std::vector<double>& times, double h = 1e-3);

/// First time t <= t_max with phi(x(t)) = target, refined by bisection over
/// one RK4 step to |phi - target| <= 1e-8. Requires phi(x0) != target.
/// Empty result if no crossing by t_max or the trajectory leaves the domain;
/// domain_exited (when given) distinguishes the two.
std::optional<LevelCrossing> flow_until_level(const DynSystem& sys, const Vec& x0,
                                              const Expr& phi, double target,
                                              double t_max = 50.0, double h = 1e-3,
                                              bool* domain_exited = nullptr);

// ── Equilibria and manifolds ────────────────────────────────────────────────

/// Newton iteration from a uniform seed grid (seeds_per_axis^n seeds).
/// Converged points are deduplicated within 1e-6 and classified by the
/// real parts of the Jacobian eigenvalues (supported for n <= 3).
std::vector<Equilibrium> find_equilibria(const DynSystem& sys, int seeds_per_axis = 9);

/// Eigenvector shooting from a planar saddle: seeds at p +- delta * v and
/// integrates f (unstable) or -f (stable) until domain exit or t_horizon.
/// Returns one polyline per eigen-direction sign. Requires n = 2.
std::vector<ManifoldApprox> approximate_manifold(const DynSystem& sys,
                                                 const Equilibrium& eq,
                                                 ManifoldBranch branch,
                                                 double delta = 1e-4,
                                                 double t_horizon = 50.0,
                                                 double h = 1e-3);

// ── Small dense linear algebra (n <= 3 scale) ───────────────────────────────

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Empty result if the pivot falls below 1e-14.
std::optional<Vec> solve_linear(std::vector<double> a, Vec b, int n);

/// Real parts of eigenvalues for an n x n matrix, n in {1, 2, 3}.
std::vector<double> eigenvalue_real_parts(const std::vector<double>& m, int n);

double norm2(const Vec& v);

}  // namespace levta

#endif  // LEVTA_DYNSYS_HPP
