// ============================================================================
// levta/verify.hpp — numerical verdicts: soundness, completeness, level-set
// synchronization, critical points, manifold containment, invariance
// ============================================================================

#ifndef LEVTA_VERIFY_HPP
#define LEVTA_VERIFY_HPP

#include "levta/abstraction.hpp"
#include "levta/partition.hpp"
#include "levta/verdict.hpp"
#include "levta/zone.hpp"

#include <cstdint>
#include <vector>

namespace levta {

struct SoundnessOptions {
    int n_traj = 200;
    std::vector<double> t_grid;  // strictly increasing probe times
    std::uint64_t seed = 42;
    double h = 1e-3;
    int max_witnesses = 10;
};

/// Empirical soundness: for sampled x0 in the init box and every probe
/// time, every cell of alpha(flow(t, x0)) lies in the union of the
/// discrete flow from alpha(x0). Trajectory tails outside the domain are
/// skipped and reported.
Verdict check_soundness(const DynSystem& sys, const Partition& partition,
                        const TimedAutomaton& ta, const SoundnessOptions& opts);

struct CompletenessOptions {
    int extra_level_pairs = 5;  // random intermediate pairs per family
    double tol_abs = 1e-4;
    double tol_rel = 1e-3;
    int samples_per_level = 200;
    double t_max = 50.0;
    double h = 1e-3;
    std::uint64_t seed = 42;
};

/// Equal-transit-time condition: every regular slice pair (declared levels
/// plus sampled intermediate pairs) has finite t_high and spread within
/// max(tol_abs, tol_rel * t_low). Critical pairs are excluded and
/// reported.
Verdict check_completeness(const DynSystem& sys, const std::vector<PartitionFunction>& families,
                           const std::vector<TransitTimeTable>& tables,
                           const GridSampling& grid, const CompletenessOptions& opts);

/// Level-set synchronization: psi is constant on phi^-1(a). Not applicable
/// when a is a critical value or the level set misses the domain.
Verdict check_levelset_sync(const DynSystem& sys, const PartitionFunction& pf, double a,
                            int m_samples, const GridSampling& grid);

/// Every equilibrium of the system is a critical point of phi.
Verdict check_critical_points(const DynSystem& sys, const PartitionFunction& pf,
                              int seeds_per_axis = 9);

struct ManifoldCheckOptions {
    double delta = 1e-4;
    double t_horizon = 50.0;
    double h = 1e-3;
    double value_tol = 1e-6;          // |phi - phi(p)| along the manifold
    double proper_value_tol = 1e-8;   // level-set tolerance for the proper search
    double proper_radius = 0.1;       // distance from the polyline
};

/// The unstable manifold of a planar saddle lies in phi^-1(phi(p));
/// additionally reports whether the containment is proper. Not applicable
/// when no stable-manifold sample is a regular point of phi.
Verdict check_unstable_manifold_containment(const DynSystem& sys, const PartitionFunction& pf,
                                            const Equilibrium& eq, const GridSampling& grid,
                                            const ManifoldCheckOptions& opts = {});

/// Boundary samples of {predicate <= threshold} stay in the closed
/// sublevel set for t_probe time units (trajectories clipped at domain
/// exit pass by convention).
Verdict check_positive_invariance(const DynSystem& sys, const Expr& predicate, double threshold,
                                  int n_boundary_samples, double t_probe,
                                  const GridSampling& grid, double h = 1e-3);

/// Evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace levta

#endif  // LEVTA_VERIFY_HPP
