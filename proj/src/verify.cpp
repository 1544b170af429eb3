#include "levta/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace levta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string point_str(const Vec& x) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
    out << ')';
    return out.str();
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    return out;
}

// ── Soundness ───────────────────────────────────────────────────────────────

Verdict check_soundness(const DynSystem& sys, const Partition& partition,
                        const TimedAutomaton& ta, const SoundnessOptions& opts) {
    Verdict v;
    v.kind = VerdictKind::Sound;
    v.tolerances = "membership via multivalued alpha (grid boundary tolerance)";

    std::vector<double> t_grid = opts.t_grid;
    if (t_grid.empty()) t_grid = linspace(0.0, 2.0, 50);
    const double t_cap = t_grid.back();

    const Box& box = sys.init_box ? *sys.init_box : sys.domain;
    std::mt19937_64 rng(opts.seed);

    // Discrete flow per initial cell, evaluated lazily at the probe times.
    std::map<int, std::vector<std::set<int>>> flow_cache;
    auto locations_at_times = [&](int cell) -> const std::vector<std::set<int>>& {
        auto it = flow_cache.find(cell);
        if (it == flow_cache.end()) {
            ReachableZones rz = explore_zones(ta, cell, t_cap);
            std::vector<std::set<int>> per_time;
            per_time.reserve(t_grid.size());
            for (double t : t_grid) per_time.push_back(locations_at(rz, t));
            it = flow_cache.emplace(cell, std::move(per_time)).first;
        }
        return it->second;
    };

    int skipped = 0, checked = 0, violations = 0;
    for (int traj = 0; traj < opts.n_traj; ++traj) {
        Vec x0(static_cast<std::size_t>(sys.n));
        for (int i = 0; i < sys.n; ++i) {
            double lo = box.lo[static_cast<std::size_t>(i)];
            double hi = box.hi[static_cast<std::size_t>(i)];
            if (hi > lo) {
                std::uniform_real_distribution<double> dist(lo, hi);
                x0[static_cast<std::size_t>(i)] = dist(rng);
            } else {
                x0[static_cast<std::size_t>(i)] = lo;
            }
        }
        std::vector<int> alpha0 = partition.alpha(x0);
        FlowSample fs = flow_at_times(sys, x0, t_grid, opts.h);
        skipped += static_cast<int>(t_grid.size() - fs.times.size());
        for (std::size_t ti = 0; ti < fs.times.size(); ++ti) {
            ++checked;
            std::set<int> reachable;
            for (int cell : alpha0) {
                const auto& per_time = locations_at_times(cell);
                const auto& s = per_time[ti];
                reachable.insert(s.begin(), s.end());
            }
            for (int cell : partition.alpha(fs.states[ti])) {
                if (reachable.count(cell)) continue;
                ++violations;
                if (static_cast<int>(v.witnesses.size()) < opts.max_witnesses) {
                    Witness w;
                    w.point = x0;
                    w.time = fs.times[ti];
                    w.note = "cell " + partition.cells[static_cast<std::size_t>(cell)].id() +
                             " reached by the flow but not by the automaton";
                    v.witnesses.push_back(std::move(w));
                }
            }
        }
    }
    v.pass = violations == 0;
    std::ostringstream cov;
    cov << opts.n_traj << " trajectories x " << t_grid.size() << " probe times in [" << t_grid.front()
        << ", " << t_cap << "]; " << checked << " memberships checked, " << violations
        << " violations, " << skipped << " skipped after domain exit";
    v.coverage = cov.str();
    return v;
}

// ── Completeness ────────────────────────────────────────────────────────────

Verdict check_completeness(const DynSystem& sys, const std::vector<PartitionFunction>& families,
                           const std::vector<TransitTimeTable>& tables,
                           const GridSampling& grid, const CompletenessOptions& opts) {
    Verdict v;
    v.kind = VerdictKind::Complete;
    {
        std::ostringstream tol;
        tol << "spread <= max(" << opts.tol_abs << ", " << opts.tol_rel << " * t_low)";
        v.tolerances = tol.str();
    }
    v.pass = true;
    int judged = 0, excluded = 0;
    std::ostringstream notes;

    TransitOptions topts;
    topts.samples_per_level = opts.samples_per_level;
    topts.t_max = opts.t_max;
    topts.h = opts.h;

    auto judge = [&](const std::string& family, const std::string& pair_desc,
                     const TransitEntry& e) {
        if (e.unbounded || e.empty_level || e.critical) {
            ++excluded;
            notes << " [" << family << " " << pair_desc << ": "
                  << (e.critical ? "critical value" : e.empty_level ? "empty level set"
                                                                    : "infinite level")
                  << ", excluded]";
            return;
        }
        ++judged;
        double tol = std::max(opts.tol_abs, opts.tol_rel * e.t_low);
        bool ok = std::isfinite(e.t_high) && e.spread() <= tol;
        if (!ok) {
            v.pass = false;
            Witness w;
            w.point = e.slowest_point;
            w.value = e.spread();
            w.time = e.t_low;
            w.note = family + " " + pair_desc +
                     (std::isfinite(e.t_high)
                          ? ": transit spread " + std::to_string(e.spread()) + " above tolerance"
                          : ": some entry samples never reach the target level");
            v.witnesses.push_back(std::move(w));
        }
    };

    std::mt19937_64 rng(opts.seed);
    for (std::size_t i = 0; i < families.size(); ++i) {
        const PartitionFunction& pf = families[i];
        const TransitTimeTable& table = tables[i];
        auto critical_values = critical_values_on_grid(pf, grid);
        for (std::size_t s = 0; s < table.entries.size(); ++s) {
            std::ostringstream desc;
            desc << "slice [" << pf.levels[s] << ", " << pf.levels[s + 1] << "]";
            judge(pf.name, desc.str(), table.entries[s]);
        }
        // Random intermediate regular-value pairs inside non-critical slices.
        std::vector<std::size_t> usable;
        for (std::size_t s = 0; s < table.entries.size(); ++s) {
            const TransitEntry& e = table.entries[s];
            if (!e.unbounded && !e.empty_level && !e.critical) usable.push_back(s);
        }
        if (usable.empty()) continue;
        for (int extra = 0; extra < opts.extra_level_pairs; ++extra) {
            std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
            std::size_t s = usable[pick(rng)];
            double lo = pf.levels[s], hi = pf.levels[s + 1];
            double w = hi - lo;
            std::uniform_real_distribution<double> dist(lo + 0.1 * w, hi - 0.1 * w);
            double u1 = dist(rng), u2 = dist(rng);
            if (std::abs(u1 - u2) < 0.05 * w) u2 = u1 + (u2 >= u1 ? 0.05 : -0.05) * w;
            double pair_lo = std::min(u1, u2), pair_hi = std::max(u1, u2);
            TransitEntry e =
                estimate_pair_transit(sys, pf, grid, pair_hi, pair_lo, critical_values, topts);
            std::ostringstream desc;
            desc << "sampled pair [" << pair_lo << ", " << pair_hi << "]";
            judge(pf.name, desc.str(), e);
        }
    }

    std::ostringstream cov;
    cov << judged << " regular level pairs judged, " << excluded << " excluded ("
        << opts.extra_level_pairs << " sampled intermediate pairs per family)" << notes.str();
    v.coverage = cov.str();
    return v;
}

// ── Level-set synchronization of the Lie derivative ─────────────────────────

Verdict check_levelset_sync(const DynSystem& sys, const PartitionFunction& pf, double a,
                            int m_samples, const GridSampling& grid) {
    (void)sys;
    Verdict v;
    v.kind = VerdictKind::LevelsetSync;
    v.tolerances = "psi spread <= max(1e-8, 1e-6 * |mean psi|); regular iff |grad phi| >= 1e-6";

    auto samples = sample_level_set(pf.phi, grid, a, m_samples);
    if (samples.empty()) {
        v.applicable = false;
        v.coverage = "level set of '" + pf.name + "' at " + std::to_string(a) +
                     " is empty in the domain";
        return v;
    }
    for (const Vec& x : samples) {
        Vec g;
        for (const Expr& e : pf.grad) g.push_back(e.eval(x));
        if (norm2(g) < 1e-6) {
            v.applicable = false;
            Witness w;
            w.point = x;
            w.value = norm2(g);
            w.note = "near-critical point on the level set";
            v.witnesses.push_back(std::move(w));
            v.coverage = "critical value, check not applicable";
            return v;
        }
    }

    double lo = kInf, hi = -kInf, sum = 0.0;
    Vec lo_point, hi_point;
    for (const Vec& x : samples) {
        double p = pf.psi.eval(x);
        sum += p;
        if (p < lo) {
            lo = p;
            lo_point = x;
        }
        if (p > hi) {
            hi = p;
            hi_point = x;
        }
    }
    double mean = sum / static_cast<double>(samples.size());
    double tol = std::max(1e-8, 1e-6 * std::abs(mean));
    v.pass = hi - lo <= tol;
    Witness wl;
    wl.point = lo_point;
    wl.value = lo;
    wl.note = "min psi on the level set";
    Witness wh;
    wh.point = hi_point;
    wh.value = hi;
    wh.note = "max psi on the level set";
    v.witnesses.push_back(std::move(wl));
    v.witnesses.push_back(std::move(wh));
    std::ostringstream cov;
    cov << samples.size() << " samples on the level set " << pf.name << " = " << a
        << "; psi spread " << (hi - lo);
    v.coverage = cov.str();
    return v;
}

// ── Equilibria as critical points ───────────────────────────────────────────

Verdict check_critical_points(const DynSystem& sys, const PartitionFunction& pf,
                              int seeds_per_axis) {
    Verdict v;
    v.kind = VerdictKind::CriticalPoints;
    v.tolerances = "|grad phi(p)| <= 1e-6 at every equilibrium p";
    auto equilibria = find_equilibria(sys, seeds_per_axis);
    v.pass = true;
    for (const Equilibrium& eq : equilibria) {
        Vec g;
        for (const Expr& e : pf.grad) g.push_back(e.eval(eq.point));
        double gn = norm2(g);
        if (gn > 1e-6) {
            v.pass = false;
            Witness w;
            w.point = eq.point;
            w.value = gn;
            w.note = "gradient " + point_str(g) + " at equilibrium " + point_str(eq.point);
            v.witnesses.push_back(std::move(w));
        }
    }
    std::ostringstream cov;
    cov << equilibria.size() << " equilibria located from a " << seeds_per_axis
        << "-per-axis Newton seed grid" << (equilibria.empty() ? " (vacuous pass)" : "");
    v.coverage = cov.str();
    return v;
}

// ── Unstable-manifold containment in a level set ────────────────────────────

Verdict check_unstable_manifold_containment(const DynSystem& sys, const PartitionFunction& pf,
                                            const Equilibrium& eq, const GridSampling& grid,
                                            const ManifoldCheckOptions& opts) {
    Verdict v;
    v.kind = VerdictKind::ManifoldContainment;
    {
        std::ostringstream tol;
        tol << "|phi - phi(p)| <= " << opts.value_tol << " along W^u; proper search: |phi - phi(p)| <= "
            << opts.proper_value_tol << " at distance > " << opts.proper_radius;
        v.tolerances = tol.str();
    }

    // Hypothesis: some stable-manifold sample is a regular point of phi.
    auto stable = approximate_manifold(sys, eq, ManifoldBranch::Stable, opts.delta,
                                       opts.t_horizon, opts.h);
    bool regular_on_stable = false;
    for (const ManifoldApprox& branch : stable)
        for (const Vec& x : branch.points) {
            Vec g;
            for (const Expr& e : pf.grad) g.push_back(e.eval(x));
            if (norm2(g) >= 1e-6) {
                regular_on_stable = true;
                break;
            }
        }
    if (!regular_on_stable) {
        v.applicable = false;
        v.coverage = "hypothesis not met: no stable-manifold sample is a regular point of phi";
        return v;
    }

    auto unstable = approximate_manifold(sys, eq, ManifoldBranch::Unstable, opts.delta,
                                         opts.t_horizon, opts.h);
    double phi_p = pf.phi.eval(eq.point);
    double worst = 0.0;
    Vec worst_point = eq.point;
    std::size_t n_points = 0;
    for (const ManifoldApprox& branch : unstable)
        for (const Vec& x : branch.points) {
            ++n_points;
            double dev = std::abs(pf.phi.eval(x) - phi_p);
            if (dev > worst) {
                worst = dev;
                worst_point = x;
            }
        }
    if (n_points == 0) {
        v.applicable = false;
        v.coverage = "unstable manifold could not be traced inside the domain";
        return v;
    }
    v.pass = worst <= opts.value_tol;
    Witness w;
    w.point = worst_point;
    w.value = worst;
    w.note = v.pass ? "max |phi - phi(p)| along W^u" : "manifold point leaves the level set";
    v.witnesses.push_back(std::move(w));

    // Proper containment: level-set points far from the manifold polyline.
    bool proper = false;
    if (v.pass) {
        auto phi_vals = grid.evaluate(pf.phi);
        int reported = 0;
        for (std::size_t p = 0; p < grid.size(); ++p) {
            if (std::abs(phi_vals[p] - phi_p) > opts.proper_value_tol) continue;
            Vec x = grid.point(p);
            double dmin = kInf;
            for (const ManifoldApprox& branch : unstable)
                for (const Vec& y : branch.points) {
                    double d = 0.0;
                    for (std::size_t i = 0; i < x.size(); ++i) {
                        double diff = x[i] - y[i];
                        d += diff * diff;
                    }
                    dmin = std::min(dmin, std::sqrt(d));
                    if (dmin <= opts.proper_radius) break;
                }
            if (dmin > opts.proper_radius) {
                proper = true;
                if (reported < 5) {
                    Witness pw;
                    pw.point = x;
                    pw.value = phi_vals[p];
                    pw.note = "level-set point off the unstable manifold (distance " +
                              std::to_string(dmin) + ")";
                    v.witnesses.push_back(std::move(pw));
                    ++reported;
                }
            }
        }
    }
    std::ostringstream cov;
    cov << n_points << " points on two W^u branches; containment "
        << (v.pass ? (proper ? "PROPER" : "equality up to grid tolerance") : "violated");
    v.coverage = cov.str();
    return v;
}

// ── Positive invariance ─────────────────────────────────────────────────────

Verdict check_positive_invariance(const DynSystem& sys, const Expr& predicate, double threshold,
                                  int n_boundary_samples, double t_probe,
                                  const GridSampling& grid, double h) {
    Verdict v;
    v.kind = VerdictKind::Invariance;
    v.tolerances = "value <= threshold + 1e-8 along probe trajectories";
    auto samples = sample_level_set(predicate, grid, threshold, n_boundary_samples);
    int clipped = 0;
    v.pass = true;
    for (const Vec& x0 : samples) {
        FlowSample fs = flow(sys, x0, t_probe, h);
        if (fs.truncated) ++clipped;
        for (std::size_t i = 0; i < fs.states.size(); ++i) {
            double val = predicate.eval(fs.states[i]);
            if (val > threshold + 1e-8) {
                v.pass = false;
                if (v.witnesses.size() < 10) {
                    Witness w;
                    w.point = x0;
                    w.time = fs.times[i];
                    w.value = val;
                    w.note = "trajectory leaves the sublevel set";
                    v.witnesses.push_back(std::move(w));
                }
                break;
            }
        }
    }
    std::ostringstream cov;
    cov << samples.size() << " boundary samples flowed for " << t_probe << " time units; "
        << clipped << " clipped at domain exit (pass by convention)";
    if (samples.empty()) cov << "; no boundary points in the domain (vacuous)";
    v.coverage = cov.str();
    return v;
}

}  // namespace levta
