#include "levta/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace levta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool matches_critical(double level, const std::vector<double>& critical_values) {
    for (double cv : critical_values)
        if (std::abs(level - cv) <= std::max(1e-8, 1e-8 * std::abs(level))) return true;
    return false;
}

}  // namespace

TransitEntry estimate_pair_transit(const DynSystem& sys, const PartitionFunction& pf,
                                   const GridSampling& grid, double entry_level,
                                   double target_level,
                                   const std::vector<double>& critical_values,
                                   const TransitOptions& opts) {
    TransitEntry entry;
    if (!std::isfinite(entry_level) || !std::isfinite(target_level)) {
        entry.unbounded = true;
        return entry;  // (0, +inf): no usable entry or exit level set
    }
    entry.critical = matches_critical(entry_level, critical_values) ||
                     matches_critical(target_level, critical_values);

    auto samples = sample_level_set(pf.phi, grid, entry_level, opts.samples_per_level);
    entry.samples = static_cast<int>(samples.size());
    if (samples.empty()) {
        entry.empty_level = true;
        return entry;
    }

    double t_min = kInf, t_max_seen = -kInf;
    for (const Vec& x0 : samples) {
        // Gradient criticality on the sampled entry set.
        Vec g;
        for (const Expr& e : pf.grad) g.push_back(e.eval(x0));
        if (norm2(g) < opts.grad_tol) entry.critical = true;

        if (pf.phi.eval(x0) == target_level) continue;
        bool exited = false;
        auto crossing =
            flow_until_level(sys, x0, pf.phi, target_level, opts.t_max, opts.h, &exited);
        if (!crossing) {
            // Trajectories that leave the state space stop contributing;
            // timeouts inside it mean the slice is never traversed.
            if (exited) {
                ++entry.exited;
            } else {
                ++entry.stalled;
                entry.slowest_point = x0;
            }
            continue;
        }
        ++entry.crossed;
        if (crossing->time < t_min) {
            t_min = crossing->time;
            entry.fastest_point = x0;
        }
        if (crossing->time > t_max_seen) {
            t_max_seen = crossing->time;
            if (entry.stalled == 0) entry.slowest_point = x0;
        }
    }
    // With no crossing data the sound fallback (0, +inf) applies:
    // transitions may fire at any time and no exit is forced.
    entry.t_low = entry.crossed > 0 ? t_min : 0.0;
    entry.t_high = entry.stalled > 0 || entry.crossed == 0 ? kInf : t_max_seen;
    return entry;
}

TransitTimeTable estimate_transit_times(const DynSystem& sys, const PartitionFunction& pf,
                                        const GridSampling& grid, const TransitOptions& opts) {
    TransitTimeTable table;
    table.family = pf.name;
    auto critical_values = critical_values_on_grid(pf, grid, opts.grad_tol);
    for (int i = 1; i <= pf.slice_count(); ++i) {
        double target = pf.levels[static_cast<std::size_t>(i - 1)];
        double entry_level = pf.levels[static_cast<std::size_t>(i)];
        table.entries.push_back(
            estimate_pair_transit(sys, pf, grid, entry_level, target, critical_values, opts));
    }
    return table;
}

TimedAutomaton generate_ta(const Partition& partition,
                           const std::vector<TransitTimeTable>& tables, const DynSystem& sys,
                           const GenerateOptions& opts) {
    const int k = partition.family_count();
    if (static_cast<int>(tables.size()) != k)
        throw std::invalid_argument("generate_ta: one transit table per family required");
    for (int i = 0; i < k; ++i)
        if (static_cast<int>(tables[static_cast<std::size_t>(i)].entries.size()) !=
            partition.families[static_cast<std::size_t>(i)].slice_count())
            throw std::invalid_argument("generate_ta: table gap in family '" +
                                        partition.families[static_cast<std::size_t>(i)].name +
                                        "'");
    if (!partition.uncovered.empty())
        throw std::invalid_argument(
            "generate_ta: " + std::to_string(partition.uncovered.size()) +
            " grid points are covered by no cell; extend the level lists");

    TimedAutomaton ta;
    for (int i = 1; i <= k; ++i) {
        ta.clocks.push_back("c" + std::to_string(i));
        ta.symbols.push_back("s" + std::to_string(i));
    }

    for (const Cell& cell : partition.cells) {
        TaLocation loc;
        loc.id = cell.id();
        loc.g = cell.g;
        loc.h = cell.h;
        for (int i = 0; i < k; ++i) {
            const TransitEntry& e =
                tables[static_cast<std::size_t>(i)]
                    .entries[static_cast<std::size_t>(cell.g[static_cast<std::size_t>(i)] - 1)];
            if (std::isfinite(e.t_high))
                loc.invariant.atoms.push_back({i, Rel::Le, e.t_high});
        }
        ta.locations.push_back(std::move(loc));
    }

    for (const Adjacency& adj : partition.adjacency) {
        const Cell& from = partition.cells[static_cast<std::size_t>(adj.from)];
        const TransitEntry& e =
            tables[static_cast<std::size_t>(adj.family)]
                .entries[static_cast<std::size_t>(
                    from.g[static_cast<std::size_t>(adj.family)] - 1)];
        TaEdge edge;
        edge.src = adj.from;
        edge.dst = adj.to;
        edge.symbol = adj.family;
        edge.guard.atoms.push_back({adj.family, Rel::Ge, e.t_low});
        edge.resets = {adj.family};
        ta.edges.push_back(std::move(edge));
    }

    if (sys.init_box) {
        std::mt19937_64 rng(opts.seed);
        std::set<int> e0;
        for (int s = 0; s < opts.init_samples; ++s) {
            Vec x(static_cast<std::size_t>(sys.n));
            for (int i = 0; i < sys.n; ++i) {
                double lo = sys.init_box->lo[static_cast<std::size_t>(i)];
                double hi = sys.init_box->hi[static_cast<std::size_t>(i)];
                if (hi > lo) {
                    std::uniform_real_distribution<double> dist(lo, hi);
                    x[static_cast<std::size_t>(i)] = dist(rng);
                } else {
                    x[static_cast<std::size_t>(i)] = lo;
                }
            }
            for (int c : partition.alpha(x)) e0.insert(c);
        }
        ta.initial.assign(e0.begin(), e0.end());
    } else {
        for (int c = 0; c < static_cast<int>(partition.cells.size()); ++c)
            ta.initial.push_back(c);
    }

    ta.validate();
    return ta;
}

}  // namespace levta
