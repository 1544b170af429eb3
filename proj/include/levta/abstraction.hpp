// ============================================================================
// levta/abstraction.hpp — transit-time estimation per slice and generation
// of the timed automaton from a partition
// ============================================================================

#ifndef LEVTA_ABSTRACTION_HPP
#define LEVTA_ABSTRACTION_HPP

#include "levta/partition.hpp"
#include "levta/ta.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace levta {

/// Transit-time estimate for one slice: time to flow from the slice's
/// entry level set phi^-1(a_g) down to phi^-1(a_{g-1}).
struct TransitEntry {
    double t_low = 0.0;
    double t_high = std::numeric_limits<double>::infinity();
    int samples = 0;  // points sampled on the entry level set
    int crossed = 0;  // samples that reached the target level within t_max
    int exited = 0;   // samples that left the domain box before crossing
    int stalled = 0;  // samples still inside the domain at t_max
    bool critical = false;     // entry or target level is a critical value
    bool empty_level = false;  // no sample point found on the entry level
    bool unbounded = false;    // entry or target level is infinite
    Vec fastest_point;         // entry sample with the smallest crossing time
    Vec slowest_point;         // entry sample with the largest (or no) crossing

    double spread() const { return t_high - t_low; }
};

/// Per-family table of (t_low, t_high) pairs, indexed by slice (entry 0 is
/// slice 1).
struct TransitTimeTable {
    std::string family;
    std::vector<TransitEntry> entries;
};

struct TransitOptions {
    int samples_per_level = 200;
    double t_max = 50.0;
    double h = 1e-3;
    double grad_tol = 1e-6;  // criticality threshold for |grad phi|
};

/// Estimate the transit times of a single regular-value pair
/// entry_level -> target_level. critical_values are matched against both
/// levels to set the critical flag.
TransitEntry estimate_pair_transit(const DynSystem& sys, const PartitionFunction& pf,
                                   const GridSampling& grid, double entry_level,
                                   double target_level,
                                   const std::vector<double>& critical_values,
                                   const TransitOptions& opts = {});

/// Estimate transit times for every slice of the family. Slices whose
/// entry level finds no sample are marked empty; slices with an infinite
/// boundary get (0, +inf).
TransitTimeTable estimate_transit_times(const DynSystem& sys, const PartitionFunction& pf,
                                        const GridSampling& grid,
                                        const TransitOptions& opts = {});

struct GenerateOptions {
    std::uint64_t seed = 42;
    int init_samples = 1000;  // Monte Carlo points through alpha for E0
};

/// Build the timed automaton of the partition: locations are cells, one
/// clock and one symbol per family, invariants c_i <= t_high (omitted when
/// infinite), and for each adjacency with family i decremented a
/// transition with guard c_i >= t_low, symbol s_i, reset {c_i}. E0 is
/// alpha over a sampled init box, or every location without one.
TimedAutomaton generate_ta(const Partition& partition,
                           const std::vector<TransitTimeTable>& tables, const DynSystem& sys,
                           const GenerateOptions& opts = {});

}  // namespace levta

#endif  // LEVTA_ABSTRACTION_HPP
