// ============================================================================
// levta/partition.hpp — level-set partition of the state space: slices,
// extended cells, connected cells, adjacency, and the abstraction function
// ============================================================================

#ifndef LEVTA_PARTITION_HPP
#define LEVTA_PARTITION_HPP

#include "levta/dynsys.hpp"
#include "levta/verdict.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace levta {

// ── Partitioning function ───────────────────────────────────────────────────

/// A scalar function phi with level values a_0 < ... < a_k. Slice i is
/// phi^-1([a_{i-1}, a_i]); psi is the Lie derivative of phi along the
/// vector field, grad its gradient.
struct PartitionFunction {
    std::string name;
    Expr phi;
    std::vector<double> levels;  // size k+1; ends may be -inf / +inf
    Expr psi;
    std::vector<Expr> grad;

    static PartitionFunction make(std::string name, Expr phi, std::vector<double> levels,
                                  const DynSystem& sys);

    int slice_count() const { return static_cast<int>(levels.size()) - 1; }
    /// 1-based slice indices whose closed interval contains the value.
    /// Empty when the value is outside [a_0, a_k].
    std::vector<int> slices_containing(double value) const;
};

struct SliceDescriptor {
    int index = 0;  // 1-based
    double lower = 0.0;
    double upper = 0.0;
};

std::vector<SliceDescriptor> build_slices(const PartitionFunction& pf);

// ── Grid ────────────────────────────────────────────────────────────────────

/// Uniform lattice over the domain box (same resolution per axis),
/// inclusive of the box faces. Supports n <= 3.
class GridSampling {
public:
    GridSampling(const Box& box, int resolution);

    int dim() const { return static_cast<int>(box_.lo.size()); }
    int resolution() const { return res_; }
    std::size_t size() const { return size_; }
    const Box& box() const { return box_; }

    double coord(int axis, int index) const;
    Vec point(std::size_t flat) const;
    std::size_t flat_index(const std::vector<int>& idx) const;
    std::vector<int> axis_indices(std::size_t flat) const;
    /// Orthogonal (2n) neighbors.
    std::vector<std::size_t> neighbors(std::size_t flat) const;
    /// Grid cell containing x: corner points of the enclosing hypercube.
    std::vector<std::size_t> enclosing_corners(const Vec& x) const;

    /// Evaluate an expression at every grid point.
    std::vector<double> evaluate(const Expr& e) const;

private:
    Box box_;
    int res_;
    std::size_t size_;
};

// ── Cells and partition ─────────────────────────────────────────────────────

/// Connected component of an extended cell: slice-index vector g (1-based,
/// one entry per family) and component label h (1-based, ordered by the
/// smallest contained grid point).
struct Cell {
    std::vector<int> g;
    int h = 0;
    std::vector<std::uint32_t> points;  // sorted flat grid indices

    std::string id() const;
};

/// Ordered adjacency: from has g_i one larger than to in exactly the
/// family `family` (0-based), equal elsewhere; the cells share a grid
/// point or a pair of neighboring grid points.
struct Adjacency {
    int from = 0;
    int to = 0;
    int family = 0;
};

struct Partition {
    std::vector<PartitionFunction> families;
    GridSampling grid;
    std::vector<Cell> cells;
    std::vector<Adjacency> adjacency;
    /// Grid points covered by no slice interval of some family (levels do
    /// not span the value range). Empty for well-formed models.
    std::vector<std::uint32_t> uncovered;

    /// Cells containing the given grid point.
    const std::vector<std::uint32_t>& cells_at(std::size_t flat) const;

    /// Abstraction function: all cells whose slice intervals contain
    /// (phi_1(x), ..., phi_k(x)) and whose component meets the grid cell
    /// of x. Throws std::invalid_argument when x is outside the domain.
    std::vector<int> alpha(const Vec& x) const;

    int family_count() const { return static_cast<int>(families.size()); }

private:
    Partition(std::vector<PartitionFunction> fams, GridSampling g);
    friend Partition build_cells(std::vector<PartitionFunction> families,
                                 const GridSampling& grid);
    std::vector<std::vector<std::uint32_t>> point_cells_;
};

/// Assign every grid point its slice-index vector(s), flood-fill connected
/// components per extended cell, and compute the adjacency relation.
/// Points on a level boundary are replicated into all adjacent cells.
Partition build_cells(std::vector<PartitionFunction> families, const GridSampling& grid);

// ── Checks and diagnostics ──────────────────────────────────────────────────

/// PASS iff psi(x) <= tol_psi at every grid point.
Verdict validate_nonincreasing(const PartitionFunction& pf, const DynSystem& sys,
                               const GridSampling& grid, double tol_psi = 1e-9);

/// Numeric transversality proxy: warns when the gradients of two families
/// are parallel at grid points lying on level boundaries of both.
std::vector<std::string> transversality_warnings(const std::vector<PartitionFunction>& families,
                                                 const GridSampling& grid,
                                                 double tol = 1e-6);

/// Points on phi^-1(a): grid edges with a sign change of phi - a, refined
/// by bisection to |phi - a| <= 1e-10, plus grid points where phi = a
/// exactly. At most max_samples points, evenly strided, deterministic.
std::vector<Vec> sample_level_set(const Expr& phi, const GridSampling& grid, double a,
                                  int max_samples);

/// Values phi(p) at grid points where |grad phi(p)| < grad_tol
/// (deduplicated within value_merge_tol).
std::vector<double> critical_values_on_grid(const PartitionFunction& pf,
                                            const GridSampling& grid,
                                            double grad_tol = 1e-6,
                                            double value_merge_tol = 1e-9);

}  // namespace levta

#endif  // LEVTA_PARTITION_HPP
