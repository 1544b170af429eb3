#include "levta/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace levta {

// ── PartitionFunction ───────────────────────────────────────────────────────

PartitionFunction PartitionFunction::make(std::string name, Expr phi,
                                          std::vector<double> levels, const DynSystem& sys) {
    if (levels.size() < 2)
        throw std::invalid_argument("partition function '" + name + "' needs at least 2 levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i - 1] < levels[i]))
            throw std::invalid_argument("levels of '" + name + "' not strictly increasing");
    if (phi.max_var_index() > sys.n)
        throw std::invalid_argument("phi of '" + name + "' references x" +
                                    std::to_string(phi.max_var_index()) +
                                    " beyond dimension " + std::to_string(sys.n));
    PartitionFunction pf;
    pf.name = std::move(name);
    pf.phi = phi;
    pf.levels = std::move(levels);
    pf.psi = lie_derivative(phi, sys.f);
    pf.grad = gradient(phi, sys.n);
    return pf;
}

std::vector<int> PartitionFunction::slices_containing(double value) const {
    std::vector<int> out;
    for (int i = 1; i < static_cast<int>(levels.size()); ++i)
        if (levels[static_cast<std::size_t>(i - 1)] <= value &&
            value <= levels[static_cast<std::size_t>(i)])
            out.push_back(i);
    return out;
}

std::vector<SliceDescriptor> build_slices(const PartitionFunction& pf) {
    std::vector<SliceDescriptor> out;
    for (int i = 1; i <= pf.slice_count(); ++i)
        out.push_back({i, pf.levels[static_cast<std::size_t>(i - 1)],
                       pf.levels[static_cast<std::size_t>(i)]});
    return out;
}

// ── GridSampling ────────────────────────────────────────────────────────────

GridSampling::GridSampling(const Box& box, int resolution) : box_(box), res_(resolution) {
    int n = box.dim();
    if (n < 1 || n > 3)
        throw std::invalid_argument("grid sampling supports dimensions 1 to 3");
    if (resolution < 3) throw std::invalid_argument("grid resolution must be >= 3");
    size_ = 1;
    for (int i = 0; i < n; ++i) size_ *= static_cast<std::size_t>(res_);
}

double GridSampling::coord(int axis, int index) const {
    double lo = box_.lo[static_cast<std::size_t>(axis)];
    double hi = box_.hi[static_cast<std::size_t>(axis)];
    return lo + (hi - lo) * index / (res_ - 1);
}

std::size_t GridSampling::flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a)
        flat = flat * static_cast<std::size_t>(res_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return flat;
}

std::vector<int> GridSampling::axis_indices(std::size_t flat) const {
    std::vector<int> idx(static_cast<std::size_t>(dim()));
    for (int a = dim() - 1; a >= 0; --a) {
        idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(res_));
        flat /= static_cast<std::size_t>(res_);
    }
    return idx;
}

Vec GridSampling::point(std::size_t flat) const {
    auto idx = axis_indices(flat);
    Vec x(static_cast<std::size_t>(dim()));
    for (int a = 0; a < dim(); ++a) x[static_cast<std::size_t>(a)] = coord(a, idx[static_cast<std::size_t>(a)]);
    return x;
}

std::vector<std::size_t> GridSampling::neighbors(std::size_t flat) const {
    auto idx = axis_indices(flat);
    std::vector<std::size_t> out;
    for (int a = 0; a < dim(); ++a) {
        for (int d : {-1, +1}) {
            int v = idx[static_cast<std::size_t>(a)] + d;
            if (v < 0 || v >= res_) continue;
            auto j = idx;
            j[static_cast<std::size_t>(a)] = v;
            out.push_back(flat_index(j));
        }
    }
    return out;
}

std::vector<std::size_t> GridSampling::enclosing_corners(const Vec& x) const {
    std::vector<int> base(static_cast<std::size_t>(dim()));
    for (int a = 0; a < dim(); ++a) {
        double lo = box_.lo[static_cast<std::size_t>(a)];
        double hi = box_.hi[static_cast<std::size_t>(a)];
        double t = (x[static_cast<std::size_t>(a)] - lo) / (hi - lo) * (res_ - 1);
        int i = static_cast<int>(std::floor(t));
        base[static_cast<std::size_t>(a)] = std::clamp(i, 0, res_ - 2);
    }
    std::vector<std::size_t> corners;
    int n = dim();
    for (int mask = 0; mask < (1 << n); ++mask) {
        auto idx = base;
        for (int a = 0; a < n; ++a)
            if (mask & (1 << a)) ++idx[static_cast<std::size_t>(a)];
        corners.push_back(flat_index(idx));
    }
    return corners;
}

std::vector<double> GridSampling::evaluate(const Expr& e) const {
    std::vector<double> out(size_);
    const int n = dim();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Vec x(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) x[static_cast<std::size_t>(a)] = coord(a, 0);
    for (std::size_t flat = 0; flat < size_; ++flat) {
        out[flat] = e.eval(x);
        // Odometer increment, last axis fastest.
        for (int a = n - 1; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++idx[ua] < res_) {
                x[ua] = coord(a, idx[ua]);
                break;
            }
            idx[ua] = 0;
            x[ua] = coord(a, 0);
        }
    }
    return out;
}

// ── Cells ───────────────────────────────────────────────────────────────────

std::string Cell::id() const {
    std::ostringstream out;
    out << 'e';
    for (int gi : g) out << '_' << gi;
    out << "_h" << h;
    return out.str();
}

Partition::Partition(std::vector<PartitionFunction> fams, GridSampling g)
    : families(std::move(fams)), grid(std::move(g)) {}

const std::vector<std::uint32_t>& Partition::cells_at(std::size_t flat) const {
    return point_cells_[flat];
}

Partition build_cells(std::vector<PartitionFunction> families, const GridSampling& grid) {
    if (families.empty()) throw std::invalid_argument("at least one slice-family is required");
    const int k = static_cast<int>(families.size());
    const std::size_t npoints = grid.size();

    std::vector<std::vector<double>> values;
    values.reserve(families.size());
    for (const auto& pf : families) values.push_back(grid.evaluate(pf.phi));

    Partition part(std::move(families), grid);

    // Slice memberships per point; boundary points belong to two slices.
    std::map<std::vector<int>, std::vector<std::uint32_t>> buckets;
    std::vector<std::vector<int>> memb(static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < npoints; ++p) {
        bool covered = true;
        for (int i = 0; i < k; ++i) {
            memb[static_cast<std::size_t>(i)] =
                part.families[static_cast<std::size_t>(i)].slices_containing(
                    values[static_cast<std::size_t>(i)][p]);
            if (memb[static_cast<std::size_t>(i)].empty()) covered = false;
        }
        if (!covered) {
            part.uncovered.push_back(static_cast<std::uint32_t>(p));
            continue;
        }
        std::vector<int> g(static_cast<std::size_t>(k));
        std::vector<std::size_t> pick(static_cast<std::size_t>(k), 0);
        for (;;) {
            for (int i = 0; i < k; ++i)
                g[static_cast<std::size_t>(i)] =
                    memb[static_cast<std::size_t>(i)][pick[static_cast<std::size_t>(i)]];
            buckets[g].push_back(static_cast<std::uint32_t>(p));
            int axis = k - 1;
            while (axis >= 0 &&
                   ++pick[static_cast<std::size_t>(axis)] >= memb[static_cast<std::size_t>(axis)].size()) {
                pick[static_cast<std::size_t>(axis)] = 0;
                --axis;
            }
            if (axis < 0) break;
        }
    }

    // Flood fill each extended cell into orthogonally connected components.
    std::vector<char> in_bucket(npoints, 0);
    std::vector<char> visited(npoints, 0);
    for (auto& [g, pts] : buckets) {
        for (auto p : pts) in_bucket[p] = 1;
        int h = 0;
        for (auto start : pts) {
            if (visited[start]) continue;
            ++h;
            Cell cell;
            cell.g = g;
            cell.h = h;
            std::queue<std::uint32_t> queue;
            queue.push(start);
            visited[start] = 1;
            while (!queue.empty()) {
                std::uint32_t p = queue.front();
                queue.pop();
                cell.points.push_back(p);
                for (std::size_t q : grid.neighbors(p)) {
                    if (!in_bucket[q] || visited[q]) continue;
                    visited[q] = 1;
                    queue.push(static_cast<std::uint32_t>(q));
                }
            }
            std::sort(cell.points.begin(), cell.points.end());
            part.cells.push_back(std::move(cell));
        }
        for (auto p : pts) {
            in_bucket[p] = 0;
            visited[p] = 0;
        }
    }

    // Point -> cells index.
    part.point_cells_.assign(npoints, {});
    for (std::size_t c = 0; c < part.cells.size(); ++c)
        for (auto p : part.cells[c].points)
            part.point_cells_[p].push_back(static_cast<std::uint32_t>(c));

    // Adjacency: g differs by one in exactly one family, witnessed by a
    // shared point or a pair of neighboring grid points.
    std::set<std::pair<int, int>> seen;
    auto try_edge = [&](int a, int b) {
        if (a == b) return;
        const auto& ga = part.cells[static_cast<std::size_t>(a)].g;
        const auto& gb = part.cells[static_cast<std::size_t>(b)].g;
        int family = -1;
        for (int i = 0; i < k; ++i) {
            int d = ga[static_cast<std::size_t>(i)] - gb[static_cast<std::size_t>(i)];
            if (d == 0) continue;
            if (d != 1 || family >= 0) return;  // exactly one decrement
            family = i;
        }
        if (family < 0) return;
        if (seen.insert({a, b}).second)
            part.adjacency.push_back({a, b, family});
    };
    for (std::size_t p = 0; p < npoints; ++p) {
        const auto& cp = part.point_cells_[p];
        if (cp.empty()) continue;
        for (auto a : cp)
            for (auto b : cp) try_edge(static_cast<int>(a), static_cast<int>(b));
        for (std::size_t q : grid.neighbors(p)) {
            if (q < p) continue;
            for (auto a : cp)
                for (auto b : part.point_cells_[q]) {
                    try_edge(static_cast<int>(a), static_cast<int>(b));
                    try_edge(static_cast<int>(b), static_cast<int>(a));
                }
        }
    }
    std::sort(part.adjacency.begin(), part.adjacency.end(),
              [](const Adjacency& x, const Adjacency& y) {
                  return std::tie(x.from, x.to, x.family) < std::tie(y.from, y.to, y.family);
              });
    return part;
}

std::vector<int> Partition::alpha(const Vec& x) const {
    if (!grid.box().contains(x))
        throw std::invalid_argument("alpha: point outside the domain box");
    const int k = family_count();
    std::vector<std::vector<int>> memb(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const auto& pf = families[static_cast<std::size_t>(i)];
        memb[static_cast<std::size_t>(i)] = pf.slices_containing(pf.phi.eval(x));
        if (memb[static_cast<std::size_t>(i)].empty())
            throw std::invalid_argument("alpha: value of '" + pf.name +
                                        "' outside its level range");
    }
    auto corners = grid.enclosing_corners(x);
    std::vector<int> candidates;
    for (auto corner : corners)
        for (auto c : point_cells_[corner]) candidates.push_back(static_cast<int>(c));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<int> out;
    for (int c : candidates) {
        const auto& g = cells[static_cast<std::size_t>(c)].g;
        bool match = true;
        for (int i = 0; i < k && match; ++i) {
            const auto& mi = memb[static_cast<std::size_t>(i)];
            match = std::find(mi.begin(), mi.end(), g[static_cast<std::size_t>(i)]) != mi.end();
        }
        if (match) out.push_back(c);
    }
    // Slices thinner than the grid spacing can leave no value-matching
    // candidate; fall back to the cells at the enclosing corners.
    if (out.empty()) out = candidates;
    return out;
}

// ── Checks ──────────────────────────────────────────────────────────────────

Verdict validate_nonincreasing(const PartitionFunction& pf, const DynSystem& sys,
                               const GridSampling& grid, double tol_psi) {
    (void)sys;
    Verdict v;
    v.kind = VerdictKind::Nonincreasing;
    std::ostringstream tol;
    tol << "tol_psi = " << tol_psi;
    v.tolerances = tol.str();
    auto psi = grid.evaluate(pf.psi);
    std::size_t worst = 0;
    for (std::size_t p = 1; p < psi.size(); ++p)
        if (psi[p] > psi[worst]) worst = p;
    v.pass = psi[worst] <= tol_psi;
    Witness w;
    w.point = grid.point(worst);
    w.value = psi[worst];
    w.note = v.pass ? "max psi over grid" : "psi above tolerance";
    v.witnesses.push_back(std::move(w));
    std::ostringstream cov;
    cov << "psi of '" << pf.name << "' sampled at " << grid.size() << " grid points ("
        << grid.resolution() << " per axis)";
    v.coverage = cov.str();
    return v;
}

std::vector<std::string> transversality_warnings(const std::vector<PartitionFunction>& families,
                                                 const GridSampling& grid, double tol) {
    const int k = static_cast<int>(families.size());
    const int n = grid.dim();
    std::vector<std::string> warnings;
    if (k < 2 || n < 2) return warnings;

    // Mark grid points lying on a level boundary of each family: some
    // incident grid edge changes the sign of phi - a.
    std::vector<std::vector<double>> values;
    for (const auto& pf : families) values.push_back(grid.evaluate(pf.phi));
    std::vector<std::vector<char>> boundary(static_cast<std::size_t>(k),
                                            std::vector<char>(grid.size(), 0));
    for (int i = 0; i < k; ++i) {
        const auto& pf = families[static_cast<std::size_t>(i)];
        const auto& vals = values[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < grid.size(); ++p) {
            for (double a : pf.levels) {
                if (!std::isfinite(a)) continue;
                double sp = vals[p] - a;
                if (sp == 0.0) {
                    boundary[static_cast<std::size_t>(i)][p] = 1;
                    break;
                }
                bool found = false;
                for (std::size_t q : grid.neighbors(p)) {
                    if (sp * (vals[q] - a) < 0.0) {
                        boundary[static_cast<std::size_t>(i)][p] = 1;
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
        }
    }

    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            for (std::size_t p = 0; p < grid.size(); ++p) {
                if (!boundary[static_cast<std::size_t>(i)][p] ||
                    !boundary[static_cast<std::size_t>(j)][p])
                    continue;
                Vec x = grid.point(p);
                Vec gi, gj;
                for (const Expr& e : families[static_cast<std::size_t>(i)].grad)
                    gi.push_back(e.eval(x));
                for (const Expr& e : families[static_cast<std::size_t>(j)].grad)
                    gj.push_back(e.eval(x));
                double ni = norm2(gi), nj = norm2(gj);
                if (ni < 1e-12 || nj < 1e-12) continue;  // criticality, not parallelism
                for (double& v : gi) v /= ni;
                for (double& v : gj) v /= nj;
                double cross;
                if (n == 2) {
                    cross = std::abs(gi[0] * gj[1] - gi[1] * gj[0]);
                } else {
                    double cx = gi[1] * gj[2] - gi[2] * gj[1];
                    double cy = gi[2] * gj[0] - gi[0] * gj[2];
                    double cz = gi[0] * gj[1] - gi[1] * gj[0];
                    cross = std::sqrt(cx * cx + cy * cy + cz * cz);
                }
                if (cross < tol) {
                    std::ostringstream msg;
                    msg << "families '" << families[static_cast<std::size_t>(i)].name
                        << "' and '" << families[static_cast<std::size_t>(j)].name
                        << "' have parallel gradients at (";
                    for (std::size_t a = 0; a < x.size(); ++a)
                        msg << (a ? ", " : "") << x[a];
                    msg << ")";
                    warnings.push_back(msg.str());
                    if (warnings.size() >= 10) return warnings;
                }
            }
        }
    }
    return warnings;
}

std::vector<Vec> sample_level_set(const Expr& phi, const GridSampling& grid, double a,
                                  int max_samples) {
    auto values = grid.evaluate(phi);
    std::vector<Vec> found;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        if (values[p] == a) {
            found.push_back(grid.point(p));
            continue;
        }
        for (std::size_t q : grid.neighbors(p)) {
            if (q < p) continue;
            double sp = values[p] - a, sq = values[q] - a;
            if (sp * sq >= 0.0) continue;
            Vec xp = grid.point(p), xq = grid.point(q);
            // Bisect along the grid edge until |phi - a| <= 1e-10.
            Vec mid = xp;
            for (int iter = 0; iter < 100; ++iter) {
                for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (xp[i] + xq[i]);
                double sm = phi.eval(mid) - a;
                if (std::abs(sm) <= 1e-10) break;
                if ((sm > 0.0) == (sp > 0.0)) xp = mid;
                else xq = mid;
            }
            found.push_back(mid);
        }
    }
    if (max_samples > 0 && static_cast<int>(found.size()) > max_samples) {
        std::vector<Vec> strided;
        double step = static_cast<double>(found.size()) / max_samples;
        for (int i = 0; i < max_samples; ++i)
            strided.push_back(found[static_cast<std::size_t>(i * step)]);
        found = std::move(strided);
    }
    return found;
}

std::vector<double> critical_values_on_grid(const PartitionFunction& pf,
                                            const GridSampling& grid, double grad_tol,
                                            double value_merge_tol) {
    std::vector<std::vector<double>> grad_vals;
    for (const Expr& e : pf.grad) grad_vals.push_back(grid.evaluate(e));
    auto phi_vals = grid.evaluate(pf.phi);
    std::vector<double> crit;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        double s = 0.0;
        for (const auto& gv : grad_vals) s += gv[p] * gv[p];
        if (std::sqrt(s) < grad_tol) crit.push_back(phi_vals[p]);
    }
    std::sort(crit.begin(), crit.end());
    std::vector<double> merged;
    for (double v : crit)
        if (merged.empty() || v - merged.back() > value_merge_tol) merged.push_back(v);
    return merged;
}

}  // namespace levta
