#include "levta/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levta {

bool Box::contains(const Vec& x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

bool Box::inside(const Box& other) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (lo[i] < other.lo[i] || hi[i] > other.hi[i]) return false;
    return true;
}

void DynSystem::validate() const {
    if (n < 1) throw std::invalid_argument("system dimension must be >= 1");
    if (static_cast<int>(f.size()) != n)
        throw std::invalid_argument("vector field must have n components");
    for (const Expr& e : f)
        if (e.max_var_index() > n)
            throw std::invalid_argument("vector field references x" +
                                        std::to_string(e.max_var_index()) +
                                        " beyond dimension " + std::to_string(n));
    if (domain.dim() != n || static_cast<int>(domain.hi.size()) != n)
        throw std::invalid_argument("domain box dimension mismatch");
    for (int i = 0; i < n; ++i)
        if (!(domain.lo[i] < domain.hi[i]))
            throw std::invalid_argument("domain box is empty on axis " + std::to_string(i + 1));
    if (init_box) {
        if (init_box->dim() != n) throw std::invalid_argument("init box dimension mismatch");
        for (int i = 0; i < n; ++i)
            if (!(init_box->lo[i] <= init_box->hi[i]))
                throw std::invalid_argument("init box is empty on axis " + std::to_string(i + 1));
        if (!init_box->inside(domain))
            throw std::invalid_argument("init box not contained in the domain");
    }
}

Vec DynSystem::field_at(const Vec& x) const {
    Vec out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)].eval(x);
    return out;
}

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

namespace {

bool finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// One classical RK4 step of size h.
Vec rk4_step(const DynSystem& sys, const Vec& x, double h) {
    const std::size_t n = x.size();
    Vec k1 = sys.field_at(x);
    Vec tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    Vec k2 = sys.field_at(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    Vec k3 = sys.field_at(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    Vec k4 = sys.field_at(tmp);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

void check_finite(const Vec& x, double t) {
    if (!finite(x))
        throw std::runtime_error("non-finite state at t = " + std::to_string(t));
}

}  // namespace

FlowSample flow(const DynSystem& sys, const Vec& x0, double t_end, double h) {
    if (h <= 0.0) throw std::invalid_argument("step size must be positive");
    if (static_cast<int>(x0.size()) != sys.n)
        throw std::invalid_argument("initial state dimension mismatch");
    FlowSample out;
    out.times.push_back(0.0);
    out.states.push_back(x0);
    Vec x = x0;
    double t = 0.0;
    while (t < t_end) {
        double dt = std::min(h, t_end - t);
        Vec next = rk4_step(sys, x, dt);
        check_finite(next, t + dt);
        if (!sys.domain.contains(next)) {
            out.truncated = true;
            return out;
        }
        t += dt;
        x = std::move(next);
        out.times.push_back(t);
        out.states.push_back(x);
    }
    return out;
}

FlowSample flow_at_times(const DynSystem& sys, const Vec& x0,
                         const std::vector<double>& times, double h) {
    if (times.empty() || times.front() < 0.0)
        throw std::invalid_argument("times must be nonempty and nonnegative");
    FlowSample out;
    Vec x = x0;
    double t = 0.0;
    for (double target : times) {
        if (target < t) throw std::invalid_argument("times must be increasing");
        while (t < target) {
            double dt = std::min(h, target - t);
            Vec next = rk4_step(sys, x, dt);
            check_finite(next, t + dt);
            if (!sys.domain.contains(next)) {
                out.truncated = true;
                return out;
            }
            t += dt;
            x = std::move(next);
        }
        out.times.push_back(target);
        out.states.push_back(x);
    }
    return out;
}

std::optional<LevelCrossing> flow_until_level(const DynSystem& sys, const Vec& x0,
                                              const Expr& phi, double target,
                                              double t_max, double h, bool* domain_exited) {
    constexpr double kTol = 1e-8;
    if (domain_exited) *domain_exited = false;
    double s0 = phi.eval(x0) - target;
    if (s0 == 0.0)
        throw std::invalid_argument("flow_until_level: phi(x0) already equals the target");
    Vec x = x0;
    double t = 0.0;
    while (t < t_max) {
        double dt = std::min(h, t_max - t);
        Vec next = rk4_step(sys, x, dt);
        check_finite(next, t + dt);
        double s1 = phi.eval(next) - target;
        if (s1 == 0.0 || (s0 > 0.0) != (s1 > 0.0)) {
            // Crossing inside this step; bisect on the substep size.
            double lo = 0.0, hi = dt;
            Vec probe = next;
            double sp = s1;
            double used = dt;
            for (int iter = 0; iter < 200 && std::abs(sp) > kTol && sp != 0.0; ++iter) {
                double mid = 0.5 * (lo + hi);
                probe = rk4_step(sys, x, mid);
                sp = phi.eval(probe) - target;
                used = mid;
                if ((sp > 0.0) == (s0 > 0.0) && sp != 0.0) lo = mid;
                else hi = mid;
            }
            if (std::abs(sp) > kTol) {
                used = hi;
                probe = rk4_step(sys, x, used);
            }
            return LevelCrossing{t + used, probe};
        }
        if (!sys.domain.contains(next)) {
            if (domain_exited) *domain_exited = true;
            return std::nullopt;
        }
        t += dt;
        x = std::move(next);
        s0 = s1;
    }
    return std::nullopt;
}

// ── Linear algebra ──────────────────────────────────────────────────────────

std::optional<Vec> solve_linear(std::vector<double> a, Vec b, int n) {
    const auto idx = [n](int r, int c) { return static_cast<std::size_t>(r * n + c); };
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[idx(r, col)]) > std::abs(a[idx(pivot, col)])) pivot = r;
        if (std::abs(a[idx(pivot, col)]) < 1e-14) return std::nullopt;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a[idx(pivot, c)], a[idx(col, c)]);
            std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
        }
        for (int r = col + 1; r < n; ++r) {
            double m = a[idx(r, col)] / a[idx(col, col)];
            for (int c = col; c < n; ++c) a[idx(r, c)] -= m * a[idx(col, c)];
            b[static_cast<std::size_t>(r)] -= m * b[static_cast<std::size_t>(col)];
        }
    }
    Vec x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < n; ++c) s -= a[idx(r, c)] * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = s / a[idx(r, r)];
    }
    return x;
}

namespace {

/// One real root of x^3 + p x^2 + q x + r (a cubic always has one).
double cubic_real_root(double p, double q, double r) {
    double m = 2.0 + std::abs(p) + std::abs(q) + std::abs(r);
    auto val = [&](double x) { return ((x + p) * x + q) * x + r; };
    double lo = -m, hi = m;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if ((val(mid) > 0.0) == (val(hi) > 0.0)) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> eigenvalue_real_parts(const std::vector<double>& m, int n) {
    if (n == 1) return {m[0]};
    if (n == 2) {
        double tr = m[0] + m[3];
        double det = m[0] * m[3] - m[1] * m[2];
        double disc = tr * tr - 4.0 * det;
        if (disc >= 0.0) {
            double s = std::sqrt(disc);
            return {(tr - s) / 2.0, (tr + s) / 2.0};
        }
        return {tr / 2.0, tr / 2.0};
    }
    if (n == 3) {
        double tr = m[0] + m[4] + m[8];
        double c1 = (m[0] * m[4] - m[1] * m[3]) + (m[0] * m[8] - m[2] * m[6]) +
                    (m[4] * m[8] - m[5] * m[7]);
        double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
        // Characteristic polynomial: l^3 - tr l^2 + c1 l - det.
        double rho = cubic_real_root(-tr, c1, -det);
        // Deflate to l^2 + b l + c.
        double b = rho - tr;
        double c = c1 + rho * b;
        double disc = b * b - 4.0 * c;
        if (disc >= 0.0) {
            double s = std::sqrt(disc);
            return {rho, (-b - s) / 2.0, (-b + s) / 2.0};
        }
        return {rho, -b / 2.0, -b / 2.0};
    }
    throw std::invalid_argument("eigenvalue classification supports n <= 3");
}

// ── Equilibria ──────────────────────────────────────────────────────────────

namespace {

std::vector<double> jacobian_at(const std::vector<std::vector<Expr>>& jac_exprs, const Vec& x,
                                int n) {
    std::vector<double> jac(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            jac[static_cast<std::size_t>(i * n + j)] =
                jac_exprs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(x);
    return jac;
}

EquilibriumKind classify(const std::vector<double>& re_parts) {
    bool neg = false, pos = false;
    for (double re : re_parts) {
        if (std::abs(re) < 1e-9) return EquilibriumKind::Degenerate;
        (re < 0.0 ? neg : pos) = true;
    }
    if (neg && pos) return EquilibriumKind::Saddle;
    return neg ? EquilibriumKind::Stable : EquilibriumKind::Unstable;
}

}  // namespace

std::vector<Equilibrium> find_equilibria(const DynSystem& sys, int seeds_per_axis) {
    if (seeds_per_axis < 2) throw std::invalid_argument("seeds_per_axis must be >= 2");
    sys.validate();
    const int n = sys.n;

    std::vector<std::vector<Expr>> jac_exprs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        jac_exprs[static_cast<std::size_t>(i)] = gradient(sys.f[static_cast<std::size_t>(i)], n);

    // Divergence guard: twice-padded domain box.
    Box padded = sys.domain;
    for (int i = 0; i < n; ++i) {
        double half = 0.5 * (padded.hi[static_cast<std::size_t>(i)] - padded.lo[static_cast<std::size_t>(i)]);
        padded.lo[static_cast<std::size_t>(i)] -= half;
        padded.hi[static_cast<std::size_t>(i)] += half;
    }

    std::vector<Equilibrium> found;
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(seeds_per_axis);

    for (std::size_t s = 0; s < total; ++s) {
        Vec x(static_cast<std::size_t>(n));
        std::size_t rem = s;
        for (int i = 0; i < n; ++i) {
            int k = static_cast<int>(rem % static_cast<std::size_t>(seeds_per_axis));
            rem /= static_cast<std::size_t>(seeds_per_axis);
            double lo = sys.domain.lo[static_cast<std::size_t>(i)];
            double hi = sys.domain.hi[static_cast<std::size_t>(i)];
            x[static_cast<std::size_t>(i)] = lo + (hi - lo) * (k + 0.5) / seeds_per_axis;
        }

        bool converged = false;
        for (int iter = 0; iter < 80; ++iter) {
            Vec fx;
            try {
                fx = sys.field_at(x);
            } catch (const EvalError&) {
                break;  // Seed wandered into an expression singularity.
            }
            if (!finite(fx)) break;
            if (norm2(fx) < 1e-12) {
                converged = true;
                break;
            }
            auto jac = jacobian_at(jac_exprs, x, n);
            for (double& v : fx) v = -v;
            auto delta = solve_linear(jac, fx, n);
            if (!delta) break;  // Singular Jacobian: discard this seed.
            for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += (*delta)[static_cast<std::size_t>(i)];
            if (!finite(x) || !padded.contains(x)) break;
        }
        if (!converged || !sys.domain.contains(x)) continue;

        bool duplicate = false;
        for (const Equilibrium& e : found) {
            double d = 0.0;
            for (int i = 0; i < n; ++i) {
                double diff = e.point[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
                d += diff * diff;
            }
            if (std::sqrt(d) < 1e-6) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;

        Equilibrium eq;
        eq.point = x;
        eq.jacobian = jacobian_at(jac_exprs, x, n);
        eq.kind = classify(eigenvalue_real_parts(eq.jacobian, n));
        found.push_back(std::move(eq));
    }

    std::sort(found.begin(), found.end(),
              [](const Equilibrium& a, const Equilibrium& b) { return a.point < b.point; });
    return found;
}

// ── Manifolds ───────────────────────────────────────────────────────────────

std::vector<ManifoldApprox> approximate_manifold(const DynSystem& sys, const Equilibrium& eq,
                                                 ManifoldBranch branch, double delta,
                                                 double t_horizon, double h) {
    if (sys.n != 2)
        throw std::invalid_argument("manifold approximation requires a planar system");
    if (eq.kind != EquilibriumKind::Saddle)
        throw std::invalid_argument("manifold approximation requires a saddle equilibrium");
    if (delta <= 0.0) throw std::invalid_argument("seed offset delta must be positive");

    const auto& j = eq.jacobian;
    auto eigs = eigenvalue_real_parts(j, 2);  // real and distinct for a saddle
    double lambda = branch == ManifoldBranch::Unstable ? std::max(eigs[0], eigs[1])
                                                       : std::min(eigs[0], eigs[1]);
    // Eigenvector of [[a,b],[c,d]] for eigenvalue lambda.
    double a = j[0], b = j[1], c = j[2], d = j[3];
    Vec v;
    if (std::abs(b) + std::abs(lambda - a) >= std::abs(c) + std::abs(lambda - d))
        v = {b, lambda - a};
    else
        v = {lambda - d, c};
    double nv = norm2(v);
    if (nv < 1e-12) v = {1.0, 0.0};
    else {
        v[0] /= nv;
        v[1] /= nv;
    }

    // Stable branches are traced by integrating the reversed field.
    DynSystem traced = sys;
    if (branch == ManifoldBranch::Stable)
        for (Expr& e : traced.f) e = Expr::neg(e);

    std::vector<ManifoldApprox> out;
    for (double sign : {+1.0, -1.0}) {
        Vec seed = eq.point;
        seed[0] += sign * delta * v[0];
        seed[1] += sign * delta * v[1];
        ManifoldApprox m;
        m.equilibrium = eq.point;
        m.branch = branch;
        if (sys.domain.contains(seed)) {
            FlowSample fs = flow(traced, seed, t_horizon, h);
            m.points = std::move(fs.states);
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace levta
