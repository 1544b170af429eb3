// Shared fixtures for the test suites: the planar saddle system, its
// partitioning functions, and the bump-modified partitioning function.

#ifndef LEVTA_TESTS_HELPERS_HPP
#define LEVTA_TESTS_HELPERS_HPP

#include "levta/dynsys.hpp"
#include "levta/partition.hpp"

#include <cmath>
#include <random>
#include <string>

namespace levta::testing {

/// dx1 = -x1, dx2 = x2 on [-4, 4]^2: a saddle at the origin.
inline DynSystem saddle_system() {
    DynSystem sys;
    sys.n = 2;
    sys.f = {parse_expr("-x1", 2), parse_expr("x2", 2)};
    sys.domain = {{-4.0, -4.0}, {4.0, 4.0}};
    return sys;
}

inline PartitionFunction saddle_phi1(const DynSystem& sys) {
    return PartitionFunction::make("phi1", parse_expr("x1^2", 2), {0.0, 1.0, 4.0, 16.0}, sys);
}

inline PartitionFunction saddle_phi2(const DynSystem& sys) {
    return PartitionFunction::make("phi2", parse_expr("-x2^2", 2), {-16.0, -4.0, -1.0, 0.0},
                                   sys);
}

/// Smooth step g((x1^2 - a^2)/(b^2 - a^2)) with a = 0.5, b = 2:
/// 0 for x1^2 <= 0.25, 1 for x1^2 >= 4.
inline std::string bump_gate_source() {
    return "ifpos((x1^2 - 0.25)/3.75, exp(-3.75/(x1^2 - 0.25)), 0)"
           " / (ifpos((x1^2 - 0.25)/3.75, exp(-3.75/(x1^2 - 0.25)), 0)"
           " + ifpos((4 - x1^2)/3.75, exp(-3.75/(4 - x1^2)), 0))";
}

/// Bump-modified partitioning function g(...) * x1^2.
inline std::string bump_phi_source() { return bump_gate_source() + " * x1^2"; }

inline Expr bump_phi() { return parse_expr(bump_phi_source(), 2); }

/// Random expressions kept tame enough for finite-difference checks:
/// denominators and log/sqrt arguments are bounded away from zero.
class RandomExprGen {
public:
    RandomExprGen(std::uint64_t seed, int dim) : rng_(seed), dim_(dim) {}

    Expr next(int depth = 3) { return gen(depth); }

    Vec random_point(double lo = -2.0, double hi = 2.0) {
        std::uniform_real_distribution<double> dist(lo, hi);
        Vec x(static_cast<std::size_t>(dim_));
        for (double& v : x) v = dist(rng_);
        return x;
    }

private:
    std::mt19937_64 rng_;
    int dim_;

    Expr gen(int depth) {
        std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
        std::uniform_real_distribution<double> cval(-1.5, 1.5);
        std::uniform_int_distribution<int> var(1, dim_);
        switch (pick(rng_)) {
            case 0: return Expr::constant(cval(rng_));
            case 1: return Expr::var(var(rng_));
            case 2: return Expr::add(gen(depth - 1), gen(depth - 1));
            case 3: return Expr::sub(gen(depth - 1), gen(depth - 1));
            case 4: return Expr::mul(gen(depth - 1), gen(depth - 1));
            case 5: {
                Expr w = gen(depth - 1);
                // Denominator 2 + w^2 stays away from zero.
                return Expr::div(gen(depth - 1),
                                 Expr::add(Expr::constant(2.0), Expr::mul(w, w)));
            }
            case 6: {
                std::uniform_int_distribution<int> ex(2, 3);
                return Expr::pow(gen(depth - 1), ex(rng_));
            }
            case 7: {
                std::uniform_int_distribution<int> f(0, 2);
                UnaryFn fns[] = {UnaryFn::Sin, UnaryFn::Cos, UnaryFn::Tanh};
                return Expr::call(fns[f(rng_)], gen(depth - 1));
            }
            case 8: {
                Expr w = gen(depth - 1);
                // ln(1.5 + w^2) and sqrt alike stay in-domain.
                std::uniform_int_distribution<int> f(0, 1);
                return Expr::call(f(rng_) ? UnaryFn::Ln : UnaryFn::Sqrt,
                                  Expr::add(Expr::constant(1.5), Expr::mul(w, w)));
            }
            default:
                return Expr::call(UnaryFn::Exp,
                                  Expr::call(UnaryFn::Tanh, gen(depth - 1)));
        }
    }
};

}  // namespace levta::testing

#endif  // LEVTA_TESTS_HELPERS_HPP
