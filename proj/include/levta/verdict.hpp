// ============================================================================
// levta/verdict.hpp — structured result of a numerical check
// ============================================================================

#ifndef LEVTA_VERDICT_HPP
#define LEVTA_VERDICT_HPP

#include <limits>
#include <string>
#include <vector>

namespace levta {

enum class VerdictKind {
    Nonincreasing,
    Sound,
    Complete,
    LevelsetSync,
    CriticalPoints,
    ManifoldContainment,
    Invariance
};

const char* verdict_kind_name(VerdictKind kind);

/// A point (and optional value/time) substantiating a verdict.
struct Witness {
    std::vector<double> point;
    double value = std::numeric_limits<double>::quiet_NaN();
    double time = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

/// Outcome of one check. `applicable` is false when the check refuses to
/// judge (critical level value, empty level set, unmet hypothesis); such
/// verdicts do not count as failures.
struct Verdict {
    VerdictKind kind = VerdictKind::Nonincreasing;
    bool pass = false;
    bool applicable = true;
    std::vector<Witness> witnesses;
    std::string tolerances;
    std::string coverage;

    /// Pass, or not applicable.
    bool ok() const { return pass || !applicable; }
};

}  // namespace levta

#endif  // LEVTA_VERDICT_HPP
