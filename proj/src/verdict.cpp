#include "levta/verdict.hpp"

namespace levta {

const char* verdict_kind_name(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Nonincreasing: return "nonincreasing";
        case VerdictKind::Sound: return "sound";
        case VerdictKind::Complete: return "complete";
        case VerdictKind::LevelsetSync: return "levelset_sync";
        case VerdictKind::CriticalPoints: return "critical_points";
        case VerdictKind::ManifoldContainment: return "manifold_containment";
        case VerdictKind::Invariance: return "invariance";
    }
    return "?";
}

}  // namespace levta
