// ============================================================================
// levta/ta_json.hpp — timed-automaton serialization: JSON schema and
// GraphViz dot
// ============================================================================

#ifndef LEVTA_TA_JSON_HPP
#define LEVTA_TA_JSON_HPP

#include "levta/ta.hpp"

#include <stdexcept>
#include <string>

namespace levta {

/// JSON schema violation, annotated with a JSON-pointer-like path.
class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& msg, const std::string& pointer);
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

/// Schema:
///   {"clocks": ["c1", ...], "symbols": ["s1", ...],
///    "locations": [{"id", "g": [int...], "h": int,
///                   "invariant": [{"clock", "rel", "k"}...]}...],
///    "initial": ["id"...],
///    "edges": [{"src", "dst", "symbol", "guard": [...], "reset": ["c1"...]}...]}
/// Constants k are decimal strings with 17 significant digits, so a
/// round trip reproduces them bit-exactly.
std::string ta_to_json(const TimedAutomaton& ta);
TimedAutomaton ta_from_json(const std::string& text);

void export_ta_json(const TimedAutomaton& ta, const std::string& path);
TimedAutomaton import_ta_json(const std::string& path);

/// GraphViz digraph of the location graph; edges carry the symbol and
/// guard, locations their id and invariant.
std::string ta_to_dot(const TimedAutomaton& ta);

std::string constraint_to_string(const TimedAutomaton& ta, const ClockConstraint& c);

}  // namespace levta

#endif  // LEVTA_TA_JSON_HPP
