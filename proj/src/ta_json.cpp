#include "levta/ta_json.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace levta {

using nlohmann::json;

SchemaError::SchemaError(const std::string& msg, const std::string& pointer)
    : std::runtime_error(msg + " (at " + pointer + ")"), pointer_(pointer) {}

namespace {

/// 17 significant digits reproduce any double exactly.
std::string constant_string(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double constant_from_string(const std::string& s, const std::string& ptr) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        throw SchemaError("constant is not a decimal string", ptr);
    return v;
}

Rel rel_from_string(const std::string& s, const std::string& ptr) {
    for (Rel r : {Rel::Le, Rel::Lt, Rel::Eq, Rel::Gt, Rel::Ge})
        if (s == rel_name(r)) return r;
    throw SchemaError("unknown relation '" + s + "'", ptr);
}

json constraint_to_json(const TimedAutomaton& ta, const ClockConstraint& c) {
    json out = json::array();
    for (const ClockAtom& a : c.atoms)
        out.push_back({{"clock", ta.clocks[static_cast<std::size_t>(a.clock)]},
                       {"rel", rel_name(a.rel)},
                       {"k", constant_string(a.bound)}});
    return out;
}

ClockConstraint constraint_from_json(const TimedAutomaton& ta, const json& j,
                                     const std::string& ptr) {
    if (!j.is_array()) throw SchemaError("constraint must be an array", ptr);
    ClockConstraint c;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string aptr = ptr + "/" + std::to_string(i);
        const json& a = j[i];
        if (!a.is_object() || !a.contains("clock") || !a.contains("rel") || !a.contains("k"))
            throw SchemaError("atom needs clock, rel, k", aptr);
        int clock = ta.clock_index(a["clock"].get<std::string>());
        if (clock < 0) throw SchemaError("unknown clock '" + a["clock"].get<std::string>() + "'",
                                         aptr + "/clock");
        double k;
        if (a["k"].is_string()) k = constant_from_string(a["k"].get<std::string>(), aptr + "/k");
        else if (a["k"].is_number()) k = a["k"].get<double>();
        else throw SchemaError("k must be a decimal string", aptr + "/k");
        c.atoms.push_back({clock, rel_from_string(a["rel"].get<std::string>(), aptr + "/rel"), k});
    }
    return c;
}

}  // namespace

std::string ta_to_json(const TimedAutomaton& ta) {
    json j;
    j["clocks"] = ta.clocks;
    j["symbols"] = ta.symbols;
    j["locations"] = json::array();
    for (const TaLocation& loc : ta.locations) {
        json l;
        l["id"] = loc.id;
        l["g"] = loc.g;
        l["h"] = loc.h;
        l["invariant"] = constraint_to_json(ta, loc.invariant);
        j["locations"].push_back(std::move(l));
    }
    j["initial"] = json::array();
    for (int e0 : ta.initial) j["initial"].push_back(ta.locations[static_cast<std::size_t>(e0)].id);
    j["edges"] = json::array();
    for (const TaEdge& e : ta.edges) {
        json je;
        je["src"] = ta.locations[static_cast<std::size_t>(e.src)].id;
        je["dst"] = ta.locations[static_cast<std::size_t>(e.dst)].id;
        je["symbol"] = ta.symbols[static_cast<std::size_t>(e.symbol)];
        je["guard"] = constraint_to_json(ta, e.guard);
        json resets = json::array();
        for (int c : e.resets) resets.push_back(ta.clocks[static_cast<std::size_t>(c)]);
        je["reset"] = std::move(resets);
        j["edges"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

TimedAutomaton ta_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what(), "/");
    }
    auto need = [&](const json& obj, const char* key, const std::string& ptr) -> const json& {
        if (!obj.is_object() || !obj.contains(key))
            throw SchemaError(std::string("missing '") + key + "'", ptr);
        return obj[key];
    };

    TimedAutomaton ta;
    for (const json& c : need(j, "clocks", "/")) ta.clocks.push_back(c.get<std::string>());
    for (const json& s : need(j, "symbols", "/")) ta.symbols.push_back(s.get<std::string>());

    const json& locs = need(j, "locations", "/");
    if (!locs.is_array()) throw SchemaError("locations must be an array", "/locations");
    for (std::size_t i = 0; i < locs.size(); ++i) {
        std::string ptr = "/locations/" + std::to_string(i);
        const json& l = locs[i];
        TaLocation loc;
        loc.id = need(l, "id", ptr).get<std::string>();
        if (l.contains("g"))
            for (const json& gi : l["g"]) loc.g.push_back(gi.get<int>());
        if (l.contains("h")) loc.h = l["h"].get<int>();
        loc.invariant = constraint_from_json(ta, need(l, "invariant", ptr), ptr + "/invariant");
        ta.locations.push_back(std::move(loc));
    }
    for (const json& id : need(j, "initial", "/")) {
        int e0 = ta.location_index(id.get<std::string>());
        if (e0 < 0)
            throw SchemaError("initial location '" + id.get<std::string>() + "' not defined",
                              "/initial");
        ta.initial.push_back(e0);
    }
    const json& edges = need(j, "edges", "/");
    if (!edges.is_array()) throw SchemaError("edges must be an array", "/edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::string ptr = "/edges/" + std::to_string(i);
        const json& je = edges[i];
        TaEdge e;
        e.src = ta.location_index(need(je, "src", ptr).get<std::string>());
        e.dst = ta.location_index(need(je, "dst", ptr).get<std::string>());
        if (e.src < 0 || e.dst < 0) throw SchemaError("edge endpoint not defined", ptr);
        std::string sym = need(je, "symbol", ptr).get<std::string>();
        e.symbol = -1;
        for (std::size_t s = 0; s < ta.symbols.size(); ++s)
            if (ta.symbols[s] == sym) e.symbol = static_cast<int>(s);
        if (e.symbol < 0) throw SchemaError("unknown symbol '" + sym + "'", ptr + "/symbol");
        e.guard = constraint_from_json(ta, need(je, "guard", ptr), ptr + "/guard");
        for (const json& c : need(je, "reset", ptr)) {
            int clock = ta.clock_index(c.get<std::string>());
            if (clock < 0)
                throw SchemaError("unknown clock '" + c.get<std::string>() + "'", ptr + "/reset");
            e.resets.push_back(clock);
        }
        ta.edges.push_back(std::move(e));
    }
    try {
        ta.validate();
    } catch (const std::exception& e) {
        throw SchemaError(e.what(), "/");
    }
    return ta;
}

void export_ta_json(const TimedAutomaton& ta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << ta_to_json(ta);
}

TimedAutomaton import_ta_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ta_from_json(buf.str());
}

std::string constraint_to_string(const TimedAutomaton& ta, const ClockConstraint& c) {
    if (c.atoms.empty()) return "true";
    std::ostringstream out;
    for (std::size_t i = 0; i < c.atoms.size(); ++i) {
        const ClockAtom& a = c.atoms[i];
        if (i) out << " & ";
        out << ta.clocks[static_cast<std::size_t>(a.clock)] << ' ' << rel_name(a.rel) << ' '
            << a.bound;
    }
    return out.str();
}

std::string ta_to_dot(const TimedAutomaton& ta) {
    std::ostringstream out;
    out << "digraph ta {\n  rankdir=LR;\n  node [shape=box];\n";
    std::set<int> initial(ta.initial.begin(), ta.initial.end());
    for (std::size_t i = 0; i < ta.locations.size(); ++i) {
        const TaLocation& loc = ta.locations[i];
        out << "  \"" << loc.id << "\" [label=\"" << loc.id;
        if (!loc.invariant.atoms.empty())
            out << "\\n" << constraint_to_string(ta, loc.invariant);
        out << '"';
        if (initial.count(static_cast<int>(i))) out << ", penwidth=2";
        out << "];\n";
    }
    for (const TaEdge& e : ta.edges) {
        out << "  \"" << ta.locations[static_cast<std::size_t>(e.src)].id << "\" -> \""
            << ta.locations[static_cast<std::size_t>(e.dst)].id << "\" [label=\""
            << ta.symbols[static_cast<std::size_t>(e.symbol)];
        if (!e.guard.atoms.empty()) out << ": " << constraint_to_string(ta, e.guard);
        if (!e.resets.empty()) {
            out << "; ";
            for (std::size_t i = 0; i < e.resets.size(); ++i)
                out << (i ? ", " : "") << ta.clocks[static_cast<std::size_t>(e.resets[i])]
                    << ":=0";
        }
        out << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace levta
