#include "levta/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace levta {

ModelError::ModelError(const std::string& msg, int line)
    : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}

std::string double_to_string(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        auto [p, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
        (void)p;
        if (ec == std::errc() && back == v) break;
    }
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& text, int line) {
    std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ModelError("expected a number, got '" + t + "'", line);
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

/// "[-4, 4] x [-4, 4]" -> Box.
Box parse_box(const std::string& text, int line) {
    Box box;
    for (const std::string& part : split(text, 'x')) {
        std::string t = trim(part);
        if (t.size() < 2 || t.front() != '[' || t.back() != ']')
            throw ModelError("expected an interval '[lo, hi]', got '" + t + "'", line);
        auto ends = split(t.substr(1, t.size() - 2), ',');
        if (ends.size() != 2) throw ModelError("interval needs two endpoints in '" + t + "'", line);
        box.lo.push_back(parse_number(ends[0], line));
        box.hi.push_back(parse_number(ends[1], line));
    }
    return box;
}

struct KeyValue {
    std::string value;
    int line = 0;
};

using BlockBody = std::map<std::string, KeyValue>;

}  // namespace

std::vector<PartitionFunction> ModelFile::make_partition_functions() const {
    std::vector<PartitionFunction> out;
    for (const PartitionBlock& pb : partitions)
        out.push_back(PartitionFunction::make(pb.name, pb.phi, pb.levels, system));
    return out;
}

ModelFile parse_model(const std::string& text, const std::string& origin) {
    (void)origin;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;

    struct Block {
        std::string kind;  // system | partition | options
        std::string name;  // partition name
        BlockBody body;
        int line = 0;
    };
    std::vector<Block> blocks;
    Block* open = nullptr;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (!open) {
            if (line.back() != '{')
                throw ModelError("expected a block header 'name {', got '" + line + "'", line_no);
            std::istringstream hdr(trim(line.substr(0, line.size() - 1)));
            Block b;
            b.line = line_no;
            hdr >> b.kind;
            hdr >> b.name;
            if (b.kind != "system" && b.kind != "partition" && b.kind != "options")
                throw ModelError("unknown block '" + b.kind + "'", line_no);
            if (b.kind == "partition" && b.name.empty())
                throw ModelError("partition block needs a name", line_no);
            if (b.kind != "partition" && !b.name.empty())
                throw ModelError("unexpected name after '" + b.kind + "'", line_no);
            blocks.push_back(std::move(b));
            open = &blocks.back();
            continue;
        }
        if (line == "}") {
            open = nullptr;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ModelError("expected 'key = value' inside a block", line_no);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ModelError("expected 'key = value' inside a block", line_no);
        if (open->body.count(key))
            throw ModelError("duplicate key '" + key + "'", line_no);
        open->body[key] = {value, line_no};
    }
    if (open) throw ModelError("unclosed block '" + open->kind + "'", line_no);

    ModelFile m;
    bool have_system = false, have_options = false;
    std::set<std::string> partition_names;

    for (Block& b : blocks) {
        if (b.kind == "system") {
            if (have_system) throw ModelError("more than one system block", b.line);
            have_system = true;
            auto need = [&](const std::string& key) -> const KeyValue& {
                auto it = b.body.find(key);
                if (it == b.body.end())
                    throw ModelError("system block is missing '" + key + "'", b.line);
                return it->second;
            };
            const KeyValue& dim_kv = need("dim");
            double dim_val = parse_number(dim_kv.value, dim_kv.line);
            if (dim_val < 1 || dim_val != std::floor(dim_val))
                throw ModelError("dim must be a positive integer", dim_kv.line);
            m.system.n = static_cast<int>(dim_val);
            for (int i = 1; i <= m.system.n; ++i) {
                const KeyValue& kv = need("f" + std::to_string(i));
                try {
                    m.system.f.push_back(parse_expr(kv.value, m.system.n));
                } catch (const ParseError& e) {
                    throw ModelError(std::string("f") + std::to_string(i) + ": " + e.what(),
                                     kv.line);
                }
            }
            const KeyValue& dom = need("domain");
            m.system.domain = parse_box(dom.value, dom.line);
            if (m.system.domain.dim() != m.system.n)
                throw ModelError("domain has " + std::to_string(m.system.domain.dim()) +
                                     " intervals for dimension " + std::to_string(m.system.n),
                                 dom.line);
            if (auto it = b.body.find("init"); it != b.body.end()) {
                m.system.init_box = parse_box(it->second.value, it->second.line);
                if (m.system.init_box->dim() != m.system.n)
                    throw ModelError("init box dimension mismatch", it->second.line);
            }
            for (const auto& [key, kv] : b.body) {
                if (key == "dim" || key == "domain" || key == "init") continue;
                if (key.size() >= 2 && key[0] == 'f') {
                    bool digits = std::all_of(key.begin() + 1, key.end(), [](char c) {
                        return std::isdigit(static_cast<unsigned char>(c));
                    });
                    if (digits) {
                        int i = std::stoi(key.substr(1));
                        if (i >= 1 && i <= m.system.n) continue;
                    }
                }
                throw ModelError("unknown system key '" + key + "'", kv.line);
            }
            try {
                m.system.validate();
            } catch (const std::exception& e) {
                throw ModelError(std::string("system: ") + e.what(), b.line);
            }
        } else if (b.kind == "partition") {
            if (!have_system)
                throw ModelError("partition '" + b.name + "' appears before the system block",
                                 b.line);
            if (!partition_names.insert(b.name).second)
                throw ModelError("duplicate partition name '" + b.name + "'", b.line);
            PartitionBlock pb;
            pb.name = b.name;
            auto phi_it = b.body.find("phi");
            if (phi_it == b.body.end())
                throw ModelError("partition '" + b.name + "' is missing 'phi'", b.line);
            try {
                pb.phi = parse_expr(phi_it->second.value, m.system.n);
            } catch (const ParseError& e) {
                throw ModelError("partition '" + b.name + "': " + e.what(), phi_it->second.line);
            }
            auto lv_it = b.body.find("levels");
            if (lv_it == b.body.end())
                throw ModelError("partition '" + b.name + "' is missing 'levels'", b.line);
            for (const std::string& part : split(lv_it->second.value, ','))
                pb.levels.push_back(parse_number(part, lv_it->second.line));
            if (pb.levels.size() < 2)
                throw ModelError("partition '" + b.name + "' needs at least 2 levels",
                                 lv_it->second.line);
            for (std::size_t i = 1; i < pb.levels.size(); ++i)
                if (!(pb.levels[i - 1] < pb.levels[i]))
                    throw ModelError("levels of '" + b.name + "' not strictly increasing",
                                     lv_it->second.line);
            for (const auto& [key, kv] : b.body)
                if (key != "phi" && key != "levels")
                    throw ModelError("unknown partition key '" + key + "'", kv.line);
            m.partitions.push_back(std::move(pb));
        } else {  // options
            if (have_options) throw ModelError("more than one options block", b.line);
            have_options = true;
            for (const auto& [key, kv] : b.body) {
                double v = parse_number(kv.value, kv.line);
                auto require_positive_int = [&](const char* what) {
                    if (v < 1 || v != std::floor(v))
                        throw ModelError(std::string(what) + " must be a positive integer",
                                         kv.line);
                    return static_cast<int>(v);
                };
                if (key == "grid") {
                    m.options.grid = require_positive_int("grid");
                    if (m.options.grid < 3) throw ModelError("grid must be >= 3", kv.line);
                } else if (key == "rk4_step") {
                    if (v <= 0) throw ModelError("rk4_step must be positive", kv.line);
                    m.options.rk4_step = v;
                } else if (key == "t_max") {
                    if (v <= 0) throw ModelError("t_max must be positive", kv.line);
                    m.options.t_max = v;
                } else if (key == "seed") {
                    if (v < 0 || v != std::floor(v))
                        throw ModelError("seed must be a nonnegative integer", kv.line);
                    m.options.seed = static_cast<std::uint64_t>(v);
                } else if (key == "tol_complete") {
                    if (v <= 0) throw ModelError("tol_complete must be positive", kv.line);
                    m.options.tol_complete = v;
                } else if (key == "samples_per_level") {
                    m.options.samples_per_level = require_positive_int("samples_per_level");
                } else if (key == "extra_level_pairs") {
                    if (v < 0 || v != std::floor(v))
                        throw ModelError("extra_level_pairs must be a nonnegative integer",
                                         kv.line);
                    m.options.extra_level_pairs = static_cast<int>(v);
                } else {
                    throw ModelError("unknown option '" + key + "'", kv.line);
                }
            }
        }
    }
    if (!have_system) throw ModelError("model has no system block", line_no);

    // Validates level monotonicity against the system dimension as well.
    m.make_partition_functions();
    return m;
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str(), path);
}

std::string print_model(const ModelFile& m) {
    std::ostringstream out;
    out << "system {\n";
    out << "  dim = " << m.system.n << "\n";
    for (int i = 0; i < m.system.n; ++i)
        out << "  f" << (i + 1) << " = " << m.system.f[static_cast<std::size_t>(i)].str() << "\n";
    auto box_str = [](const Box& b) {
        std::ostringstream s;
        for (int i = 0; i < b.dim(); ++i) {
            if (i) s << " x ";
            s << '[' << double_to_string(b.lo[static_cast<std::size_t>(i)]) << ", "
              << double_to_string(b.hi[static_cast<std::size_t>(i)]) << ']';
        }
        return s.str();
    };
    out << "  domain = " << box_str(m.system.domain) << "\n";
    if (m.system.init_box) out << "  init = " << box_str(*m.system.init_box) << "\n";
    out << "}\n";
    for (const PartitionBlock& pb : m.partitions) {
        out << "\npartition " << pb.name << " {\n";
        out << "  phi = " << pb.phi.str() << "\n";
        out << "  levels = ";
        for (std::size_t i = 0; i < pb.levels.size(); ++i)
            out << (i ? ", " : "") << double_to_string(pb.levels[i]);
        out << "\n}\n";
    }
    out << "\noptions {\n";
    out << "  grid = " << m.options.grid << "\n";
    out << "  rk4_step = " << double_to_string(m.options.rk4_step) << "\n";
    out << "  t_max = " << double_to_string(m.options.t_max) << "\n";
    out << "  seed = " << m.options.seed << "\n";
    out << "  tol_complete = " << double_to_string(m.options.tol_complete) << "\n";
    out << "  samples_per_level = " << m.options.samples_per_level << "\n";
    out << "  extra_level_pairs = " << m.options.extra_level_pairs << "\n";
    out << "}\n";
    return out.str();
}

}  // namespace levta
