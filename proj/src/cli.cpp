#include "levta/cli.hpp"

#include "levta/abstraction.hpp"
#include "levta/model.hpp"
#include "levta/ta_json.hpp"
#include "levta/verify.hpp"
#include "levta/zone.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace levta {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerdictFailed = 1;
constexpr int kExitInputError = 2;

// ── Shared pipeline ─────────────────────────────────────────────────────────

struct Pipeline {
    ModelFile model;
    std::vector<PartitionFunction> pfs;
    std::optional<GridSampling> grid;
    std::optional<Partition> partition;
    std::vector<TransitTimeTable> tables;
    std::optional<TimedAutomaton> ta;

    explicit Pipeline(const std::string& path) : model(load_model(path)) {
        pfs = model.make_partition_functions();
        grid.emplace(model.system.domain, model.options.grid);
    }

    TransitOptions transit_options() const {
        TransitOptions t;
        t.samples_per_level = model.options.samples_per_level;
        t.t_max = model.options.t_max;
        t.h = model.options.rk4_step;
        return t;
    }

    void build_partition() {
        if (partition) return;
        if (pfs.empty()) throw std::runtime_error("the model declares no partition block");
        partition.emplace(build_cells(pfs, *grid));
    }

    void build_tables() {
        if (!tables.empty()) return;
        for (const PartitionFunction& pf : pfs)
            tables.push_back(estimate_transit_times(model.system, pf, *grid, transit_options()));
    }

    void build_ta() {
        if (ta) return;
        build_partition();
        build_tables();
        GenerateOptions g;
        g.seed = model.options.seed;
        ta.emplace(generate_ta(*partition, tables, model.system, g));
    }
};

std::string csv_point(const Vec& x) {
    std::ostringstream out;
    for (std::size_t i = 0; i < x.size(); ++i) out << (i ? "," : "") << double_to_string(x[i]);
    return out.str();
}

void print_witness(std::ostream& out, const Witness& w) {
    out << "    witness";
    if (!w.point.empty()) {
        out << " at (";
        for (std::size_t i = 0; i < w.point.size(); ++i)
            out << (i ? ", " : "") << double_to_string(w.point[i]);
        out << ")";
    }
    if (!std::isnan(w.value)) out << " value " << double_to_string(w.value);
    if (!std::isnan(w.time)) out << " time " << double_to_string(w.time);
    if (!w.note.empty()) out << ": " << w.note;
    out << "\n";
}

// ── verify ──────────────────────────────────────────────────────────────────

struct NamedVerdict {
    std::string name;
    Verdict verdict;
};

json verdict_to_json(const NamedVerdict& nv) {
    const Verdict& v = nv.verdict;
    json jw = json::array();
    for (const Witness& w : v.witnesses) {
        json e;
        e["point"] = w.point;
        e["value"] = std::isnan(w.value) ? json() : json(w.value);
        e["time"] = std::isnan(w.time) ? json() : json(w.time);
        e["note"] = w.note;
        jw.push_back(std::move(e));
    }
    return json{{"name", nv.name},
                {"kind", verdict_kind_name(v.kind)},
                {"pass", v.pass},
                {"applicable", v.applicable},
                {"tolerances", v.tolerances},
                {"coverage", v.coverage},
                {"witnesses", std::move(jw)}};
}

struct VerifyFlags {
    std::string check = "all";
    std::string json_path;
    int traj = 200;
    double t_end = 2.0;
    int times = 50;
};

std::vector<NamedVerdict> run_checks(Pipeline& p, const VerifyFlags& flags) {
    std::vector<NamedVerdict> results;
    const ModelOptions& opts = p.model.options;
    const DynSystem& sys = p.model.system;
    bool want_all = flags.check == "all";
    auto want = [&](const char* name) { return want_all || flags.check == name; };

    std::vector<Verdict> nonincreasing;
    for (const PartitionFunction& pf : p.pfs)
        nonincreasing.push_back(validate_nonincreasing(pf, sys, *p.grid));
    if (want_all)
        for (std::size_t i = 0; i < p.pfs.size(); ++i)
            results.push_back({"nonincreasing " + p.pfs[i].name, nonincreasing[i]});
    bool all_nonincreasing =
        std::all_of(nonincreasing.begin(), nonincreasing.end(),
                    [](const Verdict& v) { return v.pass; });

    auto reject_not_nonincreasing = [&](VerdictKind kind, const std::string& name) {
        for (std::size_t i = 0; i < p.pfs.size(); ++i) {
            if (nonincreasing[i].pass) continue;
            Verdict v = nonincreasing[i];
            v.kind = kind;
            v.coverage = "partition function '" + p.pfs[i].name +
                         "' is not nonincreasing; " + name + " not evaluated";
            results.push_back({name + " (rejected)", std::move(v)});
        }
    };

    if (want("complete")) {
        if (!all_nonincreasing) {
            reject_not_nonincreasing(VerdictKind::Complete, "complete");
        } else {
            p.build_tables();
            CompletenessOptions c;
            c.extra_level_pairs = opts.extra_level_pairs;
            c.tol_abs = opts.tol_complete;
            c.samples_per_level = opts.samples_per_level;
            c.t_max = opts.t_max;
            c.h = opts.rk4_step;
            c.seed = opts.seed;
            results.push_back(
                {"complete", check_completeness(sys, p.pfs, p.tables, *p.grid, c)});
        }
    }
    if (want("sound")) {
        if (!all_nonincreasing) {
            reject_not_nonincreasing(VerdictKind::Sound, "sound");
        } else {
            p.build_ta();
            SoundnessOptions s;
            s.n_traj = flags.traj;
            s.t_grid = linspace(0.0, flags.t_end, flags.times);
            s.seed = opts.seed;
            s.h = opts.rk4_step;
            results.push_back({"sound", check_soundness(sys, *p.partition, *p.ta, s)});
        }
    }
    if (want("prop2")) {
        for (const PartitionFunction& pf : p.pfs)
            for (double a : pf.levels) {
                if (!std::isfinite(a)) continue;
                std::ostringstream name;
                name << "prop2 " << pf.name << " a=" << double_to_string(a);
                results.push_back({name.str(), check_levelset_sync(sys, pf, a,
                                                                   opts.samples_per_level,
                                                                   *p.grid)});
            }
    }
    if (want("lemma1")) {
        for (const PartitionFunction& pf : p.pfs)
            results.push_back({"lemma1 " + pf.name, check_critical_points(sys, pf)});
    }
    if (want("theorem1")) {
        if (sys.n != 2) {
            Verdict v;
            v.kind = VerdictKind::ManifoldContainment;
            v.applicable = false;
            v.coverage = "manifold containment check requires a planar system";
            results.push_back({"theorem1", std::move(v)});
        } else {
            auto equilibria = find_equilibria(sys);
            bool any_saddle = false;
            for (const Equilibrium& eq : equilibria) {
                if (eq.kind != EquilibriumKind::Saddle) continue;
                any_saddle = true;
                ManifoldCheckOptions m;
                m.h = opts.rk4_step;
                m.t_horizon = opts.t_max;
                for (const PartitionFunction& pf : p.pfs) {
                    std::ostringstream name;
                    name << "theorem1 " << pf.name << " saddle (";
                    for (std::size_t i = 0; i < eq.point.size(); ++i)
                        name << (i ? ", " : "") << double_to_string(eq.point[i]);
                    name << ")";
                    results.push_back({name.str(), check_unstable_manifold_containment(
                                                       sys, pf, eq, *p.grid, m)});
                }
            }
            if (!any_saddle) {
                Verdict v;
                v.kind = VerdictKind::ManifoldContainment;
                v.applicable = false;
                v.coverage = "no saddle equilibrium found in the domain";
                results.push_back({"theorem1", std::move(v)});
            }
        }
    }
    return results;
}

// ── Subcommand bodies ───────────────────────────────────────────────────────

int cmd_validate(const std::string& model_path, std::ostream& out) {
    Pipeline p(model_path);
    bool all_pass = true;
    for (const PartitionFunction& pf : p.pfs) {
        Verdict v = validate_nonincreasing(pf, p.model.system, *p.grid);
        all_pass = all_pass && v.pass;
        out << (v.pass ? "[PASS]" : "[FAIL]") << " nonincreasing " << pf.name << ": "
            << v.coverage << "\n";
        if (!v.pass)
            for (const Witness& w : v.witnesses) print_witness(out, w);

        auto crit = critical_values_on_grid(pf, *p.grid);
        out << "  critical values of " << pf.name << " on the grid:";
        if (crit.empty()) out << " none";
        for (double c : crit) out << ' ' << double_to_string(c);
        out << "\n";

        auto vals = p.grid->evaluate(pf.phi);
        auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
        out << "  range of " << pf.name << " over the domain: [" << double_to_string(*mn)
            << ", " << double_to_string(*mx) << "], levels span ["
            << double_to_string(pf.levels.front()) << ", " << double_to_string(pf.levels.back())
            << "]";
        if (*mn < pf.levels.front() || *mx > pf.levels.back())
            out << "  ** levels do not cover the value range **";
        out << "\n";
    }
    for (const std::string& w : transversality_warnings(p.pfs, *p.grid))
        out << "  warning: " << w << "\n";
    return all_pass ? kExitOk : kExitVerdictFailed;
}

int cmd_partition(const std::string& model_path, const std::string& csv_path,
                  std::ostream& out) {
    Pipeline p(model_path);
    p.build_partition();
    const Partition& part = *p.partition;

    std::set<std::vector<int>> extended;
    for (const Cell& c : part.cells) extended.insert(c.g);
    out << part.families.size() << " slice-families, " << extended.size()
        << " extended cells, " << part.cells.size() << " cells, " << part.adjacency.size()
        << " adjacency pairs";
    if (!part.uncovered.empty())
        out << ", " << part.uncovered.size() << " uncovered grid points";
    out << "\n";
    for (const Cell& c : part.cells)
        out << "  " << c.id() << ": " << c.points.size() << " grid points\n";

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot write '" + csv_path + "'");
        csv << "flat_index";
        for (int i = 1; i <= p.model.system.n; ++i) csv << ",x" << i;
        csv << ",cell_id";
        for (std::size_t i = 0; i < part.families.size(); ++i) csv << ",g" << (i + 1);
        csv << ",h\n";
        for (const Cell& c : part.cells)
            for (std::uint32_t pt : c.points) {
                csv << pt << ',' << csv_point(part.grid.point(pt)) << ',' << c.id();
                for (int gi : c.g) csv << ',' << gi;
                csv << ',' << c.h << "\n";
            }
        out << "cell membership written to " << csv_path << "\n";
    }
    return kExitOk;
}

int cmd_abstract(const std::string& model_path, const std::string& out_path,
                 const std::string& dot_path, std::ostream& out) {
    Pipeline p(model_path);
    p.build_ta();
    for (const TransitTimeTable& table : p.tables) {
        out << "transit times for " << table.family << ":\n";
        for (std::size_t s = 0; s < table.entries.size(); ++s) {
            const TransitEntry& e = table.entries[s];
            out << "  slice " << (s + 1) << ": t_low = " << double_to_string(e.t_low)
                << ", t_high = "
                << (std::isfinite(e.t_high) ? double_to_string(e.t_high) : "inf") << " ("
                << e.crossed << "/" << e.samples << " samples crossed";
            if (e.critical) out << ", critical";
            if (e.empty_level) out << ", empty level";
            if (e.unbounded) out << ", unbounded";
            out << ")\n";
        }
    }
    out << "automaton: " << p.ta->locations.size() << " locations, " << p.ta->clocks.size()
        << " clocks, " << p.ta->edges.size() << " transitions, " << p.ta->initial.size()
        << " initial\n";
    export_ta_json(*p.ta, out_path);
    out << "written to " << out_path << "\n";
    if (!dot_path.empty()) {
        std::ofstream dot(dot_path);
        if (!dot) throw std::runtime_error("cannot write '" + dot_path + "'");
        dot << ta_to_dot(*p.ta);
        out << "dot graph written to " << dot_path << "\n";
    }
    return kExitOk;
}

int cmd_simulate(const std::string& input, bool ode, bool ta_mode, const std::string& from,
                 double t, std::uint64_t seed, bool seed_given, const std::string& out_path,
                 std::ostream& out) {
    bool is_json = input.size() > 5 && input.substr(input.size() - 5) == ".json";
    if (ode && ta_mode) throw CLI::ValidationError("--ode and --ta are mutually exclusive");
    bool use_ta = ta_mode || (!ode && is_json);

    std::ofstream file;
    std::ostream* dst = &out;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write '" + out_path + "'");
        dst = &file;
    }

    if (use_ta) {
        TimedAutomaton ta = import_ta_json(input);
        int e0 = ta.location_index(from);
        if (e0 < 0) throw std::runtime_error("unknown location '" + from + "'");
        Run run = simulate_run(ta, e0, seed, t);
        *dst << "segment,location,enter_time,dwell,exit_symbol,note\n";
        double enter = 0.0;
        for (std::size_t i = 0; i < run.segments.size(); ++i) {
            const RunSegment& s = run.segments[i];
            std::string sym;
            if (s.exit_edge >= 0)
                sym = ta.symbols[static_cast<std::size_t>(
                    ta.edges[static_cast<std::size_t>(s.exit_edge)].symbol)];
            bool last = i + 1 == run.segments.size();
            *dst << i << ',' << ta.locations[static_cast<std::size_t>(s.location)].id << ','
                 << double_to_string(enter) << ',' << double_to_string(s.dwell) << ',' << sym
                 << ',' << (last && run.deadlocked ? "deadlock" : "") << "\n";
            enter += s.dwell;
        }
        return kExitOk;
    }

    ModelFile model = load_model(input);
    Vec x0;
    std::string cur;
    for (std::size_t i = 0; i <= from.size(); ++i) {
        if (i < from.size() && from[i] != ',') {
            cur += from[i];
            continue;
        }
        try {
            x0.push_back(std::stod(cur));
        } catch (const std::exception&) {
            throw std::runtime_error("bad coordinate '" + cur + "' in --from");
        }
        cur.clear();
    }
    if (static_cast<int>(x0.size()) != model.system.n)
        throw std::runtime_error("--from needs " + std::to_string(model.system.n) +
                                 " comma-separated coordinates");
    if (!model.system.domain.contains(x0))
        throw std::runtime_error("--from is outside the domain box");
    (void)seed_given;
    FlowSample fs = flow(model.system, x0, t, model.options.rk4_step);
    *dst << 't';
    for (int i = 1; i <= model.system.n; ++i) *dst << ",x" << i;
    *dst << "\n";
    for (std::size_t i = 0; i < fs.times.size(); ++i)
        *dst << double_to_string(fs.times[i]) << ',' << csv_point(fs.states[i]) << "\n";
    if (fs.truncated) out << "# trajectory left the domain, truncated\n";
    return kExitOk;
}

int cmd_verify(const std::string& model_path, const VerifyFlags& flags, std::ostream& out) {
    Pipeline p(model_path);
    if (p.pfs.empty()) throw std::runtime_error("the model declares no partition block");
    auto results = run_checks(p, flags);
    bool all_ok = true;
    for (const NamedVerdict& nv : results) {
        const Verdict& v = nv.verdict;
        const char* tag = !v.applicable ? "[N/A ]" : v.pass ? "[PASS]" : "[FAIL]";
        all_ok = all_ok && v.ok();
        out << tag << ' ' << nv.name << ": " << v.coverage << "\n";
        if (!v.pass && v.applicable)
            for (const Witness& w : v.witnesses) print_witness(out, w);
    }
    if (!flags.json_path.empty()) {
        json report;
        report["checks"] = json::array();
        for (const NamedVerdict& nv : results) report["checks"].push_back(verdict_to_json(nv));
        report["all_pass"] = all_ok;
        std::ofstream jf(flags.json_path);
        if (!jf) throw std::runtime_error("cannot write '" + flags.json_path + "'");
        jf << report.dump(2) << "\n";
        out << "report written to " << flags.json_path << "\n";
    }
    return all_ok ? kExitOk : kExitVerdictFailed;
}

int cmd_export(const std::string& ta_path, const std::string& dot_path, std::ostream& out) {
    TimedAutomaton ta = import_ta_json(ta_path);
    std::ofstream dot(dot_path);
    if (!dot) throw std::runtime_error("cannot write '" + dot_path + "'");
    dot << ta_to_dot(ta);
    out << "dot graph written to " << dot_path << "\n";
    return kExitOk;
}

}  // namespace

// ── Dispatch ────────────────────────────────────────────────────────────────

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"level-set partitions, timed-automaton abstractions, and their verification"};
    app.require_subcommand(1);

    std::string model_path, input_path, ta_path;
    std::string csv_path, out_path, dot_path, from;
    double t = 1.0;
    std::uint64_t seed = 42;
    bool ode = false, ta_mode = false;
    VerifyFlags vflags;

    CLI::App* validate = app.add_subcommand("validate", "check the partitioning functions");
    validate->add_option("model", model_path, "model file")->required();

    CLI::App* partition = app.add_subcommand("partition", "build the cell partition");
    partition->add_option("model", model_path, "model file")->required();
    partition->add_option("--csv", csv_path, "write cell membership CSV");

    CLI::App* abstract_cmd =
        app.add_subcommand("abstract", "estimate transit times and generate the automaton");
    abstract_cmd->add_option("model", model_path, "model file")->required();
    abstract_cmd->add_option("-o,--output", out_path, "output JSON path")->required();
    abstract_cmd->add_option("--dot", dot_path, "also write a GraphViz dot file");

    CLI::App* simulate =
        app.add_subcommand("simulate", "integrate the ODE or sample an automaton run");
    simulate->add_option("input", input_path, "model file or automaton JSON")->required();
    simulate->add_flag("--ode", ode, "treat the input as a model file");
    simulate->add_flag("--ta", ta_mode, "treat the input as automaton JSON");
    simulate->add_option("--from", from, "initial state 'x1,x2,...' or location id")->required();
    simulate->add_option("-t,--time", t, "time horizon")->required();
    auto* seed_opt = simulate->add_option("--seed", seed, "run-sampling seed");
    simulate->add_option("-o,--output", out_path, "write CSV here instead of stdout");

    CLI::App* verify = app.add_subcommand("verify", "run the abstraction checks");
    verify->add_option("model", model_path, "model file")->required();
    verify->add_option("--check", vflags.check, "sound|complete|prop2|lemma1|theorem1|all")
        ->check(CLI::IsMember({"sound", "complete", "prop2", "lemma1", "theorem1", "all"}));
    verify->add_option("--json", vflags.json_path, "write a JSON report");
    verify->add_option("--traj", vflags.traj, "trajectories for the soundness check");
    verify->add_option("--t-end", vflags.t_end, "soundness horizon");
    verify->add_option("--times", vflags.times, "probe times for the soundness check");

    CLI::App* export_cmd = app.add_subcommand("export", "convert automaton JSON to dot");
    export_cmd->add_option("ta", ta_path, "automaton JSON")->required();
    export_cmd->add_option("--dot", dot_path, "output dot path")->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (validate->parsed()) return cmd_validate(model_path, out);
        if (partition->parsed()) return cmd_partition(model_path, csv_path, out);
        if (abstract_cmd->parsed()) return cmd_abstract(model_path, out_path, dot_path, out);
        if (simulate->parsed())
            return cmd_simulate(input_path, ode, ta_mode, from, t, seed, !seed_opt->empty(),
                                out_path, out);
        if (verify->parsed()) return cmd_verify(model_path, vflags, out);
        if (export_cmd->parsed()) return cmd_export(ta_path, dot_path, out);
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace levta
