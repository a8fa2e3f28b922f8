#include <orbcsp/workspace.hh>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using std::cerr;
using std::cout;
using std::optional;
using std::string;
using std::vector;

using namespace orbcsp;

namespace
{
    enum ExitCode
    {
        exit_sat = 0,
        exit_unsat = 1,
        exit_hard = 2,
        exit_input = 3
    };

    struct Flags
    {
        string core, language, out, trace, dot, emit_witness, first, second;
        vector<string> instances;
        optional<std::uint64_t> seed;
        bool oracle = false, no_check = false;
        int arity = 3, threads = 1, max_vars = 4, max_constraints = 2, max_instances = 20000,
            cap = default_oracle_cap, first_index = 0, second_index = 0;
    };

    // Paths that do not exist as given are looked up in the corpus directory.
    auto resolve(const string & path) -> string
    {
        if (path.empty() || std::filesystem::exists(path))
            return path;
        if (auto corpus = std::getenv("ORBCSP_CORPUS")) {
            auto p = std::filesystem::path(corpus) / path;
            if (std::filesystem::exists(p))
                return p.string();
        }
        return path;
    }

    auto load(const Flags & f, bool need_language, int need_instances) -> Workspace
    {
        if (f.core.empty())
            throw InputError("--core is required");
        if (need_language && f.language.empty())
            throw InputError("--language is required");
        if (int(f.instances.size()) < need_instances)
            throw InputError("--instance is required");
        WorkspacePaths paths{resolve(f.core), resolve(f.language), {}};
        for (auto & i : f.instances)
            paths.instances.push_back(resolve(i));
        return load_workspace(paths);
    }

    auto emit(const Flags & f, const Json & j) -> void
    {
        if (f.out.empty())
            cout << j.dump(2) << "\n";
        else
            write_json_file(f.out, j);
    }

    auto write_text(const string & path, const string & text) -> void
    {
        std::ofstream out(path);
        if (! out)
            throw InputError(path + ": cannot write file");
        out << text;
    }

    auto run_validate(const Flags & f) -> int
    {
        auto ws = load(f, false, 0);
        Json j;
        j["format_version"] = format_version;
        j["core"] = ws.core.name;
        j["orbitals"] = ws.core.signature.size();
        j["bounds"] = ws.core.bounds.size();
        j["liberal"] = is_liberal(ws.core);
        j["max_bound"] = max_bound(ws.core);
        j["relations"] = Json::array();
        for (auto & r : ws.language)
            j["relations"].push_back({{"name", r.name}, {"arity", r.arity}, {"orbits", r.size()}});
        j["instances"] = Json::array();
        for (auto & [path, inst] : ws.instances)
            j["instances"].push_back({{"file", path}, {"variables", inst.variable_count()},
                    {"constraints", inst.constraints.size()}});
        emit(f, j);
        return exit_sat;
    }

    auto run_orbits(const Flags & f) -> int
    {
        auto ws = load(f, false, 0);
        if (f.arity < 1 || f.arity > max_arity)
            throw InputError("--arity must be between 1 and " + std::to_string(max_arity));
        auto orbits = enumerate_orbits(ws.core, f.arity);
        Json j;
        j["format_version"] = format_version;
        j["arity"] = f.arity;
        j["count"] = orbits.size();
        j["orbits"] = Json::array();
        for (auto & o : orbits)
            j["orbits"].push_back(orbit_to_json(ws.core.signature, o));
        emit(f, j);
        return exit_sat;
    }

    auto run_minimize(const Flags & f) -> int
    {
        auto ws = load(f, false, 1);
        auto & inst = ws.instances.front().second;
        MinimalityOptions opts{2, max_bound(ws.core), f.seed, ! f.trace.empty()};
        auto m = establish_minimality(inst, ws.core, opts);
        if (! f.trace.empty())
            write_text(f.trace, removal_trace_to_jsonl(ws.core.signature, m.instance, m.trace));
        Json j;
        j["format_version"] = format_version;
        j["trivial"] = m.trivial;
        j["padding_added"] = m.padding_added;
        j["removed"] = m.trace.size();
        j["instance"] = instance_to_json(ws.core.signature, m.instance, ws.language);
        emit(f, j);
        return m.trivial ? exit_unsat : exit_sat;
    }

    auto run_solve(const Flags & f) -> int
    {
        auto ws = load(f, false, 1);
        auto & inst = ws.instances.front().second;
        auto & sig = ws.core.signature;
        auto result = solve(inst, ws.core, SolveOptions{! f.no_check});
        auto j = solve_result_to_json(sig, inst, result);

        if (f.oracle) {
            auto cert = brute_force_solve(inst, ws.core, f.cap);
            Json o;
            o["sat"] = cert.has_value();
            o["certificate"] = cert ? certificate_to_json(sig, inst, *cert) : Json(nullptr);
            bool agree = result.verdict == Verdict::Hard || (result.verdict == Verdict::Sat) == cert.has_value();
            o["agrees"] = agree;
            if (result.verdict == Verdict::Hard)
                o["note"] = "the solver stopped on a cycle; the oracle decides the instance";
            j["oracle"] = o;
            if (! agree)
                cerr << "orbcsp: solver and oracle disagree\n";
        }
        if (! f.trace.empty()) {
            string lines;
            for (auto & e : result.trace)
                lines += Json{{"kind", e.kind}, {"detail", e.detail}}.dump() + "\n";
            write_text(f.trace, lines);
        }
        emit(f, j);
        switch (result.verdict) {
            case Verdict::Sat: return exit_sat;
            case Verdict::Unsat: return exit_unsat;
            case Verdict::Hard: return exit_hard;
        }
        return exit_input;
    }

    auto run_oracle(const Flags & f) -> int
    {
        auto ws = load(f, false, 1);
        auto & inst = ws.instances.front().second;
        auto cert = brute_force_solve(inst, ws.core, f.cap);
        Json j;
        j["format_version"] = format_version;
        j["verdict"] = cert ? "SAT" : "UNSAT";
        j["certificate"] = cert ? certificate_to_json(ws.core.signature, inst, *cert) : Json(nullptr);
        emit(f, j);
        return cert ? exit_sat : exit_unsat;
    }

    auto run_impgraph(const Flags & f) -> int
    {
        auto ws = load(f, false, 1);
        auto & sig = ws.core.signature;
        auto prepared = prepare_instance(ws.instances.front().second, ws.core);
        if (! prepared) {
            Json j{{"format_version", format_version}, {"trivial", true}};
            emit(f, j);
            return exit_unsat;
        }
        auto g = build_graph(prepared->instance);
        auto j = graph_to_json(prepared->instance, sig, g);
        j["trivial"] = false;
        j["instance"] = instance_to_json(sig, prepared->instance, ws.language);
        if (! f.dot.empty())
            write_text(f.dot, graph_to_dot(prepared->instance, sig, g));
        emit(f, j);
        return exit_sat;
    }

    auto run_analyze(const Flags & f) -> int
    {
        auto ws = load(f, true, 0);
        AnalyzeOptions opts{f.max_vars, f.max_constraints, f.max_instances, f.threads};
        if (opts.max_vars < 1 || opts.max_constraints < 1 || opts.max_instances < 1 || opts.threads < 1)
            throw InputError("search bounds and --threads must be positive");
        auto report = analyze_language(ws.core, ws.language, opts);
        if (! f.emit_witness.empty() && report.witness)
            write_json_file(f.emit_witness, witness_to_json(ws.core.signature, *report.witness));
        emit(f, report_to_json(ws.core.signature, report));
        return exit_sat;
    }

    auto pick(const BinaryCore & core, const vector<Relation> & language, const string & name, int index)
        -> ImplicationDesc
    {
        auto it = std::find_if(language.begin(), language.end(), [&] (const Relation & r) { return r.name == name; });
        if (it == language.end())
            throw InputError("no relation named " + name + " in the language");
        vector<LabelSet> known{core.signature.full_set()};
        for (int c = 0 ; c <= core.signature.size() ; ++c)
            known.push_back(code_bit(c));
        auto descs = classify_implication(*it, std::nullopt, std::nullopt, known);
        if (descs.empty())
            throw InputError(name + " is not an implication");
        if (index < 0 || index >= int(descs.size()))
            throw InputError(name + " has " + std::to_string(descs.size()) + " implication readings");
        return descs[index];
    }

    auto desc_to_json(const CoreSignature & sig, const ImplicationDesc & d) -> Json
    {
        return {{"c", label_set_to_json(sig, d.c)}, {"d", label_set_to_json(sig, d.d)},
            {"c1", label_set_to_json(sig, d.c1)}, {"d1", label_set_to_json(sig, d.d1)}, {"l", arrow_name(d.l)},
            {"p", arrow_name(d.p)}, {"relation", relation_to_json(sig, d.relation)}};
    }

    auto run_compose(const Flags & f) -> int
    {
        auto ws = load(f, true, 0);
        auto & sig = ws.core.signature;
        auto d1 = pick(ws.core, ws.language, f.first, f.first_index);
        auto d2 = pick(ws.core, ws.language, f.second, f.second_index);
        auto d = circ(ws.core, d1, d2);
        Json j;
        j["format_version"] = format_version;
        j["template"] = circ_template(d1, d2);
        j["first"] = desc_to_json(sig, d1);
        j["second"] = desc_to_json(sig, d2);
        j["result"] = desc_to_json(sig, d);
        emit(f, j);
        return exit_sat;
    }
}

auto main(int argc, char * argv[]) -> int
{
    CLI::App app{"Constraint satisfaction over binary cores: minimality, implication graphs, solving and language analysis"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&] (CLI::App * sub) {
        sub->add_option("--core", f.core, "core definition file");
        sub->add_option("--language", f.language, "language file");
        sub->add_option("--instance", f.instances, "instance file");
        sub->add_option("--out", f.out, "write the JSON result here instead of stdout");
        sub->add_option("--threads", f.threads, "worker threads");
        sub->add_option("--seed", f.seed, "seed for randomized choices");
    };

    auto validate = app.add_subcommand("validate", "load and validate a core, language and instances");
    common(validate);
    auto orbits = app.add_subcommand("orbits", "enumerate the orbits of k-tuples");
    common(orbits);
    orbits->add_option("--arity", f.arity, "tuple length");
    auto minimize = app.add_subcommand("minimize", "establish (2, maxbound)-minimality");
    common(minimize);
    minimize->add_option("--trace", f.trace, "removal trace as JSON lines");
    auto solve_cmd = app.add_subcommand("solve", "decide an instance by sink narrowing");
    common(solve_cmd);
    solve_cmd->add_flag("--oracle", f.oracle, "cross-check with exhaustive search");
    solve_cmd->add_option("--trace", f.trace, "solver events as JSON lines");
    solve_cmd->add_option("--cap", f.cap, "variable cap for the oracle");
    solve_cmd->add_flag("--no-check", f.no_check, "skip the per-narrowing minimality check");
    auto oracle = app.add_subcommand("oracle", "decide an instance by exhaustive search");
    common(oracle);
    oracle->add_option("--cap", f.cap, "variable cap");
    auto impgraph = app.add_subcommand("impgraph", "build the implication graph of the prepared instance");
    common(impgraph);
    impgraph->add_option("--dot", f.dot, "also write a DOT rendering");
    auto analyze = app.add_subcommand("analyze", "search small instances for implicational hardness");
    common(analyze);
    analyze->add_option("--max-vars", f.max_vars, "variables per generated instance");
    analyze->add_option("--max-constraints", f.max_constraints, "constraints per generated instance");
    analyze->add_option("--max-instances", f.max_instances, "instance budget");
    analyze->add_option("--emit-witness", f.emit_witness, "write the critical ternary witness here");
    auto compose_cmd = app.add_subcommand("compose", "compose two implications from the language");
    common(compose_cmd);
    compose_cmd->add_option("--first", f.first, "first relation name")->required();
    compose_cmd->add_option("--second", f.second, "second relation name")->required();
    compose_cmd->add_option("--first-index", f.first_index, "which implication reading of the first relation");
    compose_cmd->add_option("--second-index", f.second_index, "which implication reading of the second relation");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp & e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError & e) {
        app.exit(e);
        return exit_input;
    }

    try {
        if (validate->parsed())
            return run_validate(f);
        if (orbits->parsed())
            return run_orbits(f);
        if (minimize->parsed())
            return run_minimize(f);
        if (solve_cmd->parsed())
            return run_solve(f);
        if (oracle->parsed())
            return run_oracle(f);
        if (impgraph->parsed())
            return run_impgraph(f);
        if (analyze->parsed())
            return run_analyze(f);
        if (compose_cmd->parsed())
            return run_compose(f);
    }
    catch (const Error & e) {
        cerr << "orbcsp: " << e.what() << "\n";
        return exit_input;
    }
    catch (const std::exception & e) {
        cerr << "orbcsp: " << e.what() << "\n";
        return exit_input;
    }
    return exit_input;
}
