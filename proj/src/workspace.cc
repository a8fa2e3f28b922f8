#include <orbcsp/workspace.hh>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

using std::map;
using std::optional;
using std::pair;
using std::string;
using std::to_string;
using std::vector;

namespace orbcsp
{
    namespace
    {
        [[noreturn]] auto fail(const string & where, const string & msg) -> void
        {
            throw InputError(where + ": " + msg);
        }

        auto member(const Json & j, const string & key, const string & where) -> const Json &
        {
            if (! j.is_object())
                fail(where, "expected an object");
            auto it = j.find(key);
            if (it == j.end())
                fail(where, "missing field \"" + key + "\"");
            return *it;
        }

        auto get_int(const Json & j, const string & where) -> int
        {
            if (! j.is_number_integer())
                fail(where, "expected an integer");
            return j.get<int>();
        }

        auto get_string(const Json & j, const string & where) -> string
        {
            if (! j.is_string())
                fail(where, "expected a string");
            return j.get<string>();
        }

        auto get_array(const Json & j, const string & where) -> const Json &
        {
            if (! j.is_array())
                fail(where, "expected an array");
            return j;
        }

        auto orbital_index(const CoreSignature & sig, const Json & j, const string & where) -> int
        {
            auto name = get_string(j, where);
            auto o = sig.find(name);
            if (! o)
                fail(where, "unknown orbital " + name);
            return *o;
        }

        auto check_version(const Json & j, const string & where) -> void
        {
            if (j.is_object() && j.contains("format_version") && j["format_version"] != format_version)
                fail(where + "/format_version", "unsupported format version " + j["format_version"].dump());
        }

        // Labels [[i, j, "orbital"], ...] on pairs i < j of an n-point structure.
        auto labels_from_json(const CoreSignature & sig, int n, const Json & j, const string & where) -> FiniteStructure
        {
            FiniteStructure s(n);
            vector<char> seen(std::size_t(n) * std::size_t(n), 0);
            auto & arr = get_array(j, where);
            for (unsigned k = 0 ; k < arr.size() ; ++k) {
                auto w = where + "/" + to_string(k);
                if (! arr[k].is_array() || arr[k].size() != 3)
                    fail(w, "expected [i, j, \"orbital\"]");
                int a = get_int(arr[k][0], w + "/0"), b = get_int(arr[k][1], w + "/1");
                if (a < 0 || b < 0 || a >= n || b >= n || a == b)
                    fail(w, "invalid pair " + to_string(a) + "," + to_string(b));
                if (seen[a * n + b])
                    fail(w, "pair labelled twice");
                seen[a * n + b] = seen[b * n + a] = 1;
                s.set(sig, a, b, orbital_index(sig, arr[k][2], w + "/2"));
            }
            for (int a = 0 ; a < n ; ++a)
                for (int b = a + 1 ; b < n ; ++b)
                    if (! seen[a * n + b])
                        fail(where, "missing a label on pair " + to_string(a) + "," + to_string(b));
            return s;
        }

        auto labels_to_json(const CoreSignature & sig, const FiniteStructure & s) -> Json
        {
            Json arr = Json::array();
            for (int a = 0 ; a < s.size() ; ++a)
                for (int b = a + 1 ; b < s.size() ; ++b)
                    arr.push_back(Json::array({a, b, sig.orbitals[s.label(a, b)].name}));
            return arr;
        }

        auto with_context(const string & where, auto && f)
        {
            try {
                return f();
            }
            catch (const InputError & e) {
                if (string(e.what()).starts_with(where))
                    throw;
                throw InputError(where + ": " + e.what());
            }
        }

        auto read_text(const string & path) -> string
        {
            std::ifstream in(path);
            if (! in)
                throw InputError(path + ": cannot open file");
            std::ostringstream s;
            s << in.rdbuf();
            return s.str();
        }
    }

    auto read_json_file(const string & path) -> Json
    {
        auto text = read_text(path);
        try {
            return Json::parse(text);
        }
        catch (const Json::parse_error & e) {
            auto upto = std::min<std::size_t>(e.byte, text.size());
            auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
            throw InputError(path + ":" + to_string(line) + ": " + e.what());
        }
    }

    auto write_json_file(const string & path, const Json & j) -> void
    {
        std::ofstream out(path);
        if (! out)
            throw InputError(path + ": cannot write file");
        out << j.dump(2) << "\n";
    }

    auto core_from_json(const Json & j, const string & where) -> BinaryCore
    {
        check_version(j, where);
        BinaryCore core;
        core.name = get_string(member(j, "name", where), where + "/name");

        auto & orbs = get_array(member(j, "orbitals", where), where + "/orbitals");
        vector<string> inverses;
        for (unsigned o = 0 ; o < orbs.size() ; ++o) {
            auto w = where + "/orbitals/" + to_string(o);
            core.signature.orbitals.push_back({get_string(member(orbs[o], "name", w), w + "/name"), -1});
            inverses.push_back(get_string(member(orbs[o], "inverse", w), w + "/inverse"));
        }
        for (unsigned o = 0 ; o < orbs.size() ; ++o) {
            auto inv = core.signature.find(inverses[o]);
            if (! inv)
                fail(where + "/orbitals/" + to_string(o) + "/inverse", "unknown orbital " + inverses[o]);
            core.signature.orbitals[o].inverse = *inv;
        }

        // Bound labels are only meaningful once the involution is known good.
        auto diags = validate_core(core);
        if (! diags.empty())
            with_context(where, [&] { require_valid_core(core); });

        if (j.contains("bounds")) {
            auto & bounds = get_array(j["bounds"], where + "/bounds");
            for (unsigned b = 0 ; b < bounds.size() ; ++b) {
                auto w = where + "/bounds/" + to_string(b);
                int n = get_int(member(bounds[b], "size", w), w + "/size");
                if (n < 0 || n > 16)
                    fail(w + "/size", "bound size must be between 0 and 16");
                core.bounds.push_back(labels_from_json(core.signature, n, member(bounds[b], "labels", w), w + "/labels"));
            }
        }
        with_context(where, [&] { require_valid_core(core); });
        return core;
    }

    auto core_to_json(const BinaryCore & core) -> Json
    {
        Json j;
        j["format_version"] = format_version;
        j["name"] = core.name;
        j["orbitals"] = Json::array();
        for (auto & o : core.signature.orbitals)
            j["orbitals"].push_back({{"name", o.name}, {"inverse", core.signature.orbitals[o.inverse].name}});
        j["bounds"] = Json::array();
        for (auto & b : core.bounds)
            j["bounds"].push_back({{"size", b.size()}, {"labels", labels_to_json(core.signature, b)}});
        return j;
    }

    auto label_set_from_json(const CoreSignature & sig, const Json & j, const string & where) -> LabelSet
    {
        LabelSet s = 0;
        auto & arr = get_array(j, where);
        for (unsigned k = 0 ; k < arr.size() ; ++k) {
            auto name = get_string(arr[k], where + "/" + to_string(k));
            if (name == "EQ")
                s |= code_bit(eq_code);
            else
                s |= code_bit(orbital_code(orbital_index(sig, arr[k], where + "/" + to_string(k))));
        }
        return s;
    }

    auto label_set_to_json(const CoreSignature & sig, LabelSet s) -> Json
    {
        Json arr = Json::array();
        for (int c = 0 ; c <= sig.size() ; ++c)
            if (s & code_bit(c))
                arr.push_back(sig.code_name(PairCode(c)));
        return arr;
    }

    auto orbit_from_json(const CoreSignature & sig, const Json & j, const string & where) -> Orbit
    {
        auto & bl = get_array(member(j, "blocks", where), where + "/blocks");
        vector<int> ids;
        for (unsigned i = 0 ; i < bl.size() ; ++i)
            ids.push_back(get_int(bl[i], where + "/blocks/" + to_string(i)));
        map<pair<int, int>, int> labels;
        auto & arr = get_array(member(j, "labels", where), where + "/labels");
        for (unsigned k = 0 ; k < arr.size() ; ++k) {
            auto w = where + "/labels/" + to_string(k);
            if (! arr[k].is_array() || arr[k].size() != 3)
                fail(w, "expected [b, c, \"orbital\"]");
            int b = get_int(arr[k][0], w + "/0"), c = get_int(arr[k][1], w + "/1");
            if (b >= c)
                fail(w, "labels are given on block pairs b < c");
            labels[{b, c}] = orbital_index(sig, arr[k][2], w + "/2");
        }
        return with_context(where, [&] { return orbit_from_blocks(sig, ids, labels); });
    }

    auto orbit_to_json(const CoreSignature & sig, const Orbit & o) -> Json
    {
        auto b = blocks(o);
        int nb = block_count(o);
        vector<int> rep(nb, -1);
        for (int i = 0 ; i < o.arity() ; ++i)
            if (rep[b[i]] == -1)
                rep[b[i]] = i;
        Json labels = Json::array();
        for (int x = 0 ; x < nb ; ++x)
            for (int y = x + 1 ; y < nb ; ++y)
                labels.push_back(Json::array({x, y, sig.code_name(o.code(rep[x], rep[y]))}));
        return {{"blocks", b}, {"labels", labels}};
    }

    auto relation_from_json(const BinaryCore & core, const Json & j, const string & where) -> Relation
    {
        auto name = j.contains("name") ? get_string(j["name"], where + "/name") : string();
        int arity = get_int(member(j, "arity", where), where + "/arity");
        if (arity < 1 || arity > max_arity)
            fail(where + "/arity", "arity must be between 1 and " + to_string(max_arity));

        if (j.contains("formula")) {
            auto f = get_string(j["formula"], where + "/formula");
            return with_context(where + "/formula", [&] { return from_formula(core, arity, f, name); });
        }

        auto & arr = get_array(member(j, "orbits", where), where + "/orbits");
        vector<Orbit> orbits;
        for (unsigned k = 0 ; k < arr.size() ; ++k) {
            auto w = where + "/orbits/" + to_string(k);
            auto o = orbit_from_json(core.signature, arr[k], w);
            if (o.arity() != arity)
                fail(w, "orbit arity " + to_string(o.arity()) + " does not match relation arity " + to_string(arity));
            if (! embeds_into_core(quotient(o), core))
                fail(w, "orbit contains a bound of the core");
            orbits.push_back(o);
        }
        return Relation::make(arity, std::move(orbits), name);
    }

    auto relation_to_json(const CoreSignature & sig, const Relation & r) -> Json
    {
        Json orbits = Json::array();
        for (auto & o : r.orbits)
            orbits.push_back(orbit_to_json(sig, o));
        return {{"name", r.name}, {"arity", r.arity}, {"orbits", orbits}};
    }

    auto language_from_json(const BinaryCore & core, const Json & j, const string & where) -> vector<Relation>
    {
        check_version(j, where);
        auto & arr = get_array(member(j, "relations", where), where + "/relations");
        vector<Relation> result;
        std::set<string> names;
        for (unsigned k = 0 ; k < arr.size() ; ++k) {
            auto w = where + "/relations/" + to_string(k);
            auto r = relation_from_json(core, arr[k], w);
            if (r.name.empty())
                fail(w, "language relations need a name");
            if (! names.insert(r.name).second)
                fail(w, "duplicate relation name " + r.name);
            result.push_back(std::move(r));
        }
        return result;
    }

    auto language_to_json(const CoreSignature & sig, const vector<Relation> & language) -> Json
    {
        Json j;
        j["format_version"] = format_version;
        j["relations"] = Json::array();
        for (auto & r : language)
            j["relations"].push_back(relation_to_json(sig, r));
        return j;
    }

    auto instance_from_json(const BinaryCore & core, const vector<Relation> & language, const Json & j,
            const string & where) -> Instance
    {
        check_version(j, where);
        Instance inst;
        auto & vars = get_array(member(j, "variables", where), where + "/variables");
        map<string, int> index;
        for (unsigned v = 0 ; v < vars.size() ; ++v) {
            auto name = get_string(vars[v], where + "/variables/" + to_string(v));
            if (name.empty() || ! index.emplace(name, int(v)).second)
                fail(where + "/variables/" + to_string(v), "variable names must be nonempty and distinct");
            inst.variables.push_back(name);
        }

        auto & cons = get_array(member(j, "constraints", where), where + "/constraints");
        for (unsigned c = 0 ; c < cons.size() ; ++c) {
            auto w = where + "/constraints/" + to_string(c);
            auto & sc = get_array(member(cons[c], "scope", w), w + "/scope");
            vector<int> scope;
            for (unsigned i = 0 ; i < sc.size() ; ++i) {
                auto ws = w + "/scope/" + to_string(i);
                if (sc[i].is_string()) {
                    auto it = index.find(sc[i].get<string>());
                    if (it == index.end())
                        fail(ws, "undeclared variable " + sc[i].get<string>());
                    scope.push_back(it->second);
                }
                else {
                    int v = get_int(sc[i], ws);
                    if (v < 0 || v >= inst.variable_count())
                        fail(ws, "variable index out of range");
                    scope.push_back(v);
                }
            }

            auto & rel = member(cons[c], "relation", w);
            Relation r;
            if (rel.is_string()) {
                auto name = rel.get<string>();
                auto it = std::find_if(language.begin(), language.end(), [&] (const Relation & x) { return x.name == name; });
                if (it == language.end())
                    fail(w + "/relation", "undeclared relation " + name);
                r = *it;
            }
            else
                r = relation_from_json(core, rel, w + "/relation");
            if (int(scope.size()) != r.arity)
                fail(w, "scope has " + to_string(scope.size()) + " variables but " + r.name + " has arity "
                        + to_string(r.arity));
            inst.constraints.push_back(Constraint{scope, std::move(r)});
        }
        with_context(where, [&] { validate_instance(inst); });
        return inst;
    }

    auto instance_to_json(const CoreSignature & sig, const Instance & inst, const vector<Relation> & language) -> Json
    {
        Json j;
        j["format_version"] = format_version;
        j["variables"] = inst.variables;
        j["constraints"] = Json::array();
        for (auto & c : inst.constraints) {
            Json scope = Json::array();
            for (auto v : c.scope)
                scope.push_back(inst.variables[v]);
            bool named = std::any_of(language.begin(), language.end(), [&] (const Relation & x) {
                return x.name == c.relation.name && x == c.relation;
            });
            j["constraints"].push_back({{"scope", scope},
                    {"relation", named ? Json(c.relation.name) : relation_to_json(sig, c.relation)}});
        }
        return j;
    }

    auto certificate_from_json(const CoreSignature & sig, const Instance & inst, const Json & j, const string & where)
        -> Certificate
    {
        check_version(j, where);
        Certificate cert;
        auto & cls = get_array(member(j, "classes", where), where + "/classes");
        for (unsigned c = 0 ; c < cls.size() ; ++c) {
            auto w = where + "/classes/" + to_string(c);
            auto & arr = get_array(cls[c], w);
            vector<int> members;
            for (unsigned k = 0 ; k < arr.size() ; ++k) {
                auto name = get_string(arr[k], w + "/" + to_string(k));
                auto it = std::find(inst.variables.begin(), inst.variables.end(), name);
                if (it == inst.variables.end())
                    fail(w + "/" + to_string(k), "unknown variable " + name);
                members.push_back(int(it - inst.variables.begin()));
            }
            cert.classes.push_back(std::move(members));
        }
        cert.labeling = labels_from_json(sig, int(cls.size()), member(j, "labels", where), where + "/labels");
        return cert;
    }

    auto certificate_to_json(const CoreSignature & sig, const Instance & inst, const Certificate & cert) -> Json
    {
        Json j;
        j["format_version"] = format_version;
        j["classes"] = Json::array();
        for (auto & c : cert.classes) {
            Json names = Json::array();
            for (auto v : c)
                names.push_back(inst.variables[v]);
            j["classes"].push_back(names);
        }
        j["labels"] = labels_to_json(sig, cert.labeling);
        return j;
    }

    auto removal_trace_to_jsonl(const CoreSignature & sig, const Instance & inst, const vector<RemovalStep> & trace)
        -> string
    {
        string out;
        for (auto & s : trace) {
            Json vars = Json::array();
            for (auto v : s.because_vars)
                vars.push_back(v < inst.variable_count() ? inst.variables[v] : "v" + to_string(v));
            Json line;
            line["step"] = s.step;
            line["constraint"] = s.constraint;
            line["removed_orbit"] = orbit_to_string(sig, s.removed);
            line["because"] = {{"constraint", s.because_constraint}, {"variables", vars}};
            out += line.dump() + "\n";
        }
        return out;
    }

    auto graph_to_json(const Instance & inst, const CoreSignature & sig, const ImpGraph & g) -> Json
    {
        Json j;
        j["format_version"] = format_version;
        j["vertices"] = Json::array();
        for (unsigned v = 0 ; v < g.vertices.size() ; ++v) {
            auto & x = g.vertices[v];
            j["vertices"].push_back({{"id", v}, {"pair", {inst.variables[x.v1], inst.variables[x.v2]}},
                    {"set", label_set_to_json(sig, x.set)}});
        }
        j["arcs"] = Json::array();
        for (unsigned a = 0 ; a < g.arcs.size() ; ++a) {
            auto shape = arc_shape(g, int(a));
            Json vars = Json::array();
            for (auto v : shape.vars)
                vars.push_back(inst.variables[v]);
            auto w = arc_witness(inst, g, int(a));
            j["arcs"].push_back({{"from", g.arcs[a].from}, {"to", g.arcs[a].to}, {"constraint", g.arcs[a].constraint},
                    {"witness", {{"variables", vars}, {"l", arrow_name(shape.l)}, {"p", arrow_name(shape.p)},
                                        {"c1", label_set_to_json(sig, w.c1)}, {"d1", label_set_to_json(sig, w.d1)}}}});
        }
        auto cycle = find_cycle(g);
        j["acyclic"] = ! cycle.has_value();
        j["cycle"] = cycle ? Json(*cycle) : Json(nullptr);
        return j;
    }

    auto pp_trace_to_json(const CoreSignature & sig, const PpTrace & t) -> Json
    {
        Json j;
        j["source"] = t.source ? instance_to_json(sig, *t.source) : Json(nullptr);
        j["steps"] = Json::array();
        for (auto & s : t.steps)
            j["steps"].push_back({{"op", s.op}, {"args", s.args}, {"param", s.param}, {"ints", s.ints},
                    {"result", relation_to_json(sig, s.result)}});
        return j;
    }

    auto pp_trace_from_json(const BinaryCore & core, const Json & j, const string & where) -> PpTrace
    {
        PpTrace t;
        auto & src = member(j, "source", where);
        if (! src.is_null())
            t.source = instance_from_json(core, {}, src, where + "/source");
        auto & steps = get_array(member(j, "steps", where), where + "/steps");
        for (unsigned k = 0 ; k < steps.size() ; ++k) {
            auto w = where + "/steps/" + to_string(k);
            PpStep s;
            s.op = get_string(member(steps[k], "op", w), w + "/op");
            s.param = get_string(member(steps[k], "param", w), w + "/param");
            for (auto & key : {"args", "ints"}) {
                auto & arr = get_array(member(steps[k], key, w), w + "/" + key);
                for (unsigned i = 0 ; i < arr.size() ; ++i)
                    (string(key) == "args" ? s.args : s.ints).push_back(get_int(arr[i], w + "/" + key + "/" + to_string(i)));
            }
            s.result = relation_from_json(core, member(steps[k], "result", w), w + "/result");
            t.steps.push_back(std::move(s));
        }
        return t;
    }

    auto witness_to_json(const CoreSignature & sig, const CriticalWitness & w) -> Json
    {
        Json defined = Json::array();
        for (auto s : w.defined)
            defined.push_back(label_set_to_json(sig, s));
        return {{"relation", relation_to_json(sig, w.relation)}, {"c1", label_set_to_json(sig, w.c1)},
            {"c2", label_set_to_json(sig, w.c2)}, {"d1", label_set_to_json(sig, w.d1)},
            {"d2", label_set_to_json(sig, w.d2)}, {"step", w.step}, {"defined", defined},
            {"trace", pp_trace_to_json(sig, w.trace)}};
    }

    auto witness_from_json(const BinaryCore & core, const Json & j, const string & where) -> CriticalWitness
    {
        auto & sig = core.signature;
        CriticalWitness w;
        w.relation = relation_from_json(core, member(j, "relation", where), where + "/relation");
        w.c1 = label_set_from_json(sig, member(j, "c1", where), where + "/c1");
        w.c2 = label_set_from_json(sig, member(j, "c2", where), where + "/c2");
        w.d1 = label_set_from_json(sig, member(j, "d1", where), where + "/d1");
        w.d2 = label_set_from_json(sig, member(j, "d2", where), where + "/d2");
        w.step = get_int(member(j, "step", where), where + "/step");
        auto & defined = get_array(member(j, "defined", where), where + "/defined");
        for (unsigned k = 0 ; k < defined.size() ; ++k)
            w.defined.push_back(label_set_from_json(sig, defined[k], where + "/defined/" + to_string(k)));
        w.trace = pp_trace_from_json(core, member(j, "trace", where), where + "/trace");
        return w;
    }

    auto solve_result_to_json(const CoreSignature & sig, const Instance & inst, const SolveResult & r) -> Json
    {
        Json j;
        j["format_version"] = format_version;
        j["verdict"] = verdict_name(r.verdict);
        j["narrowings"] = r.narrowings;
        j["certificate"] = r.certificate ? certificate_to_json(sig, inst, *r.certificate) : Json(nullptr);
        j["events"] = Json::array();
        for (auto & e : r.trace)
            j["events"].push_back({{"kind", e.kind}, {"detail", e.detail}});
        if (r.hard) {
            Json cycle = Json::array();
            for (auto a : r.hard->cycle)
                cycle.push_back(vertex_to_string(r.hard->instance, sig, r.hard->graph.vertices[r.hard->graph.arcs[a].from]));
            j["hard"] = {{"instance", instance_to_json(sig, r.hard->instance)}, {"cycle", cycle},
                {"graph", graph_to_json(r.hard->instance, sig, r.hard->graph)}};
        }
        else
            j["hard"] = nullptr;
        return j;
    }

    auto report_to_json(const CoreSignature & sig, const AnalysisReport & r) -> Json
    {
        Json j;
        j["format_version"] = format_version;
        j["verdict"] = r.verdict;
        Json ev;
        ev["liberal"] = r.liberal;
        ev["cyclic_instance"] = r.cyclic_instance ? instance_to_json(sig, *r.cyclic_instance) : Json(nullptr);
        ev["cycle"] = r.cycle;
        ev["witness"] = r.witness ? witness_to_json(sig, *r.witness) : Json(nullptr);
        ev["findings"] = Json::array();
        for (auto & f : r.findings)
            ev["findings"].push_back({{"pattern", f.pattern}, {"description", f.description},
                    {"relation", relation_to_string(sig, f.witness.relation)}});
        ev["notes"] = r.notes;
        j["evidence"] = ev;
        j["search_coverage"] = {{"generated", r.coverage.generated}, {"examined", r.coverage.examined},
            {"trivial", r.coverage.trivial}, {"budget_exhausted", r.coverage.budget_exhausted}};
        return j;
    }

    auto load_core_file(const string & path) -> BinaryCore
    {
        return core_from_json(read_json_file(path), path + "#");
    }

    auto load_language_file(const BinaryCore & core, const string & path) -> vector<Relation>
    {
        return language_from_json(core, read_json_file(path), path + "#");
    }

    auto load_instance_file(const BinaryCore & core, const vector<Relation> & language, const string & path) -> Instance
    {
        return instance_from_json(core, language, read_json_file(path), path + "#");
    }

    auto load_workspace(const WorkspacePaths & paths) -> Workspace
    {
        Workspace ws;
        ws.core = load_core_file(paths.core);
        if (! paths.language.empty())
            ws.language = load_language_file(ws.core, paths.language);
        for (auto & p : paths.instances)
            ws.instances.emplace_back(p, load_instance_file(ws.core, ws.language, p));
        return ws;
    }
}
