#include <orbcsp/search.hh>
#include <orbcsp/solver.hh>

#include <algorithm>
#include <bit>
#include <numeric>

using std::optional;
using std::string;
using std::to_string;
using std::vector;

namespace orbcsp
{
    auto verdict_name(Verdict v) -> string
    {
        switch (v) {
            case Verdict::Sat: return "SAT";
            case Verdict::Unsat: return "UNSAT";
            case Verdict::Hard: return "IMPLICATIONALLY_HARD";
        }
        return "?";
    }

    auto merge_variables(const Instance & inst, const vector<int> & class_of) -> Instance
    {
        int classes = class_of.empty() ? 0 : *std::max_element(class_of.begin(), class_of.end()) + 1;
        Instance result;
        result.variables.assign(classes, "");
        for (int v = 0 ; v < inst.variable_count() ; ++v) {
            auto & name = result.variables[class_of[v]];
            name += (name.empty() ? "" : "=") + inst.variables[v];
        }

        for (auto & c : inst.constraints) {
            Relation r = c.relation;
            vector<int> scope, keep;
            for (unsigned i = 0 ; i < c.scope.size() ; ++i) {
                int cls = class_of[c.scope[i]];
                auto it = std::find(scope.begin(), scope.end(), cls);
                if (it == scope.end()) {
                    scope.push_back(cls);
                    keep.push_back(int(i));
                }
                else
                    r = restrict_pair(r, keep[it - scope.begin()], int(i), code_bit(eq_code));
            }
            auto projected = project(r, keep);
            projected.name = c.relation.name;
            result.constraints.push_back(Constraint{scope, projected});
        }
        return result;
    }

    namespace
    {
        auto find_root(vector<int> & parent, int x) -> int
        {
            while (parent[x] != x)
                x = parent[x] = parent[parent[x]];
            return x;
        }

        // Class index per variable for the variables forced equal, or empty if
        // nothing is forced.
        auto equality_classes(const Instance & inst) -> vector<int>
        {
            int n = inst.variable_count();
            vector<int> parent(n);
            std::iota(parent.begin(), parent.end(), 0);
            bool any = false;
            for (int u = 0 ; u < n ; ++u)
                for (int v = u + 1 ; v < n ; ++v)
                    if (pair_domain(inst, u, v) == code_bit(eq_code)) {
                        any = true;
                        parent[find_root(parent, v)] = find_root(parent, u);
                    }
            if (! any)
                return {};
            vector<int> index(n, -1), result(n);
            int next = 0;
            for (int v = 0 ; v < n ; ++v) {
                int r = find_root(parent, v);
                if (index[r] == -1)
                    index[r] = next++;
                result[v] = index[r];
            }
            return result;
        }

        auto all_single(const Instance & inst) -> bool
        {
            for (int u = 0 ; u < inst.variable_count() ; ++u)
                for (int v = u + 1 ; v < inst.variable_count() ; ++v)
                    if (std::popcount(pair_domain(inst, u, v)) != 1)
                        return false;
            return true;
        }
    }

    auto prepare_instance(const Instance & inst, const BinaryCore & core) -> optional<PreparedInstance>
    {
        MinimalityOptions mopts{2, max_bound(core), std::nullopt, false};
        PreparedInstance result;
        result.class_of.resize(inst.variable_count());
        std::iota(result.class_of.begin(), result.class_of.end(), 0);

        auto m = establish_minimality(inst, core, mopts);
        while (true) {
            if (m.trivial)
                return std::nullopt;
            auto eq = equality_classes(m.instance);
            if (eq.empty())
                break;
            for (auto & c : result.class_of)
                c = eq[c];
            m = establish_minimality(merge_variables(m.instance, eq), core, mopts);
        }
        result.instance = std::move(m.instance);
        return result;
    }

    auto solve(const Instance & input, const BinaryCore & core, const SolveOptions & options) -> SolveResult
    {
        validate_instance(input);
        for (auto & c : input.constraints)
            for (auto & o : c.relation.orbits)
                if (! is_well_formed(core.signature, o))
                    throw InputError("relation " + c.relation.name + " has an orbit that does not fit the core");

        SolveResult result;
        int l = max_bound(core);
        MinimalityOptions mopts{2, l, std::nullopt, false};

        auto minimize = [&] (const Instance & inst) -> optional<Instance> {
            auto m = establish_minimality(inst, core, mopts);
            result.trace.push_back(SolveEvent{"minimize", to_string(m.padding_added) + " padding constraints"
                    + (m.trivial ? ", trivial" : "")});
            if (m.trivial)
                return std::nullopt;
            return std::move(m.instance);
        };

        vector<int> class_of(input.variable_count());
        std::iota(class_of.begin(), class_of.end(), 0);

        auto current = minimize(input);
        if (! current) {
            result.verdict = Verdict::Unsat;
            return result;
        }

        while (true) {
            auto eq = equality_classes(*current);
            if (! eq.empty()) {
                for (auto & c : class_of)
                    c = eq[c];
                auto merged = merge_variables(*current, eq);
                result.trace.push_back(SolveEvent{"merge", to_string(current->variable_count() - merged.variable_count())
                        + " variables forced equal"});
                current = minimize(merged);
                if (! current) {
                    result.verdict = Verdict::Unsat;
                    return result;
                }
                continue;
            }

            if (all_single(*current))
                break;

            auto g = build_graph(*current);
            if (auto cycle = find_cycle(g)) {
                result.trace.push_back(SolveEvent{"cycle", to_string(cycle->size()) + " arcs"});
                result.verdict = Verdict::Hard;
                result.hard = HardEvidence{*current, std::move(g), std::move(*cycle), class_of};
                return result;
            }

            auto candidates = sink_candidates(g);
            if (candidates.empty())
                throw PostconditionError("solve: acyclic graph without a sink");
            auto & v = g.vertices[candidates.front()];
            result.trace.push_back(SolveEvent{"narrow", vertex_to_string(*current, core.signature, v)});
            auto narrowed = options.check_narrowing ? narrow_checked(*current, g, v, l)
                : narrow(*current, v.v1, v.v2, v.set);
            ++result.narrowings;
            current = minimize(narrowed);
            if (! current)
                throw PostconditionError("solve: narrowing at a sink made the instance trivial");
        }

        // Every pair domain is one orbital now.
        int n = current->variable_count();
        Certificate cert;
        cert.classes.assign(n, {});
        for (int v = 0 ; v < input.variable_count() ; ++v)
            cert.classes[class_of[v]].push_back(v);
        cert.labeling = FiniteStructure(n);
        for (int u = 0 ; u < n ; ++u)
            for (int v = u + 1 ; v < n ; ++v)
                cert.labeling.set(core.signature, u, v, std::countr_zero(pair_domain(*current, u, v)) - 1);
        if (! verify_certificate(cert, input, core))
            throw PostconditionError("solve: the certificate does not verify");
        result.trace.push_back(SolveEvent{"certificate", to_string(n) + " classes"});
        result.verdict = Verdict::Sat;
        result.certificate = std::move(cert);
        return result;
    }

    auto brute_force_solve(const Instance & inst, const BinaryCore & core, int cap) -> optional<Certificate>
    {
        validate_instance(inst);
        int n = inst.variable_count();
        if (n > cap || n > max_search_points)
            throw CapExceeded("brute_force_solve: " + to_string(n) + " variables exceed the cap of " + to_string(cap));
        if (is_trivial(inst))
            return std::nullopt;
        if (n == 0)
            return Certificate{};

        LabelingSearch search(core, n);
        for (auto & c : inst.constraints)
            search.add_atom(c.relation.orbits, c.relation.arity, c.scope);

        optional<Certificate> found;
        search.for_each([&] {
            Certificate cert;
            cert.classes.assign(search.block_count(), {});
            for (int v = 0 ; v < n ; ++v)
                cert.classes[search.block_of(v)].push_back(v);
            cert.labeling = search.block_structure();
            found = std::move(cert);
            return true;
        });
        return found;
    }

    auto verify_certificate(const Certificate & cert, const Instance & inst, const BinaryCore & core) -> bool
    {
        int n = inst.variable_count();
        vector<int> cls(n, -1);
        for (unsigned c = 0 ; c < cert.classes.size() ; ++c) {
            if (cert.classes[c].empty())
                return false;
            for (auto v : cert.classes[c]) {
                if (v < 0 || v >= n || cls[v] != -1)
                    return false;
                cls[v] = int(c);
            }
        }
        if (std::find(cls.begin(), cls.end(), -1) != cls.end())
            return false;

        if (cert.labeling.size() != int(cert.classes.size()))
            return false;
        for (int i = 0 ; i < cert.labeling.size() ; ++i)
            for (int j = 0 ; j < cert.labeling.size() ; ++j)
                if (i != j && cert.labeling.label(i, j) >= core.signature.size())
                    return false;
        if (! is_coherent(core.signature, cert.labeling) || ! embeds_into_core(cert.labeling, core))
            return false;

        for (auto & c : inst.constraints) {
            vector<int> pts;
            for (auto v : c.scope)
                pts.push_back(cls[v]);
            if (! c.relation.contains(orbit_of_tuple(cert.labeling, pts)))
                return false;
        }
        return true;
    }
}
