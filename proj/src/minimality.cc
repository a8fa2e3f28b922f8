#include <orbcsp/minimality.hh>
#include <orbcsp/search.hh>

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <unordered_set>

using std::map;
using std::string;
using std::to_string;
using std::unordered_set;
using std::vector;

namespace orbcsp
{
    auto Instance::with_variables(int n) -> Instance
    {
        Instance inst;
        for (int i = 0 ; i < n ; ++i)
            inst.variables.push_back("x" + to_string(i + 1));
        return inst;
    }

    auto Instance::add(vector<int> scope, Relation r) -> Instance &
    {
        constraints.push_back(Constraint{std::move(scope), std::move(r)});
        return *this;
    }

    auto validate_instance(const Instance & inst) -> void
    {
        for (unsigned c = 0 ; c < inst.constraints.size() ; ++c) {
            auto & con = inst.constraints[c];
            auto where = "constraint " + to_string(c);
            if (int(con.scope.size()) != con.relation.arity)
                throw InputError(where + ": scope length " + to_string(con.scope.size()) + " does not match relation arity "
                        + to_string(con.relation.arity));
            for (unsigned i = 0 ; i < con.scope.size() ; ++i) {
                if (con.scope[i] < 0 || con.scope[i] >= inst.variable_count())
                    throw InputError(where + ": variable index out of range");
                for (unsigned j = i + 1 ; j < con.scope.size() ; ++j)
                    if (con.scope[i] == con.scope[j])
                        throw InputError(where + ": scope repeats variable " + inst.variables[con.scope[i]]);
            }
        }
    }

    auto is_trivial(const Instance & inst) -> bool
    {
        return std::any_of(inst.constraints.begin(), inst.constraints.end(),
                [] (const Constraint & c) { return c.relation.empty(); });
    }

    namespace
    {
        // All subsets of {0..n-1} of size exactly m, in lexicographic order.
        auto subsets(int n, int m) -> vector<vector<int>>
        {
            vector<vector<int>> result;
            if (m > n || m < 0)
                return result;
            vector<int> cur(m);
            for (int i = 0 ; i < m ; ++i)
                cur[i] = i;
            while (true) {
                result.push_back(cur);
                int i = m - 1;
                while (i >= 0 && cur[i] == n - m + i)
                    --i;
                if (i < 0)
                    break;
                ++cur[i];
                for (int j = i + 1 ; j < m ; ++j)
                    cur[j] = cur[j - 1] + 1;
            }
            return result;
        }

        auto scope_contains(const vector<int> & scope, const vector<int> & vars) -> bool
        {
            return std::all_of(vars.begin(), vars.end(),
                    [&] (int v) { return std::find(scope.begin(), scope.end(), v) != scope.end(); });
        }

        auto positions_of(const vector<int> & scope, const vector<int> & vars) -> vector<int>
        {
            vector<int> pos;
            for (auto v : vars)
                pos.push_back(int(std::find(scope.begin(), scope.end(), v) - scope.begin()));
            return pos;
        }

        // Intersection of the (x, y) projections of every constraint covering
        // both, full if none does.
        auto pair_masks(const Instance & inst, const CoreSignature & sig) -> vector<LabelSet>
        {
            int n = inst.variable_count();
            vector<LabelSet> mask(std::size_t(n) * std::size_t(n), sig.full_set());
            for (auto & c : inst.constraints)
                for (unsigned i = 0 ; i < c.scope.size() ; ++i)
                    for (unsigned j = 0 ; j < c.scope.size() ; ++j)
                        if (i != j)
                            mask[c.scope[i] * n + c.scope[j]] &= projection_set(c.relation, i, j);
            return mask;
        }

        struct Projection
        {
            vector<int> vars;
            // (constraint, positions of vars in its scope)
            vector<std::pair<int, vector<int>>> users;
            unordered_set<Orbit, OrbitHash> domain;
        };
    }

    auto establish_minimality(const Instance & input, const BinaryCore & core, const MinimalityOptions & options)
        -> MinimalityResult
    {
        validate_instance(input);
        if (options.k < 1 || options.l < options.k)
            throw PreconditionError("establish_minimality needs 1 <= k <= l");

        MinimalityResult result;
        result.instance = input;
        auto & inst = result.instance;
        int n = inst.variable_count();

        // Padding so that every set of at most l variables is covered.
        int m = std::min(options.l, n);
        if (m > max_arity)
            throw CapExceeded("padding arity " + to_string(m) + " exceeds " + to_string(max_arity));
        if (m >= 1) {
            auto masks = pair_masks(inst, core.signature);
            int original = int(inst.constraints.size());
            for (auto & vars : subsets(n, m)) {
                bool covered = false;
                for (int c = 0 ; c < original && ! covered ; ++c)
                    covered = scope_contains(inst.constraints[c].scope, vars);
                if (covered)
                    continue;
                LabelingSearch search(core, m);
                for (int i = 0 ; i < m ; ++i)
                    for (int j = i + 1 ; j < m ; ++j)
                        search.restrict_pair(i, j, masks[vars[i] * n + vars[j]]);
                inst.constraints.push_back(Constraint{vars, Relation{m, search.visible_orbits(m), "pad"}});
                ++result.padding_added;
            }
        }

        // Every set of at most k variables covered by some scope.
        map<vector<int>, int> index;
        vector<Projection> projections;
        vector<vector<int>> of_constraint(inst.constraints.size());
        for (unsigned c = 0 ; c < inst.constraints.size() ; ++c) {
            auto & scope = inst.constraints[c].scope;
            vector<int> sorted_scope = scope;
            std::sort(sorted_scope.begin(), sorted_scope.end());
            for (int size = 1 ; size <= options.k ; ++size)
                for (auto & idx : subsets(int(scope.size()), size)) {
                    vector<int> vars;
                    for (auto i : idx)
                        vars.push_back(sorted_scope[i]);
                    auto [it, fresh] = index.emplace(vars, int(projections.size()));
                    if (fresh)
                        projections.push_back(Projection{vars, {}, {}});
                    projections[it->second].users.emplace_back(int(c), positions_of(scope, vars));
                    of_constraint[c].push_back(it->second);
                }
        }

        auto project_constraint = [&] (int c, const vector<int> & pos) {
            unordered_set<Orbit, OrbitHash> s;
            for (auto & o : inst.constraints[c].relation.orbits)
                s.insert(restrict_orbit(o, pos));
            return s;
        };

        for (auto & p : projections) {
            bool first = true;
            for (auto & [c, pos] : p.users) {
                auto s = project_constraint(c, pos);
                if (first)
                    p.domain = std::move(s);
                else
                    std::erase_if(p.domain, [&] (const Orbit & o) { return ! s.count(o); });
                first = false;
            }
        }

        std::mt19937_64 rng(options.shuffle_seed.value_or(0));
        vector<char> queued(inst.constraints.size(), 1);
        std::deque<int> work;
        for (unsigned c = 0 ; c < inst.constraints.size() ; ++c)
            work.push_back(int(c));

        int step = 0;
        while (! work.empty()) {
            int c;
            if (options.shuffle_seed) {
                std::uniform_int_distribution<std::size_t> pick(0, work.size() - 1);
                auto it = work.begin() + std::ptrdiff_t(pick(rng));
                c = *it;
                work.erase(it);
            }
            else {
                c = work.front();
                work.pop_front();
            }
            queued[c] = 0;

            auto & rel = inst.constraints[c].relation;
            vector<Orbit> kept;
            bool changed = false;
            for (auto & o : rel.orbits) {
                bool ok = true;
                for (auto pi : of_constraint[c]) {
                    auto & p = projections[pi];
                    const vector<int> * pos = nullptr;
                    for (auto & [u, upos] : p.users)
                        if (u == c)
                            pos = &upos;
                    auto r = restrict_orbit(o, *pos);
                    if (p.domain.count(r))
                        continue;
                    ok = false;
                    if (options.record_trace) {
                        int because = c;
                        for (auto & [u, upos] : p.users)
                            if (u != c) {
                                auto & urel = inst.constraints[u].relation;
                                bool has = std::any_of(urel.orbits.begin(), urel.orbits.end(),
                                        [&] (const Orbit & x) { return restrict_orbit(x, upos) == r; });
                                if (! has) {
                                    because = u;
                                    break;
                                }
                            }
                        result.trace.push_back(RemovalStep{step, c, o, because, p.vars});
                    }
                    ++step;
                    break;
                }
                if (ok)
                    kept.push_back(o);
                else
                    changed = true;
            }
            if (! changed)
                continue;
            rel.orbits = std::move(kept);

            for (auto pi : of_constraint[c]) {
                auto & p = projections[pi];
                const vector<int> * pos = nullptr;
                for (auto & [u, upos] : p.users)
                    if (u == c)
                        pos = &upos;
                auto s = project_constraint(c, *pos);
                auto before = p.domain.size();
                std::erase_if(p.domain, [&] (const Orbit & o) { return ! s.count(o); });
                if (p.domain.size() == before)
                    continue;
                for (auto & [u, upos] : p.users)
                    if (u != c && ! queued[u]) {
                        queued[u] = 1;
                        work.push_back(u);
                    }
            }
        }

        result.trivial = is_trivial(inst);
        return result;
    }

    auto pair_domain(const Instance & inst, int x, int y) -> LabelSet
    {
        if (x == y)
            throw PreconditionError("pair_domain: a variable paired with itself");
        std::optional<LabelSet> result;
        for (auto & c : inst.constraints) {
            auto ix = std::find(c.scope.begin(), c.scope.end(), x);
            auto iy = std::find(c.scope.begin(), c.scope.end(), y);
            if (ix == c.scope.end() || iy == c.scope.end())
                continue;
            auto s = projection_set(c.relation, int(ix - c.scope.begin()), int(iy - c.scope.begin()));
            if (result && *result != s)
                throw PreconditionError("pair_domain: constraints disagree on (" + inst.variables[x] + ", "
                        + inst.variables[y] + "); the instance is not minimal");
            result = s;
        }
        if (! result)
            throw PreconditionError("pair_domain: no constraint covers (" + inst.variables[x] + ", " + inst.variables[y] + ")");
        return *result;
    }

    auto verify_minimality(const Instance & inst, int k, int l) -> bool
    {
        int n = inst.variable_count();
        for (auto & vars : subsets(n, std::min(l, n))) {
            bool covered = std::any_of(inst.constraints.begin(), inst.constraints.end(),
                    [&] (const Constraint & c) { return scope_contains(c.scope, vars); });
            if (! covered)
                return false;
        }

        for (int size = 1 ; size <= std::min(k, n) ; ++size)
            for (auto & vars : subsets(n, size)) {
                std::optional<vector<Orbit>> seen;
                for (auto & c : inst.constraints) {
                    if (! scope_contains(c.scope, vars))
                        continue;
                    auto proj = project(c.relation, positions_of(c.scope, vars)).orbits;
                    if (seen && *seen != proj)
                        return false;
                    seen = std::move(proj);
                }
            }
        return true;
    }
}
