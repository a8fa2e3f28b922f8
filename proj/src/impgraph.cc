#include <orbcsp/impgraph.hh>

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>
#include <tuple>

using std::map;
using std::optional;
using std::pair;
using std::string;
using std::vector;

namespace orbcsp
{
    auto ImpGraph::find(const ImpVertex & v) const -> optional<int>
    {
        auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
        if (it == vertices.end() || *it != v)
            return std::nullopt;
        return int(it - vertices.begin());
    }

    namespace
    {
        auto position(const vector<int> & scope, int v) -> int
        {
            auto it = std::find(scope.begin(), scope.end(), v);
            return it == scope.end() ? -1 : int(it - scope.begin());
        }
    }

    auto build_graph(const Instance & inst) -> ImpGraph
    {
        if (is_trivial(inst))
            throw PreconditionError("build_graph: the instance is trivial");

        ImpGraph g;
        int n = inst.variable_count();
        for (int u = 0 ; u < n ; ++u)
            for (int v = u + 1 ; v < n ; ++v) {
                auto dom = pair_domain(inst, u, v);
                if (dom == code_bit(eq_code))
                    throw PreconditionError("build_graph: the instance entails " + inst.variables[u] + " = "
                            + inst.variables[v] + "; merge equal variables first");
                g.domains[{u, v}] = dom;
            }

        // For each constraint and ordered pair of its variable pairs, the codes
        // on the second pair that follow each code on the first.
        struct Link
        {
            int constraint;
            pair<int, int> to;
            vector<LabelSet> follow;
        };
        map<pair<int, int>, vector<Link>> links;
        for (unsigned c = 0 ; c < inst.constraints.size() ; ++c) {
            auto & con = inst.constraints[c];
            vector<pair<int, int>> pairs;
            for (auto a : con.scope)
                for (auto b : con.scope)
                    if (a < b)
                        pairs.emplace_back(a, b);
            std::sort(pairs.begin(), pairs.end());
            for (auto & p : pairs)
                for (auto & q : pairs) {
                    if (p == q)
                        continue;
                    int pu = position(con.scope, p.first), pv = position(con.scope, p.second);
                    int qw = position(con.scope, q.first), qz = position(con.scope, q.second);
                    Link l{int(c), q, vector<LabelSet>(max_orbitals + 1, 0)};
                    for (auto & o : con.relation.orbits)
                        l.follow[o.code(pu, pv)] |= code_bit(o.code(qw, qz));
                    links[p].push_back(std::move(l));
                }
        }
        auto image = [] (const Link & l, LabelSet s) {
            LabelSet d = 0;
            for (int code = 0 ; code <= max_orbitals ; ++code)
                if (s & code_bit(code))
                    d |= l.follow[code];
            return d;
        };

        // Candidate sets: single codes, which the core defines, closed under
        // images through constraints. Everything reached is pp-definable from
        // the instance, so narrowing to it stays inside the language.
        map<pair<int, int>, std::set<LabelSet>> space;
        vector<pair<pair<int, int>, LabelSet>> work;
        auto add = [&] (pair<int, int> p, LabelSet s) {
            if (s && s != g.domains.at(p) && space[p].insert(s).second)
                work.emplace_back(p, s);
        };
        for (auto & [p, dom] : g.domains)
            for (int code = 0 ; code <= max_orbitals ; ++code)
                if (dom & code_bit(code))
                    add(p, code_bit(code));
        while (! work.empty()) {
            auto [p, s] = work.back();
            work.pop_back();
            for (auto & l : links[p])
                add(l.to, image(l, s));
        }
        for (auto & [p, sets] : space)
            for (auto s : sets)
                g.vertices.push_back(ImpVertex{p.first, p.second, s});

        std::set<pair<int, int>> seen;
        vector<ImpArc> arcs;
        for (auto & [p, ls] : links)
            for (auto & l : ls) {
                auto dom_q = g.domains.at(l.to);
                for (auto s : space[p]) {
                    LabelSet dmin = image(l, s);
                    if (dmin == dom_q)
                        continue;
                    int from = *g.find(ImpVertex{p.first, p.second, s});
                    for (auto t : space[l.to]) {
                        if ((t & dmin) != dmin)
                            continue;
                        int to = *g.find(ImpVertex{l.to.first, l.to.second, t});
                        if (seen.emplace(from, to).second)
                            arcs.push_back(ImpArc{from, to, l.constraint});
                    }
                }
            }

        std::sort(arcs.begin(), arcs.end(), [] (const ImpArc & a, const ImpArc & b) {
                return std::tie(a.from, a.to) < std::tie(b.from, b.to);
                });
        g.arcs = std::move(arcs);
        g.out.assign(g.vertices.size(), {});
        for (unsigned a = 0 ; a < g.arcs.size() ; ++a)
            g.out[g.arcs[a].from].push_back(int(a));
        return g;
    }

    auto find_cycle(const ImpGraph & g) -> optional<vector<int>>
    {
        int n = int(g.vertices.size());
        vector<char> colour(n, 0);
        vector<int> parent_arc(n, -1);

        for (int root = 0 ; root < n ; ++root) {
            if (colour[root])
                continue;
            // (vertex, next out-arc position)
            vector<pair<int, unsigned>> stack{{root, 0}};
            colour[root] = 1;
            while (! stack.empty()) {
                auto & [v, next] = stack.back();
                if (next == g.out[v].size()) {
                    colour[v] = 2;
                    stack.pop_back();
                    continue;
                }
                int a = g.out[v][next++];
                int w = g.arcs[a].to;
                if (colour[w] == 1) {
                    vector<int> cycle{a};
                    for (int x = v ; x != w ; x = g.arcs[parent_arc[x]].from)
                        cycle.push_back(parent_arc[x]);
                    std::reverse(cycle.begin(), cycle.end());
                    return cycle;
                }
                if (colour[w] == 0) {
                    colour[w] = 1;
                    parent_arc[w] = a;
                    stack.emplace_back(w, 0);
                }
            }
        }
        return std::nullopt;
    }

    auto sink_candidates(const ImpGraph & g) -> vector<int>
    {
        vector<int> result;
        for (unsigned v = 0 ; v < g.vertices.size() ; ++v)
            if (g.out[v].empty())
                result.push_back(int(v));
        std::stable_sort(result.begin(), result.end(), [&] (int a, int b) {
                return std::popcount(g.vertices[a].set) > std::popcount(g.vertices[b].set);
                });
        return result;
    }

    auto find_sink_singleton(const ImpGraph & g) -> optional<ImpVertex>
    {
        auto c = sink_candidates(g);
        if (c.empty())
            return std::nullopt;
        return g.vertices[c.front()];
    }

    auto arc_shape(const ImpGraph & g, int arc) -> ArcShape
    {
        auto & a = g.arcs.at(arc);
        auto & from = g.vertices[a.from];
        auto & to = g.vertices[a.to];

        ArcShape s;
        int shared = -1;
        for (auto x : {from.v1, from.v2})
            if (x == to.v1 || x == to.v2)
                shared = x;
        if (shared >= 0) {
            int x1 = from.v1 == shared ? from.v2 : from.v1;
            int x3 = to.v1 == shared ? to.v2 : to.v1;
            s.vars = {x1, shared, x3};
            s.l = from.v2 == shared ? Arrow::Right : Arrow::Left;
            s.p = to.v1 == shared ? Arrow::Right : Arrow::Left;
        }
        else
            s.vars = {from.v1, from.v2, to.v1, to.v2};
        return s;
    }

    auto arc_witness(const Instance & inst, const ImpGraph & g, int arc) -> ImplicationDesc
    {
        auto & a = g.arcs.at(arc);
        auto & from = g.vertices[a.from];
        auto & to = g.vertices[a.to];
        auto & con = inst.constraints[a.constraint];
        auto [vars, l, p] = arc_shape(g, arc);

        vector<int> pos;
        for (auto x : vars)
            pos.push_back(position(con.scope, x));
        auto rel = project(con.relation, pos);
        rel.name = con.relation.name;

        ImplicationDesc d{rel, g.domains.at({from.v1, from.v2}), g.domains.at({to.v1, to.v2}), from.set, to.set, l, p,
            false};
        if (auto why = check_implication(d))
            throw PostconditionError("arc witness is not an implication: " + *why);
        return d;
    }

    auto narrow(const Instance & inst, int v1, int v2, LabelSet set) -> Instance
    {
        Instance result = inst;
        for (auto & c : result.constraints) {
            int i = position(c.scope, v1), j = position(c.scope, v2);
            if (i >= 0 && j >= 0) {
                auto name = c.relation.name;
                c.relation = restrict_pair(c.relation, i, j, set);
                c.relation.name = name;
            }
        }
        return result;
    }

    auto narrow_checked(const Instance & inst, const ImpGraph & g, const ImpVertex & v, int l) -> Instance
    {
        auto idx = g.find(v);
        if (! idx)
            throw PreconditionError("narrow: not a vertex of the implication graph");
        if (! g.out[*idx].empty())
            throw PreconditionError("narrow: the vertex is not a sink");
        auto result = narrow(inst, v.v1, v.v2, v.set);
        if (is_trivial(result))
            throw PostconditionError("narrow: the narrowed instance is trivial");
        if (! verify_minimality(result, 2, l))
            throw PostconditionError("narrow: the narrowed instance is not (2, l)-minimal");
        return result;
    }

    auto vertex_to_string(const Instance & inst, const CoreSignature & sig, const ImpVertex & v) -> string
    {
        return "((" + inst.variables[v.v1] + "," + inst.variables[v.v2] + ")," + sig.set_name(v.set) + ")";
    }

    auto graph_to_dot(const Instance & inst, const CoreSignature & sig, const ImpGraph & g) -> string
    {
        std::ostringstream out;
        out << "digraph implications {\n";
        for (unsigned v = 0 ; v < g.vertices.size() ; ++v)
            out << "  n" << v << " [label=\"" << vertex_to_string(inst, sig, g.vertices[v]) << "\"];\n";
        for (auto & a : g.arcs)
            out << "  n" << a.from << " -> n" << a.to << " [label=\"c" << a.constraint << "\"];\n";
        out << "}\n";
        return out.str();
    }
}
