#include <orbcsp/analyzer.hh>
#include <orbcsp/search.hh>

#include <algorithm>
#include <atomic>
#include <climits>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <thread>

using std::map;
using std::nullopt;
using std::optional;
using std::string;
using std::to_string;
using std::vector;

namespace orbcsp
{
    TraceBuilder::TraceBuilder(const BinaryCore & core, optional<Instance> source) :
        _core(core)
    {
        _trace.source = std::move(source);
    }

    auto TraceBuilder::push(PpStep step) -> int
    {
        _trace.steps.push_back(std::move(step));
        return int(_trace.steps.size()) - 1;
    }

    auto TraceBuilder::language(const Relation & r) -> int
    {
        return push(PpStep{"language", {}, r.name, {}, r});
    }

    auto TraceBuilder::minimal_projection(const Instance & prepared, int constraint, const vector<int> & positions) -> int
    {
        vector<int> ints{constraint};
        ints.insert(ints.end(), positions.begin(), positions.end());
        return push(PpStep{"minimal_projection", {}, "", ints, project(prepared.constraints.at(constraint).relation, positions)});
    }

    auto TraceBuilder::orbital(int code) -> int
    {
        return push(PpStep{"orbital", {}, "", {code}, binary_relation(_core.signature, code_bit(code))});
    }

    auto TraceBuilder::permute(int step, const vector<int> & perm) -> int
    {
        return push(PpStep{"permute", {step}, "", perm, orbcsp::permute(relation(step), perm)});
    }

    auto TraceBuilder::apply(const string & id, const vector<int> & slots, optional<Relation> known) -> int
    {
        Relation result;
        if (known)
            result = std::move(*known);
        else {
            vector<const Relation *> rels;
            for (auto s : slots)
                rels.push_back(&relation(s));
            result = pp_apply(_core, find_template(id), rels);
        }
        return push(PpStep{"apply", slots, id, {}, std::move(result)});
    }

    auto TraceBuilder::intersect(int a, int b) -> int
    {
        return push(PpStep{"intersect", {a, b}, "", {}, combine(relation(a), relation(b), SetOp::And)});
    }

    auto TraceBuilder::neq() -> int
    {
        auto & sig = _core.signature;
        auto target = binary_relation(sig, sig.neq_set());
        if (sig.size() == 1)
            return orbital(1);
        auto & psi = find_template("psi_neq");
        for (int a = 1 ; a <= sig.size() ; ++a)
            for (int b = a + 1 ; b <= sig.size() ; ++b) {
                auto ra = binary_relation(sig, code_bit(a)), rb = binary_relation(sig, code_bit(b));
                auto r = pp_apply(_core, psi, {&ra, &rb});
                if (r == target) {
                    int sa = orbital(a), sb = orbital(b);
                    return apply(psi.id, {sa, sb}, r);
                }
            }
        throw PreconditionError("the disequality relation is not obtained from two orbitals");
    }

    auto replay_trace(const PpTrace & trace, const BinaryCore & core, const vector<Relation> & language) -> optional<string>
    {
        optional<PreparedInstance> prepared;
        auto & steps = trace.steps;
        for (unsigned i = 0 ; i < steps.size() ; ++i) {
            auto & s = steps[i];
            auto where = "step " + to_string(i) + " (" + s.op + "): ";
            for (auto a : s.args)
                if (a < 0 || unsigned(a) >= i)
                    return where + "refers to a later step";

            Relation r;
            if (s.op == "language") {
                auto it = std::find_if(language.begin(), language.end(), [&] (const Relation & x) { return x.name == s.param; });
                if (it == language.end())
                    return where + "no language relation named " + s.param;
                r = *it;
            }
            else if (s.op == "minimal_projection") {
                if (! trace.source)
                    return where + "no source instance";
                if (! prepared) {
                    for (auto & c : trace.source->constraints) {
                        auto it = std::find_if(language.begin(), language.end(),
                                [&] (const Relation & x) { return x.name == c.relation.name; });
                        if (it == language.end() || ! (*it == c.relation))
                            return where + "source constraint over " + c.relation.name + " is not a language relation";
                    }
                    prepared = prepare_instance(*trace.source, core);
                    if (! prepared)
                        return where + "the source instance is trivial";
                }
                if (s.ints.empty() || s.ints[0] < 0 || unsigned(s.ints[0]) >= prepared->instance.constraints.size())
                    return where + "constraint index out of range";
                auto & rel = prepared->instance.constraints[s.ints[0]].relation;
                vector<int> pos(s.ints.begin() + 1, s.ints.end());
                for (auto p : pos)
                    if (p < 0 || p >= rel.arity)
                        return where + "position out of range";
                r = project(rel, pos);
            }
            else if (s.op == "orbital") {
                if (s.ints.size() != 1 || s.ints[0] < 0 || s.ints[0] > core.signature.size())
                    return where + "bad code";
                r = binary_relation(core.signature, code_bit(s.ints[0]));
            }
            else if (s.op == "permute") {
                if (s.args.size() != 1)
                    return where + "needs one argument";
                r = permute(steps[s.args[0]].result, s.ints);
            }
            else if (s.op == "apply") {
                vector<const Relation *> rels;
                for (auto a : s.args)
                    rels.push_back(&steps[a].result);
                try {
                    r = pp_apply(core, find_template(s.param), rels);
                }
                catch (const Error & e) {
                    return where + e.what();
                }
            }
            else if (s.op == "intersect") {
                if (s.args.size() != 2)
                    return where + "needs two arguments";
                r = combine(steps[s.args[0]].result, steps[s.args[1]].result, SetOp::And);
            }
            else
                return where + "unknown op";

            if (! (r == s.result))
                return where + "recomputed relation differs from the recorded one";
        }
        return nullopt;
    }

    auto compose(TraceBuilder & b, const TracedImplication & d1, const TracedImplication & d2) -> TracedImplication
    {
        auto d = circ(b.core(), d1.desc, d2.desc);
        int step = b.apply(circ_template(d1.desc, d2.desc), {d1.step, d2.step}, d.relation);
        return TracedImplication{std::move(d), step};
    }

    namespace
    {
        auto codes_of(LabelSet s) -> vector<int>
        {
            vector<int> result;
            for (int c = 0 ; c <= max_orbitals ; ++c)
                if (s & code_bit(c))
                    result.push_back(c);
            return result;
        }

        // Shortest path lengths from one vertex, -1 if unreachable.
        auto distances(const BipDigraph & g, int from) -> vector<int>
        {
            int n = 2 * g.size();
            vector<int> dist(n, -1);
            std::deque<int> queue{from};
            dist[from] = 0;
            while (! queue.empty()) {
                int v = queue.front();
                queue.pop_front();
                for (int w = 0 ; w < n ; ++w)
                    if (g.arc[v][w] && dist[w] == -1) {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
            }
            return dist;
        }

        auto require_right_left(const ImplicationDesc & d, const string & what) -> void
        {
            if (d.l != Arrow::Right || d.p != Arrow::Left || d.c != d.d || d.c1 != d.d1)
                throw PreconditionError(what + ": needs a (C, C, C1, C1, Right, Left) implication");
        }
    }

    auto build_bipartite(const ImplicationDesc & r1, const ImplicationDesc & r2) -> BipDigraph
    {
        require_right_left(r1, "build_bipartite");
        require_right_left(r2, "build_bipartite");
        if (r1.c != r2.c)
            throw PreconditionError("build_bipartite: the implications have different projections");

        BipDigraph g;
        g.codes = codes_of(r1.c);
        int m = g.size();
        g.arc.assign(2 * m, vector<char>(2 * m, 0));
        vector<int> index(max_orbitals + 1, -1);
        for (int i = 0 ; i < m ; ++i)
            index[g.codes[i]] = i;

        auto add = [&] (const Relation & r, bool left_to_right) {
            auto [a, b] = left_pair(Arrow::Right);
            auto [c, e] = right_pair(r.arity, Arrow::Left);
            for (auto & o : r.orbits) {
                int x = index[o.code(a, b)], y = index[o.code(c, e)];
                if (left_to_right)
                    g.arc[x][m + y] = 1;
                else
                    g.arc[m + x][y] = 1;
            }
        };
        add(r1.relation, true);
        add(r2.relation, false);
        return g;
    }

    auto analyze_bipartite(const BipDigraph & g) -> BipAnalysis
    {
        int m = g.size(), n = 2 * m;
        BipAnalysis a;
        vector<vector<int>> dist(n);
        for (int v = 0 ; v < n ; ++v)
            dist[v] = distances(g, v);

        a.scc_of.assign(n, -1);
        for (int v = 0 ; v < n ; ++v) {
            if (a.scc_of[v] != -1)
                continue;
            vector<int> comp;
            for (int w = 0 ; w < n ; ++w)
                if (dist[v][w] >= 0 && dist[w][v] >= 0) {
                    a.scc_of[w] = int(a.sccs.size());
                    comp.push_back(w);
                }
            a.sccs.push_back(comp);
        }

        int k = int(a.sccs.size());
        a.sink.assign(k, 1);
        a.source.assign(k, 1);
        a.smooth = true;
        for (int v = 0 ; v < n ; ++v) {
            bool has_out = false, has_in = false;
            for (int w = 0 ; w < n ; ++w) {
                if (g.arc[v][w]) {
                    has_out = true;
                    if (a.scc_of[v] != a.scc_of[w]) {
                        a.sink[a.scc_of[v]] = 0;
                        a.source[a.scc_of[w]] = 0;
                    }
                }
                if (g.arc[w][v])
                    has_in = true;
            }
            if (! has_out || ! has_in)
                a.smooth = false;
        }

        a.complete = true;
        for (auto & comp : a.sccs) {
            vector<int> left, right;
            for (auto v : comp)
                (v < m ? left : right).push_back(v < m ? v : v - m);
            if (left != right)
                a.complete = false;
            for (auto x : left)
                for (auto y : right)
                    if (! g.arc[x][m + y] || ! g.arc[m + y][x]) {
                        a.complete = false;
                        a.loose.emplace_back(x, y);
                    }
        }
        return a;
    }

    namespace
    {
        auto missing_arcs(const BipDigraph & g, const BipAnalysis & a) -> int
        {
            int m = g.size(), count = 0;
            for (auto & [x, y] : a.loose)
                count += ! g.arc[x][m + y] + ! g.arc[m + y][x];
            return count;
        }
    }

    auto make_complete(TraceBuilder & b, const TracedImplication & r1, const TracedImplication & r2) -> TracedImplication
    {
        require_right_left(r1.desc, "make_complete");
        require_right_left(r2.desc, "make_complete");
        if (r1.desc.c != r2.desc.c || r1.desc.c1 != r2.desc.c1)
            throw PreconditionError("make_complete: the implications differ in C or C1");

        auto first = r1, second = r2;
        int cap = (b.core().signature.size() + 1) * (b.core().signature.size() + 1);

        auto odd_power = [&] (const TracedImplication & x, const TracedImplication & y, int k) {
            // (x o y)^k o x as a left fold
            auto acc = x;
            for (int i = 0 ; i < k ; ++i)
                acc = compose(b, compose(b, acc, y), x);
            return acc;
        };

        for (int round = 0 ; ; ++round) {
            auto g = build_bipartite(first.desc, second.desc);
            auto a = analyze_bipartite(g);
            if (a.loose.empty())
                break;
            if (round >= cap)
                throw CapExceeded("make_complete: " + to_string(a.loose.size()) + " loose pairs left after "
                        + to_string(cap) + " rounds");

            int m = g.size();
            // Prefer a pair missing its left-to-right arc.
            optional<std::pair<int, int>> pick;
            bool fix_first = true;
            for (auto & [x, y] : a.loose)
                if (! g.arc[x][m + y]) {
                    pick = std::pair{x, y};
                    break;
                }
            if (! pick) {
                pick = a.loose.front();
                fix_first = false;
            }
            auto [x, y] = *pick;
            int len = fix_first ? distances(g, x)[m + y] : distances(g, m + y)[x];
            if (len < 3 || len % 2 == 0)
                throw PostconditionError("make_complete: unexpected path length " + to_string(len));
            int k = (len - 1) / 2;
            if (fix_first)
                first = odd_power(first, second, k);
            else
                second = odd_power(second, first, k);

            // A loose pair may miss both arcs, so count missing arcs rather
            // than pairs: each round adds one.
            auto after_g = build_bipartite(first.desc, second.desc);
            auto before_missing = missing_arcs(g, a), after_missing = missing_arcs(after_g, analyze_bipartite(after_g));
            if (after_missing >= before_missing)
                throw CapExceeded("make_complete: missing arcs did not decrease (" + to_string(before_missing) + " to "
                        + to_string(after_missing) + ")");
        }

        auto result = compose(b, first, second);
        if (! analyze_bipartite(build_bipartite(result.desc, result.desc)).complete)
            throw PostconditionError("make_complete: the composition is not complete");
        return result;
    }

    auto cycle_to_implication(TraceBuilder & b, const Instance & prepared, const ImpGraph & g, const vector<int> & cycle)
        -> TracedImplication
    {
        if (cycle.empty())
            throw PreconditionError("cycle_to_implication: empty cycle");
        auto & sig = b.core().signature;

        optional<TracedImplication> acc;
        for (auto a : cycle) {
            auto & con = prepared.constraints[g.arcs[a].constraint];
            vector<int> pos;
            for (auto v : arc_shape(g, a).vars)
                pos.push_back(int(std::find(con.scope.begin(), con.scope.end(), v) - con.scope.begin()));
            TracedImplication w{arc_witness(prepared, g, a), b.minimal_projection(prepared, g.arcs[a].constraint, pos)};
            acc = acc ? compose(b, *acc, w) : w;
        }

        auto d = *acc;
        if (d.desc.relation.arity == 3) {
            if (d.desc.l == Arrow::Right && d.desc.p == Arrow::Left)
                return d;
            if (d.desc.l == Arrow::Left && d.desc.p == Arrow::Right) {
                auto & x = d.desc;
                x.c = sig.inverse_set(x.c);
                x.d = sig.inverse_set(x.d);
                x.c1 = sig.inverse_set(x.c1);
                x.d1 = sig.inverse_set(x.d1);
                x.l = Arrow::Right;
                x.p = Arrow::Left;
                if (auto why = check_implication(x))
                    throw PostconditionError("cycle_to_implication: inverted relabeling failed: " + *why);
                return d;
            }
            d = compose(b, d, d);
        }

        vector<int> perm;
        if (d.desc.l == Arrow::Left && d.desc.p == Arrow::Left)
            perm = {1, 0, 2, 3};
        else if (d.desc.l == Arrow::Right && d.desc.p == Arrow::Right)
            perm = {0, 1, 3, 2};
        else if (d.desc.l == Arrow::Left && d.desc.p == Arrow::Right)
            perm = {1, 0, 3, 2};
        if (! perm.empty()) {
            d.step = b.permute(d.step, perm);
            d.desc.relation = b.relation(d.step);
            d.desc.l = Arrow::Right;
            d.desc.p = Arrow::Left;
        }
        if (auto why = check_implication(d.desc))
            throw PostconditionError("cycle_to_implication: normalization failed: " + *why);
        return d;
    }

    namespace
    {
        auto pair_orbits(const BinaryCore & core, LabelSet a, LabelSet b) -> vector<Orbit>
        {
            LabelingSearch search(core, 3);
            search.restrict_pair(0, 1, a);
            search.restrict_pair(1, 2, b);
            return search.visible_orbits(3);
        }
    }

    auto is_critical_ternary(const BinaryCore & core, const Relation & r, LabelSet c1, LabelSet c2, LabelSet d1,
            LabelSet d2) -> bool
    {
        if (r.arity != 3 || ! c1 || ! c2 || ! d1 || ! d2)
            return false;
        if ((c1 & c2) || (d1 & d2))
            return false;
        LabelSet p12 = projection_set(r, 0, 1), p23 = projection_set(r, 1, 2);
        if (((c1 | c2) & ~p12) || ((d1 | d2) & ~p23))
            return false;
        if (! is_anti_reflexive(c1) || ! is_anti_reflexive(d1))
            return false;
        bool both_neq = is_anti_reflexive(c2) && is_anti_reflexive(d2);
        bool both_eq = c2 == code_bit(eq_code) && d2 == code_bit(eq_code);
        if (! both_neq && ! both_eq)
            return false;
        if (! entails_implication(r, c1, 0, 1, d1, 1, 2) || ! entails_implication(r, d1, 1, 2, c1, 0, 1))
            return false;
        for (auto & o : pair_orbits(core, c1, d1))
            if (! r.contains(o))
                return false;
        for (auto & o : pair_orbits(core, c2, d2))
            if (! r.contains(o))
                return false;
        return true;
    }

    auto verify_witness(const CriticalWitness & w, const BinaryCore & core, const vector<Relation> & language)
        -> optional<string>
    {
        if (! is_critical_ternary(core, w.relation, w.c1, w.c2, w.d1, w.d2))
            return "the relation is not critical ternary over the given sets";
        if (w.step < 0 || unsigned(w.step) >= w.trace.steps.size() || ! (w.trace.steps[w.step].result == w.relation))
            return "the trace does not end in the relation";
        return replay_trace(w.trace, core, language);
    }

    namespace
    {
        // Tries to pp-define the set from R2 as R2(x1, x2, x3) and O^-1(x2, x3).
        auto try_define(TraceBuilder & b, int r2, LabelSet target) -> bool
        {
            auto & sig = b.core().signature;
            auto & t = find_template("define_binary");
            for (auto code : codes_of(target)) {
                auto inv = binary_relation(sig, code_bit(sig.inverse_code(PairCode(code))));
                auto r = pp_apply(b.core(), t, {&b.relation(r2), &inv});
                if (label_set(r) == target) {
                    int o = b.orbital(sig.inverse_code(PairCode(code)));
                    b.apply(t.id, {r2, o}, r);
                    return true;
                }
            }
            return false;
        }

        auto witness_from(TraceBuilder & b, int step, LabelSet c1, LabelSet c2, LabelSet d1, LabelSet d2) -> CriticalWitness
        {
            CriticalWitness w{b.relation(step), c1, c2, d1, d2, {}, step, {}};
            for (auto s : {c1, c2})
                if (s != code_bit(eq_code) && try_define(b, step, s))
                    w.defined.push_back(s);
            w.trace = b.trace();
            return w;
        }
    }

    auto synthesize_critical(TraceBuilder & b, const TracedImplication & d, vector<string> & notes)
        -> optional<CriticalWitness>
    {
        auto & core = b.core();
        auto & sig = core.signature;
        if (! is_liberal(core)) {
            notes.push_back("synthesis needs a liberal core; " + core.name + " has a bound of size 3 to 6");
            return nullopt;
        }
        require_right_left(d.desc, "synthesize_critical");

        auto g = build_bipartite(d.desc, d.desc);
        auto a = analyze_bipartite(g);
        if (! a.complete) {
            notes.push_back("the implication is not complete");
            return nullopt;
        }
        int m = g.size();
        auto set_of = [&] (int scc) {
            LabelSet s = 0;
            for (auto v : a.sccs[scc])
                s |= code_bit(g.codes[v < m ? v : v - m]);
            return s;
        };

        optional<LabelSet> c1, d1;
        for (unsigned i = 0 ; i < a.sccs.size() ; ++i) {
            auto s = set_of(int(i));
            if (! c1 && a.sink[i] && (s & ~d.desc.c1) == 0)
                c1 = s;
            if (! d1 && a.source[i] && (s & d.desc.c1) == 0)
                d1 = s;
        }
        if (! c1 || ! d1) {
            notes.push_back("no sink component inside C1 or no source component outside it");
            return nullopt;
        }

        auto mixed = [] (LabelSet s) {
            return (s & code_bit(eq_code)) && s != code_bit(eq_code);
        };
        int step = d.step;
        LabelSet c = d.desc.c;
        if (mixed(*c1) || mixed(*d1)) {
            int neq = b.neq();
            step = b.apply(d.desc.relation.arity == 3 ? "restrict_neq_ternary" : "restrict_neq_quaternary", {step, neq});
            c &= ~code_bit(eq_code);
            *c1 &= c;
            *d1 &= c;
            notes.push_back("restricted to disequalities on both pairs");
        }
        if (! *c1 || ! *d1) {
            notes.push_back("a component vanished under the disequality restriction");
            return nullopt;
        }

        ImplicationDesc restricted{b.relation(step), c, c, *c1, *c1, Arrow::Right, Arrow::Left, false};
        if (auto why = check_implication(restricted)) {
            notes.push_back("the sink component does not give an implication: " + *why);
            return nullopt;
        }

        int r1;
        if (restricted.relation.arity == 3) {
            int t = b.apply("bowtie_ternary", {step, step});
            r1 = b.apply("bowtie_ternary", {t, t});
        }
        else {
            int t = b.apply("bowtie_quaternary", {step, step});
            r1 = b.apply("bowtie_three", {t, t});
        }
        int r2 = b.apply("symmetric_meet", {r1});
        auto & rel = b.relation(r2);

        vector<std::array<LabelSet, 4>> candidates;
        if (is_anti_reflexive(*c1))
            candidates.push_back({*c1, *d1, sig.inverse_set(*c1), sig.inverse_set(*d1)});
        if (is_anti_reflexive(*d1))
            candidates.push_back({*d1, *c1, sig.inverse_set(*d1), sig.inverse_set(*c1)});
        for (auto & [x1, x2, y1, y2] : candidates)
            if (is_critical_ternary(core, rel, x1, x2, y1, y2))
                return witness_from(b, r2, x1, x2, y1, y2);

        notes.push_back("the symmetrized relation is not critical ternary over " + sig.set_name(*c1) + " and "
                + sig.set_name(*d1));
        return nullopt;
    }

    namespace
    {
        auto permutations(int n) -> vector<vector<int>>
        {
            vector<int> p(n);
            std::iota(p.begin(), p.end(), 0);
            vector<vector<int>> result;
            do
                result.push_back(p);
            while (std::next_permutation(p.begin(), p.end()));
            return result;
        }

        auto has_injective(const Relation & r) -> bool
        {
            return std::any_of(r.orbits.begin(), r.orbits.end(), [] (const Orbit & o) { return is_injective(o); });
        }

        auto perm_name(const vector<int> & p) -> string
        {
            string s = "(";
            for (unsigned i = 0 ; i < p.size() ; ++i)
                s += (i ? "," : "") + to_string(p[i] + 1);
            return s + ")";
        }

        // Ends the ternary or quaternary O-implies-equality construction at
        // step r: builds the bowtie tower, symmetrizes, and looks for a second
        // orbital P making it critical.
        auto finish_o_eq(TraceBuilder & b, int r, int o) -> optional<CriticalWitness>
        {
            auto & sig = b.core().signature;
            int r1;
            if (b.relation(r).arity == 3) {
                int t = b.apply("bowtie_ternary", {r, r});
                r1 = b.apply("bowtie_ternary", {t, t});
            }
            else {
                int t = b.apply("bowtie_quaternary", {r, r});
                r1 = b.apply("bowtie_three", {t, t});
            }
            int r2 = b.apply("symmetric_meet", {r1});
            for (int p = 1 ; p <= sig.size() ; ++p) {
                if (p == o)
                    continue;
                LabelSet os = code_bit(o), ps = code_bit(p);
                if (is_critical_ternary(b.core(), b.relation(r2), os, ps, sig.inverse_set(os), sig.inverse_set(ps)))
                    return witness_from(b, r2, os, ps, sig.inverse_set(os), sig.inverse_set(ps));
            }
            return nullopt;
        }
    }

    auto detect_patterns(const BinaryCore & core, const Relation & r) -> vector<PatternFinding>
    {
        vector<PatternFinding> found;
        if (! is_liberal(core) || (r.arity != 3 && r.arity != 4) || ! entails_no_equalities(r))
            return found;
        auto & sig = core.signature;
        LabelSet eq = code_bit(eq_code);

        if (r.arity == 3 && ! has_injective(r))
            for (auto & p : permutations(3)) {
                TraceBuilder b(core);
                int s = b.permute(b.language(r), p);
                int n = b.neq();
                int r1 = b.apply("restrict_neq_13", {s, n});
                int r2 = b.apply("rdprime", {r1});
                LabelSet c = projection_set(b.relation(r2), 0, 1) & ~eq;
                if (c && is_critical_ternary(core, b.relation(r2), c, eq, sig.inverse_set(c), eq)) {
                    found.push_back(PatternFinding{"EqOrEqOrEq", "entails x1=x2 | x2=x3 | x1=x3 under " + perm_name(p),
                            witness_from(b, r2, c, eq, sig.inverse_set(c), eq)});
                    break;
                }
            }

        if (r.arity == 3) {
            bool done = false;
            for (auto & p : permutations(3)) {
                auto rp = permute(r, p);
                for (int o = 1 ; o <= sig.size() && ! done ; ++o) {
                    if (! efficiently_entails(rp, code_bit(o), 0, 1, eq, 1, 2))
                        continue;
                    TraceBuilder b(core);
                    int s = b.permute(b.language(r), p);
                    int os = b.orbital(o);
                    int r1 = b.apply("ternary_o_eq", {s, os});
                    if (auto w = finish_o_eq(b, r1, o)) {
                        found.push_back(PatternFinding{"TernaryOImpliesEq", sig.code_name(PairCode(o))
                                + "(x1,x2) implies x2=x3 under " + perm_name(p), std::move(*w)});
                        done = true;
                    }
                }
                if (done)
                    break;
            }
        }

        if (r.arity == 4) {
            bool done = false;
            if (has_injective(r))
                for (auto & p : permutations(4)) {
                    auto rp = permute(r, p);
                    for (int o = 1 ; o <= sig.size() && ! done ; ++o) {
                        if (! efficiently_entails(rp, code_bit(o), 0, 1, eq, 2, 3))
                            continue;
                        TraceBuilder b(core);
                        int s = b.permute(b.language(r), p);
                        int os = b.orbital(o);
                        int r1 = b.apply("quaternary_o_eq", {s, os});
                        if (auto w = finish_o_eq(b, r1, o)) {
                            found.push_back(PatternFinding{"QuaternaryOImpliesEq", sig.code_name(PairCode(o))
                                    + "(x1,x2) implies x3=x4 under " + perm_name(p), std::move(*w)});
                            done = true;
                        }
                    }
                    if (done)
                        break;
                }

            done = false;
            for (auto & p : permutations(4)) {
                auto rp = permute(r, p);
                bool shape = std::all_of(rp.orbits.begin(), rp.orbits.end(),
                        [] (const Orbit & x) { return x.code(0, 1) == eq_code || x.code(2, 3) == eq_code; });
                if (! shape)
                    continue;
                for (int o = 1 ; o <= sig.size() && ! done ; ++o) {
                    bool has = std::any_of(rp.orbits.begin(), rp.orbits.end(),
                            [&] (const Orbit & x) { return x.code(0, 1) == o && x.code(2, 3) == eq_code; });
                    if (! has)
                        continue;
                    TraceBuilder b(core);
                    int s = b.permute(b.language(r), p);
                    int os = b.orbital(o);
                    int r1 = b.apply("eq_or_eq_quaternary", {s, os});
                    for (int q = 1 ; q <= sig.size() && ! done ; ++q) {
                        if (q == o || ! efficiently_entails(b.relation(r1), code_bit(q), 2, 3, eq, 0, 1))
                            continue;
                        TraceBuilder bq = b;
                        int r2 = bq.permute(r1, {2, 3, 0, 1});
                        if (! has_injective(bq.relation(r2)))
                            continue;
                        int qs = bq.orbital(q);
                        int r3 = bq.apply("quaternary_o_eq", {r2, qs});
                        if (auto w = finish_o_eq(bq, r3, q)) {
                            found.push_back(PatternFinding{"EqOrEqQuaternary", "entails x1=x2 | x3=x4 under "
                                    + perm_name(p), std::move(*w)});
                            done = true;
                        }
                    }
                }
                if (done)
                    break;
            }
        }
        return found;
    }

    namespace
    {
        auto instance_key(const Instance & inst) -> string
        {
            vector<string> parts;
            for (auto & c : inst.constraints) {
                string s = c.relation.name + "(";
                for (auto v : c.scope)
                    s += to_string(v) + ",";
                parts.push_back(s + ")");
            }
            std::sort(parts.begin(), parts.end());
            string key = to_string(inst.variable_count()) + ":";
            for (auto & p : parts)
                key += p;
            return key;
        }

        // Every injective scope for an atom of the given arity whose new
        // variables are numbered in order of first appearance.
        auto extend_scopes(int existing, int arity, int max_vars, vector<int> & cur, int fresh,
                vector<std::pair<vector<int>, int>> & out) -> void
        {
            if (int(cur.size()) == arity) {
                bool shares = std::any_of(cur.begin(), cur.end(), [&] (int v) { return v < existing; });
                if (shares)
                    out.emplace_back(cur, fresh);
                return;
            }
            for (int v = 0 ; v < existing + fresh ; ++v)
                if (std::find(cur.begin(), cur.end(), v) == cur.end()) {
                    cur.push_back(v);
                    extend_scopes(existing, arity, max_vars, cur, fresh, out);
                    cur.pop_back();
                }
            if (existing + fresh < max_vars) {
                cur.push_back(existing + fresh);
                extend_scopes(existing, arity, max_vars, cur, fresh + 1, out);
                cur.pop_back();
            }
        }
    }

    auto generate_instances(const vector<Relation> & language, const AnalyzeOptions & options, bool & exhausted)
        -> vector<Instance>
    {
        exhausted = false;
        vector<Instance> result;
        std::set<string> seen;
        auto add = [&] (Instance inst) {
            if (int(result.size()) >= options.max_instances) {
                exhausted = true;
                return false;
            }
            if (seen.insert(instance_key(inst)).second)
                result.push_back(std::move(inst));
            return true;
        };

        vector<Instance> frontier;
        for (auto & r : language) {
            auto inst = Instance::with_variables(r.arity);
            vector<int> scope(r.arity);
            std::iota(scope.begin(), scope.end(), 0);
            inst.add(scope, r);
            frontier.push_back(inst);
            if (! add(inst))
                return result;
        }

        for (int count = 2 ; count <= options.max_constraints ; ++count) {
            vector<Instance> next;
            for (auto & base : frontier) {
                if (base.variable_count() > options.max_vars)
                    continue;
                for (auto & r : language) {
                    vector<std::pair<vector<int>, int>> scopes;
                    vector<int> cur;
                    extend_scopes(base.variable_count(), r.arity, options.max_vars, cur, 0, scopes);
                    for (auto & [scope, fresh] : scopes) {
                        auto inst = Instance::with_variables(base.variable_count() + fresh);
                        inst.constraints = base.constraints;
                        inst.add(scope, r);
                        auto before = result.size();
                        if (! add(inst))
                            return result;
                        if (result.size() > before)
                            next.push_back(std::move(inst));
                    }
                }
            }
            frontier = std::move(next);
        }
        return result;
    }

    auto analyze_language(const BinaryCore & core, const vector<Relation> & language, const AnalyzeOptions & options)
        -> AnalysisReport
    {
        AnalysisReport report;
        report.liberal = is_liberal(core);

        bool exhausted = false;
        auto instances = generate_instances(language, options, exhausted);
        report.coverage.generated = int(instances.size());
        report.coverage.budget_exhausted = exhausted;

        // 0 unexamined, 1 trivial, 2 acyclic, 3 cyclic
        vector<int> status(instances.size(), 0);
        std::atomic<int> best{INT_MAX};
        std::atomic<int> next{0};
        auto worker = [&] {
            while (true) {
                int i = next++;
                if (i >= int(instances.size()) || i > best)
                    return;
                auto prepared = prepare_instance(instances[i], core);
                if (! prepared) {
                    status[i] = 1;
                    continue;
                }
                auto g = build_graph(prepared->instance);
                if (find_cycle(g)) {
                    status[i] = 3;
                    int cur = best;
                    while (i < cur && ! best.compare_exchange_weak(cur, i))
                        ;
                }
                else
                    status[i] = 2;
            }
        };
        int threads = std::max(1, options.threads);
        if (threads == 1)
            worker();
        else {
            vector<std::thread> pool;
            for (int t = 0 ; t < threads ; ++t)
                pool.emplace_back(worker);
            for (auto & t : pool)
                t.join();
        }

        int limit = best == INT_MAX ? int(instances.size()) : best + 1;
        report.coverage.examined = limit;
        report.coverage.trivial = int(std::count(status.begin(), status.begin() + limit, 1));

        if (best != INT_MAX) {
            auto & source = instances[best];
            auto prepared = *prepare_instance(source, core);
            auto g = build_graph(prepared.instance);
            auto cycle = *find_cycle(g);
            report.cyclic_instance = prepared.instance;
            for (auto a : cycle)
                report.cycle.push_back(vertex_to_string(prepared.instance, core.signature, g.vertices[g.arcs[a].from]));

            if (report.liberal) {
                try {
                    TraceBuilder b(core, source);
                    auto d = cycle_to_implication(b, prepared.instance, g, cycle);
                    auto complete = make_complete(b, d, d);
                    auto w = synthesize_critical(b, complete, report.notes);
                    if (w) {
                        if (auto why = verify_witness(*w, core, language))
                            report.notes.push_back("synthesized witness failed verification: " + *why);
                        else
                            report.witness = std::move(*w);
                    }
                }
                catch (const Error & e) {
                    report.notes.push_back(string("critical-ternary synthesis stopped: ") + e.what());
                }
            }
            else
                report.notes.push_back("the core is not liberal, so a cycle gives no strict-width conclusion");
        }

        if (report.liberal)
            for (auto & r : language)
                for (auto & f : detect_patterns(core, r))
                    if (! verify_witness(f.witness, core, language))
                        report.findings.push_back(std::move(f));

        if (! report.witness && ! report.findings.empty())
            report.witness = report.findings.front().witness;

        if (report.witness)
            report.verdict = verdict_no_bsw;
        else if (best != INT_MAX)
            report.verdict = verdict_hard_only;
        else {
            report.verdict = verdict_simple;
            report.notes.push_back("relational width (2, " + to_string(max_bound(core))
                    + ") holds if the language is implicationally simple beyond the search bound");
        }
        return report;
    }
}
