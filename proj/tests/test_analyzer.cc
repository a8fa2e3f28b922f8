#include <doctest.h>
#include "oracles.hh"

using namespace orbcsp;
using std::string;
using std::vector;

namespace
{
    auto bit(const CoreSignature & sig, const string & name) -> LabelSet
    {
        return code_bit(orbital_code(*sig.find(name)));
    }

    // Orbits grouped by their codes on (x1,x2) and (x2,x3).
    auto families(const Relation & r) -> std::map<std::pair<int, int>, vector<Orbit>>
    {
        std::map<std::pair<int, int>, vector<Orbit>> f;
        for (auto & o : r.orbits)
            f[{o.code(0, 1), o.code(1, 2)}].push_back(o);
        return f;
    }
}

TEST_CASE("the two-branch inverse relation is critical")
{
    auto core = make_liberal_digraph_core();
    auto & sig = core.signature;
    auto r = from_formula(core, 3, "(arc(1,2) & arc_inv(2,3)) | (N(1,2) & N(2,3))");
    LabelSet c1 = bit(sig, "arc"), d1 = bit(sig, "N");
    CHECK(is_critical_ternary(core, r, c1, d1, sig.inverse_set(c1), sig.inverse_set(d1)));

    // Deleting either family of orbits breaks it.
    auto f = families(r);
    CHECK(f.size() == 2);
    for (auto & [key, drop] : f) {
        vector<Orbit> kept;
        for (auto & o : r.orbits)
            if (std::find(drop.begin(), drop.end(), o) == drop.end())
                kept.push_back(o);
        CHECK(! is_critical_ternary(core, Relation::make(3, kept), c1, d1, sig.inverse_set(c1), sig.inverse_set(d1)));
    }

    // Sets that overlap or miss the projection are refused.
    CHECK(! is_critical_ternary(core, r, c1 | d1, d1, sig.inverse_set(c1), sig.inverse_set(d1)));
    CHECK(! is_critical_ternary(core, r, bit(sig, "arc_inv"), d1, c1, sig.inverse_set(d1)));
}

TEST_CASE("the critical relation is a complete implication")
{
    auto core = make_liberal_digraph_core();
    auto & sig = core.signature;
    auto r = from_formula(core, 3, "(arc(1,2) & arc_inv(2,3)) | (N(1,2) & N(2,3))");
    LabelSet c = bit(sig, "arc") | bit(sig, "N");
    ImplicationDesc d{r, c, c, bit(sig, "arc"), bit(sig, "arc"), Arrow::Right, Arrow::Left, false};
    CHECK(! check_implication(d));
    auto a = analyze_bipartite(build_bipartite(d, d));
    CHECK(a.complete);
    CHECK(a.smooth);
    CHECK(a.loose.empty());
    CHECK(a.sccs.size() == 2);
}

TEST_CASE("bipartite analysis on a hand-built graph")
{
    // Left {a, b}, right {a', b'}: a -> a' -> b -> b' with no way back.
    BipDigraph g;
    g.codes = {1, 2};
    g.arc.assign(4, vector<char>(4, 0));
    g.arc[0][2] = 1;
    g.arc[2][1] = 1;
    g.arc[1][3] = 1;
    auto a = analyze_bipartite(g);
    CHECK(a.sccs.size() == 4);
    CHECK(! a.smooth);
    CHECK(a.complete == false);
    CHECK(a.sink[a.scc_of[3]]);
    CHECK(a.source[a.scc_of[0]]);
    CHECK(! a.sink[a.scc_of[0]]);
}

TEST_CASE("completion removes loose pairs")
{
    // Orbits read as (left, right) codes: (arc, arc), (arc, arc_inv),
    // (arc_inv, arc) and (N, N). The first three form one component in which
    // arc_inv on the left and arc_inv on the right have no symmetric edge.
    auto core = make_liberal_digraph_core();
    auto & sig = core.signature;
    auto r = from_formula(core, 3, "(arc(1,2) & arc_inv(2,3)) | (arc(1,2) & arc(2,3)) | (arc_inv(1,2) & arc_inv(2,3))"
            " | (N(1,2) & N(2,3))");
    LabelSet c = sig.neq_set(), n = bit(sig, "N");
    TraceBuilder b(core);
    TracedImplication d{ImplicationDesc{r, c, c, n, n, Arrow::Right, Arrow::Left, false}, b.language(r)};
    REQUIRE(! check_implication(d.desc));
    auto before = analyze_bipartite(build_bipartite(d.desc, d.desc));
    CHECK(! before.complete);
    CHECK(! before.loose.empty());
    auto complete = make_complete(b, d, d);
    CHECK(! check_implication(complete.desc));
    CHECK(analyze_bipartite(build_bipartite(complete.desc, complete.desc)).complete);
    CHECK(! replay_trace(b.trace(), core, {r}));
}

TEST_CASE("traces replay and catch tampering")
{
    auto core = make_random_graph_core();
    auto r = from_formula(core, 3, "(E(1,2) & N(2,3)) | (N(1,2) & E(2,3))", "R");
    TraceBuilder b(core);
    int s = b.language(r);
    int p = b.permute(s, {2, 1, 0});
    int n = b.neq();
    b.intersect(b.apply("restrict_neq_13", {p, n}), p);
    CHECK(! replay_trace(b.trace(), core, {r}));

    auto bad = b.trace();
    bad.steps[1].result = full_relation(core, 3);
    CHECK(replay_trace(bad, core, {r}));
    CHECK(replay_trace(b.trace(), core, {}));
}

TEST_CASE("pipeline emits a verified critical witness for the liberal two-branch language")
{
    auto core = make_random_graph_core();
    auto language = load_language_file(core, oracle::corpus("languages/two_branch.json"));
    auto report = analyze_language(core, language, AnalyzeOptions{});
    CHECK(report.verdict == verdict_no_bsw);
    REQUIRE(report.cyclic_instance);
    CHECK(! report.cycle.empty());
    REQUIRE(report.witness);
    auto & w = *report.witness;
    CHECK(! verify_witness(w, core, language));
    CHECK(! replay_trace(w.trace, core, language));
    CHECK(is_critical_ternary(core, w.relation, w.c1, w.c2, w.d1, w.d2));

    // A witness with an orbit family removed no longer verifies.
    for (auto & [key, drop] : families(w.relation)) {
        auto mutated = w;
        vector<Orbit> kept;
        for (auto & o : w.relation.orbits)
            if (std::find(drop.begin(), drop.end(), o) == drop.end())
                kept.push_back(o);
        mutated.relation = Relation::make(3, kept);
        CHECK(verify_witness(mutated, core, language));
    }
}

TEST_CASE("non-liberal cores stop at hardness")
{
    auto core = make_two_cliques_core();
    auto language = load_language_file(core, oracle::corpus("languages/two_branch.json"));
    auto report = analyze_language(core, language, AnalyzeOptions{});
    CHECK(report.verdict == verdict_hard_only);
    CHECK(! report.witness);
}

TEST_CASE("disequality clauses are simple up to the bound")
{
    auto core = make_equality_core();
    auto language = load_language_file(core, oracle::corpus("languages/equality_clauses.json"));
    AnalyzeOptions opts;
    opts.threads = 2;
    auto report = analyze_language(core, language, opts);
    CHECK(report.verdict == verdict_simple);
    CHECK(report.findings.empty());
    CHECK(report.coverage.examined == report.coverage.generated);
}

TEST_CASE("equality patterns are detected")
{
    auto core = make_random_graph_core();
    auto three = detect_patterns(core, from_formula(core, 3, "1=2 | 2=3 | 1=3"));
    REQUIRE(! three.empty());
    CHECK(three[0].pattern == "EqOrEqOrEq");

    auto four = detect_patterns(core, from_formula(core, 4, "1=2 | 3=4"));
    bool quaternary = std::any_of(four.begin(), four.end(), [] (const PatternFinding & f) {
        return f.pattern == "EqOrEqQuaternary";
    });
    CHECK(quaternary);

    auto o_eq = detect_patterns(core, from_formula(core, 3, "N(1,2) | 1=2 | 2=3"));
    bool ternary = std::any_of(o_eq.begin(), o_eq.end(), [] (const PatternFinding & f) {
        return f.pattern == "TernaryOImpliesEq";
    });
    CHECK(ternary);

    for (auto & f : three)
        CHECK(! verify_witness(f.witness, core, {from_formula(core, 3, "1=2 | 2=3 | 1=3")}));

    CHECK(detect_patterns(core, full_relation(core, 3)).empty());
    CHECK(detect_patterns(core, full_relation(core, 4)).empty());
    CHECK(detect_patterns(make_two_cliques_core(), from_formula(make_two_cliques_core(), 3, "1=2 | 2=3 | 1=3")).empty());
}

TEST_CASE("instance generation is deduplicated and bounded")
{
    auto core = make_equality_core();
    auto language = load_language_file(core, oracle::corpus("languages/equality_clauses.json"));
    AnalyzeOptions opts;
    bool exhausted = false;
    auto all = generate_instances(language, opts, exhausted);
    CHECK(! exhausted);
    CHECK(all.size() >= language.size());
    for (auto & inst : all) {
        CHECK(inst.variable_count() <= opts.max_vars);
        CHECK(int(inst.constraints.size()) <= opts.max_constraints);
    }
    for (unsigned i = 0 ; i < language.size() ; ++i)
        CHECK(all[i].constraints.size() == 1);
    opts.max_instances = 10;
    auto few = generate_instances(language, opts, exhausted);
    CHECK(exhausted);
    CHECK(few.size() == 10);
}
