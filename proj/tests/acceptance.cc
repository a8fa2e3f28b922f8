#include "oracles.hh"

#include <chrono>
#include <iostream>
#include <sstream>

using namespace orbcsp;
using std::string;
using std::vector;

namespace
{
    using Clock = std::chrono::steady_clock;

    auto seconds_since(Clock::time_point t) -> double
    {
        return std::chrono::duration<double>(Clock::now() - t).count();
    }

    struct Outcome
    {
        bool pass = true;
        std::ostringstream detail;

        auto fail(const string & why) -> void
        {
            if (pass)
                detail << " first failure: " << why << ";";
            pass = false;
        }
    };

    int failures = 0;

    auto report(int n, const string & name, Outcome & o) -> void
    {
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << n << " " << name << ":" << o.detail.str() << std::endl;
        if (! o.pass)
            ++failures;
    }

    auto run(int n, const string & name, const std::function<void (Outcome &)> & body) -> void
    {
        Outcome o;
        try {
            body(o);
        }
        catch (const std::exception & e) {
            o.fail(string("exception: ") + e.what());
        }
        report(n, name, o);
    }

    auto with_injective(const BinaryCore & core, int arity, std::pair<int, int> p1, int o1, std::pair<int, int> p2,
            int o2, vector<Orbit> base) -> Relation
    {
        for (auto & o : enumerate_orbits(core, arity))
            if (is_injective(o) && o.code(p1.first, p1.second) == o1 && o.code(p2.first, p2.second) == o2)
                base.push_back(o);
        return Relation::make(arity, std::move(base));
    }

    auto pick(const vector<Orbit> & orbits, std::mt19937_64 & rng) -> const Orbit &
    {
        return orbits[rng() % orbits.size()];
    }

    // Clause-language verdicts from criterion 2, reused by criterion 9.
    vector<Verdict> clause_verdicts;
}

auto main() -> int
{
    auto equality = make_equality_core();
    auto graph = make_random_graph_core();
    auto digraph = make_liberal_digraph_core();
    auto two = make_two_cliques_core();
    auto equality_language = load_language_file(equality, oracle::corpus("languages/equality_clauses.json"));
    auto clause_language = load_language_file(graph, oracle::corpus("languages/graph_clauses.json"));

    run(1, "orbit counts match brute-force enumeration", [&] (Outcome & o) {
        vector<long> bell{2, 5, 15, 52};
        for (int k = 2 ; k <= 5 ; ++k) {
            auto t = Clock::now();
            auto orbits = enumerate_orbits(equality, k);
            double s = seconds_since(t);
            oracle::MatrixSet mine;
            for (auto & x : orbits)
                mine.insert(oracle::matrix_of(x));
            if (long(orbits.size()) != bell[k - 2] || mine != oracle::orbits(equality, k) || s >= 1.0)
                o.fail("equality k=" + std::to_string(k));
            o.detail << " eq k=" << k << " " << orbits.size();
        }
        auto t = Clock::now();
        auto g3 = enumerate_orbits(graph, 3);
        double s = seconds_since(t);
        oracle::MatrixSet mine;
        for (auto & x : g3)
            mine.insert(oracle::matrix_of(x));
        if (g3.size() != 15 || mine != oracle::orbits(graph, 3) || s >= 1.0)
            o.fail("graph k=3");
        o.detail << ", graph k=3 " << g3.size();
    });

    run(2, "solver agrees with exhaustive search", [&] (Outcome & o) {
        auto t = Clock::now();
        std::mt19937_64 rng(2024);
        int runs = 0, sat = 0, certs = 0;
        auto batch = [&] (const BinaryCore & core, const vector<Relation> & language, bool keep) {
            for (int i = 0 ; i < 300 ; ++i) {
                auto inst = oracle::random_instance(language, 6, 5, rng);
                auto expected = brute_force_solve(inst, core);
                auto r = solve(inst, core);
                ++runs;
                if (keep)
                    clause_verdicts.push_back(r.verdict);
                if (r.verdict == Verdict::Hard) {
                    o.fail("HARD on a clause instance");
                    continue;
                }
                if ((r.verdict == Verdict::Sat) != bool(expected))
                    o.fail("verdict mismatch on " + core.name);
                if (expected && ! verify_certificate(*expected, inst, core))
                    o.fail("oracle certificate rejected");
                if (r.verdict == Verdict::Sat) {
                    ++sat;
                    if (r.certificate && verify_certificate(*r.certificate, inst, core))
                        ++certs;
                    else
                        o.fail("solver certificate rejected");
                }
            }
        };
        batch(equality, equality_language, false);
        batch(graph, clause_language, true);
        double s = seconds_since(t);
        if (s >= 300)
            o.fail("too slow");
        o.detail << " " << runs << " instances, " << sat << " SAT, " << certs << " certificates verified, " << s << " s";
    });

    run(3, "one two-clique constraint is cyclic", [&] (Outcome & o) {
        auto t = Clock::now();
        auto inst = Instance::with_variables(3);
        inst.add({0, 1, 2}, from_formula(two, 3, "(E(1,2) & N(2,3)) | (N(1,2) & E(2,3))"));
        auto prepared = prepare_instance(inst, two);
        bool cyclic = prepared && find_cycle(build_graph(prepared->instance));
        if (! cyclic)
            o.fail("acyclic");
        if (seconds_since(t) >= 1.0)
            o.fail("too slow");
        o.detail << " cyclic=" << cyclic;
    });

    run(4, "psi defines disequality", [&] (Outcome & o) {
        auto t = Clock::now();
        int checked = 0;
        for (auto & core : {graph, digraph}) {
            auto & sig = core.signature;
            for (int a = 0 ; a < sig.size() ; ++a)
                for (int b = 0 ; b < sig.size() ; ++b) {
                    if (a == b)
                        continue;
                    auto ra = binary_relation(sig, code_bit(orbital_code(a)));
                    auto rb = binary_relation(sig, code_bit(orbital_code(b)));
                    auto r = pp_apply(core, find_template("psi_neq"), {&ra, &rb});
                    auto expected = binary_relation(sig, sig.neq_set());
                    if (r != expected || oracle::pp_apply(core, find_template("psi_neq"), {&ra, &rb}) != oracle::matrices_of(expected))
                        o.fail(core.name + " " + sig.code_name(orbital_code(a)) + "," + sig.code_name(orbital_code(b)));
                    ++checked;
                }
        }
        if (seconds_since(t) >= 1.0)
            o.fail("too slow");
        o.detail << " " << checked << " orbital pairs";
    });

    run(5, "narrowing at a sink preserves minimality", [&] (Outcome & o) {
        std::mt19937_64 rng(5);
        int tested = 0, attempts = 0;
        while (tested < 100 && attempts < 5000) {
            ++attempts;
            bool use_graph = attempts % 2;
            auto & core = use_graph ? graph : equality;
            auto inst = oracle::random_instance(use_graph ? clause_language : equality_language, 6, 5, rng);
            auto prepared = prepare_instance(inst, core);
            if (! prepared)
                continue;
            auto g = build_graph(prepared->instance);
            if (g.vertices.empty() || find_cycle(g))
                continue;
            ++tested;
            auto & v = g.vertices[sink_candidates(g).front()];
            auto n = narrow(prepared->instance, v.v1, v.v2, v.set);
            if (is_trivial(n) || ! verify_minimality(n, 2, max_bound(core)))
                o.fail("instance " + std::to_string(tested));
        }
        if (tested < 100)
            o.fail("only " + std::to_string(tested) + " instances");
        o.detail << " " << tested << " instances";
    });

    run(6, "minimization is confluent", [&] (Outcome & o) {
        std::mt19937_64 rng(6);
        int tested = 0;
        for (int i = 0 ; i < 100 ; ++i) {
            bool use_graph = i % 2;
            auto & core = use_graph ? graph : equality;
            auto inst = oracle::random_instance(use_graph ? clause_language : equality_language, 6, 5, rng);
            MinimalityOptions opts;
            opts.l = max_bound(core);
            opts.record_trace = false;
            std::optional<MinimalityResult> first;
            for (std::uint64_t seed = 0 ; seed < 10 ; ++seed) {
                opts.shuffle_seed = seed;
                auto r = establish_minimality(inst, core, opts);
                if (! first)
                    first = std::move(r);
                else if (r.trivial != first->trivial || (! r.trivial && r.instance != first->instance))
                    o.fail("instance " + std::to_string(i) + " order " + std::to_string(seed));
            }
            ++tested;
        }
        o.detail << " " << tested << " instances x 10 orders";
    });

    run(7, "critical ternary certification", [&] (Outcome & o) {
        auto & sig = digraph.signature;
        auto r = from_formula(digraph, 3, "(arc(1,2) & arc_inv(2,3)) | (N(1,2) & N(2,3))");
        LabelSet c1 = code_bit(orbital_code(*sig.find("arc"))), d1 = code_bit(orbital_code(*sig.find("N")));
        LabelSet c1i = sig.inverse_set(c1), d1i = sig.inverse_set(d1);
        if (! is_critical_ternary(digraph, r, c1, d1, c1i, d1i))
            o.fail("example rejected");

        auto drop = [] (const Relation & rel, int a, int b) {
            vector<Orbit> kept;
            for (auto & x : rel.orbits)
                if (x.code(0, 1) != a || x.code(1, 2) != b)
                    kept.push_back(x);
            return Relation::make(3, kept);
        };
        std::set<std::pair<int, int>> fams;
        for (auto & x : r.orbits)
            fams.insert({x.code(0, 1), x.code(1, 2)});
        int mutations = 0;
        for (auto [a, b] : fams) {
            ++mutations;
            if (is_critical_ternary(digraph, drop(r, a, b), c1, d1, c1i, d1i))
                o.fail("mutation kept the verdict");
        }

        auto language = load_language_file(graph, oracle::corpus("languages/two_branch.json"));
        auto report = analyze_language(graph, language, AnalyzeOptions{});
        if (! report.witness)
            o.fail("pipeline produced no witness");
        else {
            auto & w = *report.witness;
            if (replay_trace(w.trace, graph, language) || verify_witness(w, graph, language))
                o.fail("pipeline witness does not verify");
            std::set<std::pair<int, int>> wf;
            for (auto & x : w.relation.orbits)
                wf.insert({x.code(0, 1), x.code(1, 2)});
            for (auto [a, b] : wf) {
                ++mutations;
                auto m = w;
                m.relation = drop(w.relation, a, b);
                if (! verify_witness(m, graph, language))
                    o.fail("pipeline mutation still verifies");
            }
        }
        o.detail << " example accepted, pipeline verdict '" << report.verdict << "', " << mutations << " mutations flipped";
    });

    run(8, "bowtie laws hold and match tuple-level evaluation", [&] (Outcome & o) {
        std::mt19937_64 rng(8);
        int cases = 0;
        for (int i = 0 ; i < 200 ; ++i) {
            auto & core = i % 2 ? graph : digraph;
            auto & sig = core.signature;
            auto anti = [&] { return orbital_code(int(rng() % sig.size())); };
            int kind = (i / 2) % 4;
            Relation r1, r2, result;
            std::string id;
            vector<Orbit> expected;
            if (kind == 0 || kind == 1) {
                // A single injective witness on each side.
                int arity = kind == 0 ? 3 : 4;
                auto all = enumerate_orbits(core, arity);
                vector<Orbit> inj;
                for (auto & x : all)
                    if (is_injective(x))
                        inj.push_back(x);
                auto t1 = pick(inj, rng);
                auto lp = arity == 3 ? std::pair{1, 2} : std::pair{2, 3};
                int o2 = t1.code(lp.first, lp.second);
                vector<Orbit> second;
                for (auto & x : inj)
                    if (x.code(0, 1) == sig.inverse_code(PairCode(o2)))
                        second.push_back(x);
                auto t2 = pick(second, rng);
                r1 = oracle::random_relation(core, arity, 0.1, rng);
                r2 = oracle::random_relation(core, arity, 0.1, rng);
                r1 = combine(r1, Relation::make(arity, {t1}), SetOp::Or);
                r2 = combine(r2, Relation::make(arity, {t2}), SetOp::Or);
                id = arity == 3 ? "bowtie_ternary" : "bowtie_quaternary";
                result = bowtie(core, r1, r2);
                int o1 = t1.code(0, 1), o3 = t2.code(lp.first, lp.second);
                for (auto & x : all)
                    if (is_injective(x) && x.code(0, 1) == o1 && x.code(lp.first, lp.second) == o3)
                        expected.push_back(x);
            }
            else {
                int o1 = anti(), o2 = anti(), o3 = anti();
                int arity = kind == 2 ? 3 : 4;
                auto lp = arity == 3 ? std::pair{1, 2} : std::pair{2, 3};
                r1 = with_injective(core, arity, {0, 1}, o1, lp, o2, oracle::random_relation(core, arity, 0.1, rng).orbits);
                r2 = with_injective(core, arity, {0, 1}, sig.inverse_code(PairCode(o2)), lp, o3,
                        oracle::random_relation(core, arity, 0.1, rng).orbits);
                id = arity == 3 ? "bowtie_ternary" : "bowtie_three";
                result = arity == 3 ? bowtie(core, r1, r2) : bowtie3(core, r1, r2);
                for (auto & x : enumerate_orbits(core, 3))
                    if (x.code(0, 1) == o1 && x.code(1, 2) == o3)
                        expected.push_back(x);
            }
            ++cases;
            for (auto & x : expected)
                if (! result.contains(x)) {
                    o.fail("case " + std::to_string(i) + " (" + id + ") misses an orbit");
                    break;
                }
            if (oracle::matrices_of(result) != oracle::pp_apply(core, find_template(id), {&r1, &r2}))
                o.fail("case " + std::to_string(i) + " (" + id + ") differs from tuple-level evaluation");
        }
        o.detail << " " << cases << " cases";
    });

    run(9, "no clause instance is implicationally hard", [&] (Outcome & o) {
        int hard = int(std::count(clause_verdicts.begin(), clause_verdicts.end(), Verdict::Hard));
        if (clause_verdicts.empty())
            o.fail("criterion 2 produced no runs");
        if (hard)
            o.fail(std::to_string(hard) + " HARD");
        o.detail << " " << clause_verdicts.size() << " runs, " << hard << " HARD";
    });

    return failures ? 1 : 0;
}
