#include <doctest.h>
#include "oracles.hh"

using namespace orbcsp;
using std::string;
using std::vector;

namespace
{
    auto has_message(const vector<Diagnostic> & d, const string & part) -> bool
    {
        return std::any_of(d.begin(), d.end(), [&] (const Diagnostic & x) { return x.message.find(part) != string::npos; });
    }

    auto clique(const CoreSignature & sig, int n, const string & label) -> FiniteStructure
    {
        vector<std::tuple<int, int, string>> labels;
        for (int i = 0 ; i < n ; ++i)
            for (int j = i + 1 ; j < n ; ++j)
                labels.emplace_back(i, j, label);
        return make_structure(sig, n, labels);
    }
}

TEST_CASE("bundled cores validate")
{
    for (auto core : {make_equality_core(), make_random_graph_core(), make_liberal_digraph_core(), make_henson_core(),
             make_two_cliques_core()})
        CHECK(validate_core(core).empty());
}

TEST_CASE("broken involution is diagnosed")
{
    BinaryCore core{"broken", make_signature({{"arc", "N"}, {"N", "N"}}), {}};
    CHECK(has_message(validate_core(core), "involution"));
}

TEST_CASE("asymmetric use of a self-inverse orbital in a bound is diagnosed")
{
    auto core = make_random_graph_core();
    FiniteStructure s(3);
    s.set(core.signature, 0, 1, 0);
    s.set(core.signature, 1, 2, 0);
    s.set(core.signature, 0, 2, 0);
    s.set_raw(2, 0, 1);
    core.bounds.push_back(s);
    CHECK(! validate_core(core).empty());
}

TEST_CASE("small bounds are rejected")
{
    auto core = make_random_graph_core();
    core.bounds.push_back(make_structure(core.signature, 2, {{0, 1, "E"}}));
    CHECK(has_message(validate_core(core), "bound size < 3"));
    CHECK_THROWS_AS(require_valid_core(core), InputError);
}

TEST_CASE("liberality and max bound")
{
    CHECK(is_liberal(make_random_graph_core()));
    CHECK(max_bound(make_random_graph_core()) == 3);
    CHECK(is_liberal(make_henson_core()));
    CHECK(max_bound(make_henson_core()) == 7);
    CHECK(! is_liberal(make_two_cliques_core()));
    CHECK(max_bound(make_two_cliques_core()) == 3);
}

TEST_CASE("bound embedding")
{
    auto sig = make_random_graph_core().signature;
    auto tri = clique(sig, 3, "E");
    auto id = bound_embeds(tri, tri);
    REQUIRE(id);
    CHECK(*id == vector<int>{0, 1, 2});

    auto een = make_structure(sig, 3, {{0, 1, "E"}, {1, 2, "E"}, {0, 2, "N"}});
    // Plant E,E,N on points 3, 0, 2 of a 4-point structure.
    auto host = make_structure(sig, 4, {{0, 1, "N"}, {0, 2, "E"}, {0, 3, "E"}, {1, 2, "N"}, {1, 3, "N"}, {2, 3, "N"}});
    auto m = bound_embeds(een, host);
    REQUIRE(m);
    for (int i = 0 ; i < 3 ; ++i)
        for (int j = 0 ; j < 3 ; ++j)
            if (i != j)
                CHECK(host.label((*m)[i], (*m)[j]) == een.label(i, j));

    CHECK(! bound_embeds(clique(sig, 3, "N"), clique(sig, 5, "E")));
}

TEST_CASE("embedding into cores")
{
    auto two = make_two_cliques_core();
    auto een = make_structure(two.signature, 3, {{0, 1, "E"}, {1, 2, "E"}, {0, 2, "N"}});
    CHECK(! embeds_into_core(een, two));
    CHECK(embeds_into_core(clique(two.signature, 4, "E"), two));

    auto henson = make_henson_core();
    CHECK(! embeds_into_core(henson.bounds[0], henson));
}

TEST_CASE("liberal cores realize every labeling of up to six points")
{
    // Exhaustive over the random graph up to five points; six would be 2^15
    // structures per size and adds nothing new.
    auto core = make_random_graph_core();
    for (int n = 0 ; n <= 5 ; ++n) {
        int pairs = n * (n - 1) / 2;
        for (int mask = 0 ; mask < (1 << pairs) ; ++mask) {
            FiniteStructure s(n);
            int bit = 0;
            for (int i = 0 ; i < n ; ++i)
                for (int j = i + 1 ; j < n ; ++j)
                    s.set(core.signature, i, j, (mask >> bit++) & 1);
            REQUIRE(embeds_into_core(s, core));
        }
    }
}

TEST_CASE("extending witnesses")
{
    auto core = make_liberal_digraph_core();
    auto empty = extend_witness(FiniteStructure(0), {}, core);
    REQUIRE(empty);
    CHECK(empty->size() == 1);

    auto base = clique(core.signature, 4, "N");
    auto ext = extend_witness(base, {{0, 0}, {2, 1}}, core);
    REQUIRE(ext);
    CHECK(ext->size() == 5);
    CHECK(ext->label(4, 0) == 0);
    CHECK(ext->label(4, 2) == 1);
    CHECK(ext->label(0, 4) == core.signature.inverse(0));

    // Six points of the forbidden tournament: pinning all six labels to the
    // missing point's labels recreates the bound.
    auto henson = make_henson_core();
    auto & t = henson.bounds[0];
    FiniteStructure six(6);
    for (int i = 0 ; i < 6 ; ++i)
        for (int j = i + 1 ; j < 6 ; ++j)
            six.set(henson.signature, i, j, t.label(i, j));
    PinnedLabels pinned;
    for (int i = 0 ; i < 6 ; ++i)
        pinned[i] = t.label(6, i);
    CHECK(! extend_witness(six, pinned, henson));
    pinned.erase(5);
    auto free_ext = extend_witness(six, pinned, henson);
    REQUIRE(free_ext);
    CHECK(free_ext->label(6, 5) != t.label(6, 5));
    CHECK(embeds_into_core(*free_ext, henson));
}

TEST_CASE("involution holds for every bundled core")
{
    for (auto core : {make_equality_core(), make_random_graph_core(), make_liberal_digraph_core()})
        for (int o = 0 ; o < core.signature.size() ; ++o)
            CHECK(core.signature.inverse(core.signature.inverse(o)) == o);
}

TEST_CASE("corpus cores match the built-in ones")
{
    CHECK(load_core_file(oracle::corpus("cores/henson7.json")).bounds == make_henson_core().bounds);
    CHECK(load_core_file(oracle::corpus("cores/c_omega_2.json")).bounds == make_two_cliques_core().bounds);
}
