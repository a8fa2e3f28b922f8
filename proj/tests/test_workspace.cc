#include <doctest.h>
#include "oracles.hh"

#include <filesystem>
#include <fstream>

using namespace orbcsp;
using std::string;
using std::vector;

namespace
{
    auto temp_file(const string & name, const string & text) -> string
    {
        auto path = std::filesystem::temp_directory_path() / ("orbcsp_test_" + name);
        std::ofstream(path) << text;
        return path.string();
    }

    auto error_of(const std::function<void ()> & f) -> string
    {
        try {
            f();
        }
        catch (const InputError & e) {
            return e.what();
        }
        return "";
    }
}

TEST_CASE("cores round trip")
{
    for (auto core : {make_equality_core(), make_random_graph_core(), make_henson_core(), make_two_cliques_core()}) {
        auto back = core_from_json(core_to_json(core));
        CHECK(back.signature.size() == core.signature.size());
        CHECK(back.bounds == core.bounds);
        CHECK(core_to_json(back) == core_to_json(core));
    }
}

TEST_CASE("relations, languages and instances round trip")
{
    auto core = make_random_graph_core();
    auto & sig = core.signature;
    auto language = load_language_file(core, oracle::corpus("languages/graph_clauses.json"));
    auto again = language_from_json(core, language_to_json(sig, language));
    REQUIRE(again.size() == language.size());
    for (unsigned i = 0 ; i < language.size() ; ++i) {
        CHECK(again[i] == language[i]);
        CHECK(again[i].name == language[i].name);
    }

    auto inst = load_instance_file(core, language, oracle::corpus("instances/graph_clauses_sample.json"));
    auto j = instance_to_json(sig, inst, language);
    CHECK(instance_from_json(core, language, j, "instance") == inst);
    // Without the language, relations are written inline.
    CHECK(instance_from_json(core, {}, instance_to_json(sig, inst), "instance") == inst);

    for (auto & o : enumerate_orbits(core, 4))
        CHECK(orbit_from_json(sig, orbit_to_json(sig, o), "orbit") == o);
    for (LabelSet s = 1 ; s < (LabelSet(1) << (sig.size() + 1)) ; ++s)
        CHECK(label_set_from_json(sig, label_set_to_json(sig, s), "set") == s);
}

TEST_CASE("certificates and traces round trip")
{
    auto core = make_random_graph_core();
    auto & sig = core.signature;
    auto language = load_language_file(core, oracle::corpus("languages/graph_clauses.json"));
    auto inst = load_instance_file(core, language, oracle::corpus("instances/graph_clauses_sample.json"));
    auto r = solve(inst, core);
    REQUIRE(r.certificate);
    auto cert = certificate_from_json(sig, inst, certificate_to_json(sig, inst, *r.certificate), "certificate");
    CHECK(cert == *r.certificate);

    auto two_branch = load_language_file(core, oracle::corpus("languages/two_branch.json"));
    auto report = analyze_language(core, two_branch, AnalyzeOptions{});
    REQUIRE(report.witness);
    auto w = witness_from_json(core, witness_to_json(sig, *report.witness));
    CHECK(w.relation == report.witness->relation);
    CHECK(w.trace.steps.size() == report.witness->trace.steps.size());
    CHECK(! verify_witness(w, core, two_branch));
}

TEST_CASE("broken involution is reported with its location")
{
    auto path = temp_file("broken.json", R"({"format_version": 1, "name": "broken",
        "orbitals": [{"name": "A", "inverse": "B"}, {"name": "B", "inverse": "B"}], "bounds": []})");
    auto msg = error_of([&] { load_core_file(path); });
    CHECK(msg.find("involution") != string::npos);
    CHECK(msg.find(path) != string::npos);
}

TEST_CASE("undeclared relation names are rejected")
{
    auto core = make_random_graph_core();
    auto path = temp_file("undeclared.json", R"({"format_version": 1, "variables": ["x", "y"],
        "constraints": [{"scope": ["x", "y"], "relation": "Missing"}]})");
    auto msg = error_of([&] { load_instance_file(core, {}, path); });
    CHECK(msg.find("Missing") != string::npos);
}

TEST_CASE("parse errors carry a line number")
{
    auto path = temp_file("syntax.json", "{\n  \"format_version\": 1,\n  \"name\": oops\n}\n");
    auto msg = error_of([&] { load_core_file(path); });
    CHECK(msg.find(path + ":3") != string::npos);
}

TEST_CASE("unknown format versions are rejected")
{
    auto core = make_random_graph_core();
    auto j = language_to_json(core.signature, {});
    j["format_version"] = 2;
    CHECK_THROWS_AS(language_from_json(core, j), InputError);
}

TEST_CASE("output is deterministic")
{
    auto core = make_random_graph_core();
    auto & sig = core.signature;
    auto two_branch = load_language_file(core, oracle::corpus("languages/two_branch.json"));
    AnalyzeOptions one, four;
    four.threads = 4;
    auto a = report_to_json(sig, analyze_language(core, two_branch, one)).dump();
    auto b = report_to_json(sig, analyze_language(core, two_branch, four)).dump();
    CHECK(a == b);

    auto language = load_language_file(core, oracle::corpus("languages/graph_clauses.json"));
    auto inst = load_instance_file(core, language, oracle::corpus("instances/graph_clauses_sample.json"));
    CHECK(solve_result_to_json(sig, inst, solve(inst, core)).dump() == solve_result_to_json(sig, inst, solve(inst, core)).dump());
}
