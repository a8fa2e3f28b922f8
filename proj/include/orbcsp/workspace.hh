#ifndef ORBCSP_GUARD_ORBCSP_WORKSPACE_HH
#define ORBCSP_GUARD_ORBCSP_WORKSPACE_HH 1

#include <orbcsp/analyzer.hh>

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace orbcsp
{
    using Json = nlohmann::ordered_json;

    inline constexpr int format_version = 1;

    struct Workspace
    {
        BinaryCore core;
        std::vector<Relation> language;
        std::vector<std::pair<std::string, Instance>> instances;
    };

    struct WorkspacePaths
    {
        std::string core;
        std::string language;
        std::vector<std::string> instances;
    };

    /// Parse errors carry the file and line; schema errors carry the file and
    /// the JSON path of the offending value.
    auto read_json_file(const std::string & path) -> Json;

    auto write_json_file(const std::string & path, const Json & j) -> void;

    auto core_from_json(const Json & j, const std::string & where = "core") -> BinaryCore;
    auto core_to_json(const BinaryCore & core) -> Json;

    auto label_set_from_json(const CoreSignature & sig, const Json & j, const std::string & where) -> LabelSet;
    auto label_set_to_json(const CoreSignature & sig, LabelSet s) -> Json;

    /// An orbit is {"blocks": [...], "labels": [[b, c, "orbital"], ...]} with
    /// canonical block ids and labels on block pairs b < c.
    auto orbit_from_json(const CoreSignature & sig, const Json & j, const std::string & where) -> Orbit;
    auto orbit_to_json(const CoreSignature & sig, const Orbit & o) -> Json;

    /// Either {"name", "arity", "orbits"} or {"name", "arity", "formula"}.
    auto relation_from_json(const BinaryCore & core, const Json & j, const std::string & where) -> Relation;
    auto relation_to_json(const CoreSignature & sig, const Relation & r) -> Json;

    auto language_from_json(const BinaryCore & core, const Json & j, const std::string & where = "language")
        -> std::vector<Relation>;
    auto language_to_json(const CoreSignature & sig, const std::vector<Relation> & language) -> Json;

    /// Scopes may name variables or give 0-based indices. A constraint's
    /// relation is a language name or an inline relation object.
    auto instance_from_json(const BinaryCore & core, const std::vector<Relation> & language, const Json & j,
            const std::string & where = "instance") -> Instance;
    /// Relations that equal a language relation of the same name are written
    /// by name, all others inline.
    auto instance_to_json(const CoreSignature & sig, const Instance & inst, const std::vector<Relation> & language = {})
        -> Json;

    auto certificate_from_json(const CoreSignature & sig, const Instance & inst, const Json & j,
            const std::string & where = "certificate") -> Certificate;
    auto certificate_to_json(const CoreSignature & sig, const Instance & inst, const Certificate & cert) -> Json;

    /// One JSON object per line: {step, constraint, removed_orbit, because}.
    auto removal_trace_to_jsonl(const CoreSignature & sig, const Instance & inst, const std::vector<RemovalStep> & trace)
        -> std::string;

    auto graph_to_json(const Instance & inst, const CoreSignature & sig, const ImpGraph & g) -> Json;

    auto pp_trace_to_json(const CoreSignature & sig, const PpTrace & t) -> Json;
    auto pp_trace_from_json(const BinaryCore & core, const Json & j, const std::string & where = "trace") -> PpTrace;

    auto witness_to_json(const CoreSignature & sig, const CriticalWitness & w) -> Json;
    auto witness_from_json(const BinaryCore & core, const Json & j, const std::string & where = "witness")
        -> CriticalWitness;

    auto solve_result_to_json(const CoreSignature & sig, const Instance & inst, const SolveResult & r) -> Json;

    auto report_to_json(const CoreSignature & sig, const AnalysisReport & r) -> Json;

    auto load_core_file(const std::string & path) -> BinaryCore;
    auto load_language_file(const BinaryCore & core, const std::string & path) -> std::vector<Relation>;
    auto load_instance_file(const BinaryCore & core, const std::vector<Relation> & language, const std::string & path)
        -> Instance;

    /// Loads and validates everything against the same core. The language is
    /// optional; instances may then only use inline relations.
    auto load_workspace(const WorkspacePaths & paths) -> Workspace;
}

#endif
