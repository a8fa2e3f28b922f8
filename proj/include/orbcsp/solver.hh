#ifndef ORBCSP_GUARD_ORBCSP_SOLVER_HH
#define ORBCSP_GUARD_ORBCSP_SOLVER_HH 1

#include <orbcsp/impgraph.hh>

#include <optional>
#include <string>
#include <vector>

namespace orbcsp
{
    /// A solution up to automorphism: a partition of the variables into
    /// equality classes and a labeling of the classes.
    struct Certificate
    {
        std::vector<std::vector<int>> classes;
        FiniteStructure labeling;

        auto operator==(const Certificate &) const -> bool = default;
    };

    enum class Verdict
    {
        Sat,
        Unsat,
        Hard
    };

    auto verdict_name(Verdict v) -> std::string;

    struct SolveEvent
    {
        std::string kind;
        std::string detail;
    };

    /// What solve saw when it stopped on a cycle: the minimal instance the
    /// graph was built on, the graph, and the cycle as arc indices.
    struct HardEvidence
    {
        Instance instance;
        ImpGraph graph;
        std::vector<int> cycle;
        /// For each input variable, its variable in the evidence instance.
        std::vector<int> class_of;
    };

    struct SolveResult
    {
        Verdict verdict = Verdict::Unsat;
        std::optional<Certificate> certificate;
        std::optional<HardEvidence> hard;
        std::vector<SolveEvent> trace;
        int narrowings = 0;
    };

    struct SolveOptions
    {
        /// Checks the sink precondition and the minimality of every narrowed
        /// instance.
        bool check_narrowing = true;
    };

    /// Minimizes with l = max_bound, then narrows at sinks of the implication
    /// graph until every pair domain is a single code, merging variables whose
    /// domain becomes {EQ} along the way.
    auto solve(const Instance & inst, const BinaryCore & core, const SolveOptions & options = {}) -> SolveResult;

    inline constexpr int default_oracle_cap = 8;

    /// Exhaustive search over equality partitions and labelings of the classes.
    auto brute_force_solve(const Instance & inst, const BinaryCore & core, int cap = default_oracle_cap)
        -> std::optional<Certificate>;

    auto verify_certificate(const Certificate & cert, const Instance & inst, const BinaryCore & core) -> bool;

    /// Merges the variables of each group; groups are given as a class index
    /// per variable, numbered from 0. Repeated scope entries are resolved by
    /// keeping the orbits in which those coordinates are equal.
    auto merge_variables(const Instance & inst, const std::vector<int> & class_of) -> Instance;

    struct PreparedInstance
    {
        Instance instance;
        /// For each input variable, its variable in the prepared instance.
        std::vector<int> class_of;
    };

    /// Minimizes with l = max_bound and merges variables forced equal until no
    /// pair domain is {EQ}. Empty if the instance turns out trivial.
    auto prepare_instance(const Instance & inst, const BinaryCore & core) -> std::optional<PreparedInstance>;
}

#endif
