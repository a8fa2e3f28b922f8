#ifndef ORBCSP_GUARD_ORBCSP_ANALYZER_HH
#define ORBCSP_GUARD_ORBCSP_ANALYZER_HH 1

#include <orbcsp/solver.hh>

#include <optional>
#include <string>
#include <vector>

namespace orbcsp
{
    /// One step of a pp-construction. Ops:
    ///   language            param = relation name
    ///   minimal_projection  ints = constraint index then positions, taken in
    ///                       the prepared form of the trace's source instance
    ///   orbital             ints = {pair code}
    ///   permute             args = {step}, ints = permutation
    ///   apply               param = template id, args = slot steps
    ///   intersect           args = {step, step}
    struct PpStep
    {
        std::string op;
        std::vector<int> args;
        std::string param;
        std::vector<int> ints;
        Relation result;
    };

    struct PpTrace
    {
        /// An instance over language relations, for minimal_projection steps.
        std::optional<Instance> source;
        std::vector<PpStep> steps;
    };

    /// Recomputes every step and compares with the recorded result. Returns the
    /// first discrepancy, or nothing if the trace replays.
    auto replay_trace(const PpTrace & trace, const BinaryCore & core, const std::vector<Relation> & language)
        -> std::optional<std::string>;

    /// Records pp-construction steps while computing their results.
    class TraceBuilder
    {
    private:
        const BinaryCore & _core;
        PpTrace _trace;

        auto push(PpStep step) -> int;

    public:
        explicit TraceBuilder(const BinaryCore & core, std::optional<Instance> source = std::nullopt);

        auto core() const -> const BinaryCore &
        {
            return _core;
        }

        auto trace() const -> const PpTrace &
        {
            return _trace;
        }

        auto relation(int step) const -> const Relation &
        {
            return _trace.steps.at(step).result;
        }

        auto language(const Relation & r) -> int;
        auto minimal_projection(const Instance & prepared, int constraint, const std::vector<int> & positions) -> int;
        auto orbital(int code) -> int;
        auto permute(int step, const std::vector<int> & perm) -> int;
        /// Applies a template; a result already computed by the caller may be
        /// passed to avoid recomputation, and is checked on replay.
        auto apply(const std::string & id, const std::vector<int> & slots,
                std::optional<Relation> known = std::nullopt) -> int;
        auto intersect(int a, int b) -> int;
        /// The disequality relation, as an orbital or through psi_neq.
        auto neq() -> int;
    };

    /// An implication together with the trace step that produced its relation.
    struct TracedImplication
    {
        ImplicationDesc desc;
        int step = -1;
    };

    auto compose(TraceBuilder & b, const TracedImplication & d1, const TracedImplication & d2) -> TracedImplication;

    /// Left vertices are codes of C (indices 0..m-1), right vertices the same
    /// codes (indices m..2m-1). An arc left O to right P when the first
    /// relation has an orbit with O on its left pair and P on its right pair,
    /// read in the Left orientation; an arc right P to left O when the second
    /// relation has P on its left pair and O on its right pair.
    struct BipDigraph
    {
        std::vector<int> codes;
        std::vector<std::vector<char>> arc;

        auto size() const -> int
        {
            return int(codes.size());
        }
    };

    struct BipAnalysis
    {
        std::vector<std::vector<int>> sccs;
        std::vector<int> scc_of;
        std::vector<char> sink, source;
        /// Every component is complete bipartite over the same codes on both
        /// sides.
        bool complete = false;
        /// No vertex without in-arcs or out-arcs.
        bool smooth = false;
        /// Opposite-side pairs in one component without a symmetric edge.
        std::vector<std::pair<int, int>> loose;
    };

    /// Both descriptors must be (C, C, C1, C1, Right, Left) implications.
    auto build_bipartite(const ImplicationDesc & r1, const ImplicationDesc & r2) -> BipDigraph;

    auto analyze_bipartite(const BipDigraph & g) -> BipAnalysis;

    /// Composes along odd paths until no pair is loosely connected, then
    /// returns R' o R''. Throws CapExceeded if the missing arcs stop
    /// decreasing or the round cap is hit, and PostconditionError if the
    /// result is not complete.
    auto make_complete(TraceBuilder & b, const TracedImplication & r1, const TracedImplication & r2) -> TracedImplication;

    /// Composes the witnesses along a cycle of the implication graph of a
    /// prepared instance and normalizes the result to a (Right, Left)
    /// implication.
    auto cycle_to_implication(TraceBuilder & b, const Instance & prepared, const ImpGraph & g,
            const std::vector<int> & cycle) -> TracedImplication;

    /// The definition's conditions, with c1..d2 in the order (C1, C2, D1, D2),
    /// plus nonemptiness of all four sets.
    auto is_critical_ternary(const BinaryCore & core, const Relation & r, LabelSet c1, LabelSet c2, LabelSet d1,
            LabelSet d2) -> bool;

    struct CriticalWitness
    {
        Relation relation;
        LabelSet c1 = 0, c2 = 0, d1 = 0, d2 = 0;
        PpTrace trace;
        /// The trace step whose result is the relation.
        int step = -1;
        /// The binary relations pp-defined from the witness, if any.
        std::vector<LabelSet> defined;
    };

    auto verify_witness(const CriticalWitness & w, const BinaryCore & core, const std::vector<Relation> & language)
        -> std::optional<std::string>;

    /// Needs a complete (Right, Left) implication over a liberal core.
    auto synthesize_critical(TraceBuilder & b, const TracedImplication & d, std::vector<std::string> & notes)
        -> std::optional<CriticalWitness>;

    struct PatternFinding
    {
        std::string pattern;
        std::string description;
        CriticalWitness witness;
    };

    /// Screens a language relation for the ternary and quaternary shapes that
    /// rule out bounded strict width over liberal cores. Only findings whose
    /// witness verifies are returned.
    auto detect_patterns(const BinaryCore & core, const Relation & r) -> std::vector<PatternFinding>;

    struct AnalyzeOptions
    {
        int max_vars = 4;
        int max_constraints = 2;
        int max_instances = 20000;
        int threads = 1;
    };

    struct SearchCoverage
    {
        int generated = 0;
        int examined = 0;
        int trivial = 0;
        bool budget_exhausted = false;
    };

    inline const std::string verdict_simple = "implicationally simple up to bound";
    inline const std::string verdict_no_bsw = "no bounded strict width";
    inline const std::string verdict_hard_only = "implicationally hard (no strict-width conclusion)";

    struct AnalysisReport
    {
        std::string verdict;
        bool liberal = false;
        std::optional<Instance> cyclic_instance;
        std::vector<std::string> cycle;
        std::optional<CriticalWitness> witness;
        std::vector<PatternFinding> findings;
        std::vector<std::string> notes;
        SearchCoverage coverage;
    };

    /// Instances over the language in generation order: one per relation,
    /// then connected multi-constraint instances with canonical variable
    /// numbering, up to the bounds.
    auto generate_instances(const std::vector<Relation> & language, const AnalyzeOptions & options, bool & exhausted)
        -> std::vector<Instance>;

    auto analyze_language(const BinaryCore & core, const std::vector<Relation> & language, const AnalyzeOptions & options)
        -> AnalysisReport;
}

#endif
