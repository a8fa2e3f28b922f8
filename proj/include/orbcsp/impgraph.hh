#ifndef ORBCSP_GUARD_ORBCSP_IMPGRAPH_HH
#define ORBCSP_GUARD_ORBCSP_IMPGRAPH_HH 1

#include <orbcsp/minimality.hh>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace orbcsp
{
    /// A pair of variables with v1 < v2 and a nonempty proper subset of their
    /// pair domain, oriented from v1 to v2. The same set seen from (v2, v1) is
    /// its inverse, so each unordered pair is stored once.
    struct ImpVertex
    {
        int v1 = 0, v2 = 0;
        LabelSet set = 0;

        auto operator<=>(const ImpVertex &) const = default;
    };

    struct ImpArc
    {
        int from = 0, to = 0;
        /// The first constraint whose scope witnesses the entailment.
        int constraint = 0;
    };

    struct ImpGraph
    {
        std::vector<ImpVertex> vertices;
        std::vector<ImpArc> arcs;
        std::vector<std::vector<int>> out;
        /// Pair domains for v1 < v2, keyed by the pair.
        std::map<std::pair<int, int>, LabelSet> domains;

        auto find(const ImpVertex & v) const -> std::optional<int>;
    };

    /// Vertex sets start from the single codes of each pair domain and are
    /// closed under images: if a constraint sends C on one pair into a proper
    /// subset D of another pair's domain, D is a vertex too. There is an arc
    /// from ((u, v), C) to ((w, z), D) whenever some constraint covers both
    /// pairs and C(u, v) efficiently entails D(w, z) in it. Requires a
    /// non-trivial (2, l)-minimal instance in which no pair domain is {EQ}.
    auto build_graph(const Instance & inst) -> ImpGraph;

    /// Arc indices forming a directed cycle, the first found by depth-first
    /// search from the lowest vertex.
    auto find_cycle(const ImpGraph & g) -> std::optional<std::vector<int>>;

    /// Sinks ordered by preference: larger sets first, then by (pair, set).
    auto sink_candidates(const ImpGraph & g) -> std::vector<int>;

    auto find_sink_singleton(const ImpGraph & g) -> std::optional<ImpVertex>;

    struct ArcShape
    {
        std::vector<int> vars;
        Arrow l = Arrow::Right, p = Arrow::Right;
    };

    /// The variables an arc's witness is projected to, and its arrows.
    auto arc_shape(const ImpGraph & g, int arc) -> ArcShape;

    /// The implication witnessing an arc: the constraint projected to the
    /// arc's variables, ternary if the pairs share a variable, quaternary
    /// otherwise, with arrows chosen so that the left pair is (u, v) and the
    /// right pair is (w, z).
    auto arc_witness(const Instance & inst, const ImpGraph & g, int arc) -> ImplicationDesc;

    /// Restricts every constraint covering v1 and v2 so that (v1, v2) lies in
    /// the given set.
    auto narrow(const Instance & inst, int v1, int v2, LabelSet set) -> Instance;

    /// As narrow, but checks that the vertex is a sink of g before and that the
    /// result is non-trivial and (2, l)-minimal after. Throws PreconditionError
    /// or PostconditionError.
    auto narrow_checked(const Instance & inst, const ImpGraph & g, const ImpVertex & v, int l) -> Instance;

    auto vertex_to_string(const Instance & inst, const CoreSignature & sig, const ImpVertex & v) -> std::string;

    auto graph_to_dot(const Instance & inst, const CoreSignature & sig, const ImpGraph & g) -> std::string;
}

#endif
