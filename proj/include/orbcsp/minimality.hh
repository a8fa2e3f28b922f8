#ifndef ORBCSP_GUARD_ORBCSP_MINIMALITY_HH
#define ORBCSP_GUARD_ORBCSP_MINIMALITY_HH 1

#include <orbcsp/relalg.hh>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace orbcsp
{
    struct Constraint
    {
        std::vector<int> scope;
        Relation relation;

        auto operator==(const Constraint &) const -> bool = default;
    };

    struct Instance
    {
        std::vector<std::string> variables;
        std::vector<Constraint> constraints;

        auto variable_count() const -> int
        {
            return int(variables.size());
        }

        /// Variables named x1..xn.
        static auto with_variables(int n) -> Instance;

        auto add(std::vector<int> scope, Relation r) -> Instance &;

        auto operator==(const Instance &) const -> bool = default;
    };

    /// Throws InputError if a scope is out of range, repeats a variable, or
    /// does not match its relation's arity.
    auto validate_instance(const Instance & inst) -> void;

    struct RemovalStep
    {
        int step = 0;
        int constraint = 0;
        Orbit removed;
        int because_constraint = 0;
        /// The variables whose projection justified the removal.
        std::vector<int> because_vars;
    };

    struct MinimalityOptions
    {
        int k = 2;
        int l = 3;
        /// When set, the worklist is processed in a pseudo-random order drawn
        /// from this seed instead of lexicographic order.
        std::optional<std::uint64_t> shuffle_seed;
        bool record_trace = true;
    };

    struct MinimalityResult
    {
        Instance instance;
        bool trivial = false;
        std::vector<RemovalStep> trace;
        int padding_added = 0;
    };

    /// Adds padding constraints so that every set of at most l variables lies
    /// in some scope, then removes orbits until all constraints agree on every
    /// projection to at most k variables. Padding relations are enumerated
    /// already filtered by the pair projections of the existing constraints,
    /// which gives the same fixpoint as starting from every l-orbit.
    auto establish_minimality(const Instance & inst, const BinaryCore & core, const MinimalityOptions & options)
        -> MinimalityResult;

    /// The common projection of the constraints to (x, y). Throws
    /// PreconditionError if x == y, no constraint covers the pair, or the
    /// constraints disagree.
    auto pair_domain(const Instance & inst, int x, int y) -> LabelSet;

    auto verify_minimality(const Instance & inst, int k, int l) -> bool;

    auto is_trivial(const Instance & inst) -> bool;
}

#endif
