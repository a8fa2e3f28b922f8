#ifndef ORBCSP_GUARD_ORBCSP_CORE_HH
#define ORBCSP_GUARD_ORBCSP_CORE_HH 1

#include <orbcsp/error.hh>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace orbcsp
{
    // A pair code is 0 for equality and 1 + o for orbital o. Sets of pair codes
    // (binary relations, up to orbit) are bitmasks over codes.
    using PairCode = std::uint8_t;
    using LabelSet = std::uint32_t;

    inline constexpr PairCode eq_code = 0;
    inline constexpr int max_orbitals = 31;

    inline constexpr auto code_bit(int code) -> LabelSet
    {
        return LabelSet{1} << code;
    }

    inline constexpr auto orbital_code(int orbital) -> PairCode
    {
        return PairCode(orbital + 1);
    }

    inline constexpr auto is_anti_reflexive(LabelSet s) -> bool
    {
        return 0 == (s & code_bit(eq_code));
    }

    struct Orbital
    {
        std::string name;
        int inverse = 0;
    };

    class CoreSignature
    {
    public:
        std::vector<Orbital> orbitals;

        auto size() const -> int
        {
            return int(orbitals.size());
        }

        auto inverse(int orbital) const -> int
        {
            return orbitals[orbital].inverse;
        }

        auto inverse_code(PairCode code) const -> PairCode
        {
            return code == eq_code ? eq_code : orbital_code(orbitals[code - 1].inverse);
        }

        auto is_symmetric(int orbital) const -> bool
        {
            return orbitals[orbital].inverse == orbital;
        }

        auto find(const std::string & name) const -> std::optional<int>;

        /// All pair codes, i.e. EQ plus every orbital.
        auto full_set() const -> LabelSet
        {
            return (LabelSet{1} << (size() + 1)) - 1;
        }

        /// Every orbital, i.e. the disequality relation.
        auto neq_set() const -> LabelSet
        {
            return full_set() & ~code_bit(eq_code);
        }

        auto inverse_set(LabelSet s) const -> LabelSet;

        auto code_name(PairCode code) const -> std::string;

        auto set_name(LabelSet s) const -> std::string;
    };

    /// A complete labeling of ordered pairs of distinct points by orbitals.
    class FiniteStructure
    {
    private:
        int _n = 0;
        std::vector<std::uint8_t> _label;

    public:
        FiniteStructure() = default;

        explicit FiniteStructure(int n) :
            _n(n),
            _label(std::size_t(n) * std::size_t(n), 0)
        {
        }

        auto size() const -> int
        {
            return _n;
        }

        auto label(int i, int j) const -> int
        {
            return _label[i * _n + j];
        }

        /// Sets both directions, using the signature's involution.
        auto set(const CoreSignature & sig, int i, int j, int orbital) -> void
        {
            _label[i * _n + j] = std::uint8_t(orbital);
            _label[j * _n + i] = std::uint8_t(sig.inverse(orbital));
        }

        /// Sets one direction only. Used by parsers and tests that need to build
        /// incoherent structures on purpose.
        auto set_raw(int i, int j, int orbital) -> void
        {
            _label[i * _n + j] = std::uint8_t(orbital);
        }

        auto operator==(const FiniteStructure &) const -> bool = default;
    };

    struct BinaryCore
    {
        std::string name;
        CoreSignature signature;
        std::vector<FiniteStructure> bounds;
    };

    struct Diagnostic
    {
        std::string location;
        std::string message;
    };

    auto validate_core(const BinaryCore & core) -> std::vector<Diagnostic>;

    /// Throws InputError carrying every diagnostic if the core is invalid.
    auto require_valid_core(const BinaryCore & core) -> void;

    auto is_liberal(const BinaryCore & core) -> bool;

    auto max_bound(const BinaryCore & core) -> int;

    auto is_coherent(const CoreSignature & sig, const FiniteStructure & s) -> bool;

    /// An injective label-preserving map from gamma's points into delta's points,
    /// the lexicographically first one.
    auto bound_embeds(const FiniteStructure & gamma, const FiniteStructure & delta) -> std::optional<std::vector<int>>;

    auto embeds_into_core(const FiniteStructure & delta, const BinaryCore & core) -> bool;

    /// Pinned labels run from the new point to an existing point.
    using PinnedLabels = std::map<int, int>;

    /// Adds one point to delta, with the pinned labels and free labels chosen by
    /// lexicographically first success, so that the result embeds into the core.
    auto extend_witness(const FiniteStructure & delta, const PinnedLabels & pinned, const BinaryCore & core)
        -> std::optional<FiniteStructure>;

    // Small builders for the bundled example cores. The same cores exist as JSON
    // files under corpus/cores.
    auto make_equality_core() -> BinaryCore;
    auto make_random_graph_core() -> BinaryCore;
    auto make_liberal_digraph_core() -> BinaryCore;
    auto make_henson_core() -> BinaryCore;
    auto make_two_cliques_core() -> BinaryCore;

    /// Builds a signature from (name, inverse name) pairs.
    auto make_signature(const std::vector<std::pair<std::string, std::string>> & orbitals) -> CoreSignature;

    /// Builds a structure from labels given on pairs i < j.
    auto make_structure(const CoreSignature & sig, int n, const std::vector<std::tuple<int, int, std::string>> & labels)
        -> FiniteStructure;
}

#endif
