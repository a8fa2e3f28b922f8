#ifndef ORBCSP_GUARD_ORBCSP_ORBITS_HH
#define ORBCSP_GUARD_ORBCSP_ORBITS_HH 1

#include <orbcsp/core.hh>

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace orbcsp
{
    inline constexpr int max_arity = 8;

    /// The orbit of a k-tuple, stored as the full matrix of pair codes between
    /// coordinates. The matrix determines both the equality partition and the
    /// labels, so equal orbits have equal matrices and no further normalisation
    /// is needed. Entries outside the arity are zero.
    class Orbit
    {
    private:
        std::uint8_t _arity = 0;
        std::array<PairCode, max_arity * max_arity> _codes{};

    public:
        Orbit() = default;

        explicit Orbit(int arity) :
            _arity(std::uint8_t(arity))
        {
        }

        auto arity() const -> int
        {
            return _arity;
        }

        auto code(int i, int j) const -> PairCode
        {
            return _codes[i * max_arity + j];
        }

        auto set_code(const CoreSignature & sig, int i, int j, PairCode c) -> void
        {
            _codes[i * max_arity + j] = c;
            _codes[j * max_arity + i] = sig.inverse_code(c);
        }

        auto set_code_raw(int i, int j, PairCode c) -> void
        {
            _codes[i * max_arity + j] = c;
        }

        auto hash() const -> std::size_t;

        auto operator<=>(const Orbit &) const = default;
        auto operator==(const Orbit &) const -> bool = default;
    };

    struct OrbitHash
    {
        auto operator()(const Orbit & o) const -> std::size_t
        {
            return o.hash();
        }
    };

    /// Canonical block id per coordinate, blocks numbered by first occurrence.
    auto blocks(const Orbit & o) -> std::vector<int>;

    auto block_count(const Orbit & o) -> int;

    /// One point per block, labelled by the orbit's pair codes.
    auto quotient(const Orbit & o) -> FiniteStructure;

    /// Builds the orbit of a tuple from an arbitrary equality pattern (equal
    /// values mean equal coordinates) and labels between pattern values. Each
    /// pair of distinct values needs a label in at least one direction; a label
    /// given in both directions must respect the involution.
    auto canonicalize(const CoreSignature & sig, int arity, const std::vector<int> & pattern,
            const std::map<std::pair<int, int>, int> & labels) -> Orbit;

    /// Builds an orbit from canonical block ids and labels on block pairs b < c.
    auto orbit_from_blocks(const CoreSignature & sig, const std::vector<int> & block_ids,
            const std::map<std::pair<int, int>, int> & labels) -> Orbit;

    /// The orbit of the tuple of points in a finite structure; repeated points
    /// give equal coordinates.
    auto orbit_of_tuple(const FiniteStructure & s, const std::vector<int> & points) -> Orbit;

    auto pair_label(const Orbit & o, int i, int j) -> PairCode;

    auto restrict_orbit(const Orbit & o, const std::vector<int> & indices) -> Orbit;

    auto is_injective(const Orbit & o) -> bool;

    auto is_constant(const Orbit & o) -> bool;

    /// Checks involution coherence and zero diagonal, and that EQ codes form an
    /// equivalence with consistent labels between classes.
    auto is_well_formed(const CoreSignature & sig, const Orbit & o) -> bool;

    /// All orbits of arity k whose quotient embeds into the core, sorted.
    auto enumerate_orbits(const BinaryCore & core, int k) -> std::vector<Orbit>;

    auto orbit_to_string(const CoreSignature & sig, const Orbit & o) -> std::string;
}

#endif
