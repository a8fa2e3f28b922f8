#ifndef ORBCSP_GUARD_ORBCSP_SEARCH_HH
#define ORBCSP_GUARD_ORBCSP_SEARCH_HH 1

#include <orbcsp/core.hh>
#include <orbcsp/orbits.hh>

#include <functional>
#include <unordered_set>
#include <vector>

namespace orbcsp
{
    inline constexpr int max_search_points = 16;

    /// Enumerates the orbits of point tuples subject to orbit-set atoms and pair
    /// masks. Points are assigned in order: each one either joins an existing
    /// equality block or opens a new block labelled against all earlier blocks.
    /// New blocks are checked against the bounds that could involve them, so
    /// over a liberal core with at most six blocks no embedding test ever runs.
    class LabelingSearch
    {
    private:
        struct PrefixCheck
        {
            std::vector<int> points;
            std::unordered_set<Orbit, OrbitHash> allowed;
        };

        const BinaryCore & _core;
        int _n;
        std::vector<LabelSet> _mask;
        std::vector<std::vector<PrefixCheck>> _checks;
        std::vector<const FiniteStructure *> _bounds;

        int _block_of[max_search_points];
        int _nblocks = 0;
        std::uint8_t _blab[max_search_points][max_search_points];
        bool _impossible = false;

        auto enumerate(int p, int limit, const std::function<bool ()> & leaf) -> bool;
        auto label_new_block(int p, int c, int limit, const std::function<bool ()> & leaf) -> bool;
        auto atoms_hold(int p) const -> bool;
        auto bounds_hold() const -> bool;

    public:
        LabelingSearch(const BinaryCore & core, int points);

        auto points() const -> int
        {
            return _n;
        }

        /// The orbits are those of the atom's relation, over the given points.
        auto add_atom(const std::vector<Orbit> & orbits, int arity, const std::vector<int> & points) -> void;

        /// Allowed pair codes for (p, q); the reverse direction is kept coherent.
        auto restrict_pair(int p, int q, LabelSet codes) -> void;

        auto pair_mask(int p, int q) const -> LabelSet
        {
            return _mask[p * _n + q];
        }

        /// Calls leaf for every complete assignment until it returns true.
        /// Returns true iff some leaf returned true.
        auto for_each(const std::function<bool ()> & leaf) -> bool;

        /// The orbits of the first `visible` points that extend to a complete
        /// assignment, sorted.
        auto visible_orbits(int visible) -> std::vector<Orbit>;

        auto block_of(int p) const -> int
        {
            return _block_of[p];
        }

        auto block_count() const -> int
        {
            return _nblocks;
        }

        auto block_label(int b, int c) const -> int
        {
            return _blab[b][c];
        }

        auto code(int p, int q) const -> PairCode
        {
            return _block_of[p] == _block_of[q] ? eq_code : orbital_code(_blab[_block_of[p]][_block_of[q]]);
        }

        auto orbit_of(const std::vector<int> & points) const -> Orbit;

        auto block_structure() const -> FiniteStructure;
    };
}

#endif
