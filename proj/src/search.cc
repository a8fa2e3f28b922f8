#include <orbcsp/search.hh>

#include <algorithm>
#include <set>

using std::function;
using std::size_t;
using std::to_string;
using std::vector;

namespace orbcsp
{
    LabelingSearch::LabelingSearch(const BinaryCore & core, int points) :
        _core(core),
        _n(points),
        _mask(size_t(points) * size_t(points), core.signature.full_set()),
        _checks(points)
    {
        if (points < 0 || points > max_search_points)
            throw CapExceeded("search over " + to_string(points) + " points exceeds the cap of "
                    + to_string(max_search_points));
        for (auto & b : core.bounds)
            _bounds.push_back(&b);
        std::fill(std::begin(_block_of), std::end(_block_of), -1);
    }

    auto LabelingSearch::restrict_pair(int p, int q, LabelSet codes) -> void
    {
        if (p == q) {
            if (! (codes & code_bit(eq_code)))
                _impossible = true;
            return;
        }
        _mask[p * _n + q] &= codes;
        _mask[q * _n + p] &= _core.signature.inverse_set(codes);
    }

    auto LabelingSearch::add_atom(const vector<Orbit> & orbits, int arity, const vector<int> & points) -> void
    {
        if (int(points.size()) != arity)
            throw PreconditionError("atom arity does not match its point list");
        for (auto p : points)
            if (p < 0 || p >= _n)
                throw PreconditionError("atom point out of range");

        if (orbits.empty()) {
            _impossible = true;
            return;
        }

        for (int i = 0 ; i < arity ; ++i)
            for (int j = i + 1 ; j < arity ; ++j) {
                LabelSet proj = 0;
                for (auto & o : orbits)
                    proj |= code_bit(o.code(i, j));
                restrict_pair(points[i], points[j], proj);
            }

        std::set<int> distinct(points.begin(), points.end());
        for (auto p : distinct) {
            PrefixCheck check;
            vector<int> positions;
            for (int i = 0 ; i < arity ; ++i)
                if (points[i] <= p) {
                    positions.push_back(i);
                    check.points.push_back(points[i]);
                }
            for (auto & o : orbits)
                check.allowed.insert(restrict_orbit(o, positions));
            _checks[p].push_back(std::move(check));
        }
    }

    auto LabelingSearch::orbit_of(const vector<int> & points) const -> Orbit
    {
        Orbit o(int(points.size()));
        for (unsigned i = 0 ; i < points.size() ; ++i)
            for (unsigned j = 0 ; j < points.size() ; ++j)
                if (i != j)
                    o.set_code_raw(i, j, code(points[i], points[j]));
        return o;
    }

    auto LabelingSearch::block_structure() const -> FiniteStructure
    {
        FiniteStructure s(_nblocks);
        for (int b = 0 ; b < _nblocks ; ++b)
            for (int c = 0 ; c < _nblocks ; ++c)
                if (b != c)
                    s.set_raw(b, c, _blab[b][c]);
        return s;
    }

    auto LabelingSearch::atoms_hold(int p) const -> bool
    {
        for (auto & check : _checks[p])
            if (! check.allowed.count(orbit_of(check.points)))
                return false;
        return true;
    }

    auto LabelingSearch::bounds_hold() const -> bool
    {
        // Only embeddings that use the newest block can be new.
        int nb = _nblocks - 1;
        for (auto * g : _bounds) {
            int s = g->size();
            if (s > _nblocks)
                continue;
            vector<int> image(s, -1);
            vector<char> used(_nblocks, 0);
            function<bool (int)> place = [&] (int i) -> bool {
                if (i == s)
                    return true;
                if (image[i] != -1)
                    return place(i + 1);
                for (int b = 0 ; b < _nblocks ; ++b) {
                    if (used[b])
                        continue;
                    bool ok = true;
                    for (int j = 0 ; j < s && ok ; ++j)
                        if (j != i && image[j] != -1)
                            ok = g->label(j, i) == _blab[image[j]][b];
                    if (! ok)
                        continue;
                    image[i] = b;
                    used[b] = 1;
                    if (place(i + 1))
                        return true;
                    image[i] = -1;
                    used[b] = 0;
                }
                return false;
            };
            for (int t = 0 ; t < s ; ++t) {
                std::fill(image.begin(), image.end(), -1);
                std::fill(used.begin(), used.end(), 0);
                image[t] = nb;
                used[nb] = 1;
                if (place(0))
                    return false;
            }
        }
        return true;
    }

    auto LabelingSearch::label_new_block(int p, int c, int limit, const function<bool ()> & leaf) -> bool
    {
        int nb = _nblocks - 1;
        if (c == nb) {
            if (! bounds_hold() || ! atoms_hold(p))
                return false;
            return enumerate(p + 1, limit, leaf);
        }

        // code(q, p) for q in block c is 1 + blab[c][nb].
        LabelSet allowed = _core.signature.neq_set();
        for (int q = 0 ; q < p ; ++q)
            if (_block_of[q] == c)
                allowed &= _mask[q * _n + p];

        auto & sig = _core.signature;
        for (int o = 0 ; o < sig.size() ; ++o) {
            if (! (allowed & code_bit(orbital_code(o))))
                continue;
            _blab[c][nb] = std::uint8_t(o);
            _blab[nb][c] = std::uint8_t(sig.inverse(o));
            if (label_new_block(p, c + 1, limit, leaf))
                return true;
        }
        return false;
    }

    auto LabelingSearch::enumerate(int p, int limit, const function<bool ()> & leaf) -> bool
    {
        if (p == limit)
            return leaf();

        for (int b = 0 ; b < _nblocks ; ++b) {
            bool ok = true;
            for (int q = 0 ; q < p && ok ; ++q) {
                PairCode c = _block_of[q] == b ? eq_code : orbital_code(_blab[_block_of[q]][b]);
                ok = _mask[q * _n + p] & code_bit(c);
            }
            if (! ok)
                continue;
            _block_of[p] = b;
            bool stop = atoms_hold(p) && enumerate(p + 1, limit, leaf);
            _block_of[p] = -1;
            if (stop)
                return true;
        }

        int nb = _nblocks++;
        _block_of[p] = nb;
        bool stop = label_new_block(p, 0, limit, leaf);
        _block_of[p] = -1;
        --_nblocks;
        return stop;
    }

    auto LabelingSearch::for_each(const function<bool ()> & leaf) -> bool
    {
        if (_impossible)
            return false;
        return enumerate(0, _n, leaf);
    }

    auto LabelingSearch::visible_orbits(int visible) -> vector<Orbit>
    {
        if (visible < 0 || visible > _n || visible > max_arity)
            throw PreconditionError("visible point count out of range");
        vector<Orbit> result;
        if (_impossible)
            return result;

        vector<int> vis(visible);
        for (int i = 0 ; i < visible ; ++i)
            vis[i] = i;

        std::unordered_set<Orbit, OrbitHash> seen;
        enumerate(0, visible, [&] () -> bool {
            auto o = orbit_of(vis);
            if (seen.count(o))
                return false;
            if (visible == _n || enumerate(visible, _n, [] { return true; })) {
                seen.insert(o);
                result.push_back(o);
            }
            return false;
        });

        std::sort(result.begin(), result.end());
        return result;
    }
}
