#include <orbcsp/orbits.hh>
#include <orbcsp/search.hh>

#include <algorithm>
#include <numeric>

using std::map;
using std::pair;
using std::size_t;
using std::string;
using std::to_string;
using std::vector;

namespace orbcsp
{
    auto Orbit::hash() const -> size_t
    {
        size_t h = 1469598103934665603ull ^ _arity;
        for (int i = 0 ; i < _arity ; ++i)
            for (int j = 0 ; j < _arity ; ++j)
                h = (h ^ _codes[i * max_arity + j]) * 1099511628211ull;
        return h;
    }

    auto blocks(const Orbit & o) -> vector<int>
    {
        vector<int> result(o.arity(), -1);
        int next = 0;
        for (int i = 0 ; i < o.arity() ; ++i) {
            if (result[i] != -1)
                continue;
            result[i] = next;
            for (int j = i + 1 ; j < o.arity() ; ++j)
                if (o.code(i, j) == eq_code)
                    result[j] = next;
            ++next;
        }
        return result;
    }

    auto block_count(const Orbit & o) -> int
    {
        auto b = blocks(o);
        return b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
    }

    auto quotient(const Orbit & o) -> FiniteStructure
    {
        auto b = blocks(o);
        int nb = b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
        vector<int> rep(nb, -1);
        for (int i = 0 ; i < o.arity() ; ++i)
            if (rep[b[i]] == -1)
                rep[b[i]] = i;
        FiniteStructure s(nb);
        for (int x = 0 ; x < nb ; ++x)
            for (int y = 0 ; y < nb ; ++y)
                if (x != y)
                    s.set_raw(x, y, o.code(rep[x], rep[y]) - 1);
        return s;
    }

    auto canonicalize(const CoreSignature & sig, int arity, const vector<int> & pattern,
            const map<pair<int, int>, int> & labels) -> Orbit
    {
        if (arity < 0 || arity > max_arity)
            throw InputError("orbit arity " + to_string(arity) + " outside 0.." + to_string(max_arity));
        if (int(pattern.size()) != arity)
            throw InputError("equality pattern length does not match arity");

        auto lookup = [&] (int a, int b) -> PairCode {
            auto f = labels.find({a, b});
            auto r = labels.find({b, a});
            if (f == labels.end() && r == labels.end())
                throw InputError("missing label between pattern values " + to_string(a) + " and " + to_string(b));
            for (auto it : {f, r})
                if (it != labels.end() && (it->second < 0 || it->second >= sig.size()))
                    throw InputError("orbital index out of range");
            if (f != labels.end() && r != labels.end() && r->second != sig.inverse(f->second))
                throw InputError("labels between pattern values " + to_string(a) + " and " + to_string(b)
                        + " violate the involution");
            return f != labels.end() ? orbital_code(f->second) : orbital_code(sig.inverse(r->second));
        };

        Orbit o(arity);
        for (int i = 0 ; i < arity ; ++i)
            for (int j = i + 1 ; j < arity ; ++j)
                o.set_code(sig, i, j, pattern[i] == pattern[j] ? eq_code : lookup(pattern[i], pattern[j]));
        return o;
    }

    auto orbit_from_blocks(const CoreSignature & sig, const vector<int> & block_ids,
            const map<pair<int, int>, int> & labels) -> Orbit
    {
        int next = 0;
        for (auto b : block_ids) {
            if (b > next || b < 0)
                throw InputError("partition block ids must be numbered by first occurrence");
            if (b == next)
                ++next;
        }
        return canonicalize(sig, int(block_ids.size()), block_ids, labels);
    }

    auto orbit_of_tuple(const FiniteStructure & s, const vector<int> & points) -> Orbit
    {
        Orbit o(int(points.size()));
        for (unsigned i = 0 ; i < points.size() ; ++i)
            for (unsigned j = 0 ; j < points.size() ; ++j)
                if (i != j)
                    o.set_code_raw(i, j, points[i] == points[j] ? eq_code : orbital_code(s.label(points[i], points[j])));
        return o;
    }

    auto pair_label(const Orbit & o, int i, int j) -> PairCode
    {
        return o.code(i, j);
    }

    auto restrict_orbit(const Orbit & o, const vector<int> & indices) -> Orbit
    {
        Orbit r(int(indices.size()));
        for (unsigned i = 0 ; i < indices.size() ; ++i)
            for (unsigned j = 0 ; j < indices.size() ; ++j)
                if (i != j)
                    r.set_code_raw(i, j, o.code(indices[i], indices[j]));
        return r;
    }

    auto is_injective(const Orbit & o) -> bool
    {
        for (int i = 0 ; i < o.arity() ; ++i)
            for (int j = i + 1 ; j < o.arity() ; ++j)
                if (o.code(i, j) == eq_code)
                    return false;
        return true;
    }

    auto is_constant(const Orbit & o) -> bool
    {
        for (int i = 1 ; i < o.arity() ; ++i)
            if (o.code(0, i) != eq_code)
                return false;
        return true;
    }

    auto is_well_formed(const CoreSignature & sig, const Orbit & o) -> bool
    {
        int k = o.arity();
        if (k > max_arity)
            return false;
        for (int i = 0 ; i < max_arity ; ++i)
            for (int j = 0 ; j < max_arity ; ++j) {
                if (i >= k || j >= k || i == j) {
                    if (o.code(i, j) != 0)
                        return false;
                    continue;
                }
                if (o.code(i, j) > sig.size())
                    return false;
                if (o.code(j, i) != sig.inverse_code(o.code(i, j)))
                    return false;
            }
        for (int i = 0 ; i < k ; ++i)
            for (int j = 0 ; j < k ; ++j)
                if (i != j && o.code(i, j) == eq_code)
                    for (int m = 0 ; m < k ; ++m)
                        if (m != i && m != j && o.code(i, m) != o.code(j, m))
                            return false;
        return true;
    }

    auto enumerate_orbits(const BinaryCore & core, int k) -> vector<Orbit>
    {
        if (k < 0)
            throw PreconditionError("enumerate_orbits: negative arity");
        if (k > max_arity)
            throw CapExceeded("enumerate_orbits: arity " + to_string(k) + " exceeds the cap of " + to_string(max_arity));
        LabelingSearch search(core, k);
        return search.visible_orbits(k);
    }

    auto orbit_to_string(const CoreSignature & sig, const Orbit & o) -> string
    {
        auto b = blocks(o);
        string result = "[";
        for (unsigned i = 0 ; i < b.size() ; ++i)
            result += (i ? "," : "") + to_string(b[i]);
        result += "]{";
        int nb = b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
        vector<int> rep(nb, -1);
        for (int i = 0 ; i < o.arity() ; ++i)
            if (rep[b[i]] == -1)
                rep[b[i]] = i;
        bool first = true;
        for (int x = 0 ; x < nb ; ++x)
            for (int y = x + 1 ; y < nb ; ++y) {
                result += (first ? "" : ",") + to_string(x) + "," + to_string(y) + ":" + sig.code_name(o.code(rep[x], rep[y]));
                first = false;
            }
        return result + "}";
    }
}
