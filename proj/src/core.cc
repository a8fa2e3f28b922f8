#include <orbcsp/core.hh>

#include <algorithm>
#include <functional>
#include <set>

using std::optional;
using std::pair;
using std::string;
using std::to_string;
using std::tuple;
using std::vector;

namespace orbcsp
{
    auto CoreSignature::find(const string & name) const -> optional<int>
    {
        for (int o = 0 ; o < size() ; ++o)
            if (orbitals[o].name == name)
                return o;
        return std::nullopt;
    }

    auto CoreSignature::inverse_set(LabelSet s) const -> LabelSet
    {
        LabelSet result = s & code_bit(eq_code);
        for (int o = 0 ; o < size() ; ++o)
            if (s & code_bit(orbital_code(o)))
                result |= code_bit(orbital_code(inverse(o)));
        return result;
    }

    auto CoreSignature::code_name(PairCode code) const -> string
    {
        if (code == eq_code)
            return "EQ";
        return orbitals.at(code - 1).name;
    }

    auto CoreSignature::set_name(LabelSet s) const -> string
    {
        string result = "{";
        bool first = true;
        for (int c = 0 ; c <= size() ; ++c)
            if (s & code_bit(c)) {
                if (! first)
                    result += ",";
                first = false;
                result += code_name(PairCode(c));
            }
        return result + "}";
    }

    auto is_coherent(const CoreSignature & sig, const FiniteStructure & s) -> bool
    {
        for (int i = 0 ; i < s.size() ; ++i)
            for (int j = 0 ; j < s.size() ; ++j)
                if (i != j) {
                    if (s.label(i, j) >= sig.size())
                        return false;
                    if (s.label(j, i) != sig.inverse(s.label(i, j)))
                        return false;
                }
        return true;
    }

    auto validate_core(const BinaryCore & core) -> vector<Diagnostic>
    {
        vector<Diagnostic> result;
        auto & sig = core.signature;

        if (sig.size() == 0)
            result.push_back({"orbitals", "a core needs at least one orbital"});
        if (sig.size() > max_orbitals)
            result.push_back({"orbitals", "at most " + to_string(max_orbitals) + " orbitals are supported"});

        std::set<string> seen;
        bool involution_ok = true;
        for (int o = 0 ; o < sig.size() ; ++o) {
            auto loc = "orbitals[" + to_string(o) + "]";
            if (sig.orbitals[o].name.empty())
                result.push_back({loc, "orbital name must not be empty"});
            else if (sig.orbitals[o].name == "EQ")
                result.push_back({loc, "EQ is reserved for equality and cannot be an orbital"});
            if (! seen.insert(sig.orbitals[o].name).second)
                result.push_back({loc, "duplicate orbital name " + sig.orbitals[o].name});
            int inv = sig.orbitals[o].inverse;
            if (inv < 0 || inv >= sig.size()) {
                result.push_back({loc, "inverse out of range"});
                involution_ok = false;
            }
            else if (sig.orbitals[inv].inverse != o) {
                result.push_back({loc, "inverse is not an involution: inverse(inverse(" + sig.orbitals[o].name + ")) != "
                        + sig.orbitals[o].name});
                involution_ok = false;
            }
        }

        if (! involution_ok)
            return result;

        for (unsigned b = 0 ; b < core.bounds.size() ; ++b) {
            auto & s = core.bounds[b];
            auto loc = "bounds[" + to_string(b) + "]";
            if (s.size() < 3)
                result.push_back({loc, "bound size < 3 is absorbed by the labeling model"});
            bool labels_ok = true;
            for (int i = 0 ; i < s.size() && labels_ok ; ++i)
                for (int j = 0 ; j < s.size() ; ++j) {
                    if (i == j)
                        continue;
                    if (s.label(i, j) >= sig.size()) {
                        result.push_back({loc + ".labels[" + to_string(i) + "," + to_string(j) + "]", "unknown orbital"});
                        labels_ok = false;
                        break;
                    }
                }
            if (! labels_ok)
                continue;
            for (int i = 0 ; i < s.size() ; ++i)
                for (int j = i + 1 ; j < s.size() ; ++j) {
                    int o = s.label(i, j);
                    if (s.label(j, i) == sig.inverse(o))
                        continue;
                    auto ploc = loc + ".labels[" + to_string(i) + "," + to_string(j) + "]";
                    if (sig.is_symmetric(o))
                        result.push_back({ploc, sig.orbitals[o].name
                                + " must have a distinct inverse or be declared symmetric consistently with bounds"});
                    else
                        result.push_back({ploc, "label(j,i) must be the inverse of label(i,j)"});
                }
        }

        for (unsigned a = 0 ; a < core.bounds.size() ; ++a)
            for (unsigned b = a + 1 ; b < core.bounds.size() ; ++b)
                if (core.bounds[a].size() == core.bounds[b].size() && bound_embeds(core.bounds[a], core.bounds[b]))
                    result.push_back({"bounds[" + to_string(b) + "]", "isomorphic to bounds[" + to_string(a) + "]"});

        return result;
    }

    auto require_valid_core(const BinaryCore & core) -> void
    {
        auto diags = validate_core(core);
        if (diags.empty())
            return;
        string msg = "invalid core " + core.name + ":";
        for (auto & d : diags)
            msg += "\n  " + d.location + ": " + d.message;
        throw InputError(msg);
    }

    auto is_liberal(const BinaryCore & core) -> bool
    {
        return std::none_of(core.bounds.begin(), core.bounds.end(),
                [] (const FiniteStructure & s) { return s.size() >= 3 && s.size() <= 6; });
    }

    auto max_bound(const BinaryCore & core) -> int
    {
        int result = 3;
        for (auto & s : core.bounds)
            result = std::max(result, s.size());
        return result;
    }

    namespace
    {
        auto embed_from(const FiniteStructure & gamma, const FiniteStructure & delta, vector<int> & image,
                vector<char> & used, int i) -> bool
        {
            if (i == gamma.size())
                return true;
            for (int d = 0 ; d < delta.size() ; ++d) {
                if (used[d])
                    continue;
                bool ok = true;
                for (int j = 0 ; j < i && ok ; ++j)
                    ok = gamma.label(j, i) == delta.label(image[j], d) && gamma.label(i, j) == delta.label(d, image[j]);
                if (! ok)
                    continue;
                image[i] = d;
                used[d] = 1;
                if (embed_from(gamma, delta, image, used, i + 1))
                    return true;
                used[d] = 0;
            }
            return false;
        }
    }

    auto bound_embeds(const FiniteStructure & gamma, const FiniteStructure & delta) -> optional<vector<int>>
    {
        if (gamma.size() > delta.size())
            return std::nullopt;
        vector<int> image(gamma.size(), -1);
        vector<char> used(delta.size(), 0);
        if (embed_from(gamma, delta, image, used, 0))
            return image;
        return std::nullopt;
    }

    auto embeds_into_core(const FiniteStructure & delta, const BinaryCore & core) -> bool
    {
        for (auto & g : core.bounds)
            if (bound_embeds(g, delta))
                return false;
        return true;
    }

    auto extend_witness(const FiniteStructure & delta, const PinnedLabels & pinned, const BinaryCore & core)
        -> optional<FiniteStructure>
    {
        auto & sig = core.signature;
        int n = delta.size();
        for (auto & [p, o] : pinned)
            if (p < 0 || p >= n || o < 0 || o >= sig.size())
                throw PreconditionError("extend_witness: pinned label out of range");

        FiniteStructure ext(n + 1);
        for (int i = 0 ; i < n ; ++i)
            for (int j = 0 ; j < n ; ++j)
                if (i != j)
                    ext.set_raw(i, j, delta.label(i, j));

        vector<int> free_points;
        for (int p = 0 ; p < n ; ++p) {
            auto it = pinned.find(p);
            if (it != pinned.end())
                ext.set(sig, n, p, it->second);
            else
                free_points.push_back(p);
        }

        std::function<bool(unsigned)> fill = [&] (unsigned idx) -> bool {
            if (idx == free_points.size())
                return embeds_into_core(ext, core);
            for (int o = 0 ; o < sig.size() ; ++o) {
                ext.set(sig, n, free_points[idx], o);
                if (fill(idx + 1))
                    return true;
            }
            return false;
        };

        if (fill(0))
            return ext;
        return std::nullopt;
    }

    auto make_signature(const vector<pair<string, string>> & orbitals) -> CoreSignature
    {
        CoreSignature sig;
        for (auto & [name, inv] : orbitals)
            sig.orbitals.push_back({name, -1});
        for (unsigned o = 0 ; o < orbitals.size() ; ++o) {
            auto inv = sig.find(orbitals[o].second);
            if (! inv)
                throw InputError("unknown inverse orbital " + orbitals[o].second + " for " + orbitals[o].first);
            sig.orbitals[o].inverse = *inv;
        }
        return sig;
    }

    auto make_structure(const CoreSignature & sig, int n, const vector<tuple<int, int, string>> & labels) -> FiniteStructure
    {
        FiniteStructure s(n);
        vector<char> seen(std::size_t(n) * std::size_t(n), 0);
        for (auto & [i, j, name] : labels) {
            if (i < 0 || j < 0 || i >= n || j >= n || i == j)
                throw InputError("structure label on invalid pair " + to_string(i) + "," + to_string(j));
            auto o = sig.find(name);
            if (! o)
                throw InputError("unknown orbital " + name);
            s.set(sig, i, j, *o);
            seen[i * n + j] = seen[j * n + i] = 1;
        }
        for (int i = 0 ; i < n ; ++i)
            for (int j = i + 1 ; j < n ; ++j)
                if (! seen[i * n + j])
                    throw InputError("structure is missing a label on pair " + to_string(i) + "," + to_string(j));
        return s;
    }

    auto make_equality_core() -> BinaryCore
    {
        return BinaryCore{"equality", make_signature({{"NE", "NE"}}), {}};
    }

    auto make_random_graph_core() -> BinaryCore
    {
        return BinaryCore{"random_graph", make_signature({{"E", "E"}, {"N", "N"}}), {}};
    }

    auto make_liberal_digraph_core() -> BinaryCore
    {
        return BinaryCore{"liberal_digraph", make_signature({{"arc", "arc_inv"}, {"arc_inv", "arc"}, {"N", "N"}}), {}};
    }

    auto make_henson_core() -> BinaryCore
    {
        auto core = make_liberal_digraph_core();
        core.name = "henson7";
        // The Paley tournament on Z_7: i -> j iff j - i is a nonzero square mod 7.
        vector<tuple<int, int, string>> labels;
        for (int i = 0 ; i < 7 ; ++i)
            for (int j = i + 1 ; j < 7 ; ++j) {
                int d = (j - i) % 7;
                bool forward = d == 1 || d == 2 || d == 4;
                labels.emplace_back(i, j, forward ? "arc" : "arc_inv");
            }
        core.bounds.push_back(make_structure(core.signature, 7, labels));
        return core;
    }

    auto make_two_cliques_core() -> BinaryCore
    {
        auto core = make_random_graph_core();
        core.name = "c_omega_2";
        core.bounds.push_back(make_structure(core.signature, 3, {{0, 1, "E"}, {1, 2, "E"}, {0, 2, "N"}}));
        core.bounds.push_back(make_structure(core.signature, 3, {{0, 1, "N"}, {1, 2, "N"}, {0, 2, "N"}}));
        return core;
    }
}
