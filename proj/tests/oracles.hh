#ifndef ORBCSP_GUARD_TESTS_ORACLES_HH
#define ORBCSP_GUARD_TESTS_ORACLES_HH 1

// Brute-force reference implementations that share no code with the library's
// search: points are assigned one at a time to equality blocks, block pairs are
// labelled explicitly, and bounds are checked by trying every injective map.

#include <orbcsp/workspace.hh>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle
{
    // k x k matrix of pair codes, 0 for equal coordinates, 1 + orbital otherwise.
    using Matrix = std::vector<int>;
    using MatrixSet = std::set<Matrix>;

    inline auto matrix_of(const orbcsp::Orbit & o) -> Matrix
    {
        int k = o.arity();
        Matrix m(k * k);
        for (int i = 0 ; i < k ; ++i)
            for (int j = 0 ; j < k ; ++j)
                m[i * k + j] = i == j ? 0 : o.code(i, j);
        return m;
    }

    inline auto matrices_of(const orbcsp::Relation & r) -> MatrixSet
    {
        MatrixSet s;
        for (auto & o : r.orbits)
            s.insert(matrix_of(o));
        return s;
    }

    // labels[a][b] is the orbital between distinct blocks a and b.
    struct Labeling
    {
        int blocks = 0;
        std::vector<std::vector<int>> labels;
    };

    inline auto contains_bound(const orbcsp::BinaryCore & core, const Labeling & l) -> bool
    {
        for (auto & b : core.bounds) {
            int n = b.size();
            if (n > l.blocks)
                continue;
            // every injective map from bound points to blocks
            std::vector<int> pick(l.blocks);
            std::iota(pick.begin(), pick.end(), 0);
            std::vector<char> chosen(l.blocks, 0);
            std::fill(chosen.begin(), chosen.begin() + n, 1);
            std::sort(chosen.begin(), chosen.end());
            do {
                std::vector<int> sub;
                for (int i = 0 ; i < l.blocks ; ++i)
                    if (chosen[i])
                        sub.push_back(i);
                do {
                    bool match = true;
                    for (int i = 0 ; i < n && match ; ++i)
                        for (int j = 0 ; j < n && match ; ++j)
                            if (i != j && b.label(i, j) != l.labels[sub[i]][sub[j]])
                                match = false;
                    if (match)
                        return true;
                } while (std::next_permutation(sub.begin(), sub.end()));
            } while (std::next_permutation(chosen.begin(), chosen.end()));
        }
        return false;
    }

    struct Atom
    {
        const MatrixSet * allowed;
        std::vector<int> points;
    };

    // Calls leaf(block_of, labeling) for every assignment of points to blocks
    // (blocks numbered by first use) and labels between blocks that satisfies
    // every atom and contains no bound. leaf returns true to stop.
    inline auto search(const orbcsp::BinaryCore & core, int points, const std::vector<Atom> & atoms,
            const std::function<bool (const std::vector<int> &, const Labeling &)> & leaf) -> bool
    {
        auto & sig = core.signature;
        std::vector<int> block_of(points, -1);
        Labeling lab;
        lab.labels.assign(points, std::vector<int>(points, -1));

        auto atom_ok = [&] (const Atom & a) {
            int k = int(a.points.size());
            Matrix m(k * k);
            for (int i = 0 ; i < k ; ++i)
                for (int j = 0 ; j < k ; ++j) {
                    int bi = block_of[a.points[i]], bj = block_of[a.points[j]];
                    m[i * k + j] = i == j || bi == bj ? 0 : 1 + lab.labels[bi][bj];
                }
            return a.allowed->contains(m);
        };
        auto atoms_ok = [&] (int p) {
            for (auto & a : atoms) {
                int last = *std::max_element(a.points.begin(), a.points.end());
                if (last == p && ! atom_ok(a))
                    return false;
            }
            return true;
        };

        std::function<bool (int)> place;
        std::function<bool (int, int)> label_new;
        place = [&] (int p) -> bool {
            if (p == points)
                return ! contains_bound(core, lab) && leaf(block_of, lab);
            for (int b = 0 ; b < lab.blocks ; ++b) {
                block_of[p] = b;
                if (atoms_ok(p) && place(p + 1))
                    return true;
            }
            int nb = lab.blocks++;
            block_of[p] = nb;
            bool stop = label_new(p, 0);
            --lab.blocks;
            block_of[p] = -1;
            return stop;
        };
        label_new = [&] (int p, int other) -> bool {
            int nb = lab.blocks - 1;
            if (other == nb)
                return atoms_ok(p) && place(p + 1);
            for (int o = 0 ; o < sig.size() ; ++o) {
                lab.labels[nb][other] = o;
                lab.labels[other][nb] = sig.inverse(o);
                if (label_new(p, other + 1))
                    return true;
            }
            return false;
        };
        return place(0);
    }

    // Every orbit of k-tuples, as code matrices.
    inline auto orbits(const orbcsp::BinaryCore & core, int k) -> MatrixSet
    {
        MatrixSet result;
        search(core, k, {}, [&] (const std::vector<int> & block_of, const Labeling & lab) {
            Matrix m(k * k);
            for (int i = 0 ; i < k ; ++i)
                for (int j = 0 ; j < k ; ++j)
                    m[i * k + j] = block_of[i] == block_of[j] ? 0 : 1 + lab.labels[block_of[i]][block_of[j]];
            result.insert(m);
            return false;
        });
        return result;
    }

    // Existential join: the code matrices of the visible points over every
    // satisfying assignment.
    inline auto exist_join(const orbcsp::BinaryCore & core, int points, const std::vector<Atom> & atoms,
            const std::vector<int> & visible) -> MatrixSet
    {
        MatrixSet result;
        int k = int(visible.size());
        search(core, points, atoms, [&] (const std::vector<int> & block_of, const Labeling & lab) {
            Matrix m(k * k);
            for (int i = 0 ; i < k ; ++i)
                for (int j = 0 ; j < k ; ++j) {
                    int bi = block_of[visible[i]], bj = block_of[visible[j]];
                    m[i * k + j] = i == j || bi == bj ? 0 : 1 + lab.labels[bi][bj];
                }
            result.insert(m);
            return false;
        });
        return result;
    }

    // Evaluates a library template with the oracle.
    inline auto pp_apply(const orbcsp::BinaryCore & core, const orbcsp::PpTemplate & t,
            const std::vector<const orbcsp::Relation *> & slots) -> MatrixSet
    {
        std::vector<MatrixSet> sets;
        for (auto s : slots)
            sets.push_back(matrices_of(*s));
        std::vector<Atom> atoms;
        for (auto & [slot, pts] : t.atoms)
            atoms.push_back(Atom{&sets[slot], pts});
        return exist_join(core, t.points, atoms, t.visible);
    }

    // Whether the instance has a solution.
    inline auto satisfiable(const orbcsp::Instance & inst, const orbcsp::BinaryCore & core) -> bool
    {
        std::vector<MatrixSet> sets;
        for (auto & c : inst.constraints)
            sets.push_back(matrices_of(c.relation));
        std::vector<Atom> atoms;
        for (unsigned i = 0 ; i < inst.constraints.size() ; ++i)
            atoms.push_back(Atom{&sets[i], inst.constraints[i].scope});
        return search(core, inst.variable_count(), atoms, [] (const auto &, const auto &) { return true; });
    }

    inline auto corpus(const std::string & rel) -> std::string
    {
        auto env = std::getenv("ORBCSP_CORPUS");
        return std::string(env ? env : "corpus") + "/" + rel;
    }

    // A random relation: each orbit of the arity kept with probability p.
    inline auto random_relation(const orbcsp::BinaryCore & core, int arity, double p, std::mt19937_64 & rng,
            const std::string & name = "") -> orbcsp::Relation
    {
        std::bernoulli_distribution keep(p);
        std::vector<orbcsp::Orbit> kept;
        for (auto & o : orbcsp::enumerate_orbits(core, arity))
            if (keep(rng))
                kept.push_back(o);
        return orbcsp::Relation::make(arity, std::move(kept), name);
    }

    // A random instance over a language: connected-ish, distinct scope entries.
    inline auto random_instance(const std::vector<orbcsp::Relation> & language, int max_vars, int max_constraints,
            std::mt19937_64 & rng) -> orbcsp::Instance
    {
        std::uniform_int_distribution<int> nvars(2, max_vars), ncons(1, max_constraints);
        std::uniform_int_distribution<std::size_t> pick(0, language.size() - 1);
        int n = nvars(rng);
        auto inst = orbcsp::Instance::with_variables(n);
        int m = ncons(rng);
        for (int c = 0 ; c < m ; ++c) {
            const orbcsp::Relation * r = nullptr;
            for (int tries = 0 ; tries < 20 ; ++tries) {
                r = &language[pick(rng)];
                if (r->arity <= n)
                    break;
                r = nullptr;
            }
            if (! r)
                continue;
            std::vector<int> vars(n);
            std::iota(vars.begin(), vars.end(), 0);
            std::shuffle(vars.begin(), vars.end(), rng);
            vars.resize(r->arity);
            inst.add(vars, *r);
        }
        return inst;
    }
}

#endif
