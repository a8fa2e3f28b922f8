#include <orbcsp/relalg.hh>
#include <orbcsp/search.hh>

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>

using std::make_unique;
using std::nullopt;
using std::optional;
using std::pair;
using std::string;
using std::to_string;
using std::unique_ptr;
using std::vector;

namespace orbcsp
{
    auto Relation::make(int arity, vector<Orbit> orbits, string name) -> Relation
    {
        for (auto & o : orbits)
            if (o.arity() != arity)
                throw PreconditionError("orbit arity " + to_string(o.arity()) + " in a relation of arity " + to_string(arity));
        std::sort(orbits.begin(), orbits.end());
        orbits.erase(std::unique(orbits.begin(), orbits.end()), orbits.end());
        return Relation{arity, std::move(orbits), std::move(name)};
    }

    auto Relation::contains(const Orbit & o) const -> bool
    {
        return std::binary_search(orbits.begin(), orbits.end(), o);
    }

    auto full_relation(const BinaryCore & core, int arity) -> Relation
    {
        return Relation{arity, enumerate_orbits(core, arity), ""};
    }

    auto binary_relation(const CoreSignature & sig, LabelSet codes) -> Relation
    {
        vector<Orbit> orbits;
        for (int c = 0 ; c <= sig.size() ; ++c)
            if (codes & code_bit(c)) {
                Orbit o(2);
                o.set_code(sig, 0, 1, PairCode(c));
                orbits.push_back(o);
            }
        return Relation::make(2, std::move(orbits));
    }

    auto label_set(const Relation & binary) -> LabelSet
    {
        if (binary.arity != 2)
            throw PreconditionError("label_set needs a binary relation");
        return projection_set(binary, 0, 1);
    }

    auto projection_set(const Relation & r, int i, int j) -> LabelSet
    {
        LabelSet s = 0;
        for (auto & o : r.orbits)
            s |= code_bit(o.code(i, j));
        return s;
    }

    namespace
    {
        struct Formula
        {
            enum Kind { True, False, Atom, And, Or } kind = True;
            int i = 0, j = 0;
            LabelSet codes = 0;
            vector<unique_ptr<Formula>> children;

            auto eval(const Orbit & o) const -> bool
            {
                switch (kind) {
                    case True: return true;
                    case False: return false;
                    case Atom: return codes & code_bit(o.code(i, j));
                    case And:
                        for (auto & c : children)
                            if (! c->eval(o))
                                return false;
                        return true;
                    case Or:
                        for (auto & c : children)
                            if (c->eval(o))
                                return true;
                        return false;
                }
                return false;
            }
        };

        class FormulaParser
        {
        private:
            const CoreSignature & _sig;
            int _arity;
            const string & _s;
            size_t _pos = 0;

            auto fail(const string & msg) -> void
            {
                throw InputError("formula \"" + _s + "\" at offset " + to_string(_pos) + ": " + msg);
            }

            auto skip_space() -> void
            {
                while (_pos < _s.size() && std::isspace(static_cast<unsigned char>(_s[_pos])))
                    ++_pos;
            }

            auto accept(const string & tok) -> bool
            {
                skip_space();
                if (_s.compare(_pos, tok.size(), tok) != 0)
                    return false;
                // keywords must not run into an identifier
                if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
                    auto end = _pos + tok.size();
                    if (end < _s.size() && (std::isalnum(static_cast<unsigned char>(_s[end])) || _s[end] == '_'))
                        return false;
                }
                _pos += tok.size();
                return true;
            }

            auto identifier() -> string
            {
                skip_space();
                auto start = _pos;
                while (_pos < _s.size() && (std::isalnum(static_cast<unsigned char>(_s[_pos])) || _s[_pos] == '_'
                            || _s[_pos] == '\''))
                    ++_pos;
                return _s.substr(start, _pos - start);
            }

            auto variable(const string & text) -> int
            {
                string digits = text;
                if (! digits.empty() && (digits[0] == 'x' || digits[0] == 'X'))
                    digits = digits.substr(1);
                if (digits.empty() || ! std::all_of(digits.begin(), digits.end(),
                            [] (char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                    fail("expected a variable, got \"" + text + "\"");
                int v = std::stoi(digits);
                if (v < 1 || v > _arity)
                    fail("variable " + text + " outside 1.." + to_string(_arity));
                return v - 1;
            }

            auto atom() -> unique_ptr<Formula>
            {
                auto f = make_unique<Formula>();
                if (accept("(")) {
                    f = disjunction();
                    if (! accept(")"))
                        fail("expected )");
                    return f;
                }
                if (accept("true")) {
                    f->kind = Formula::True;
                    return f;
                }
                if (accept("false")) {
                    f->kind = Formula::False;
                    return f;
                }

                auto id = identifier();
                if (id.empty())
                    fail("expected an atom");
                f->kind = Formula::Atom;
                if (accept("(")) {
                    auto a = identifier();
                    if (! accept(","))
                        fail("expected ,");
                    auto b = identifier();
                    if (! accept(")"))
                        fail("expected )");
                    f->i = variable(a);
                    f->j = variable(b);
                    if (id == "EQ")
                        f->codes = code_bit(eq_code);
                    else if (id == "NEQ")
                        f->codes = _sig.neq_set();
                    else {
                        auto o = _sig.find(id);
                        if (! o)
                            fail("unknown orbital " + id);
                        f->codes = code_bit(orbital_code(*o));
                    }
                    return f;
                }

                f->i = variable(id);
                if (accept("!=") || accept("≠"))
                    f->codes = _sig.neq_set();
                else if (accept("==") || accept("="))
                    f->codes = code_bit(eq_code);
                else
                    fail("expected =, != or an orbital atom");
                f->j = variable(identifier());
                if (f->i == f->j)
                    fail("atom relates a coordinate to itself");
                return f;
            }

            auto conjunction() -> unique_ptr<Formula>
            {
                auto f = make_unique<Formula>();
                f->kind = Formula::And;
                f->children.push_back(atom());
                while (accept("&&") || accept("&") || accept("∧") || accept("and"))
                    f->children.push_back(atom());
                return f;
            }

        public:
            FormulaParser(const CoreSignature & sig, int arity, const string & s) :
                _sig(sig),
                _arity(arity),
                _s(s)
            {
            }

            auto disjunction() -> unique_ptr<Formula>
            {
                auto f = make_unique<Formula>();
                f->kind = Formula::Or;
                f->children.push_back(conjunction());
                while (accept("||") || accept("|") || accept("∨") || accept("or"))
                    f->children.push_back(conjunction());
                return f;
            }

            auto parse() -> unique_ptr<Formula>
            {
                auto f = disjunction();
                skip_space();
                if (_pos != _s.size())
                    fail("unexpected trailing input");
                return f;
            }
        };
    }

    auto from_formula(const BinaryCore & core, int arity, const string & formula, const string & name) -> Relation
    {
        if (arity < 1 || arity > max_arity)
            throw InputError("relation arity " + to_string(arity) + " outside 1.." + to_string(max_arity));
        auto f = FormulaParser(core.signature, arity, formula).parse();
        vector<Orbit> kept;
        for (auto & o : enumerate_orbits(core, arity))
            if (f->eval(o))
                kept.push_back(o);
        return Relation{arity, std::move(kept), name};
    }

    auto project(const Relation & r, const vector<int> & indices) -> Relation
    {
        for (auto i : indices)
            if (i < 0 || i >= r.arity)
                throw PreconditionError("projection index out of range");
        vector<Orbit> result;
        result.reserve(r.orbits.size());
        for (auto & o : r.orbits)
            result.push_back(restrict_orbit(o, indices));
        return Relation::make(int(indices.size()), std::move(result));
    }

    auto permute(const Relation & r, const vector<int> & perm) -> Relation
    {
        if (int(perm.size()) != r.arity)
            throw PreconditionError("permutation length does not match arity");
        vector<int> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0 ; i < r.arity ; ++i)
            if (sorted[i] != i)
                throw PreconditionError("not a permutation");
        return project(r, perm);
    }

    auto combine(const Relation & a, const Relation & b, SetOp op) -> Relation
    {
        if (a.arity != b.arity)
            throw PreconditionError("combine: arity mismatch " + to_string(a.arity) + " vs " + to_string(b.arity));
        vector<Orbit> result;
        switch (op) {
            case SetOp::And:
                std::set_intersection(a.orbits.begin(), a.orbits.end(), b.orbits.begin(), b.orbits.end(),
                        std::back_inserter(result));
                break;
            case SetOp::Or:
                std::set_union(a.orbits.begin(), a.orbits.end(), b.orbits.begin(), b.orbits.end(),
                        std::back_inserter(result));
                break;
            case SetOp::Minus:
                std::set_difference(a.orbits.begin(), a.orbits.end(), b.orbits.begin(), b.orbits.end(),
                        std::back_inserter(result));
                break;
        }
        return Relation{a.arity, std::move(result), ""};
    }

    auto inverse_binary(const CoreSignature & sig, const Relation & c) -> Relation
    {
        return binary_relation(sig, sig.inverse_set(label_set(c)));
    }

    auto restrict_pair(const Relation & r, int i, int j, LabelSet codes) -> Relation
    {
        vector<Orbit> kept;
        for (auto & o : r.orbits)
            if (codes & code_bit(o.code(i, j)))
                kept.push_back(o);
        return Relation{r.arity, std::move(kept), ""};
    }

    auto entails_no_equalities(const Relation & r) -> bool
    {
        for (int i = 0 ; i < r.arity ; ++i)
            for (int j = i + 1 ; j < r.arity ; ++j)
                if (projection_set(r, i, j) == code_bit(eq_code))
                    return false;
        return true;
    }

    auto entails_implication(const Relation & r, LabelSet c, int i, int j, LabelSet d, int k, int l) -> bool
    {
        for (auto & o : r.orbits)
            if ((c & code_bit(o.code(i, j))) && ! (d & code_bit(o.code(k, l))))
                return false;
        return true;
    }

    auto efficiently_entails(const Relation & r, LabelSet c1, int i, int j, LabelSet d1, int k, int l) -> bool
    {
        auto pc = projection_set(r, i, j), pd = projection_set(r, k, l);
        bool strict_c = (c1 & pc) == c1 && c1 != pc;
        bool strict_d = (d1 & pd) == d1 && d1 != pd;
        return strict_c && strict_d && entails_implication(r, c1, i, j, d1, k, l);
    }

    auto arrow_name(Arrow a) -> string
    {
        return a == Arrow::Right ? "->" : "<-";
    }

    auto left_pair(Arrow l) -> pair<int, int>
    {
        return l == Arrow::Right ? pair{0, 1} : pair{1, 0};
    }

    auto right_pair(int arity, Arrow p) -> pair<int, int>
    {
        if (arity == 3)
            return p == Arrow::Right ? pair{1, 2} : pair{2, 1};
        return p == Arrow::Right ? pair{2, 3} : pair{3, 2};
    }

    auto check_implication(const ImplicationDesc & d) -> optional<string>
    {
        auto & r = d.relation;
        if (r.arity != 3 && r.arity != 4)
            return "arity must be 3 or 4";
        if (! entails_no_equalities(r))
            return "relation entails an equality";
        auto [a, b] = left_pair(d.l);
        auto [c, e] = right_pair(r.arity, d.p);
        if (projection_set(r, a, b) != d.c)
            return "left projection differs from C";
        if (projection_set(r, c, e) != d.d)
            return "right projection differs from D";
        if (d.c1 == 0 || d.d1 == 0)
            return "C1 and D1 must be nonempty";
        if (! efficiently_entails(r, d.c1, a, b, d.d1, c, e))
            return "C1 does not efficiently entail D1";
        return nullopt;
    }

    auto classify_implication(const Relation & r, optional<LabelSet> expected_c, optional<LabelSet> expected_d,
            const vector<LabelSet> & known_pp) -> vector<ImplicationDesc>
    {
        vector<ImplicationDesc> result;
        if (r.arity != 3 && r.arity != 4)
            return result;
        if (! entails_no_equalities(r))
            return result;

        auto known = [&] (LabelSet s) {
            return std::find(known_pp.begin(), known_pp.end(), s) != known_pp.end();
        };

        for (auto l : {Arrow::Right, Arrow::Left})
            for (auto p : {Arrow::Right, Arrow::Left}) {
                auto [a, b] = left_pair(l);
                auto [c, e] = right_pair(r.arity, p);
                LabelSet pc = projection_set(r, a, b), pd = projection_set(r, c, e);
                if ((expected_c && pc != *expected_c) || (expected_d && pd != *expected_d))
                    continue;

                LabelSet follow[max_orbitals + 1] = {};
                for (auto & o : r.orbits)
                    follow[o.code(a, b)] |= code_bit(o.code(c, e));

                for (LabelSet c1 = (pc - 1) & pc ; c1 != 0 ; c1 = (c1 - 1) & pc) {
                    LabelSet dmin = 0;
                    for (int code = 0 ; code <= max_orbitals ; ++code)
                        if (c1 & code_bit(code))
                            dmin |= follow[code];
                    if (dmin == pd)
                        continue;
                    LabelSet extra = pd & ~dmin;
                    // every d1 with dmin <= d1 < pd
                    for (LabelSet add = 0 ; ; add = (add - extra) & extra) {
                        if ((dmin | add) != pd)
                            result.push_back(ImplicationDesc{r, pc, pd, c1, dmin | add, l, p, known(c1) && known(dmin | add)});
                        if (add == extra)
                            break;
                    }
                }
            }
        return result;
    }

    auto exist_join(const BinaryCore & core, const vector<JoinAtom> & atoms, const vector<int> & visible, int cap)
        -> Relation
    {
        int npoints = 0;
        for (auto & a : atoms)
            for (auto p : a.points)
                npoints = std::max(npoints, p + 1);
        for (auto p : visible)
            npoints = std::max(npoints, p + 1);
        if (npoints > cap)
            throw CapExceeded("existential join over " + to_string(npoints) + " points exceeds the cap of " + to_string(cap));
        if (int(visible.size()) > max_arity)
            throw CapExceeded("join result arity exceeds " + to_string(max_arity));

        vector<int> renumber(npoints, -1);
        int next = 0;
        for (auto p : visible) {
            if (renumber[p] != -1)
                throw PreconditionError("visible points must be distinct");
            renumber[p] = next++;
        }
        for (int p = 0 ; p < npoints ; ++p)
            if (renumber[p] == -1)
                renumber[p] = next++;

        LabelingSearch search(core, npoints);
        for (auto & a : atoms) {
            vector<int> pts;
            for (auto p : a.points)
                pts.push_back(renumber[p]);
            search.add_atom(a.relation->orbits, a.relation->arity, pts);
        }
        return Relation{int(visible.size()), search.visible_orbits(int(visible.size())), ""};
    }

    auto builtin_templates() -> const vector<PpTemplate> &
    {
        static const vector<PpTemplate> templates = {
            {"bowtie_ternary", 4, 2, {0, 1, 2}, {{0, {0, 1, 3}}, {1, {3, 1, 2}}}},
            {"bowtie_quaternary", 6, 2, {0, 1, 2, 3}, {{0, {0, 1, 4, 5}}, {1, {5, 4, 2, 3}}}},
            {"bowtie_three", 5, 2, {0, 1, 2}, {{0, {0, 1, 3, 4}}, {1, {4, 3, 1, 2}}}},
            {"circ_44same", 6, 2, {0, 1, 2, 3}, {{0, {0, 1, 4, 5}}, {1, {4, 5, 2, 3}}}},
            {"circ_44different", 6, 2, {0, 1, 2, 3}, {{0, {0, 1, 4, 5}}, {1, {5, 4, 2, 3}}}},
            {"circ_43same", 5, 2, {0, 1, 2, 3}, {{0, {0, 1, 4, 2}}, {1, {4, 2, 3}}}},
            {"circ_43different", 5, 2, {0, 1, 2, 3}, {{0, {0, 1, 2, 4}}, {1, {4, 2, 3}}}},
            {"circ_34same", 5, 2, {0, 1, 2, 3}, {{0, {0, 1, 4}}, {1, {1, 4, 2, 3}}}},
            {"circ_34different", 5, 2, {0, 1, 2, 3}, {{0, {0, 1, 4}}, {1, {4, 1, 2, 3}}}},
            {"circ_33same", 4, 2, {0, 1, 2, 3}, {{0, {0, 1, 2}}, {1, {1, 2, 3}}}},
            {"circ_33different", 4, 2, {0, 1, 2}, {{0, {0, 1, 3}}, {1, {3, 1, 2}}}},
            // x1, x2 visible, x0 quantified
            {"psi_neq", 3, 2, {0, 1}, {{0, {2, 0}}, {1, {2, 1}}}},
            {"rdprime", 4, 1, {0, 1, 2}, {{0, {0, 1, 3}}, {0, {2, 1, 3}}}},
            {"ternary_o_eq", 4, 2, {0, 1, 2}, {{0, {0, 1, 3}}, {1, {2, 3}}}},
            {"quaternary_o_eq", 5, 2, {0, 1, 2, 3}, {{0, {0, 1, 2, 4}}, {1, {3, 4}}}},
            {"eq_or_eq_quaternary", 5, 2, {0, 1, 2, 3}, {{0, {0, 1, 2, 4}}, {1, {4, 3}}}},
            {"symmetric_meet", 3, 1, {0, 1, 2}, {{0, {0, 1, 2}}, {0, {2, 1, 0}}}},
            {"define_binary", 3, 2, {0, 1}, {{0, {0, 1, 2}}, {1, {1, 2}}}},
            {"restrict_neq_ternary", 3, 2, {0, 1, 2}, {{0, {0, 1, 2}}, {1, {0, 1}}, {1, {1, 2}}}},
            {"restrict_neq_quaternary", 4, 2, {0, 1, 2, 3}, {{0, {0, 1, 2, 3}}, {1, {0, 1}}, {1, {2, 3}}}},
            {"restrict_neq_13", 3, 2, {0, 1, 2}, {{0, {0, 1, 2}}, {1, {0, 2}}}},
        };
        return templates;
    }

    auto find_template(const string & id) -> const PpTemplate &
    {
        for (auto & t : builtin_templates())
            if (t.id == id)
                return t;
        throw InputError("unknown pp-template " + id);
    }

    auto pp_apply(const BinaryCore & core, const PpTemplate & t, const vector<const Relation *> & slots, int cap) -> Relation
    {
        if (int(slots.size()) != t.slots)
            throw PreconditionError("template " + t.id + " takes " + to_string(t.slots) + " relations");
        vector<JoinAtom> atoms;
        for (auto & [slot, pts] : t.atoms) {
            if (slots[slot]->arity != int(pts.size()))
                throw PreconditionError("template " + t.id + ": relation of arity " + to_string(slots[slot]->arity)
                        + " used at an atom of arity " + to_string(pts.size()));
            atoms.push_back(JoinAtom{slots[slot], pts});
        }
        return exist_join(core, atoms, t.visible, std::max(cap, t.points));
    }

    auto bowtie(const BinaryCore & core, const Relation & r1, const Relation & r2) -> Relation
    {
        if (r1.arity != r2.arity || (r1.arity != 3 && r1.arity != 4))
            throw PreconditionError("bowtie needs two ternary or two quaternary relations");
        return pp_apply(core, find_template(r1.arity == 3 ? "bowtie_ternary" : "bowtie_quaternary"), {&r1, &r2});
    }

    auto bowtie3(const BinaryCore & core, const Relation & r1, const Relation & r2) -> Relation
    {
        if (r1.arity != 4 || r2.arity != 4)
            throw PreconditionError("bowtie3 needs two quaternary relations");
        return pp_apply(core, find_template("bowtie_three"), {&r1, &r2});
    }

    auto circ_template(const ImplicationDesc & d1, const ImplicationDesc & d2) -> string
    {
        auto a1 = d1.relation.arity, a2 = d2.relation.arity;
        if ((a1 != 3 && a1 != 4) || (a2 != 3 && a2 != 4))
            throw PreconditionError("composition needs ternary or quaternary implications");
        return "circ_" + to_string(a1) + to_string(a2) + (d1.p == d2.l ? "same" : "different");
    }

    auto circ(const BinaryCore & core, const ImplicationDesc & d1, const ImplicationDesc & d2) -> ImplicationDesc
    {
        if (d1.d != d2.c || d1.d1 != d2.c1)
            throw PreconditionError("composition of non-composable implications");
        auto & t = find_template(circ_template(d1, d2));
        auto rel = pp_apply(core, t, {&d1.relation, &d2.relation});
        ImplicationDesc result{std::move(rel), d1.c, d2.d, d1.c1, d2.d1, d1.l, d2.p, d1.pp_certified && d2.pp_certified};
        if (auto why = check_implication(result))
            throw CompositionError("composition via " + t.id + " is not an implication: " + *why, result.relation);
        return result;
    }

    auto circ_power(const BinaryCore & core, const ImplicationDesc & d, int k) -> ImplicationDesc
    {
        if (k < 1)
            throw PreconditionError("circ_power needs k >= 1");
        auto result = d;
        for (int i = 1 ; i < k ; ++i)
            result = circ(core, result, d);
        return result;
    }

    auto relation_to_string(const CoreSignature & sig, const Relation & r) -> string
    {
        string s = (r.name.empty() ? string("R") : r.name) + "/" + to_string(r.arity) + " {";
        for (unsigned i = 0 ; i < r.orbits.size() ; ++i)
            s += (i ? " " : "") + orbit_to_string(sig, r.orbits[i]);
        return s + "}";
    }
}
