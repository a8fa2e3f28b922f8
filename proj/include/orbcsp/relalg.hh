#ifndef ORBCSP_GUARD_ORBCSP_RELALG_HH
#define ORBCSP_GUARD_ORBCSP_RELALG_HH 1

#include <orbcsp/core.hh>
#include <orbcsp/orbits.hh>

#include <optional>
#include <string>
#include <vector>

namespace orbcsp
{
    /// A relation first-order definable in the core, as a sorted set of orbits.
    struct Relation
    {
        int arity = 0;
        std::vector<Orbit> orbits;
        std::string name;

        /// Sorts and deduplicates; checks arities.
        static auto make(int arity, std::vector<Orbit> orbits, std::string name = "") -> Relation;

        auto contains(const Orbit & o) const -> bool;

        auto size() const -> std::size_t
        {
            return orbits.size();
        }

        auto empty() const -> bool
        {
            return orbits.empty();
        }

        /// Names are labels only and do not take part in comparison.
        auto operator==(const Relation & other) const -> bool
        {
            return arity == other.arity && orbits == other.orbits;
        }
    };

    auto full_relation(const BinaryCore & core, int arity) -> Relation;

    /// The binary relation made of the given pair codes.
    auto binary_relation(const CoreSignature & sig, LabelSet codes) -> Relation;

    /// The codes of a binary relation.
    auto label_set(const Relation & binary) -> LabelSet;

    /// The pair codes occurring at coordinates (i, j), 0-based.
    auto projection_set(const Relation & r, int i, int j) -> LabelSet;

    /// Parses a quantifier-free formula over atoms ORB(i,j), i=j, i!=j with
    /// 1-based coordinates (an optional x prefix is accepted), combined with
    /// & and |, parentheses, true and false.
    auto from_formula(const BinaryCore & core, int arity, const std::string & formula, const std::string & name = "")
        -> Relation;

    /// 0-based indices; repetitions are allowed and give equal coordinates.
    auto project(const Relation & r, const std::vector<int> & indices) -> Relation;

    /// new coordinate i is old coordinate perm[i], 0-based.
    auto permute(const Relation & r, const std::vector<int> & perm) -> Relation;

    enum class SetOp
    {
        And,
        Or,
        Minus
    };

    auto combine(const Relation & a, const Relation & b, SetOp op) -> Relation;

    auto inverse_binary(const CoreSignature & sig, const Relation & c) -> Relation;

    /// Keeps the orbits whose codes at (i, j) lie in the given set.
    auto restrict_pair(const Relation & r, int i, int j, LabelSet codes) -> Relation;

    auto entails_no_equalities(const Relation & r) -> bool;

    /// Every orbit with code(i,j) in c has code(k,l) in d.
    auto entails_implication(const Relation & r, LabelSet c, int i, int j, LabelSet d, int k, int l) -> bool;

    auto efficiently_entails(const Relation & r, LabelSet c1, int i, int j, LabelSet d1, int k, int l) -> bool;

    enum class Arrow
    {
        Right,
        Left
    };

    auto arrow_name(Arrow a) -> std::string;

    /// Left pair: (0,1) for Right, (1,0) for Left. Right pair, ternary: (1,2)
    /// or (2,1); quaternary: (2,3) or (3,2).
    auto left_pair(Arrow l) -> std::pair<int, int>;
    auto right_pair(int arity, Arrow p) -> std::pair<int, int>;

    struct ImplicationDesc
    {
        Relation relation;
        LabelSet c = 0, d = 0, c1 = 0, d1 = 0;
        Arrow l = Arrow::Right, p = Arrow::Right;
        /// True when c1 and d1 are among the binary relations known to be
        /// pp-definable; otherwise the pair comes from the union-of-orbitals
        /// over-approximation.
        bool pp_certified = false;
    };

    /// Empty optional if the descriptor is an implication, else the reason.
    auto check_implication(const ImplicationDesc & d) -> std::optional<std::string>;

    /// Every (c1, d1, l, p) making r an implication, with c, d as given if set.
    auto classify_implication(const Relation & r, std::optional<LabelSet> expected_c = std::nullopt,
            std::optional<LabelSet> expected_d = std::nullopt, const std::vector<LabelSet> & known_pp = {})
        -> std::vector<ImplicationDesc>;

    struct JoinAtom
    {
        const Relation * relation;
        std::vector<int> points;
    };

    inline constexpr int default_join_cap = 7;

    /// Evaluates the existential join of the atoms; the result's coordinates
    /// are the visible points in the given order.
    auto exist_join(const BinaryCore & core, const std::vector<JoinAtom> & atoms, const std::vector<int> & visible,
            int cap = default_join_cap) -> Relation;

    struct PpTemplate
    {
        std::string id;
        int points = 0;
        int slots = 0;
        std::vector<int> visible;
        std::vector<std::pair<int, std::vector<int>>> atoms;
    };

    /// Every built-in template, keyed by id.
    auto builtin_templates() -> const std::vector<PpTemplate> &;

    auto find_template(const std::string & id) -> const PpTemplate &;

    auto pp_apply(const BinaryCore & core, const PpTemplate & t, const std::vector<const Relation *> & slots,
            int cap = default_join_cap) -> Relation;

    auto bowtie(const BinaryCore & core, const Relation & r1, const Relation & r2) -> Relation;

    auto bowtie3(const BinaryCore & core, const Relation & r1, const Relation & r2) -> Relation;

    /// Raised when a composition does not classify as the advertised
    /// implication. Carries the composed relation.
    class CompositionError : public PostconditionError
    {
    public:
        Relation relation;

        CompositionError(const std::string & what, Relation r) :
            PostconditionError(what),
            relation(std::move(r))
        {
        }
    };

    /// The id of the composition template chosen for the two descriptors.
    auto circ_template(const ImplicationDesc & d1, const ImplicationDesc & d2) -> std::string;

    /// Composes two implications and checks that the result is a
    /// (c of d1, d of d2, c1 of d1, d1 of d2, l of d1, p of d2)-implication.
    auto circ(const BinaryCore & core, const ImplicationDesc & d1, const ImplicationDesc & d2) -> ImplicationDesc;

    /// The k-fold composition of d with itself.
    auto circ_power(const BinaryCore & core, const ImplicationDesc & d, int k) -> ImplicationDesc;

    auto relation_to_string(const CoreSignature & sig, const Relation & r) -> std::string;
}

#endif
