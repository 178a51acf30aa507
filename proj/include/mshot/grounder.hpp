#pragma once

#include <mshot/atom_table.hpp>
#include <mshot/error.hpp>
#include <mshot/syntax.hpp>

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace mshot {

struct GroundLiteral {
    AtomId atom{0};
    bool   negated{false};
    friend auto operator<=>(const GroundLiteral&, const GroundLiteral&) = default;
};

struct GroundChoice {
    std::vector<AtomId>         atoms;
    std::optional<std::int64_t> lower;
    std::optional<std::int64_t> upper;
    friend bool operator==(const GroundChoice&, const GroundChoice&) = default;
};

struct GroundRule {
    /// monostate: integrity constraint.
    std::variant<std::monostate, AtomId, GroundChoice> head;
    std::vector<AtomId>                                pos;
    std::vector<AtomId>                                neg;

    [[nodiscard]] bool is_constraint() const { return std::holds_alternative<std::monostate>(head); }
    [[nodiscard]] bool is_choice() const { return std::holds_alternative<GroundChoice>(head); }
    /// Atoms this rule defines (empty for constraints).
    [[nodiscard]] std::vector<AtomId> head_atoms() const;

    friend bool operator==(const GroundRule&, const GroundRule&) = default;
};

struct MinimizeEntry {
    std::int64_t               weight{0};
    std::int64_t               priority{0};
    /// Weight, priority, then the element's terms.
    std::vector<Value>         tuple;
    std::vector<GroundLiteral> condition;
    friend bool operator==(const MinimizeEntry&, const MinimizeEntry&) = default;
};

struct GroundUnit {
    std::vector<GroundRule>    rules;
    std::vector<AtomId>        external_decls;
    std::vector<MinimizeEntry> minimize_entries;
    std::set<Signature>        shown;
    std::uint32_t              increment_tag{0};
};

/// Atoms known to the grounder across increments: every atom that may become
/// true (head of a ground rule or declared external) and the subset that is
/// certainly true (derived from facts by definite rules).
class Domain {
public:
    bool add_possible(const Value& atom);
    void add_certain(const Value& atom);

    [[nodiscard]] bool is_possible(const Value& atom) const { return position(atom).has_value(); }
    [[nodiscard]] bool is_certain(const Value& atom) const { return certain_.count(atom) > 0; }
    /// Possible atoms of one predicate in insertion order.
    [[nodiscard]] std::span<const Value> atoms(const Signature& sig) const;
    [[nodiscard]] std::optional<std::size_t> position(const Value& atom) const;
    [[nodiscard]] std::size_t size(const Signature& sig) const { return atoms(sig).size(); }
    [[nodiscard]] std::vector<Signature> signatures() const;

private:
    std::map<Signature, std::vector<Value>>           by_sig_;
    std::unordered_map<Value, std::size_t, ValueHash> index_;
    std::unordered_set<Value, ValueHash>              certain_;
};

/// Replaces each parameter (as a constant symbol in any term position) by the
/// corresponding ground argument. The result has no parameters.
SubprogramDef substitute_params(const SubprogramDef& def, std::span<const Value> args);

/// Evaluates a ground term (arithmetic folded). Intervals are rejected.
Value evaluate_ground(const Term& term);

/// Grounds a batch of parameter-free subprograms jointly: all of them see each
/// other's head atoms as possible. Returns one unit per def, tagged
/// `first_tag`, `first_tag + 1`, ... The domain is extended with every head
/// and external atom derived.
std::vector<GroundUnit> instantiate(std::span<const SubprogramDef> defs, Domain& domain, AtomTable& atoms,
                                    std::uint32_t first_tag, const WarningSink& warn = {});

GroundUnit instantiate(const SubprogramDef& def, Domain& domain, AtomTable& atoms, std::uint32_t tag = 0,
                       const WarningSink& warn = {});

/// Deterministic listing: `% inc <k>` per unit, then rules, externals and
/// minimize entries in emission order. Bodies are printed sorted.
std::string dump_ground(std::span<const GroundUnit> units, const AtomTable& atoms);

} // namespace mshot
