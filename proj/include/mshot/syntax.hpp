#pragma once

#include <mshot/error.hpp>
#include <mshot/value.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mshot {

/// Non-ground term. Kept as a flat recursive struct so the AST stays a plain
/// value type (copyable, comparable).
struct Term {
    enum class Kind : std::uint8_t { Integer, Symbol, Variable, Function, BinOp, Interval };

    Kind              kind{Kind::Integer};
    std::int64_t      integer{0};
    std::string       name;          // Symbol, Variable, Function
    bool              quoted{false}; // Symbol holding a string literal
    char              op{0};         // BinOp: one of + - * /
    std::vector<Term> args;          // Function arguments; BinOp/Interval operands

    static Term make_integer(std::int64_t v);
    static Term make_symbol(std::string name, bool quoted = false);
    static Term make_variable(std::string name);
    static Term make_function(std::string name, std::vector<Term> args);
    static Term make_binop(char op, Term lhs, Term rhs);
    static Term make_interval(Term lo, Term hi);
    static Term from_value(const Value& v);

    [[nodiscard]] bool is_ground() const;
    [[nodiscard]] bool is_anonymous() const { return kind == Kind::Variable && name == "_"; }

    friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
    std::string       name;
    std::vector<Term> args;

    [[nodiscard]] Signature signature() const { return {name, args.size()}; }
    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class Relop : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

Relop negate(Relop op);
std::string_view to_string(Relop op);

struct Comparison {
    Term  lhs;
    Relop op{Relop::Eq};
    Term  rhs;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct AtomLiteral {
    bool negated{false};
    Atom atom;
    friend bool operator==(const AtomLiteral&, const AtomLiteral&) = default;
};

/// Body literal. Comparisons never carry `not`; it is folded into the relation.
using Literal = std::variant<AtomLiteral, Comparison>;

struct ChoiceElement {
    Atom                 atom;
    std::vector<Literal> condition;
    friend bool operator==(const ChoiceElement&, const ChoiceElement&) = default;
};

struct ChoiceHead {
    std::vector<ChoiceElement> elements;
    std::optional<Term>        lower;
    std::optional<Term>        upper;
    friend bool operator==(const ChoiceHead&, const ChoiceHead&) = default;
};

struct Rule {
    /// monostate: integrity constraint.
    std::variant<std::monostate, Atom, ChoiceHead> head;
    std::vector<Literal>                           body;
    friend bool operator==(const Rule&, const Rule&) = default;
};

struct External {
    Atom                 atom;
    std::vector<Literal> condition;
    friend bool operator==(const External&, const External&) = default;
};

struct MinimizeElement {
    Term                 weight;
    Term                 priority;
    std::vector<Term>    terms;
    std::vector<Literal> condition;
    friend bool operator==(const MinimizeElement&, const MinimizeElement&) = default;
};

/// `#minimize{...}.` and `:~ body. [w@p,t]` (the latter as a single element).
struct Minimize {
    std::vector<MinimizeElement> elements;
    friend bool operator==(const Minimize&, const Minimize&) = default;
};

struct Show {
    Signature sig;
    friend bool operator==(const Show&, const Show&) = default;
};

struct Const {
    std::string name;
    Term        value;
    friend bool operator==(const Const&, const Const&) = default;
};

/// `#script(lang) ... #end.`; kept verbatim, never executed by the core.
struct Script {
    std::string language;
    std::string text;
    friend bool operator==(const Script&, const Script&) = default;
};

using Statement = std::variant<Rule, External, Minimize, Show, Const, Script>;

struct SubprogramDef {
    std::string              name;
    std::vector<std::string> params;
    std::vector<Statement>   statements;

    friend bool operator==(const SubprogramDef&, const SubprogramDef&) = default;
};

/// Splits `text` into subprograms. `base/0` is always first; the others follow
/// in order of first appearance. Blocks with equal name and parameter count
/// are concatenated.
std::vector<SubprogramDef> parse_program(std::string_view text);

/// Parses a ground term, e.g. a `--const` value or a control-script argument.
Term parse_term(std::string_view text);

/// Replaces constant symbols (unquoted, arity zero) in every term position.
/// Predicate names are left alone.
Term      substitute(const Term& term, const std::map<std::string, Term>& subst);
Statement substitute(const Statement& stmt, const std::map<std::string, Term>& subst);

/// Gives every `_` its own variable name (`_#k`, not expressible in input).
Statement make_anonymous_unique(const Statement& stmt);

/// Raises UnsafeVariable for the first unsafe variable in source order.
void check_safety(const Rule& rule);
void check_safety(const Statement& stmt);

std::string to_string(const Term& term);
std::string to_string(const Atom& atom);
std::string to_string(const Literal& lit);
std::string to_string(const Statement& stmt);
/// Re-parseable listing of a whole program, one `#program` block per def.
std::string to_string(const std::vector<SubprogramDef>& program);

} // namespace mshot
