#include <mshot/syntax.hpp>

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace mshot {

// {{{ Term helpers

Term Term::make_integer(std::int64_t v) {
    Term t;
    t.kind    = Kind::Integer;
    t.integer = v;
    return t;
}

Term Term::make_symbol(std::string name, bool quoted) {
    Term t;
    t.kind   = Kind::Symbol;
    t.name   = std::move(name);
    t.quoted = quoted;
    return t;
}

Term Term::make_variable(std::string name) {
    Term t;
    t.kind = Kind::Variable;
    t.name = std::move(name);
    return t;
}

Term Term::make_function(std::string name, std::vector<Term> args) {
    if (args.empty()) { return make_symbol(std::move(name)); }
    Term t;
    t.kind = Kind::Function;
    t.name = std::move(name);
    t.args = std::move(args);
    return t;
}

Term Term::make_binop(char op, Term lhs, Term rhs) {
    Term t;
    t.kind = Kind::BinOp;
    t.op   = op;
    t.args.push_back(std::move(lhs));
    t.args.push_back(std::move(rhs));
    return t;
}

Term Term::make_interval(Term lo, Term hi) {
    Term t;
    t.kind = Kind::Interval;
    t.args.push_back(std::move(lo));
    t.args.push_back(std::move(hi));
    return t;
}

Term Term::from_value(const Value& v) {
    switch (v.kind()) {
        case Value::Kind::Int: return make_integer(v.as_int());
        case Value::Kind::Str: return make_symbol(v.name(), true);
        case Value::Kind::Fun: {
            std::vector<Term> args;
            for (const auto& a : v.args()) { args.push_back(from_value(a)); }
            return make_function(v.name(), std::move(args));
        }
    }
    return {};
}

bool Term::is_ground() const {
    if (kind == Kind::Variable) { return false; }
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
}

Relop negate(Relop op) {
    switch (op) {
        case Relop::Eq: return Relop::Ne;
        case Relop::Ne: return Relop::Eq;
        case Relop::Lt: return Relop::Ge;
        case Relop::Le: return Relop::Gt;
        case Relop::Gt: return Relop::Le;
        case Relop::Ge: return Relop::Lt;
    }
    return op;
}

std::string_view to_string(Relop op) {
    switch (op) {
        case Relop::Eq: return "=";
        case Relop::Ne: return "!=";
        case Relop::Lt: return "<";
        case Relop::Le: return "<=";
        case Relop::Gt: return ">";
        case Relop::Ge: return ">=";
    }
    return "?";
}

// }}}
// {{{ Lexer

namespace {

enum class Tok {
    End,
    Ident,
    Variable,
    Number,
    String,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    DotDot,
    Colon,
    If,       // :-
    WeakIf,   // :~
    Semi,
    At,
    Plus,
    Minus,
    Star,
    Slash,
    Bar,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Directive, // #name
    ScriptBody,
};

struct Token {
    Tok          kind{Tok::End};
    std::string  text;
    std::int64_t number{0};
    int          line{1};
    int          column{1};
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token tok;
        tok.line   = line_;
        tok.column = col_;
        if (pos_ >= src_.size()) { return tok; }
        char c = src_[pos_];
        auto single = [&](Tok k) {
            tok.kind = k;
            tok.text = std::string(1, c);
            advance();
            return tok;
        };
        if (is_lower(c)) {
            tok.kind = Tok::Ident;
            tok.text = take_word();
            return tok;
        }
        if (is_upper(c) || c == '_') {
            tok.kind = Tok::Variable;
            tok.text = take_word();
            return tok;
        }
        if (is_digit(c)) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && is_digit(src_[pos_])) { advance(); }
            tok.kind = Tok::Number;
            tok.text = std::string(src_.substr(start, pos_ - start));
            auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
            if (ec != std::errc{}) { throw SyntaxError(tok.line, tok.column, "integer literal out of range"); }
            return tok;
        }
        switch (c) {
            case '"': return take_string(tok);
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case '{': return single(Tok::LBrace);
            case '}': return single(Tok::RBrace);
            case '[': return single(Tok::LBracket);
            case ']': return single(Tok::RBracket);
            case ',': return single(Tok::Comma);
            case ';': return single(Tok::Semi);
            case '@': return single(Tok::At);
            case '+': return single(Tok::Plus);
            case '-': return single(Tok::Minus);
            case '*': return single(Tok::Star);
            case '/': return single(Tok::Slash);
            case '|': return single(Tok::Bar);
            case '=':
                advance();
                if (peek_char() == '=') { advance(); }
                tok.kind = Tok::Eq;
                tok.text = "=";
                return tok;
            case '.':
                advance();
                if (peek_char() == '.') {
                    advance();
                    tok.kind = Tok::DotDot;
                    tok.text = "..";
                    return tok;
                }
                tok.kind = Tok::Dot;
                tok.text = ".";
                return tok;
            case ':':
                advance();
                if (peek_char() == '-') {
                    advance();
                    tok.kind = Tok::If;
                    tok.text = ":-";
                } else if (peek_char() == '~') {
                    advance();
                    tok.kind = Tok::WeakIf;
                    tok.text = ":~";
                } else {
                    tok.kind = Tok::Colon;
                    tok.text = ":";
                }
                return tok;
            case '!':
                advance();
                if (peek_char() == '=') {
                    advance();
                    tok.kind = Tok::Ne;
                    tok.text = "!=";
                    return tok;
                }
                throw SyntaxError(tok.line, tok.column, "unexpected '!'");
            case '<':
                advance();
                if (peek_char() == '=') {
                    advance();
                    tok.kind = Tok::Le;
                    tok.text = "<=";
                } else if (peek_char() == '>') {
                    advance();
                    tok.kind = Tok::Ne;
                    tok.text = "<>";
                } else {
                    tok.kind = Tok::Lt;
                    tok.text = "<";
                }
                return tok;
            case '>':
                advance();
                if (peek_char() == '=') {
                    advance();
                    tok.kind = Tok::Ge;
                    tok.text = ">=";
                } else {
                    tok.kind = Tok::Gt;
                    tok.text = ">";
                }
                return tok;
            case '#': {
                advance();
                if (pos_ >= src_.size() || !is_lower(src_[pos_])) {
                    throw SyntaxError(tok.line, tok.column, "expected directive name after '#'");
                }
                tok.kind = Tok::Directive;
                tok.text = take_word();
                return tok;
            }
            default: break;
        }
        throw SyntaxError(tok.line, tok.column, "unexpected character");
    }

    /// Raw text up to (excluding) the next `#end.`; consumes the terminator.
    Token script_body() {
        Token tok;
        tok.kind       = Tok::ScriptBody;
        tok.line       = line_;
        tok.column     = col_;
        std::size_t at = src_.find("#end", pos_);
        while (at != std::string_view::npos) {
            std::size_t k = at + 4;
            while (k < src_.size() && is_space(src_[k])) { ++k; }
            if (k < src_.size() && src_[k] == '.') {
                tok.text = std::string(src_.substr(pos_, at - pos_));
                while (pos_ <= k) { advance(); }
                return tok;
            }
            at = src_.find("#end", at + 1);
        }
        throw SyntaxError(tok.line, tok.column, "unterminated #script block (missing '#end.')");
    }

private:
    static bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
    static bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
    static bool is_word(char c) { return is_lower(c) || is_upper(c) || is_digit(c) || c == '_' || c == '\''; }

    char peek_char() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string take_word() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_word(src_[pos_])) { advance(); }
        return std::string(src_.substr(start, pos_ - start));
    }

    Token take_string(Token tok) {
        advance();
        std::string out;
        while (true) {
            if (pos_ >= src_.size()) { throw SyntaxError(tok.line, tok.column, "unterminated string"); }
            char c = src_[pos_];
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\n') { throw SyntaxError(tok.line, tok.column, "newline in string"); }
            if (c == '\\') {
                advance();
                if (pos_ >= src_.size()) { throw SyntaxError(tok.line, tok.column, "unterminated string"); }
                char e = src_[pos_];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw SyntaxError(line_, col_, "unknown escape sequence");
                }
                advance();
                continue;
            }
            out += c;
            advance();
        }
        tok.kind = Tok::String;
        tok.text = std::move(out);
        return tok;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (is_space(c)) {
                advance();
            } else if (c == '%') {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                    int line = line_;
                    int col  = col_;
                    advance();
                    advance();
                    while (true) {
                        if (pos_ + 1 >= src_.size()) { throw SyntaxError(line, col, "unterminated block comment"); }
                        if (src_[pos_] == '*' && src_[pos_ + 1] == '%') {
                            advance();
                            advance();
                            break;
                        }
                        advance();
                    }
                } else {
                    while (pos_ < src_.size() && src_[pos_] != '\n') { advance(); }
                }
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t      pos_{0};
    int              line_{1};
    int              col_{1};
};

// }}}
// {{{ Parser

constexpr int max_depth = 256;

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { shift(); }

    std::vector<SubprogramDef> program() {
        std::vector<SubprogramDef> defs;
        std::map<std::pair<std::string, std::size_t>, std::size_t> index;
        defs.push_back(SubprogramDef{"base", {}, {}});
        index[{"base", 0}] = 0;
        std::size_t current = 0;
        std::map<std::string, Term> renames;
        while (cur_.kind != Tok::End) {
            if (cur_.kind == Tok::Directive && cur_.text == "program") {
                shift();
                std::string name = expect(Tok::Ident, "subprogram name").text;
                std::vector<std::string> params;
                if (accept(Tok::LParen)) {
                    do {
                        Token p = expect(Tok::Ident, "parameter name");
                        if (std::find(params.begin(), params.end(), p.text) != params.end()) {
                            throw Error(ErrorCode::DuplicateParam, std::to_string(p.line) + ":" + std::to_string(p.column) +
                                                                       ": parameter '" + p.text + "' repeated in #program " + name);
                        }
                        params.push_back(p.text);
                    } while (accept(Tok::Comma));
                    expect(Tok::RParen, "')'");
                }
                expect(Tok::Dot, "'.'");
                renames.clear();
                auto key = std::make_pair(name, params.size());
                if (auto it = index.find(key); it != index.end()) {
                    current = it->second;
                    // A reopened block may name its parameters differently.
                    const auto& first = defs[current].params;
                    for (std::size_t i = 0; i < params.size(); ++i) {
                        if (params[i] != first[i]) { renames[params[i]] = Term::make_symbol(first[i]); }
                    }
                } else {
                    current    = defs.size();
                    index[key] = current;
                    defs.push_back(SubprogramDef{name, params, {}});
                }
                continue;
            }
            Statement stmt = statement();
            if (!renames.empty()) { stmt = substitute(stmt, renames); }
            defs[current].statements.push_back(std::move(stmt));
        }
        return defs;
    }

    Term ground_term() {
        Term t = term();
        if (cur_.kind != Tok::End) { fail("unexpected input after term"); }
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(cur_.line, cur_.column, msg); }

    void shift() { cur_ = lex_.next(); }

    bool accept(Tok k) {
        if (cur_.kind == k) {
            shift();
            return true;
        }
        return false;
    }

    Token expect(Tok k, const char* what) {
        if (cur_.kind != k) { fail(std::string("expected ") + what + (cur_.kind == Tok::End ? " but reached end of input" : " but found '" + cur_.text + "'")); }
        Token t = cur_;
        shift();
        return t;
    }

    Statement statement() {
        if (cur_.kind == Tok::Directive) { return directive(); }
        if (cur_.kind == Tok::WeakIf) { return weak_constraint(); }
        Rule rule;
        if (cur_.kind != Tok::If) { rule.head = head(); }
        if (accept(Tok::If)) {
            if (cur_.kind != Tok::Dot) { rule.body = literals(); }
        }
        expect(Tok::Dot, "'.' at end of rule");
        return rule;
    }

    Statement directive() {
        Token d = cur_;
        shift();
        if (d.text == "external") {
            External ext;
            ext.atom = atom_of(term(), d);
            if (accept(Tok::Colon)) { ext.condition = literals(); }
            expect(Tok::Dot, "'.' after #external");
            return ext;
        }
        if (d.text == "minimize" || d.text == "minimise") {
            Minimize min;
            expect(Tok::LBrace, "'{' after #minimize");
            if (cur_.kind != Tok::RBrace) {
                do { min.elements.push_back(minimize_element()); } while (accept(Tok::Semi));
            }
            expect(Tok::RBrace, "'}'");
            expect(Tok::Dot, "'.' after #minimize");
            return min;
        }
        if (d.text == "show") {
            Show show;
            show.sig.name = expect(Tok::Ident, "predicate name after #show").text;
            expect(Tok::Slash, "'/'");
            show.sig.arity = static_cast<std::size_t>(expect(Tok::Number, "arity").number);
            expect(Tok::Dot, "'.' after #show");
            return show;
        }
        if (d.text == "const") {
            Const c;
            c.name = expect(Tok::Ident, "constant name").text;
            expect(Tok::Eq, "'='");
            c.value = term();
            if (!c.value.is_ground()) { throw SyntaxError(d.line, d.column, "#const value must be ground"); }
            expect(Tok::Dot, "'.' after #const");
            return c;
        }
        if (d.text == "script") {
            // cur_ holds '('; the lexer sits right behind it. The body is raw
            // text, so the remaining tokens are pulled from the lexer directly.
            if (cur_.kind != Tok::LParen) { fail("expected '(' after #script"); }
            Script s;
            Token lang = lex_.next();
            if (lang.kind != Tok::Ident) { throw SyntaxError(lang.line, lang.column, "expected script language"); }
            s.language = lang.text;
            Token rp   = lex_.next();
            if (rp.kind != Tok::RParen) { throw SyntaxError(rp.line, rp.column, "expected ')' after script language"); }
            s.text = lex_.script_body().text;
            shift();
            return s;
        }
        if (d.text == "maximize" || d.text == "maximise") {
            throw SyntaxError(d.line, d.column, "#maximize is not supported; negate weights and use #minimize");
        }
        if (d.text == "count" || d.text == "sum" || d.text == "min" || d.text == "max") {
            throw SyntaxError(d.line, d.column, "aggregates are not supported");
        }
        throw SyntaxError(d.line, d.column, "unknown directive #" + d.text);
    }

    Statement weak_constraint() {
        shift();
        MinimizeElement elem;
        if (cur_.kind != Tok::Dot) { elem.condition = literals(); }
        expect(Tok::Dot, "'.' after weak constraint body");
        expect(Tok::LBracket, "'[' starting weak constraint weight");
        weight_spec(elem);
        expect(Tok::RBracket, "']'");
        Minimize min;
        min.elements.push_back(std::move(elem));
        return min;
    }

    void weight_spec(MinimizeElement& elem) {
        elem.weight   = term();
        elem.priority = accept(Tok::At) ? term() : Term::make_integer(0);
        while (accept(Tok::Comma)) { elem.terms.push_back(term()); }
    }

    MinimizeElement minimize_element() {
        MinimizeElement elem;
        weight_spec(elem);
        if (accept(Tok::Colon)) { elem.condition = condition_literals(); }
        return elem;
    }

    std::variant<std::monostate, Atom, ChoiceHead> head() {
        Token start = cur_;
        if (cur_.kind == Tok::LBrace) { return choice(std::nullopt); }
        if (cur_.kind == Tok::Minus && is_classical_negation()) {
            throw SyntaxError(start.line, start.column, "classical negation is not supported");
        }
        Term t = term();
        if (cur_.kind == Tok::LBrace) { return choice(std::move(t)); }
        Atom a = atom_of(std::move(t), start);
        if (cur_.kind == Tok::Semi || cur_.kind == Tok::Bar) {
            fail("disjunctive heads are not supported");
        }
        if (cur_.kind == Tok::Colon) { fail("conditional literals in rule heads are not supported"); }
        return a;
    }

    ChoiceHead choice(std::optional<Term> lower) {
        ChoiceHead ch;
        ch.lower = std::move(lower);
        expect(Tok::LBrace, "'{'");
        if (cur_.kind != Tok::RBrace) {
            do {
                ChoiceElement elem;
                Token         at = cur_;
                elem.atom        = atom_of(term(), at);
                if (accept(Tok::Colon)) { elem.condition = condition_literals(); }
                ch.elements.push_back(std::move(elem));
            } while (accept(Tok::Semi));
        }
        expect(Tok::RBrace, "'}'");
        if (cur_.kind != Tok::If && cur_.kind != Tok::Dot) { ch.upper = term(); }
        return ch;
    }

    // Condition lists inside braces are comma separated and end at ';' or '}'.
    std::vector<Literal> condition_literals() {
        std::vector<Literal> out;
        do { out.push_back(literal()); } while (accept(Tok::Comma));
        return out;
    }

    std::vector<Literal> literals() {
        std::vector<Literal> out;
        do {
            out.push_back(literal());
        } while (accept(Tok::Comma) || accept(Tok::Semi));
        return out;
    }

    bool is_classical_negation() {
        // `-p(...)` or `-p` where p is an identifier; arithmetic like `-X` or `-1` is fine.
        Lexer probe = lex_;
        Token next  = probe.next();
        return next.kind == Tok::Ident;
    }

    static bool is_relop(Tok k) {
        return k == Tok::Eq || k == Tok::Ne || k == Tok::Lt || k == Tok::Le || k == Tok::Gt || k == Tok::Ge;
    }

    static Relop relop_of(Tok k) {
        switch (k) {
            case Tok::Eq: return Relop::Eq;
            case Tok::Ne: return Relop::Ne;
            case Tok::Lt: return Relop::Lt;
            case Tok::Le: return Relop::Le;
            case Tok::Gt: return Relop::Gt;
            default: return Relop::Ge;
        }
    }

    Literal literal() {
        Token start   = cur_;
        bool  negated = false;
        if (cur_.kind == Tok::Ident && cur_.text == "not") {
            shift();
            negated = true;
            if (cur_.kind == Tok::Ident && cur_.text == "not") { fail("double negation is not supported"); }
        }
        if (cur_.kind == Tok::LBrace || (cur_.kind == Tok::Directive)) {
            fail("body aggregates are not supported");
        }
        if (cur_.kind == Tok::Minus && is_classical_negation_literal()) {
            fail("classical negation is not supported");
        }
        Term lhs = term();
        if (cur_.kind == Tok::LBrace) { fail("body aggregates are not supported"); }
        if (is_relop(cur_.kind)) {
            Relop op = relop_of(cur_.kind);
            shift();
            Term rhs = term();
            if (cur_.kind == Tok::LBrace) { fail("body aggregates are not supported"); }
            return Comparison{std::move(lhs), negated ? negate(op) : op, std::move(rhs)};
        }
        return AtomLiteral{negated, atom_of(std::move(lhs), start)};
    }

    bool is_classical_negation_literal() {
        // Distinguish `-a` (classical negation) from `-a < b`-style arithmetic by
        // scanning past the term for a relation symbol.
        Lexer probe = lex_;
        Token next  = probe.next();
        if (next.kind != Tok::Ident) { return false; }
        int depth = 0;
        for (Token t = probe.next();; t = probe.next()) {
            if (t.kind == Tok::LParen) {
                ++depth;
            } else if (t.kind == Tok::RParen) {
                --depth;
            } else if (depth == 0) {
                return !is_relop(t.kind) && t.kind != Tok::Plus && t.kind != Tok::Minus && t.kind != Tok::Star &&
                       t.kind != Tok::Slash && t.kind != Tok::DotDot;
            }
            if (t.kind == Tok::End) { return true; }
        }
    }

    Atom atom_of(Term t, const Token& at) {
        switch (t.kind) {
            case Term::Kind::Symbol:
                if (t.quoted) { break; }
                return Atom{std::move(t.name), {}};
            case Term::Kind::Function: return Atom{std::move(t.name), std::move(t.args)};
            case Term::Kind::BinOp:
                if (t.op == '-' && t.args[0] == Term::make_integer(0) &&
                    (t.args[1].kind == Term::Kind::Symbol || t.args[1].kind == Term::Kind::Function)) {
                    throw SyntaxError(at.line, at.column, "classical negation is not supported");
                }
                break;
            default: break;
        }
        throw SyntaxError(at.line, at.column, "expected an atom");
    }

    Term term() {
        Depth guard(*this);
        Term lo = additive();
        if (accept(Tok::DotDot)) { return Term::make_interval(std::move(lo), additive()); }
        return lo;
    }

    Term additive() {
        Term t = multiplicative();
        while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
            char op = cur_.kind == Tok::Plus ? '+' : '-';
            shift();
            t = Term::make_binop(op, std::move(t), multiplicative());
        }
        return t;
    }

    Term multiplicative() {
        Term t = unary();
        while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
            char op = cur_.kind == Tok::Star ? '*' : '/';
            shift();
            t = Term::make_binop(op, std::move(t), unary());
        }
        return t;
    }

    Term unary() {
        Depth guard(*this);
        if (accept(Tok::Minus)) {
            if (cur_.kind == Tok::Number) {
                Token n = cur_;
                shift();
                if (n.number == 0) { return Term::make_integer(0); }
                return Term::make_integer(-n.number);
            }
            return Term::make_binop('-', Term::make_integer(0), unary());
        }
        return primary();
    }

    Term primary() {
        Token t = cur_;
        switch (t.kind) {
            case Tok::Number: shift(); return Term::make_integer(t.number);
            case Tok::String: shift(); return Term::make_symbol(t.text, true);
            case Tok::Variable: shift(); return Term::make_variable(t.text);
            case Tok::Ident: {
                if (t.text == "not") { fail("unexpected 'not'"); }
                shift();
                std::string name = t.text;
                if (accept(Tok::LParen)) {
                    std::vector<Term> args;
                    if (cur_.kind != Tok::RParen) {
                        do { args.push_back(term()); } while (accept(Tok::Comma));
                    }
                    expect(Tok::RParen, "')'");
                    if (args.empty()) { return Term::make_symbol(std::move(name)); }
                    return Term::make_function(std::move(name), std::move(args));
                }
                return Term::make_symbol(std::move(name));
            }
            case Tok::LParen: {
                shift();
                Term inner = term();
                if (cur_.kind == Tok::Comma) { fail("tuples are not supported"); }
                expect(Tok::RParen, "')'");
                return inner;
            }
            default: break;
        }
        if (t.kind == Tok::End) { fail("unexpected end of input"); }
        fail("unexpected '" + t.text + "'");
    }

    struct Depth {
        explicit Depth(Parser& p) : parser(p) {
            if (++parser.depth_ > max_depth) { parser.fail("nesting too deep"); }
        }
        ~Depth() { --parser.depth_; }
        Depth(const Depth&)            = delete;
        Depth& operator=(const Depth&) = delete;
        Parser& parser;
    };

    Lexer lex_;
    Token cur_;
    int   depth_{0};
};

} // namespace
// }}}

// {{{ Substitution

Term substitute(const Term& term, const std::map<std::string, Term>& subst) {
    if (term.kind == Term::Kind::Symbol && !term.quoted) {
        if (auto it = subst.find(term.name); it != subst.end()) { return it->second; }
        return term;
    }
    if (term.args.empty()) { return term; }
    Term out = term;
    for (auto& a : out.args) { a = substitute(a, subst); }
    return out;
}

namespace {

Atom substitute(const Atom& atom, const std::map<std::string, Term>& subst) {
    Atom out = atom;
    for (auto& a : out.args) { a = substitute(a, subst); }
    return out;
}

std::vector<Literal> substitute(const std::vector<Literal>& lits, const std::map<std::string, Term>& subst) {
    std::vector<Literal> out;
    out.reserve(lits.size());
    for (const auto& lit : lits) {
        if (const auto* a = std::get_if<AtomLiteral>(&lit)) {
            out.emplace_back(AtomLiteral{a->negated, substitute(a->atom, subst)});
        } else {
            const auto& c = std::get<Comparison>(lit);
            out.emplace_back(Comparison{substitute(c.lhs, subst), c.op, substitute(c.rhs, subst)});
        }
    }
    return out;
}

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

} // namespace

Statement substitute(const Statement& stmt, const std::map<std::string, Term>& subst) {
    return std::visit(
        Overloaded{
            [&](const Rule& r) -> Statement {
                Rule out;
                out.body = substitute(r.body, subst);
                if (const auto* a = std::get_if<Atom>(&r.head)) {
                    out.head = substitute(*a, subst);
                } else if (const auto* ch = std::get_if<ChoiceHead>(&r.head)) {
                    ChoiceHead c;
                    if (ch->lower) { c.lower = substitute(*ch->lower, subst); }
                    if (ch->upper) { c.upper = substitute(*ch->upper, subst); }
                    for (const auto& e : ch->elements) {
                        c.elements.push_back(ChoiceElement{substitute(e.atom, subst), substitute(e.condition, subst)});
                    }
                    out.head = std::move(c);
                }
                return out;
            },
            [&](const External& e) -> Statement { return External{substitute(e.atom, subst), substitute(e.condition, subst)}; },
            [&](const Minimize& m) -> Statement {
                Minimize out;
                for (const auto& e : m.elements) {
                    MinimizeElement x;
                    x.weight   = substitute(e.weight, subst);
                    x.priority = substitute(e.priority, subst);
                    for (const auto& t : e.terms) { x.terms.push_back(substitute(t, subst)); }
                    x.condition = substitute(e.condition, subst);
                    out.elements.push_back(std::move(x));
                }
                return out;
            },
            [&](const Const& c) -> Statement { return Const{c.name, substitute(c.value, subst)}; },
            [&](const auto& other) -> Statement { return other; },
        },
        stmt);
}

// }}}
// {{{ Printing

namespace {

void print_term(std::ostream& out, const Term& t, bool nested) {
    switch (t.kind) {
        case Term::Kind::Integer: out << t.integer; break;
        case Term::Kind::Symbol:
            if (t.quoted) {
                out << Value::string(t.name);
            } else {
                out << t.name;
            }
            break;
        case Term::Kind::Variable: out << t.name; break;
        case Term::Kind::Function:
            out << t.name << '(';
            for (std::size_t i = 0; i < t.args.size(); ++i) {
                if (i > 0) { out << ','; }
                print_term(out, t.args[i], false);
            }
            out << ')';
            break;
        case Term::Kind::BinOp:
            out << '(';
            print_term(out, t.args[0], true);
            out << t.op;
            print_term(out, t.args[1], true);
            out << ')';
            break;
        case Term::Kind::Interval:
            if (nested) { out << '('; }
            print_term(out, t.args[0], true);
            out << "..";
            print_term(out, t.args[1], true);
            if (nested) { out << ')'; }
            break;
    }
}

void print_atom(std::ostream& out, const Atom& a) {
    out << a.name;
    if (!a.args.empty()) {
        out << '(';
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (i > 0) { out << ','; }
            print_term(out, a.args[i], false);
        }
        out << ')';
    }
}

void print_literal(std::ostream& out, const Literal& lit) {
    if (const auto* a = std::get_if<AtomLiteral>(&lit)) {
        if (a->negated) { out << "not "; }
        print_atom(out, a->atom);
    } else {
        const auto& c = std::get<Comparison>(lit);
        print_term(out, c.lhs, false);
        out << to_string(c.op);
        print_term(out, c.rhs, false);
    }
}

void print_literals(std::ostream& out, const std::vector<Literal>& lits) {
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (i > 0) { out << ", "; }
        print_literal(out, lits[i]);
    }
}

void print_statement(std::ostream& out, const Statement& stmt) {
    std::visit(Overloaded{
                   [&](const Rule& r) {
                       if (const auto* a = std::get_if<Atom>(&r.head)) {
                           print_atom(out, *a);
                       } else if (const auto* ch = std::get_if<ChoiceHead>(&r.head)) {
                           if (ch->lower) {
                               print_term(out, *ch->lower, false);
                               out << ' ';
                           }
                           out << '{';
                           for (std::size_t i = 0; i < ch->elements.size(); ++i) {
                               if (i > 0) { out << "; "; }
                               print_atom(out, ch->elements[i].atom);
                               if (!ch->elements[i].condition.empty()) {
                                   out << " : ";
                                   print_literals(out, ch->elements[i].condition);
                               }
                           }
                           out << '}';
                           if (ch->upper) {
                               out << ' ';
                               print_term(out, *ch->upper, false);
                           }
                       }
                       if (!r.body.empty() || std::holds_alternative<std::monostate>(r.head)) {
                           out << (std::holds_alternative<std::monostate>(r.head) ? ":- " : " :- ");
                           print_literals(out, r.body);
                       }
                       out << '.';
                   },
                   [&](const External& e) {
                       out << "#external ";
                       print_atom(out, e.atom);
                       if (!e.condition.empty()) {
                           out << " : ";
                           print_literals(out, e.condition);
                       }
                       out << '.';
                   },
                   [&](const Minimize& m) {
                       out << "#minimize{";
                       for (std::size_t i = 0; i < m.elements.size(); ++i) {
                           const auto& e = m.elements[i];
                           if (i > 0) { out << "; "; }
                           print_term(out, e.weight, false);
                           out << '@';
                           print_term(out, e.priority, false);
                           for (const auto& t : e.terms) {
                               out << ',';
                               print_term(out, t, false);
                           }
                           if (!e.condition.empty()) {
                               out << " : ";
                               print_literals(out, e.condition);
                           }
                       }
                       out << "}.";
                   },
                   [&](const Show& s) { out << "#show " << s.sig.to_string() << '.'; },
                   [&](const Const& c) {
                       out << "#const " << c.name << '=';
                       print_term(out, c.value, false);
                       out << '.';
                   },
                   [&](const Script& s) { out << "#script(" << s.language << ")" << s.text << "#end."; },
               },
               stmt);
}

} // namespace

std::string to_string(const Term& term) {
    std::ostringstream out;
    print_term(out, term, false);
    return out.str();
}

std::string to_string(const Atom& atom) {
    std::ostringstream out;
    print_atom(out, atom);
    return out.str();
}

std::string to_string(const Literal& lit) {
    std::ostringstream out;
    print_literal(out, lit);
    return out.str();
}

std::string to_string(const Statement& stmt) {
    std::ostringstream out;
    print_statement(out, stmt);
    return out.str();
}

std::string to_string(const std::vector<SubprogramDef>& program) {
    std::ostringstream out;
    for (const auto& def : program) {
        out << "#program " << def.name;
        if (!def.params.empty()) {
            out << '(';
            for (std::size_t i = 0; i < def.params.size(); ++i) {
                if (i > 0) { out << ','; }
                out << def.params[i];
            }
            out << ')';
        }
        out << ".\n";
        for (const auto& stmt : def.statements) {
            print_statement(out, stmt);
            out << '\n';
        }
    }
    return out.str();
}

// }}}
// {{{ Safety

namespace {

// Collects variables in source order. `binding` restricts to positions that
// bind by matching (outside arithmetic and intervals).
void collect_vars(const Term& t, std::vector<std::string>& out, bool binding) {
    switch (t.kind) {
        case Term::Kind::Variable: out.push_back(t.name); break;
        case Term::Kind::Function:
            for (const auto& a : t.args) { collect_vars(a, out, binding); }
            break;
        case Term::Kind::BinOp:
        case Term::Kind::Interval:
            if (!binding) {
                for (const auto& a : t.args) { collect_vars(a, out, binding); }
            }
            break;
        default: break;
    }
}

void collect_vars(const Atom& a, std::vector<std::string>& out, bool binding) {
    for (const auto& t : a.args) { collect_vars(t, out, binding); }
}

void collect_vars(const Literal& lit, std::vector<std::string>& out) {
    if (const auto* a = std::get_if<AtomLiteral>(&lit)) {
        collect_vars(a->atom, out, false);
    } else {
        const auto& c = std::get<Comparison>(lit);
        collect_vars(c.lhs, out, false);
        collect_vars(c.rhs, out, false);
    }
}

bool all_bound(const Term& t, const std::set<std::string>& bound) {
    std::vector<std::string> vars;
    collect_vars(t, vars, false);
    return std::all_of(vars.begin(), vars.end(), [&](const std::string& v) { return bound.count(v) > 0; });
}

// Closes `bound` under the positive literals and assignments of `lits`.
void bind_vars(const std::vector<Literal>& lits, std::set<std::string>& bound) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& lit : lits) {
            std::vector<std::string> vars;
            if (const auto* a = std::get_if<AtomLiteral>(&lit)) {
                if (a->negated) { continue; }
                collect_vars(a->atom, vars, true);
            } else {
                const auto& c = std::get<Comparison>(lit);
                if (c.op != Relop::Eq) { continue; }
                if (c.lhs.kind == Term::Kind::Variable && all_bound(c.rhs, bound)) { vars.push_back(c.lhs.name); }
                if (c.rhs.kind == Term::Kind::Variable && all_bound(c.lhs, bound)) { vars.push_back(c.rhs.name); }
            }
            for (auto& v : vars) { changed = bound.insert(std::move(v)).second || changed; }
        }
    }
}

[[noreturn]] void unsafe(const std::string& var, const std::string& where) {
    throw Error(ErrorCode::UnsafeVariable, var + " in " + where);
}

Literal rename_anonymous(const Literal& lit, int& counter);

Term rename_anonymous(const Term& t, int& counter) {
    if (t.is_anonymous()) { return Term::make_variable("_#" + std::to_string(counter++)); }
    if (t.args.empty()) { return t; }
    Term out = t;
    for (auto& a : out.args) { a = rename_anonymous(a, counter); }
    return out;
}

Atom rename_anonymous(const Atom& a, int& counter) {
    Atom out = a;
    for (auto& t : out.args) { t = rename_anonymous(t, counter); }
    return out;
}

Literal rename_anonymous(const Literal& lit, int& counter) {
    if (const auto* a = std::get_if<AtomLiteral>(&lit)) { return AtomLiteral{a->negated, rename_anonymous(a->atom, counter)}; }
    const auto& c = std::get<Comparison>(lit);
    return Comparison{rename_anonymous(c.lhs, counter), c.op, rename_anonymous(c.rhs, counter)};
}

std::vector<Literal> rename_anonymous(const std::vector<Literal>& lits, int& counter) {
    std::vector<Literal> out;
    for (const auto& l : lits) { out.push_back(rename_anonymous(l, counter)); }
    return out;
}

std::string display_name(const std::string& var) { return var.rfind("_#", 0) == 0 ? "_" : var; }

} // namespace

Statement make_anonymous_unique(const Statement& stmt) {
    int counter = 0;
    return std::visit(Overloaded{
                          [&](const Rule& r) -> Statement {
                              Rule out;
                              if (const auto* a = std::get_if<Atom>(&r.head)) {
                                  out.head = rename_anonymous(*a, counter);
                              } else if (const auto* ch = std::get_if<ChoiceHead>(&r.head)) {
                                  ChoiceHead c = *ch;
                                  for (auto& e : c.elements) {
                                      e.atom      = rename_anonymous(e.atom, counter);
                                      e.condition = rename_anonymous(e.condition, counter);
                                  }
                                  out.head = std::move(c);
                              }
                              out.body = rename_anonymous(r.body, counter);
                              return out;
                          },
                          [&](const External& e) -> Statement {
                              return External{rename_anonymous(e.atom, counter), rename_anonymous(e.condition, counter)};
                          },
                          [&](const Minimize& m) -> Statement {
                              Minimize out = m;
                              for (auto& e : out.elements) { e.condition = rename_anonymous(e.condition, counter); }
                              return out;
                          },
                          [&](const auto& other) -> Statement { return other; },
                      },
                      stmt);
}

void check_safety(const Rule& input) {
    Rule rule = std::get<Rule>(make_anonymous_unique(input));
    std::string where = to_string(Statement{input});

    std::set<std::string> bound;
    bind_vars(rule.body, bound);

    // Source order: head (bounds, elements), then body.
    std::vector<std::pair<std::string, const std::set<std::string>*>> occurrences;
    std::vector<std::set<std::string>> element_bound;
    std::vector<std::string> vars;
    if (const auto* a = std::get_if<Atom>(&rule.head)) {
        collect_vars(*a, vars, false);
        for (auto& v : vars) { occurrences.emplace_back(v, &bound); }
    } else if (const auto* ch = std::get_if<ChoiceHead>(&rule.head)) {
        element_bound.reserve(ch->elements.size());
        if (ch->lower) {
            vars.clear();
            collect_vars(*ch->lower, vars, false);
            for (auto& v : vars) { occurrences.emplace_back(v, &bound); }
        }
        for (const auto& e : ch->elements) {
            auto& local = element_bound.emplace_back(bound);
            bind_vars(e.condition, local);
            vars.clear();
            collect_vars(e.atom, vars, false);
            for (const auto& l : e.condition) { collect_vars(l, vars); }
            for (auto& v : vars) { occurrences.emplace_back(v, &local); }
        }
        if (ch->upper) {
            vars.clear();
            collect_vars(*ch->upper, vars, false);
            for (auto& v : vars) { occurrences.emplace_back(v, &bound); }
        }
    }
    for (const auto& l : rule.body) {
        vars.clear();
        collect_vars(l, vars);
        for (auto& v : vars) { occurrences.emplace_back(v, &bound); }
    }
    for (const auto& [var, scope] : occurrences) {
        if (scope->count(var) == 0) { unsafe(display_name(var), where); }
    }
}

void check_safety(const Statement& stmt) {
    std::visit(Overloaded{
                   [](const Rule& r) { check_safety(r); },
                   [&](const External& input) {
                       auto e = std::get<External>(make_anonymous_unique(stmt));
                       std::set<std::string> bound;
                       bind_vars(e.condition, bound);
                       std::vector<std::string> vars;
                       collect_vars(e.atom, vars, false);
                       for (const auto& l : e.condition) { collect_vars(l, vars); }
                       for (const auto& v : vars) {
                           if (bound.count(v) == 0) { unsafe(display_name(v), to_string(Statement{input})); }
                       }
                   },
                   [&](const Minimize& input) {
                       auto m = std::get<Minimize>(make_anonymous_unique(stmt));
                       for (const auto& e : m.elements) {
                           std::set<std::string> bound;
                           bind_vars(e.condition, bound);
                           std::vector<std::string> vars;
                           collect_vars(e.weight, vars, false);
                           collect_vars(e.priority, vars, false);
                           for (const auto& t : e.terms) { collect_vars(t, vars, false); }
                           for (const auto& l : e.condition) { collect_vars(l, vars); }
                           for (const auto& v : vars) {
                               if (bound.count(v) == 0) { unsafe(display_name(v), to_string(Statement{input})); }
                           }
                       }
                   },
                   [](const auto&) {},
               },
               stmt);
}

// }}}
// {{{ Entry points

std::vector<SubprogramDef> parse_program(std::string_view text) {
    Parser parser(text);
    return parser.program();
}

Term parse_term(std::string_view text) {
    Parser parser(text);
    Term t = parser.ground_term();
    if (!t.is_ground()) { throw Error(ErrorCode::NonGroundTerm, std::string(text)); }
    return t;
}

// }}}

} // namespace mshot
