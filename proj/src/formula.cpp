#include "aware/formula.hpp"

#include <cctype>
#include <utility>

#include "aware/errors.hpp"

namespace aware {

namespace {

Formula mk(Node n) {
    return Formula(std::make_shared<const Node>(std::move(n)));
}

void require_valid(const Formula& f, const char* who) {
    if (!f.valid()) throw EvalError(std::string(who) + ": empty formula handle");
}

} // namespace

// --- constructors -----------------------------------------------------------

Formula f_atom(Proposition p) {
    Node n;
    n.kind = NodeKind::Atom;
    n.atom = std::move(p);
    return mk(std::move(n));
}

Formula f_atom(const std::string& name, PropKind kind) {
    return f_atom(Proposition{name, kind});
}

Formula f_var(const std::string& name) {
    Node n;
    n.kind = NodeKind::Var;
    n.var = name;
    return mk(std::move(n));
}

Formula f_not(Formula a) {
    require_valid(a, "f_not");
    Node n;
    n.kind = NodeKind::Not;
    n.kids = {std::move(a)};
    return mk(std::move(n));
}

Formula f_and(Formula a, Formula b) {
    require_valid(a, "f_and");
    require_valid(b, "f_and");
    Node n;
    n.kind = NodeKind::And;
    n.kids = {std::move(a), std::move(b)};
    return mk(std::move(n));
}

Formula f_or(Formula a, Formula b) {
    return f_not(f_and(f_not(a), f_not(b)));
}

Formula f_implies(Formula a, Formula b) {
    return f_not(f_and(a, f_not(b)));
}

Formula f_iff(Formula a, Formula b) {
    return f_and(f_implies(a, b), f_implies(b, a));
}

Formula f_aware(const std::string& agent, Formula a) {
    require_valid(a, "f_aware");
    Node n;
    n.kind = NodeKind::Aware;
    n.agent = agent;
    n.kids = {std::move(a)};
    return mk(std::move(n));
}

Formula f_xk(const std::string& agent, Formula a) {
    require_valid(a, "f_xk");
    Node n;
    n.kind = NodeKind::ExplicitK;
    n.agent = agent;
    n.kids = {std::move(a)};
    return mk(std::move(n));
}

Formula f_ik(const std::string& agent, Formula a) {
    require_valid(a, "f_ik");
    Node n;
    n.kind = NodeKind::ImplicitK;
    n.agent = agent;
    n.kids = {std::move(a)};
    return mk(std::move(n));
}

Formula f_likelihood(const std::string& agent,
                     std::vector<std::pair<Rational, Formula>> terms,
                     Rel rel, Rational bound) {
    if (terms.empty()) throw EvalError("likelihood formula needs at least one term");
    Node n;
    n.kind = NodeKind::Likelihood;
    n.agent = agent;
    for (auto& [c, f] : terms) {
        require_valid(f, "f_likelihood");
        if (!is_quantifier_free(f)) {
            throw EvalError("quantifier inside a likelihood argument");
        }
        n.coeffs.push_back(std::move(c));
        n.kids.push_back(std::move(f));
    }
    n.rel = rel;
    n.bound = std::move(bound);
    return mk(std::move(n));
}

Formula f_forall(const std::string& var, Formula body) {
    require_valid(body, "f_forall");
    Node n;
    n.kind = NodeKind::ForAll;
    n.var = var;
    n.kids = {std::move(body)};
    return mk(std::move(n));
}

Formula f_exists(const std::string& var, Formula body) {
    return f_not(f_forall(var, f_not(body)));
}

static void require_trigger(const Formula& trigger, const char* who) {
    require_valid(trigger, who);
    if (contains_dynamic_or_consis(trigger)) {
        throw EvalError(std::string(who) + ": trigger may not contain model-changing operators");
    }
    if (!free_vars(trigger).empty()) {
        throw EvalError(std::string(who) + ": trigger may not contain free variables");
    }
}

Formula f_dynamic(Formula trigger, const std::string& agent, Formula body) {
    require_trigger(trigger, "f_dynamic");
    require_valid(body, "f_dynamic");
    Node n;
    n.kind = NodeKind::Dynamic;
    n.agent = agent;
    n.kids = {std::move(trigger), std::move(body)};
    return mk(std::move(n));
}

Formula f_consis(Formula trigger, const std::string& agent) {
    require_trigger(trigger, "f_consis");
    Node n;
    n.kind = NodeKind::Consis;
    n.agent = agent;
    n.kids = {std::move(trigger)};
    return mk(std::move(n));
}

// --- equality ---------------------------------------------------------------

bool Formula::operator==(const Formula& o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    const Node& a = *node_;
    const Node& b = *o.node_;
    if (a.kind != b.kind || a.atom != b.atom || a.var != b.var || a.agent != b.agent ||
        a.coeffs != b.coeffs || a.rel != b.rel || a.bound != b.bound ||
        a.kids.size() != b.kids.size()) {
        return false;
    }
    for (size_t k = 0; k < a.kids.size(); ++k) {
        if (!(a.kids[k] == b.kids[k])) return false;
    }
    return true;
}

// --- structural operations --------------------------------------------------

namespace {

void collect_props(const Formula& f, std::set<std::string>& out) {
    const Node& n = f.node();
    if (n.kind == NodeKind::Atom) out.insert(n.atom.name);
    for (const Formula& k : n.kids) collect_props(k, out);
}

void collect_lang_props(const Formula& f, std::set<std::string>& out) {
    const Node& n = f.node();
    switch (n.kind) {
    case NodeKind::Atom:
        out.insert(n.atom.name);
        return;
    case NodeKind::Var:
    case NodeKind::Consis:
        return; // consistency talk does not put its subject into the language
    default:
        for (const Formula& k : n.kids) collect_lang_props(k, out);
        return;
    }
}

void collect_free_vars(const Formula& f, std::set<std::string>& bound,
                       std::set<std::string>& out) {
    const Node& n = f.node();
    if (n.kind == NodeKind::Var) {
        if (!bound.count(n.var)) out.insert(n.var);
        return;
    }
    if (n.kind == NodeKind::ForAll) {
        bool fresh = bound.insert(n.var).second;
        collect_free_vars(n.kids[0], bound, out);
        if (fresh) bound.erase(n.var);
        return;
    }
    for (const Formula& k : n.kids) collect_free_vars(k, bound, out);
}

} // namespace

std::set<std::string> props(const Formula& f) {
    std::set<std::string> out;
    collect_props(f, out);
    return out;
}

std::set<std::string> lang_props(const Formula& f) {
    std::set<std::string> out;
    collect_lang_props(f, out);
    return out;
}

std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> bound, out;
    collect_free_vars(f, bound, out);
    return out;
}

bool is_sentence(const Formula& f) { return free_vars(f).empty(); }

bool is_quantifier_free(const Formula& f) {
    const Node& n = f.node();
    if (n.kind == NodeKind::ForAll) return false;
    for (const Formula& k : n.kids) {
        if (!is_quantifier_free(k)) return false;
    }
    return true;
}

bool contains_dynamic_or_consis(const Formula& f) {
    const Node& n = f.node();
    if (n.kind == NodeKind::Dynamic || n.kind == NodeKind::Consis) return true;
    for (const Formula& k : n.kids) {
        if (contains_dynamic_or_consis(k)) return true;
    }
    return false;
}

bool contains_likelihood(const Formula& f) {
    const Node& n = f.node();
    if (n.kind == NodeKind::Likelihood) return true;
    for (const Formula& k : n.kids) {
        if (contains_likelihood(k)) return true;
    }
    return false;
}

namespace {

Formula substitute_rec(const Formula& f, const std::string& var, const Formula& repl) {
    const Node& n = f.node();
    if (n.kind == NodeKind::Var) {
        return n.var == var ? repl : f;
    }
    if (n.kind == NodeKind::ForAll && n.var == var) {
        return f; // shadowed
    }
    bool changed = false;
    Node copy = n;
    for (size_t k = 0; k < n.kids.size(); ++k) {
        Formula sub = substitute_rec(n.kids[k], var, repl);
        if (!(sub == n.kids[k])) changed = true;
        copy.kids[k] = std::move(sub);
    }
    if (!changed) return f;
    return mk(std::move(copy));
}

} // namespace

Formula substitute(const Formula& f, const std::string& var, const Formula& replacement) {
    require_valid(f, "substitute");
    require_valid(replacement, "substitute");
    if (!is_quantifier_free(replacement) || !is_sentence(replacement)) {
        throw EvalError("substitute: replacement must be a quantifier-free sentence");
    }
    return substitute_rec(f, var, replacement);
}

// --- renderer ---------------------------------------------------------------

namespace {

std::string rel_text(Rel r) {
    switch (r) {
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
    }
    return "?";
}

std::string render_top(const Formula& f);

// A rendering that can stand where the grammar expects a single unary item.
std::string render_operand(const Formula& f) {
    switch (f.node().kind) {
    case NodeKind::Atom:
    case NodeKind::Var:
    case NodeKind::Not:
    case NodeKind::Aware:
    case NodeKind::ExplicitK:
    case NodeKind::ImplicitK:
    case NodeKind::Consis:
    case NodeKind::Dynamic:
        return render_top(f);
    default:
        return "(" + render_top(f) + ")";
    }
}

std::string render_top(const Formula& f) {
    const Node& n = f.node();
    switch (n.kind) {
    case NodeKind::Atom:
        return n.atom.name;
    case NodeKind::Var:
        return n.var;
    case NodeKind::Not:
        return "~" + render_operand(n.kids[0]);
    case NodeKind::And: {
        // left child may itself be a bare chain; the grammar folds left
        std::string lhs = n.kids[0].node().kind == NodeKind::And
                              ? render_top(n.kids[0])
                              : render_operand(n.kids[0]);
        return lhs + " & " + render_operand(n.kids[1]);
    }
    case NodeKind::Aware:
        return "A[" + n.agent + "] " + render_operand(n.kids[0]);
    case NodeKind::ExplicitK:
        return "X[" + n.agent + "] " + render_operand(n.kids[0]);
    case NodeKind::ImplicitK:
        return "K[" + n.agent + "] " + render_operand(n.kids[0]);
    case NodeKind::Likelihood: {
        std::string out;
        for (size_t k = 0; k < n.kids.size(); ++k) {
            Rational c = n.coeffs[k];
            if (k == 0) {
                out += format_rational(c);
            } else if (c < 0) {
                out += " - " + format_rational(-c);
                c = -c;
            } else {
                out += " + " + format_rational(c);
            }
            out += "*l[" + n.agent + "](" + render_top(n.kids[k]) + ")";
        }
        out += " " + rel_text(n.rel) + " " + format_rational(n.bound);
        return out;
    }
    case NodeKind::ForAll:
        return "forall " + n.var + ". " + render_top(n.kids[0]);
    case NodeKind::Dynamic:
        return "[" + render_top(n.kids[0]) + ", " + n.agent + "] " + render_operand(n.kids[1]);
    case NodeKind::Consis:
        return "Consis(" + render_top(n.kids[0]) + ", " + n.agent + ")";
    }
    return "?";
}

} // namespace

std::string render(const Formula& f) {
    require_valid(f, "render");
    return render_top(f);
}

// --- parser -----------------------------------------------------------------

namespace {

enum class Tok {
    Ident, Int,
    Not, AndOp, OrOp, Implies, Iff,
    LParen, RParen, LBracket, RBracket,
    Comma, Dot, Star, Plus, Minus, Slash,
    Gt, Ge, Lt, Le, Eq,
    End
};

struct Token {
    Tok kind;
    std::string text;
    size_t pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    size_t i = 0;
    auto push = [&](Tok k, std::string t, size_t pos) { out.push_back({k, std::move(t), pos}); };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        size_t pos = i;
        if (ident_start(c)) {
            size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            push(Tok::Ident, text.substr(i, j - i), pos);
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            push(Tok::Int, text.substr(i, j - i), pos);
            i = j;
            continue;
        }
        auto two = text.substr(i, 2);
        auto three = text.substr(i, 3);
        if (three == "<->") { push(Tok::Iff, three, pos); i += 3; continue; }
        if (two == "->") { push(Tok::Implies, two, pos); i += 2; continue; }
        if (two == ">=") { push(Tok::Ge, two, pos); i += 2; continue; }
        if (two == "<=") { push(Tok::Le, two, pos); i += 2; continue; }
        switch (c) {
        case '~': push(Tok::Not, "~", pos); break;
        case '&': push(Tok::AndOp, "&", pos); break;
        case '|': push(Tok::OrOp, "|", pos); break;
        case '(': push(Tok::LParen, "(", pos); break;
        case ')': push(Tok::RParen, ")", pos); break;
        case '[': push(Tok::LBracket, "[", pos); break;
        case ']': push(Tok::RBracket, "]", pos); break;
        case ',': push(Tok::Comma, ",", pos); break;
        case '.': push(Tok::Dot, ".", pos); break;
        case '*': push(Tok::Star, "*", pos); break;
        case '+': push(Tok::Plus, "+", pos); break;
        case '-': push(Tok::Minus, "-", pos); break;
        case '/': push(Tok::Slash, "/", pos); break;
        case '>': push(Tok::Gt, ">", pos); break;
        case '<': push(Tok::Lt, "<", pos); break;
        case '=': push(Tok::Eq, "=", pos); break;
        default:
            throw ParseError("unexpected character '" + std::string(1, c) + "' at offset " +
                             std::to_string(pos));
        }
        ++i;
    }
    out.push_back({Tok::End, "", text.size()});
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> toks, const SymbolTable* symbols)
        : toks_(std::move(toks)), symbols_(symbols) {}

    Formula parse() {
        Formula f = parse_formula();
        expect(Tok::End, "end of input");
        return f;
    }

private:
    std::vector<Token> toks_;
    const SymbolTable* symbols_;
    size_t at_ = 0;
    std::vector<std::string> scope_;

    const Token& peek(size_t ahead = 0) const {
        size_t k = at_ + ahead;
        return k < toks_.size() ? toks_[k] : toks_.back();
    }
    const Token& take() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
    bool at(Tok k) const { return peek().kind == k; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expected " + what + " at offset " + std::to_string(peek().pos) +
                         (peek().kind == Tok::End ? " (end of input)"
                                                  : " (found '" + peek().text + "')"));
    }

    const Token& expect(Tok k, const std::string& what) {
        if (!at(k)) fail(what);
        return take();
    }

    std::string expect_agent() {
        const Token& t = expect(Tok::Ident, "agent name");
        if (symbols_ && !symbols_->agents.count(t.text)) {
            throw ParseError("unknown agent '" + t.text + "'");
        }
        return t.text;
    }

    Rational parse_rational_tokens() {
        bool neg = false;
        if (at(Tok::Minus)) {
            take();
            neg = true;
        }
        const Token& n = expect(Tok::Int, "number");
        Integer num(n.text);
        Integer den(1);
        if (at(Tok::Slash)) {
            take();
            const Token& d = expect(Tok::Int, "denominator");
            den = Integer(d.text);
            if (den == 0) throw ParseError("zero denominator at offset " + std::to_string(d.pos));
        }
        if (neg) num = -num;
        return Rational(num, den);
    }

    bool in_scope(const std::string& name) const {
        for (const auto& v : scope_) {
            if (v == name) return true;
        }
        return false;
    }

    Formula resolve_ident(const std::string& name) {
        if (in_scope(name)) return f_var(name);
        if (symbols_) {
            if (symbols_->real_props.count(name)) return f_atom(name, PropKind::Real);
            if (symbols_->shadow_props.count(name)) return f_atom(name, PropKind::Shadow);
            throw ParseError("unknown proposition '" + name + "'");
        }
        PropKind kind = !name.empty() && name.back() == '\'' ? PropKind::Shadow : PropKind::Real;
        return f_atom(name, kind);
    }

    Formula parse_formula() { return parse_iff(); }

    Formula parse_iff() {
        Formula f = parse_impl();
        while (at(Tok::Iff)) {
            take();
            f = f_iff(f, parse_impl());
        }
        return f;
    }

    Formula parse_impl() {
        Formula f = parse_or();
        if (at(Tok::Implies)) {
            take();
            return f_implies(f, parse_impl()); // right-associative
        }
        return f;
    }

    Formula parse_or() {
        Formula f = parse_and();
        while (at(Tok::OrOp)) {
            take();
            f = f_or(f, parse_and());
        }
        return f;
    }

    Formula parse_and() {
        Formula f = parse_unary();
        while (at(Tok::AndOp)) {
            take();
            f = f_and(f, parse_unary());
        }
        return f;
    }

    Formula parse_bracketed_op(const std::string& op) {
        take(); // op ident
        expect(Tok::LBracket, "'['");
        std::string agent = expect_agent();
        expect(Tok::RBracket, "']'");
        Formula body = parse_unary();
        if (op == "A") return f_aware(agent, body);
        if (op == "X") return f_xk(agent, body);
        return f_ik(agent, body);
    }

    Formula parse_quantifier(bool universal) {
        take(); // forall / exists
        const Token& v = expect(Tok::Ident, "variable name");
        std::string var = v.text;
        expect(Tok::Dot, "'.'");
        scope_.push_back(var);
        Formula body = parse_formula();
        scope_.pop_back();
        return universal ? f_forall(var, body) : f_exists(var, body);
    }

    Formula parse_dynamic() {
        take(); // '['
        Formula trigger = parse_formula();
        expect(Tok::Comma, "','");
        std::string agent = expect_agent();
        expect(Tok::RBracket, "']'");
        Formula body = parse_unary();
        return f_dynamic(trigger, agent, body);
    }

    Formula parse_consis() {
        take(); // Consis
        expect(Tok::LParen, "'('");
        Formula trigger = parse_formula();
        expect(Tok::Comma, "','");
        std::string agent = expect_agent();
        expect(Tok::RParen, "')'");
        return f_consis(trigger, agent);
    }

    Formula parse_likelihood() {
        std::vector<std::pair<Rational, Formula>> terms;
        std::string agent;
        Rational sign = 1;
        for (;;) {
            Rational coeff = sign * parse_rational_tokens();
            expect(Tok::Star, "'*'");
            const Token& l = expect(Tok::Ident, "'l'");
            if (l.text != "l") fail("'l'");
            expect(Tok::LBracket, "'['");
            std::string a = expect_agent();
            expect(Tok::RBracket, "']'");
            expect(Tok::LParen, "'('");
            Formula arg = parse_formula();
            expect(Tok::RParen, "')'");
            if (terms.empty()) {
                agent = a;
            } else if (a != agent) {
                throw ParseError("likelihood terms must share one agent");
            }
            terms.emplace_back(std::move(coeff), std::move(arg));
            if (at(Tok::Plus)) {
                take();
                sign = 1;
            } else if (at(Tok::Minus)) {
                take();
                sign = -1;
            } else {
                break;
            }
        }
        Rel rel;
        switch (peek().kind) {
        case Tok::Gt: rel = Rel::Gt; break;
        case Tok::Ge: rel = Rel::Ge; break;
        case Tok::Lt: rel = Rel::Lt; break;
        case Tok::Le: rel = Rel::Le; break;
        case Tok::Eq: rel = Rel::Eq; break;
        default: fail("comparison operator");
        }
        take();
        Rational bound = parse_rational_tokens();
        return f_likelihood(agent, std::move(terms), rel, std::move(bound));
    }

    Formula parse_unary() {
        switch (peek().kind) {
        case Tok::Not:
            take();
            return f_not(parse_unary());
        case Tok::LParen: {
            take();
            Formula f = parse_formula();
            expect(Tok::RParen, "')'");
            return f;
        }
        case Tok::LBracket:
            return parse_dynamic();
        case Tok::Int:
        case Tok::Minus:
            return parse_likelihood();
        case Tok::Ident: {
            const std::string& name = peek().text;
            bool bracketed = peek(1).kind == Tok::LBracket;
            if (bracketed && (name == "A" || name == "X" || name == "K")) {
                return parse_bracketed_op(name);
            }
            if (name == "forall") return parse_quantifier(true);
            if (name == "exists") return parse_quantifier(false);
            if (name == "Consis" && peek(1).kind == Tok::LParen) return parse_consis();
            take();
            return resolve_ident(name);
        }
        default:
            fail("a formula");
        }
    }
};

} // namespace

Formula parse_formula(const std::string& text, const SymbolTable* symbols) {
    return Parser(lex(text), symbols).parse();
}

} // namespace aware
