#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "aware/rational.hpp"

namespace aware {

// Whether a proposition describes the actual world (real) or is a stand-in
// the agent entertains without having conceived the real thing (shadow).
enum class PropKind { Real, Shadow };

struct Proposition {
    std::string name;
    PropKind kind = PropKind::Real;

    bool operator==(const Proposition& o) const { return name == o.name && kind == o.kind; }
    bool operator<(const Proposition& o) const {
        if (name != o.name) return name < o.name;
        return kind < o.kind;
    }
};

enum class NodeKind {
    Atom,       // proposition
    Var,        // quantified sentence variable
    Not,
    And,
    Aware,      // A[i] f : agent i is aware of every proposition in f
    ExplicitK,  // X[i] f : awareness plus truth everywhere i considers possible
    ImplicitK,  // K[i] f : truth everywhere i considers possible
    Likelihood, // sum of weighted likelihood terms compared with a bound
    ForAll,     // quantification over quantifier-free sentences
    Dynamic,    // [f, i] g : g holds after i becomes aware of f's propositions
    Consis      // Consis(f, i) : the state could absorb i's discovery of f
};

enum class Rel { Gt, Ge, Lt, Le, Eq };

class Formula;
struct Node;

// Immutable shared-structure formula handle.
class Formula {
public:
    Formula() = default;
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    const Node& node() const { return *node_; }
    const std::shared_ptr<const Node>& ptr() const { return node_; }
    bool valid() const { return node_ != nullptr; }

    bool operator==(const Formula& o) const;

private:
    std::shared_ptr<const Node> node_;
};

struct Node {
    NodeKind kind;
    Proposition atom;             // Atom
    std::string var;              // Var name, or the variable bound by ForAll
    std::string agent;            // Aware / ExplicitK / ImplicitK / Likelihood / Dynamic / Consis
    std::vector<Formula> kids;    // Not, And: operands; Aware/X/K: body; ForAll: body;
                                  // Dynamic: {trigger, body}; Consis: {trigger};
                                  // Likelihood: term arguments, aligned with coeffs
    std::vector<Rational> coeffs; // Likelihood: one coefficient per kid
    Rel rel = Rel::Gt;            // Likelihood
    Rational bound;               // Likelihood
};

// --- constructors -----------------------------------------------------------

Formula f_atom(Proposition p);
Formula f_atom(const std::string& name, PropKind kind = PropKind::Real);
Formula f_var(const std::string& name);
Formula f_not(Formula a);
Formula f_and(Formula a, Formula b);
Formula f_or(Formula a, Formula b);      // desugared to ~(~a & ~b)
Formula f_implies(Formula a, Formula b); // desugared to ~(a & ~b)
Formula f_iff(Formula a, Formula b);     // desugared conjunction of implications
Formula f_aware(const std::string& agent, Formula a);
Formula f_xk(const std::string& agent, Formula a);
Formula f_ik(const std::string& agent, Formula a);
Formula f_likelihood(const std::string& agent,
                     std::vector<std::pair<Rational, Formula>> terms,
                     Rel rel, Rational bound);
Formula f_forall(const std::string& var, Formula body);
Formula f_exists(const std::string& var, Formula body); // desugared to ~forall ~
Formula f_dynamic(Formula trigger, const std::string& agent, Formula body);
Formula f_consis(Formula trigger, const std::string& agent);

// --- structural operations --------------------------------------------------

// Every proposition occurring anywhere in the formula, including inside
// Dynamic triggers and Consis arguments. Variables contribute nothing.
std::set<std::string> props(const Formula& f);

// The propositions a state's language must contain for the formula to be
// about that state: Consis contributes nothing, variables contribute nothing,
// everything else is the union over subformulas.
std::set<std::string> lang_props(const Formula& f);

std::set<std::string> free_vars(const Formula& f);
bool is_sentence(const Formula& f);
bool is_quantifier_free(const Formula& f);
bool contains_dynamic_or_consis(const Formula& f);
bool contains_likelihood(const Formula& f);

// Replaces every free occurrence of `var` with `replacement`, which must be a
// quantifier-free sentence (so capture is impossible). Throws EvalError
// otherwise.
Formula substitute(const Formula& f, const std::string& var, const Formula& replacement);

// --- text -------------------------------------------------------------------

// Known names used to classify identifiers while parsing. When absent, a
// trailing prime on a proposition name marks it as a shadow.
struct SymbolTable {
    std::set<std::string> agents;
    std::set<std::string> real_props;
    std::set<std::string> shadow_props;
};

Formula parse_formula(const std::string& text, const SymbolTable* symbols = nullptr);
std::string render(const Formula& f);

} // namespace aware
