#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "aware/formula.hpp"
#include "aware/rational.hpp"

namespace aware {

// A finite structure describing, per state: which propositions exist there,
// how they are valued, what each agent is aware of, which states each agent
// considers possible, and the agent's probabilities over them.
struct AwarenessModel {
    std::vector<std::string> agents;
    std::vector<std::string> real_props;
    std::vector<std::string> shadow_props;
    std::vector<std::string> states; // declaration order, kept for output

    std::map<std::string, std::set<std::string>> language;          // state -> props
    std::map<std::string, std::map<std::string, bool>> valuation;   // state -> prop -> value
    std::map<std::string, std::map<std::string, std::set<std::string>>> awareness; // agent -> state -> props
    std::map<std::string, std::map<std::string, std::set<std::string>>> access;    // agent -> state -> states
    std::map<std::string, std::map<std::string, std::map<std::string, Rational>>> prob;
    // prob[agent][state][target]; omitted targets carry zero mass

    bool has_state(const std::string& s) const;
    bool has_agent(const std::string& a) const;
    bool is_real(const std::string& prop) const;
    bool is_shadow(const std::string& prop) const;
    bool is_prop(const std::string& prop) const;

    const std::set<std::string>& lang(const std::string& s) const;
    const std::set<std::string>& aware_set(const std::string& agent, const std::string& s) const;
    const std::set<std::string>& acc(const std::string& agent, const std::string& s) const;
    bool val(const std::string& s, const std::string& prop) const;
    Rational pr(const std::string& agent, const std::string& s, const std::string& t) const;
    Rational pr_mass(const std::string& agent, const std::string& s,
                     const std::set<std::string>& targets) const;

    SymbolTable symbols() const;
};

struct Violation {
    std::string invariant; // "V1".."V10"
    std::string where;     // agent/state context
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Structural well-formedness: seriality, transitivity, the Euclidean
// property, probability normalization and support, probability and awareness
// introspection, language confinement of awareness, valuation domains.
ValidationReport validate(const AwarenessModel& m);

// Strict JSON loading: unknown keys, undeclared names, duplicate
// declarations, and malformed rationals are all InputErrors.
AwarenessModel load_model(const std::string& json_text);
AwarenessModel load_model_file(const std::string& path);
std::string save_model(const AwarenessModel& m); // deterministic, round-trips

} // namespace aware
