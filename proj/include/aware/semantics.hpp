#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aware/model.hpp"
#include "aware/transition.hpp"

namespace aware {

// How rich the quantifier's sentence domain is taken to be when the
// fixpoint abstraction enumerates it.
enum class ClosureMode { Basic, Linear };

struct EvalOptions {
    ClosureMode closure = ClosureMode::Basic;
    PruneMode prune = PruneMode::Full;
    TransitionRuleHandle rule; // used when model-changing operators fire
    std::optional<TransitionMode> mode; // default: by the model's agent count
    std::vector<std::string>* trace = nullptr;
};

// (M, s) |= f. Throws EvalError on formulas whose evaluation is undefined
// here (free variables, quantified variables crossing model-changing
// operators).
bool satisfies(const AwarenessModel& m, const std::string& state, const Formula& f,
               const EvalOptions& opts = {});

// All states satisfying f.
std::set<std::string> intension(const AwarenessModel& m, const Formula& f,
                                const EvalOptions& opts = {});

// What a quantifier can see of a quantifier-free sentence at a state: the
// propositions it uses and the states where it holds. Truth of any sentence
// built from the closure connectives depends only on this pair.
struct Fingerprint {
    std::set<std::string> props; // nonempty, within the anchor's language
    std::set<std::string> ext;   // states where the sentence holds

    bool operator<(const Fingerprint& o) const {
        if (props != o.props) return props < o.props;
        return ext < o.ext;
    }
    bool operator==(const Fingerprint& o) const { return props == o.props && ext == o.ext; }
};

// The fingerprints reachable from the anchor's atoms under negation,
// conjunction, awareness, explicit knowledge, and likelihood comparisons at
// attainable thresholds (Linear adds two-term combinations).
std::vector<Fingerprint> definable_fingerprints(const AwarenessModel& m,
                                                const std::string& anchor,
                                                ClosureMode mode);

} // namespace aware
