#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aware/model.hpp"

namespace aware {

// Maps each newly conceived proposition to the shadow that stood in for it.
// Propositions outside the map are untouched. An empty map is the identity.
struct ReplacementScheme {
    std::map<std::string, std::string> mapping;

    bool is_id() const { return mapping.empty(); }
    std::string id_string() const; // "id" or "p~q+r~x", sorted by source
    std::set<std::string> sources() const;
    std::set<std::string> images() const;

    bool operator==(const ReplacementScheme& o) const { return mapping == o.mapping; }
    bool operator<(const ReplacementScheme& o) const { return mapping < o.mapping; }
};

// Restriction of a scheme to the pairs that can act at a state with the given
// language: the image must be present and the source must be novel there.
ReplacementScheme effective_scheme(const ReplacementScheme& f,
                                   const std::set<std::string>& source_language);

enum class TransitionMode { SingleAgent, MultiAgent };
enum class PruneMode { Full, Reachable };

struct WeightPolicy {
    enum class Kind { Uniform, Explicit };
    Kind kind = Kind::Uniform;
    // state -> scheme id -> relative weight; per-state weights over the
    // applicable schemes must sum to 1.
    std::map<std::string, std::map<std::string, Rational>> weights;
};

struct SchemePolicy {
    enum class Kind { All, Listed };
    Kind kind = Kind::All;
    std::vector<ReplacementScheme> schemes;
};

// How a transition resolves its underdetermined parts.
struct TransitionRuleHandle {
    WeightPolicy weight;
    SchemePolicy scheme;
};

struct TransitionTriple {
    std::string from;   // state of the source model
    std::string to;     // state of the result model
    ReplacementScheme scheme;
};

struct TransitionResult {
    AwarenessModel after;
    std::string root; // the updated counterpart of the anchor state
    std::vector<TransitionTriple> relation;
    bool unconstrained = false; // discovery had zero prior mass; posterior is uniform
    std::vector<std::string> notes;
};

// States whose language has enough unfamiliar shadows to stand in for the
// trigger's novel propositions, counted against the agent's awareness at the
// anchor.
std::set<std::string> cons_states(const AwarenessModel& m, const Formula& trigger,
                                  const std::string& agent, const std::string& anchor);

// Injective assignments of shadows to the trigger's novel propositions that
// occur in some consistent state the agent considers possible. Sorted by id.
std::vector<ReplacementScheme> compatible_schemes(const AwarenessModel& m,
                                                  const std::string& anchor,
                                                  const Formula& trigger,
                                                  const std::string& agent);

// Literal content check: does t_star's content equal t's with f's sources
// standing where their images stood?
bool is_f_replacement(const AwarenessModel& before, const std::string& t,
                      const AwarenessModel& after, const std::string& t_star,
                      const ReplacementScheme& f);

// Canonical transition: the agent becomes aware of the trigger's
// propositions at the anchor state. Throws EvalError when the trigger's
// propositions are not all in the anchor's language, and when no considered
// state can absorb the discovery.
TransitionResult build_transition(const AwarenessModel& m, const std::string& anchor,
                                  const Formula& trigger, const std::string& agent,
                                  TransitionMode mode,
                                  const TransitionRuleHandle& rule = {},
                                  PruneMode prune = PruneMode::Full);

enum class ClauseStatus { Pass, Fail, Vacuous };

struct ClauseCheck {
    std::string clause; // "T1", "T2", "T3a".."T3c", "T4a".."T4c"
    ClauseStatus status = ClauseStatus::Pass;
    std::string witness;
};

struct VerificationReport {
    std::vector<ClauseCheck> entries;
    bool ok() const;
};

// Checks a claimed transition relation between two models against the
// correspondence clauses: unique provenance and content replacement (T1),
// the anchor's update (T2), the updating agent's new beliefs (T3), and
// everyone else's undisturbed structure (T4).
VerificationReport verify_transition(const AwarenessModel& before,
                                     const AwarenessModel& after,
                                     const std::vector<TransitionTriple>& relation,
                                     const Formula& trigger, const std::string& agent,
                                     const std::string& anchor, TransitionMode mode,
                                     const std::optional<std::string>& root = std::nullopt);

// TransitionTriple JSON array I/O (objects with "from", "to", "scheme").
std::vector<TransitionTriple> load_relation(const std::string& json_text);
std::vector<TransitionTriple> load_relation_file(const std::string& path);
std::string save_relation(const std::vector<TransitionTriple>& relation);

} // namespace aware
