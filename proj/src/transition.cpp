#include "aware/transition.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aware/errors.hpp"

namespace aware {

using json = nlohmann::ordered_json;

// --- schemes ------------------------------------------------------------------

std::string ReplacementScheme::id_string() const {
    if (mapping.empty()) return "id";
    std::string out;
    for (const auto& [from, to] : mapping) {
        if (!out.empty()) out += "+";
        out += from + "~" + to;
    }
    return out;
}

std::set<std::string> ReplacementScheme::sources() const {
    std::set<std::string> out;
    for (const auto& [from, to] : mapping) {
        (void)to;
        out.insert(from);
    }
    return out;
}

std::set<std::string> ReplacementScheme::images() const {
    std::set<std::string> out;
    for (const auto& [from, to] : mapping) {
        (void)from;
        out.insert(to);
    }
    return out;
}

ReplacementScheme effective_scheme(const ReplacementScheme& f,
                                   const std::set<std::string>& source_language) {
    ReplacementScheme eff;
    for (const auto& [p, q] : f.mapping) {
        if (source_language.count(q) && !source_language.count(p)) {
            eff.mapping[p] = q;
        }
    }
    return eff;
}

namespace {

std::string apply_scheme(const ReplacementScheme& f, const std::string& p) {
    auto it = f.mapping.find(p);
    return it == f.mapping.end() ? p : it->second;
}

std::set<std::string> transport_language(const std::set<std::string>& L,
                                         const ReplacementScheme& eff) {
    std::set<std::string> out;
    auto images = eff.images();
    for (const auto& p : L) {
        if (!images.count(p)) out.insert(p);
    }
    for (const auto& [p, q] : eff.mapping) {
        (void)q;
        out.insert(p);
    }
    return out;
}

std::set<std::string> transport_awareness(const std::set<std::string>& A,
                                          const ReplacementScheme& eff) {
    std::set<std::string> out;
    auto images = eff.images();
    for (const auto& p : A) {
        if (!images.count(p)) out.insert(p);
    }
    for (const auto& [p, q] : eff.mapping) {
        if (A.count(q)) out.insert(p);
    }
    return out;
}

bool scheme_applicable(const AwarenessModel& m, const ReplacementScheme& f,
                       const std::string& t) {
    for (const auto& [p, q] : f.mapping) {
        (void)p;
        if (!m.lang(t).count(q)) return false;
    }
    return true;
}

} // namespace

// --- consistency and scheme enumeration ---------------------------------------

std::set<std::string> cons_states(const AwarenessModel& m, const Formula& trigger,
                                  const std::string& agent, const std::string& anchor) {
    if (!m.has_agent(agent)) throw InputError("unknown agent '" + agent + "'");
    if (!m.has_state(anchor)) throw InputError("unknown state '" + anchor + "'");
    const auto& A = m.aware_set(agent, anchor);
    size_t needed = 0;
    for (const auto& p : props(trigger)) {
        if (!A.count(p)) ++needed;
    }
    std::set<std::string> out;
    for (const auto& t : m.states) {
        size_t unfamiliar = 0;
        for (const auto& p : m.lang(t)) {
            if (m.is_shadow(p) && !A.count(p)) ++unfamiliar;
        }
        if (unfamiliar >= needed) out.insert(t);
    }
    return out;
}

std::vector<ReplacementScheme> compatible_schemes(const AwarenessModel& m,
                                                  const std::string& anchor,
                                                  const Formula& trigger,
                                                  const std::string& agent) {
    const auto& A = m.aware_set(agent, anchor);
    std::vector<std::string> novel;
    for (const auto& p : props(trigger)) {
        if (!A.count(p)) novel.push_back(p);
    }
    if (novel.empty()) return {ReplacementScheme{}};

    auto cons = cons_states(m, trigger, agent, anchor);
    std::set<std::string> pool;
    for (const auto& t : m.acc(agent, anchor)) {
        if (!cons.count(t)) continue;
        for (const auto& q : m.lang(t)) {
            if (m.is_shadow(q) && !A.count(q)) pool.insert(q);
        }
    }

    std::vector<ReplacementScheme> out;
    std::vector<std::string> pool_vec(pool.begin(), pool.end());
    std::vector<bool> used(pool_vec.size(), false);
    ReplacementScheme current;
    auto rec = [&](auto&& self, size_t k) -> void {
        if (k == novel.size()) {
            out.push_back(current);
            return;
        }
        for (size_t c = 0; c < pool_vec.size(); ++c) {
            if (used[c]) continue;
            used[c] = true;
            current.mapping[novel[k]] = pool_vec[c];
            self(self, k + 1);
            current.mapping.erase(novel[k]);
            used[c] = false;
        }
    };
    rec(rec, 0);
    std::sort(out.begin(), out.end());
    return out;
}

bool is_f_replacement(const AwarenessModel& before, const std::string& t,
                      const AwarenessModel& after, const std::string& t_star,
                      const ReplacementScheme& f) {
    const auto& Lb = before.lang(t);
    const auto& La = after.lang(t_star);
    std::set<std::string> mapped;
    for (const auto& p : La) mapped.insert(apply_scheme(f, p));
    if (mapped.size() != La.size()) return false; // a source collided with its image
    if (mapped != Lb) return false;
    for (const auto& p : La) {
        if (after.val(t_star, p) != before.val(t, apply_scheme(f, p))) return false;
    }
    return true;
}

// --- builder ------------------------------------------------------------------

namespace {

struct UpdatedState {
    std::string source;
    ReplacementScheme scheme;
    std::string name;
};

std::string updated_name(const std::string& src, const ReplacementScheme& f) {
    return src + "@" + f.id_string() + "#upd";
}

std::string background_name(const std::string& src, const ReplacementScheme& g) {
    return src + "@" + g.id_string() + "#bg";
}

void check_listed_scheme(const ReplacementScheme& f, const std::set<std::string>& novel,
                         const std::set<std::string>& A, const AwarenessModel& m) {
    if (f.sources() != novel) {
        throw InputError("listed scheme '" + f.id_string() +
                         "' does not cover exactly the unfamiliar propositions");
    }
    std::set<std::string> seen;
    for (const auto& [p, q] : f.mapping) {
        (void)p;
        if (!m.is_shadow(q)) {
            throw InputError("listed scheme image '" + q + "' is not a shadow proposition");
        }
        if (A.count(q)) {
            throw InputError("listed scheme image '" + q + "' is already within awareness");
        }
        if (!seen.insert(q).second) {
            throw InputError("listed scheme '" + f.id_string() + "' is not injective");
        }
    }
}

} // namespace

TransitionResult build_transition(const AwarenessModel& m, const std::string& anchor,
                                  const Formula& trigger, const std::string& agent,
                                  TransitionMode mode, const TransitionRuleHandle& rule,
                                  PruneMode prune) {
    if (!m.has_agent(agent)) throw InputError("unknown agent '" + agent + "'");
    if (!m.has_state(anchor)) throw InputError("unknown state '" + anchor + "'");
    if (!is_sentence(trigger)) throw EvalError("transition trigger must be a sentence");
    if (contains_dynamic_or_consis(trigger)) {
        throw EvalError("transition trigger may not contain model-changing operators");
    }
    if (mode == TransitionMode::SingleAgent && m.agents.size() != 1) {
        throw InputError("single-agent transition requires a single-agent structure");
    }

    auto trigger_props = props(trigger);
    for (const auto& p : trigger_props) {
        if (!m.lang(anchor).count(p)) {
            throw EvalError("trigger proposition '" + p + "' is not in the language of state " +
                            anchor);
        }
    }

    const auto& A = m.aware_set(agent, anchor);
    std::set<std::string> novel;
    for (const auto& p : trigger_props) {
        if (!A.count(p)) novel.insert(p);
    }

    TransitionResult res;

    if (novel.empty()) {
        // Nothing new: the structure is untouched.
        res.after = m;
        res.root = anchor;
        for (const auto& t : m.states) {
            res.relation.push_back({t, t, ReplacementScheme{}});
        }
        res.notes.push_back("trigger already within awareness; identity transition");
        return res;
    }

    auto cons = cons_states(m, trigger, agent, anchor);
    std::vector<std::string> ck; // considered states that can absorb the discovery
    for (const auto& t : m.states) {
        if (m.acc(agent, anchor).count(t) && cons.count(t)) ck.push_back(t);
    }
    if (ck.empty()) {
        throw EvalError("no state the agent considers possible can absorb the discovery");
    }

    std::vector<ReplacementScheme> schemes;
    if (rule.scheme.kind == SchemePolicy::Kind::All) {
        schemes = compatible_schemes(m, anchor, trigger, agent);
    } else {
        for (const auto& f : rule.scheme.schemes) {
            check_listed_scheme(f, novel, A, m);
            schemes.push_back(f);
        }
        std::sort(schemes.begin(), schemes.end());
        schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());
    }

    // The updated cluster: one state per considered absorber and applicable scheme.
    std::vector<UpdatedState> updated;
    std::map<std::string, std::vector<size_t>> reps; // source -> indices into updated
    for (const auto& t : ck) {
        for (const auto& f : schemes) {
            if (!scheme_applicable(m, f, t)) continue;
            reps[t].push_back(updated.size());
            updated.push_back({t, f, updated_name(t, f)});
        }
    }
    for (const auto& t : ck) {
        if (!reps.count(t) || reps[t].empty()) {
            throw EvalError("state " + t + " can absorb the discovery but no scheme applies");
        }
    }

    Rational denom = 0;
    for (const auto& t : ck) denom += m.pr(agent, anchor, t);
    res.unconstrained = denom == 0;

    // Per-updated-state posterior mass.
    std::map<std::string, Rational> mass;
    if (res.unconstrained) {
        Rational share = Rational(1) / Rational(static_cast<long>(updated.size()));
        for (const auto& u : updated) mass[u.name] = share;
        res.notes.push_back("discovery had zero prior mass; posterior set uniform");
    } else {
        for (const auto& t : ck) {
            Rational total = m.pr(agent, anchor, t) / denom;
            const auto& idxs = reps[t];
            if (rule.weight.kind == WeightPolicy::Kind::Uniform) {
                Rational share = total / Rational(static_cast<long>(idxs.size()));
                for (size_t k : idxs) mass[updated[k].name] = share;
            } else {
                auto row_it = rule.weight.weights.find(t);
                if (row_it == rule.weight.weights.end()) {
                    throw InputError("explicit weights missing state " + t);
                }
                Rational row_total = 0;
                std::set<std::string> seen;
                for (size_t k : idxs) {
                    const auto& u = updated[k];
                    auto w_it = row_it->second.find(u.scheme.id_string());
                    if (w_it == row_it->second.end()) {
                        throw InputError("explicit weights missing scheme " +
                                         u.scheme.id_string() + " at state " + t);
                    }
                    if (w_it->second < 0) {
                        throw InputError("negative weight at state " + t);
                    }
                    seen.insert(u.scheme.id_string());
                    row_total += w_it->second;
                    mass[u.name] = total * w_it->second;
                }
                if (row_total != 1) {
                    throw InputError("weights at state " + t + " sum to " +
                                     format_rational(row_total) + ", expected 1");
                }
                for (const auto& [sid, w] : row_it->second) {
                    (void)w;
                    if (!seen.count(sid)) {
                        throw InputError("weight for inapplicable scheme " + sid + " at state " +
                                         t);
                    }
                }
            }
        }
    }

    AwarenessModel out;
    out.agents = m.agents;
    out.real_props = m.real_props;
    out.shadow_props = m.shadow_props;

    std::set<std::string> new_awareness = A;
    new_awareness.insert(trigger_props.begin(), trigger_props.end());

    std::string root = anchor + "@id#root";
    res.root = root;

    auto add_state = [&](const std::string& name, const std::set<std::string>& L,
                         const std::map<std::string, bool>& V) {
        out.states.push_back(name);
        out.language[name] = L;
        out.valuation[name] = V;
    };

    // Root: the anchor itself, with the discovery added to the agent's awareness.
    {
        std::map<std::string, bool> V;
        for (const auto& p : m.lang(anchor)) V[p] = m.val(anchor, p);
        add_state(root, m.lang(anchor), V);
        for (const auto& h : m.agents) {
            out.awareness[h][root] = h == agent ? new_awareness : m.aware_set(h, anchor);
        }
        res.relation.push_back({anchor, root, ReplacementScheme{}});
    }

    // Updated cluster: each absorber rewritten so the discovered propositions
    // stand where their shadows stood.
    std::set<std::string> cluster;
    for (const auto& u : updated) cluster.insert(u.name);
    for (const auto& u : updated) {
        auto L = transport_language(m.lang(u.source), u.scheme);
        std::map<std::string, bool> V;
        for (const auto& p : L) V[p] = m.val(u.source, apply_scheme(u.scheme, p));
        add_state(u.name, L, V);
        for (const auto& h : m.agents) {
            out.awareness[h][u.name] =
                h == agent ? new_awareness
                           : transport_awareness(m.aware_set(h, u.source), u.scheme);
        }
        res.relation.push_back({u.source, u.name, u.scheme});
    }

    // The agent's structure across the root and the cluster.
    {
        std::vector<std::string> q_states{root};
        for (const auto& u : updated) q_states.push_back(u.name);
        for (const auto& q : q_states) {
            out.access[agent][q] = cluster;
            for (const auto& u : updated) {
                if (mass[u.name] != 0) out.prob[agent][q][u.name] = mass[u.name];
            }
        }
    }

    if (mode == TransitionMode::MultiAgent) {
        // Background clusters: a full transported copy of the structure per
        // scheme in use (identity included), carrying everyone's old attitudes.
        std::vector<ReplacementScheme> used;
        used.push_back(ReplacementScheme{});
        {
            std::set<ReplacementScheme> seen;
            for (const auto& u : updated) {
                if (seen.insert(u.scheme).second) used.push_back(u.scheme);
            }
        }
        for (const auto& g : used) {
            for (const auto& t : m.states) {
                auto eff = effective_scheme(g, m.lang(t));
                std::string name = background_name(t, g);
                auto L = transport_language(m.lang(t), eff);
                std::map<std::string, bool> V;
                for (const auto& p : L) V[p] = m.val(t, apply_scheme(eff, p));
                add_state(name, L, V);
                for (const auto& h : m.agents) {
                    out.awareness[h][name] = transport_awareness(m.aware_set(h, t), eff);
                }
                res.relation.push_back({t, name, g});
            }
            for (const auto& t : m.states) {
                std::string name = background_name(t, g);
                for (const auto& h : m.agents) {
                    for (const auto& t2 : m.acc(h, t)) {
                        out.access[h][name].insert(background_name(t2, g));
                    }
                    if (auto hit = m.prob.find(h); hit != m.prob.end()) {
                        if (auto sit = hit->second.find(t); sit != hit->second.end()) {
                            for (const auto& [t2, r] : sit->second) {
                                if (r != 0) out.prob[h][name][background_name(t2, g)] = r;
                            }
                        }
                    }
                }
            }
        }

        // Bystanders at the root keep their old structure, read off the
        // untouched copies; at updated states they follow the absorber's.
        for (const auto& h : m.agents) {
            if (h == agent) continue;
            ReplacementScheme id;
            for (const auto& t2 : m.acc(h, anchor)) {
                out.access[h][root].insert(background_name(t2, id));
            }
            for (const auto& t2 : m.states) {
                Rational r = m.pr(h, anchor, t2);
                if (r != 0) out.prob[h][root][background_name(t2, id)] = r;
            }
            for (const auto& u : updated) {
                for (const auto& t2 : m.acc(h, u.source)) {
                    out.access[h][u.name].insert(background_name(t2, u.scheme));
                }
                for (const auto& t2 : m.states) {
                    Rational r = m.pr(h, u.source, t2);
                    if (r != 0) out.prob[h][u.name][background_name(t2, u.scheme)] = r;
                }
            }
        }

        std::ostringstream note;
        note << "background clusters: " << used.size() << " x " << m.states.size() << " states";
        res.notes.push_back(note.str());
    }

    {
        std::ostringstream note;
        note << "absorbing states:";
        for (const auto& t : ck) note << " " << t;
        note << "; prior mass " << format_rational(denom);
        res.notes.push_back(note.str());
        std::ostringstream note2;
        note2 << "schemes:";
        for (const auto& f : schemes) note2 << " " << f.id_string();
        res.notes.push_back(note2.str());
    }

    if (prune == PruneMode::Reachable && mode == TransitionMode::MultiAgent) {
        std::set<std::string> reach{root};
        std::deque<std::string> work{root};
        while (!work.empty()) {
            std::string s = work.front();
            work.pop_front();
            for (const auto& h : out.agents) {
                for (const auto& t : out.acc(h, s)) {
                    if (reach.insert(t).second) work.push_back(t);
                }
            }
        }
        AwarenessModel kept;
        kept.agents = out.agents;
        kept.real_props = out.real_props;
        kept.shadow_props = out.shadow_props;
        for (const auto& s : out.states) {
            if (!reach.count(s)) continue;
            kept.states.push_back(s);
            kept.language[s] = out.language[s];
            kept.valuation[s] = out.valuation[s];
            for (const auto& h : out.agents) {
                kept.awareness[h][s] = out.awareness[h][s];
                if (out.access.count(h) && out.access.at(h).count(s)) {
                    kept.access[h][s] = out.access.at(h).at(s);
                }
                if (out.prob.count(h) && out.prob.at(h).count(s)) {
                    kept.prob[h][s] = out.prob.at(h).at(s);
                }
            }
        }
        std::vector<TransitionTriple> kept_rel;
        for (const auto& tr : res.relation) {
            if (reach.count(tr.to)) kept_rel.push_back(tr);
        }
        res.relation = std::move(kept_rel);
        out = std::move(kept);
        res.notes.push_back("pruned to states reachable from the updated anchor");
    }

    res.after = std::move(out);
    return res;
}

// --- verifier -----------------------------------------------------------------

bool VerificationReport::ok() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const ClauseCheck& c) { return c.status != ClauseStatus::Fail; });
}

namespace {

struct ClauseAccumulator {
    ClauseCheck entry;
    explicit ClauseAccumulator(std::string clause) { entry.clause = std::move(clause); }
    void fail(const std::string& witness) {
        if (entry.status != ClauseStatus::Fail) {
            entry.status = ClauseStatus::Fail;
            entry.witness = witness;
        }
    }
    void vacuous(const std::string& why) {
        if (entry.status == ClauseStatus::Pass) {
            entry.status = ClauseStatus::Vacuous;
            entry.witness = why;
        }
    }
};

std::map<std::string, Rational> prob_row(const AwarenessModel& m, const std::string& agent,
                                         const std::string& s) {
    std::map<std::string, Rational> row;
    if (auto ait = m.prob.find(agent); ait != m.prob.end()) {
        if (auto sit = ait->second.find(s); sit != ait->second.end()) {
            for (const auto& [t, r] : sit->second) {
                if (r != 0) row[t] = r;
            }
        }
    }
    return row;
}

} // namespace

VerificationReport verify_transition(const AwarenessModel& before, const AwarenessModel& after,
                                     const std::vector<TransitionTriple>& relation,
                                     const Formula& trigger, const std::string& agent,
                                     const std::string& anchor, TransitionMode mode,
                                     const std::optional<std::string>& root_hint) {
    if (!before.has_agent(agent)) throw InputError("unknown agent '" + agent + "'");
    if (!before.has_state(anchor)) throw InputError("unknown state '" + anchor + "'");

    VerificationReport rep;
    ClauseAccumulator t1("T1"), t2("T2"), t3a("T3a"), t3b("T3b"), t3c("T3c");
    ClauseAccumulator t4a("T4a"), t4b("T4b"), t4c("T4c");

    const auto& A = before.aware_set(agent, anchor);
    auto trigger_props = props(trigger);
    std::set<std::string> novel;
    for (const auto& p : trigger_props) {
        if (!A.count(p)) novel.insert(p);
    }
    bool identity = novel.empty();

    auto cons = cons_states(before, trigger, agent, anchor);
    std::vector<std::string> ck;
    for (const auto& t : before.states) {
        if (before.acc(agent, anchor).count(t) && cons.count(t)) ck.push_back(t);
    }
    Rational denom = 0;
    for (const auto& t : ck) denom += before.pr(agent, anchor, t);

    // T1: every result state has exactly one provenance triple whose scheme
    // (restricted to what can act at the source) reproduces its content.
    std::map<std::string, TransitionTriple> by_target;
    for (const auto& tr : relation) {
        if (!before.has_state(tr.from)) {
            t1.fail("triple from unknown source state " + tr.from);
            continue;
        }
        if (!after.has_state(tr.to)) {
            t1.fail("triple to unknown result state " + tr.to);
            continue;
        }
        if (!by_target.emplace(tr.to, tr).second) {
            t1.fail("result state " + tr.to + " has two provenance triples");
        }
    }
    for (const auto& s : after.states) {
        auto it = by_target.find(s);
        if (it == by_target.end()) {
            t1.fail("result state " + s + " has no provenance triple");
            continue;
        }
        const auto& tr = it->second;
        auto eff = effective_scheme(tr.scheme, before.lang(tr.from));
        if (!is_f_replacement(before, tr.from, after, tr.to, eff)) {
            t1.fail("result state " + s + " is not a " + tr.scheme.id_string() +
                    "-rewrite of " + tr.from);
        }
    }

    // T2: locate the updated anchor and check its awareness.
    std::set<std::string> expected_awareness = A;
    expected_awareness.insert(trigger_props.begin(), trigger_props.end());
    std::string root;
    {
        std::vector<std::string> candidates;
        for (const auto& tr : relation) {
            if (tr.from == anchor && tr.scheme.is_id() && after.has_state(tr.to)) {
                candidates.push_back(tr.to);
            }
        }
        if (root_hint) {
            if (std::find(candidates.begin(), candidates.end(), *root_hint) ==
                candidates.end()) {
                t2.fail("claimed root " + *root_hint +
                        " is not an identity image of the anchor");
            } else {
                root = *root_hint;
            }
        } else {
            std::vector<std::string> fitting;
            for (const auto& c : candidates) {
                if (after.aware_set(agent, c) == expected_awareness) fitting.push_back(c);
            }
            if (fitting.size() == 1) {
                root = fitting[0];
            } else if (fitting.empty()) {
                t2.fail("no identity image of the anchor carries the updated awareness");
            } else {
                t2.fail("several identity images of the anchor fit; pass the root explicitly");
            }
        }
    }
    if (!root.empty()) {
        if (after.aware_set(agent, root) != expected_awareness) {
            t2.fail("updated awareness at " + root + " is wrong");
        }
        if (mode == TransitionMode::MultiAgent) {
            for (const auto& h : after.agents) {
                if (h == agent) continue;
                if (after.aware_set(h, root) != before.aware_set(h, anchor)) {
                    t2.fail("bystander " + h + " changed awareness at the updated anchor");
                }
            }
        }
    }

    // Scope of the updating agent's new beliefs.
    std::set<std::string> scope;
    std::set<std::string> cluster;
    if (!root.empty()) {
        scope.insert(root);
        cluster = after.acc(agent, root);
        scope.insert(cluster.begin(), cluster.end());
    }

    auto valid_updated_scheme = [&](const ReplacementScheme& f, const std::string& src) {
        if (f.sources() != novel) return false;
        std::set<std::string> seen;
        for (const auto& [p, q] : f.mapping) {
            (void)p;
            if (!before.is_shadow(q) || A.count(q)) return false;
            if (!seen.insert(q).second) return false;
        }
        return scheme_applicable(before, f, src);
    };

    if (root.empty()) {
        t3a.vacuous("no updated anchor found");
        t3b.vacuous("no updated anchor found");
        t3c.vacuous("no updated anchor found");
    } else if (denom == 0 && !identity) {
        t3a.vacuous("discovery has zero prior mass; posterior unconstrained");
        t3b.vacuous("discovery has zero prior mass; posterior unconstrained");
        t3c.vacuous("discovery has zero prior mass; posterior unconstrained");
    } else {
        // T3a: the cluster is the agent's whole view from the updated anchor,
        // each member rewrites an absorber, and every absorber is represented.
        for (const auto& q : scope) {
            if (after.acc(agent, q) != cluster) {
                t3a.fail("view of " + agent + " at " + q + " leaves the updated cluster");
            }
        }
        std::map<std::string, std::vector<std::string>> reps; // absorber -> cluster states
        for (const auto& u : cluster) {
            auto it = by_target.find(u);
            if (it == by_target.end()) continue; // already a T1 failure
            const auto& tr = it->second;
            bool absorber = std::find(ck.begin(), ck.end(), tr.from) != ck.end();
            if (!absorber) {
                t3a.fail("cluster state " + u + " rewrites " + tr.from +
                         ", which cannot absorb the discovery");
                continue;
            }
            if (!valid_updated_scheme(tr.scheme, tr.from)) {
                t3a.fail("cluster state " + u + " uses an invalid scheme " +
                         tr.scheme.id_string());
                continue;
            }
            reps[tr.from].push_back(u);
        }
        for (const auto& t : ck) {
            if (!reps.count(t)) {
                t3a.fail("absorber " + t + " is not represented in the updated cluster");
            }
        }

        // T3b: posterior over each absorber's representatives is its prior
        // share of the absorbing mass, at the root and throughout the cluster.
        if (identity) {
            for (const auto& t : ck) {
                Rational got = 0;
                for (const auto& u : reps[t]) got += after.pr(agent, root, u);
                if (got != before.pr(agent, anchor, t)) {
                    t3b.fail("posterior of " + t + " is " + format_rational(got));
                }
            }
        } else {
            for (const auto& t : ck) {
                Rational want = before.pr(agent, anchor, t) / denom;
                Rational got = 0;
                for (const auto& u : reps[t]) got += after.pr(agent, root, u);
                if (got != want) {
                    t3b.fail("posterior mass of " + t + "'s representatives is " +
                             format_rational(got) + ", expected " + format_rational(want));
                }
            }
        }
        auto root_row = prob_row(after, agent, root);
        for (const auto& q : scope) {
            if (prob_row(after, agent, q) != root_row) {
                t3b.fail("posterior differs inside the updated cluster at " + q);
            }
        }

        // T3c: bystander awareness at cluster states is the absorber's,
        // transported through the scheme.
        if (mode == TransitionMode::MultiAgent) {
            for (const auto& u : cluster) {
                auto it = by_target.find(u);
                if (it == by_target.end()) continue;
                const auto& tr = it->second;
                auto eff = effective_scheme(tr.scheme, before.lang(tr.from));
                for (const auto& h : after.agents) {
                    if (h == agent) continue;
                    if (after.aware_set(h, u) !=
                        transport_awareness(before.aware_set(h, tr.from), eff)) {
                        t3c.fail("bystander " + h + " has wrong awareness at " + u);
                    }
                }
            }
        }
    }

    // T4: outside the updated cluster (and for bystanders everywhere), the
    // old structure is carried over scheme-for-scheme.
    if (mode == TransitionMode::MultiAgent) {
        for (const auto& [t_star, tr] : by_target) {
            const std::string& t = tr.from;
            auto eff = effective_scheme(tr.scheme, before.lang(t));
            for (const auto& h : after.agents) {
                if (h == agent && scope.count(t_star)) continue;

                if (after.aware_set(h, t_star) !=
                    transport_awareness(before.aware_set(h, t), eff)) {
                    t4a.fail("agent " + h + " has wrong awareness at " + t_star);
                }

                const auto& K_after = after.acc(h, t_star);
                const auto& K_before = before.acc(h, t);
                for (const auto& u : K_after) {
                    auto uit = by_target.find(u);
                    if (uit == by_target.end()) continue;
                    bool same_scheme = uit->second.scheme == tr.scheme;
                    bool from_ok = K_before.count(uit->second.from) > 0;
                    bool not_root = identity || u != root;
                    if (!same_scheme || !from_ok || !not_root) {
                        t4b.fail("agent " + h + " at " + t_star + " considers " + u +
                                 ", which does not mirror the old view");
                    }
                }
                for (const auto& t2 : K_before) {
                    bool covered = false;
                    Rational mass = 0;
                    for (const auto& u : K_after) {
                        auto uit = by_target.find(u);
                        if (uit == by_target.end()) continue;
                        if (uit->second.from == t2 && uit->second.scheme == tr.scheme) {
                            covered = true;
                            mass += after.pr(h, t_star, u);
                        }
                    }
                    if (!covered) {
                        t4b.fail("agent " + h + " at " + t_star + " lost sight of " + t2);
                    } else if (mass != before.pr(h, t, t2)) {
                        t4c.fail("agent " + h + " at " + t_star + " gives " + t2 +
                                 "'s images mass " + format_rational(mass) + ", expected " +
                                 format_rational(before.pr(h, t, t2)));
                    }
                }
            }
        }
    }

    rep.entries = {t1.entry, t2.entry, t3a.entry, t3b.entry, t3c.entry};
    if (mode == TransitionMode::MultiAgent) {
        rep.entries.push_back(t4a.entry);
        rep.entries.push_back(t4b.entry);
        rep.entries.push_back(t4c.entry);
    }
    return rep;
}

// --- relation I/O --------------------------------------------------------------

std::vector<TransitionTriple> load_relation(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError(std::string("relation JSON: ") + e.what());
    }
    if (!doc.is_array()) throw InputError("relation: expected an array");
    std::vector<TransitionTriple> out;
    for (const auto& item : doc) {
        if (!item.is_object()) throw InputError("relation: expected objects");
        for (const auto& [k, v] : item.items()) {
            (void)v;
            if (k != "from" && k != "to" && k != "scheme") {
                throw InputError("relation: unknown key '" + k + "'");
            }
        }
        if (!item.contains("from") || !item.contains("to") || !item.contains("scheme")) {
            throw InputError("relation: triples need from, to and scheme");
        }
        if (!item["from"].is_string() || !item["to"].is_string() ||
            !item["scheme"].is_object()) {
            throw InputError("relation: malformed triple");
        }
        TransitionTriple tr;
        tr.from = item["from"].get<std::string>();
        tr.to = item["to"].get<std::string>();
        for (const auto& [p, q] : item["scheme"].items()) {
            if (!q.is_string()) throw InputError("relation: scheme images must be strings");
            tr.scheme.mapping[p] = q.get<std::string>();
        }
        out.push_back(std::move(tr));
    }
    return out;
}

std::vector<TransitionTriple> load_relation_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open relation file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_relation(ss.str());
}

std::string save_relation(const std::vector<TransitionTriple>& relation) {
    json doc = json::array();
    for (const auto& tr : relation) {
        json item;
        item["from"] = tr.from;
        item["to"] = tr.to;
        json scheme = json::object();
        for (const auto& [p, q] : tr.scheme.mapping) scheme[p] = q;
        item["scheme"] = std::move(scheme);
        doc.push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

} // namespace aware
