#include "aware/semantics.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "aware/errors.hpp"

namespace aware {

namespace {

void collect_agents(const Formula& f, std::set<std::string>& out) {
    const Node& n = f.node();
    if (!n.agent.empty()) out.insert(n.agent);
    for (const Formula& k : n.kids) collect_agents(k, out);
}

// Does `var` occur free inside a model-changing subformula?
bool var_crosses_model_change(const Formula& f, const std::string& var) {
    const Node& n = f.node();
    if (n.kind == NodeKind::ForAll && n.var == var) return false;
    if (n.kind == NodeKind::Dynamic || n.kind == NodeKind::Consis) {
        return free_vars(f).count(var) > 0;
    }
    for (const Formula& k : n.kids) {
        if (var_crosses_model_change(k, var)) return true;
    }
    return false;
}

using Env = std::map<std::string, Fingerprint>;

// The propositions a state's language must contain for the formula to be
// about that state: free variables contribute their bound witnesses'
// propositions, variables quantified inside f contribute nothing.
void env_lang_props_rec(const Formula& f, const Env& env, std::set<std::string>& bound,
                        std::set<std::string>& out) {
    const Node& n = f.node();
    switch (n.kind) {
    case NodeKind::Atom:
        out.insert(n.atom.name);
        return;
    case NodeKind::Var: {
        if (bound.count(n.var)) return;
        auto it = env.find(n.var);
        if (it == env.end()) throw EvalError("unbound variable '" + n.var + "'");
        out.insert(it->second.props.begin(), it->second.props.end());
        return;
    }
    case NodeKind::Consis:
        return;
    case NodeKind::ForAll: {
        bool fresh = bound.insert(n.var).second;
        env_lang_props_rec(n.kids[0], env, bound, out);
        if (fresh) bound.erase(n.var);
        return;
    }
    default:
        for (const Formula& k : n.kids) env_lang_props_rec(k, env, bound, out);
        return;
    }
}

void env_lang_props(const Formula& f, const Env& env, std::set<std::string>& out) {
    std::set<std::string> bound;
    env_lang_props_rec(f, env, bound, out);
}

bool all_in(const std::set<std::string>& needles, const std::set<std::string>& hay) {
    return std::all_of(needles.begin(), needles.end(),
                       [&](const std::string& p) { return hay.count(p) > 0; });
}

class Evaluator {
public:
    Evaluator(const AwarenessModel& m, const EvalOptions& opts) : m_(m), opts_(opts) {}

    bool sat(const std::string& s, const Formula& f, Env& env) {
        bool v = eval(s, f, env);
        if (opts_.trace) {
            std::string pad(2 * static_cast<size_t>(depth_), ' ');
            opts_.trace->push_back(pad + "[" + s + "] " + render(f) + " = " +
                                   (v ? "true" : "false"));
        }
        return v;
    }

    void set_depth(int d) { depth_ = d; }

private:
    const AwarenessModel& m_;
    EvalOptions opts_;
    int depth_ = 0;
    std::map<std::string, TransitionResult> transitions_;
    std::map<std::string, std::vector<Fingerprint>> fps_;

    bool eval(const std::string& s, const Formula& f, Env& env);

    const std::vector<Fingerprint>& fingerprints(const std::string& s) {
        auto it = fps_.find(s);
        if (it != fps_.end()) return it->second;
        auto fps = definable_fingerprints(m_, s, opts_.closure);
        return fps_.emplace(s, std::move(fps)).first->second;
    }

    bool lang_gate(const std::string& s, const Formula& f, const Env& env) {
        std::set<std::string> need;
        env_lang_props(f, env, need);
        return all_in(need, m_.lang(s));
    }
};

bool Evaluator::eval(const std::string& s, const Formula& f, Env& env) {
    const Node& n = f.node();
    switch (n.kind) {
    case NodeKind::Atom:
        return m_.lang(s).count(n.atom.name) && m_.val(s, n.atom.name);

    case NodeKind::Var: {
        auto it = env.find(n.var);
        if (it == env.end()) throw EvalError("unbound variable '" + n.var + "'");
        return it->second.ext.count(s) > 0;
    }

    case NodeKind::Not:
        // A negation is only true where the denied claim is expressible.
        return lang_gate(s, n.kids[0], env) && !sat(s, n.kids[0], env);

    case NodeKind::And:
        return sat(s, n.kids[0], env) && sat(s, n.kids[1], env);

    case NodeKind::Aware: {
        std::set<std::string> need;
        env_lang_props(n.kids[0], env, need);
        return all_in(need, m_.aware_set(n.agent, s));
    }

    case NodeKind::ExplicitK: {
        std::set<std::string> need;
        env_lang_props(n.kids[0], env, need);
        if (!all_in(need, m_.aware_set(n.agent, s))) return false;
        ++depth_;
        const auto& K = m_.acc(n.agent, s);
        bool all = std::all_of(K.begin(), K.end(),
                               [&](const std::string& t) { return sat(t, n.kids[0], env); });
        --depth_;
        return all;
    }

    case NodeKind::ImplicitK: {
        ++depth_;
        const auto& K = m_.acc(n.agent, s);
        bool all = std::all_of(K.begin(), K.end(),
                               [&](const std::string& t) { return sat(t, n.kids[0], env); });
        --depth_;
        return all;
    }

    case NodeKind::Likelihood: {
        std::set<std::string> need;
        for (const Formula& arg : n.kids) env_lang_props(arg, env, need);
        if (!all_in(need, m_.aware_set(n.agent, s))) return false;
        Rational value = 0;
        ++depth_;
        for (size_t k = 0; k < n.kids.size(); ++k) {
            Rational mass = 0;
            for (const auto& t : m_.acc(n.agent, s)) {
                if (sat(t, n.kids[k], env)) mass += m_.pr(n.agent, s, t);
            }
            value += n.coeffs[k] * mass;
        }
        --depth_;
        switch (n.rel) {
        case Rel::Gt: return value > n.bound;
        case Rel::Ge: return value >= n.bound;
        case Rel::Lt: return value < n.bound;
        case Rel::Le: return value <= n.bound;
        case Rel::Eq: return value == n.bound;
        }
        return false;
    }

    case NodeKind::ForAll: {
        if (var_crosses_model_change(n.kids[0], n.var)) {
            throw EvalError("quantified variable '" + n.var +
                            "' crosses a model-changing operator");
        }
        bool shadowed = env.count(n.var) > 0;
        Fingerprint saved;
        if (shadowed) saved = env[n.var];
        ++depth_;
        bool all = true;
        for (const Fingerprint& fp : fingerprints(s)) {
            env[n.var] = fp;
            if (!sat(s, n.kids[0], env)) {
                all = false;
                break;
            }
        }
        --depth_;
        if (shadowed) {
            env[n.var] = saved;
        } else {
            env.erase(n.var);
        }
        return all;
    }

    case NodeKind::Dynamic: {
        const Formula& trigger = n.kids[0];
        for (const auto& p : props(trigger)) {
            if (!m_.lang(s).count(p)) return false; // not about this world
        }
        std::string key = s + "|" + n.agent + "|" + render(trigger);
        auto it = transitions_.find(key);
        if (it == transitions_.end()) {
            TransitionMode mode = opts_.mode.value_or(m_.agents.size() == 1
                                                          ? TransitionMode::SingleAgent
                                                          : TransitionMode::MultiAgent);
            try {
                it = transitions_
                         .emplace(key, build_transition(m_, s, trigger, n.agent, mode,
                                                        opts_.rule, opts_.prune))
                         .first;
            } catch (const EvalError&) {
                // Nothing can absorb the discovery: no successor situation.
                return false;
            }
        }
        const TransitionResult& tr = it->second;
        Evaluator inner(tr.after, opts_);
        inner.set_depth(depth_ + 1);
        Env fresh;
        return inner.sat(tr.root, n.kids[1], fresh);
    }

    case NodeKind::Consis: {
        const auto& A = m_.aware_set(n.agent, s);
        size_t needed = 0;
        for (const auto& p : props(n.kids[0])) {
            if (!A.count(p)) ++needed;
        }
        size_t unfamiliar = 0;
        for (const auto& p : m_.lang(s)) {
            if (m_.is_shadow(p) && !A.count(p)) ++unfamiliar;
        }
        return unfamiliar >= needed;
    }
    }
    throw EvalError("unknown node kind");
}

bool rel_holds(int r, const Rational& v, const Rational& thr) {
    switch (r) {
    case 0: return v > thr;
    case 1: return v >= thr;
    case 2: return v < thr;
    case 3: return v <= thr;
    default: return v == thr;
    }
}

// One likelihood comparison family over a fixed extension: which states'
// measures of it clear each attainable threshold.
void add_likelihood_fps(const AwarenessModel& m, const Fingerprint& x,
                        std::set<Fingerprint>& out) {
    for (const auto& i : m.agents) {
        std::map<std::string, Rational> value;
        std::set<Rational> attained;
        for (const auto& t : m.states) {
            Rational v = 0;
            for (const auto& u : m.acc(i, t)) {
                if (x.ext.count(u)) v += m.pr(i, t, u);
            }
            attained.insert(v);
            value.emplace(t, std::move(v));
        }
        for (const Rational& thr : attained) {
            for (int r = 0; r < 5; ++r) {
                Fingerprint fp;
                fp.props = x.props;
                for (const auto& t : m.states) {
                    if (!all_in(x.props, m.aware_set(i, t))) continue;
                    if (rel_holds(r, value.at(t), thr)) fp.ext.insert(t);
                }
                out.insert(std::move(fp));
            }
        }
    }
}

// Two-term linear comparisons: candidate separating directions come from
// pairs of attained value points plus fixed axes and diagonals; thresholds
// from attained dot products. Any half-plane split of a finite point set
// is realized by some such direction and threshold.
void add_linear_fps(const AwarenessModel& m, const Fingerprint& x, const Fingerprint& y,
                    std::set<Fingerprint>& out) {
    std::set<std::string> props = x.props;
    props.insert(y.props.begin(), y.props.end());
    for (const auto& i : m.agents) {
        std::map<std::string, std::pair<Rational, Rational>> value;
        std::vector<std::pair<Rational, Rational>> pts;
        for (const auto& t : m.states) {
            Rational vx = 0, vy = 0;
            for (const auto& u : m.acc(i, t)) {
                if (x.ext.count(u)) vx += m.pr(i, t, u);
                if (y.ext.count(u)) vy += m.pr(i, t, u);
            }
            pts.emplace_back(vx, vy);
            value.emplace(t, std::make_pair(std::move(vx), std::move(vy)));
        }
        std::set<std::pair<Rational, Rational>> normals{{1, 0}, {0, 1}, {1, 1}, {1, -1}};
        for (size_t a = 0; a < pts.size(); ++a) {
            for (size_t b = a + 1; b < pts.size(); ++b) {
                Rational na = pts[b].second - pts[a].second;
                Rational nb = pts[a].first - pts[b].first;
                if (na != 0 || nb != 0) normals.insert({na, nb});
            }
        }
        for (const auto& [na, nb] : normals) {
            std::set<Rational> attained;
            for (const auto& t : m.states) {
                attained.insert(na * value.at(t).first + nb * value.at(t).second);
            }
            for (const Rational& thr : attained) {
                for (int r = 0; r < 5; ++r) {
                    Fingerprint fp;
                    fp.props = props;
                    for (const auto& t : m.states) {
                        if (!all_in(props, m.aware_set(i, t))) continue;
                        Rational v = na * value.at(t).first + nb * value.at(t).second;
                        if (rel_holds(r, v, thr)) fp.ext.insert(t);
                    }
                    out.insert(std::move(fp));
                }
            }
        }
    }
}

} // namespace

std::vector<Fingerprint> definable_fingerprints(const AwarenessModel& m,
                                                const std::string& anchor, ClosureMode mode) {
    if (!m.has_state(anchor)) throw InputError("unknown state '" + anchor + "'");

    std::set<Fingerprint> all;
    std::deque<Fingerprint> work;
    auto push = [&](Fingerprint fp) {
        if (all.insert(fp).second) work.push_back(std::move(fp));
    };

    for (const auto& p : m.lang(anchor)) {
        Fingerprint fp;
        fp.props = {p};
        for (const auto& t : m.states) {
            if (m.lang(t).count(p) && m.val(t, p)) fp.ext.insert(t);
        }
        push(std::move(fp));
    }

    // Saturate under the sentence-forming operations. Pairing each popped
    // item against a snapshot of everything seen so far covers every pair,
    // because the later-popped member of any pair sees the earlier one.
    while (!work.empty()) {
        Fingerprint x = std::move(work.front());
        work.pop_front();

        {
            Fingerprint fp; // negation, gated by expressibility
            fp.props = x.props;
            for (const auto& t : m.states) {
                if (all_in(x.props, m.lang(t)) && !x.ext.count(t)) fp.ext.insert(t);
            }
            push(std::move(fp));
        }

        for (const auto& i : m.agents) {
            Fingerprint aw;
            aw.props = x.props;
            Fingerprint xk;
            xk.props = x.props;
            for (const auto& t : m.states) {
                if (!all_in(x.props, m.aware_set(i, t))) continue;
                aw.ext.insert(t);
                const auto& K = m.acc(i, t);
                if (std::all_of(K.begin(), K.end(),
                                [&](const std::string& u) { return x.ext.count(u) > 0; })) {
                    xk.ext.insert(t);
                }
            }
            push(std::move(aw));
            push(std::move(xk));
        }

        {
            std::set<Fingerprint> derived;
            add_likelihood_fps(m, x, derived);
            for (const Fingerprint& fp : derived) push(fp);
        }

        std::vector<Fingerprint> snapshot(all.begin(), all.end());
        for (const Fingerprint& y : snapshot) {
            Fingerprint fp;
            fp.props = x.props;
            fp.props.insert(y.props.begin(), y.props.end());
            std::set_intersection(x.ext.begin(), x.ext.end(), y.ext.begin(), y.ext.end(),
                                  std::inserter(fp.ext, fp.ext.begin()));
            push(std::move(fp));
            if (mode == ClosureMode::Linear) {
                std::set<Fingerprint> derived;
                add_linear_fps(m, x, y, derived);
                for (const Fingerprint& d : derived) push(d);
            }
        }
    }

    return std::vector<Fingerprint>(all.begin(), all.end());
}

bool satisfies(const AwarenessModel& m, const std::string& state, const Formula& f,
               const EvalOptions& opts) {
    if (!m.has_state(state)) throw InputError("unknown state '" + state + "'");
    if (!is_sentence(f)) throw EvalError("formula has free variables");
    std::set<std::string> agents;
    collect_agents(f, agents);
    for (const auto& a : agents) {
        if (!m.has_agent(a)) throw EvalError("unknown agent '" + a + "'");
    }
    Evaluator ev(m, opts);
    Env env;
    return ev.sat(state, f, env);
}

std::set<std::string> intension(const AwarenessModel& m, const Formula& f,
                                const EvalOptions& opts) {
    std::set<std::string> out;
    for (const auto& s : m.states) {
        if (satisfies(m, s, f, opts)) out.insert(s);
    }
    return out;
}

} // namespace aware
