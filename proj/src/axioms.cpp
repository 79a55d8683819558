#include "aware/axioms.hpp"

#include <algorithm>

#include "aware/errors.hpp"
#include "aware/transition.hpp"

namespace aware {

AxiomName axiom_from_string(const std::string& name) {
    if (name == "Astar") return AxiomName::Astar;
    if (name == "AK") return AxiomName::AK;
    if (name == "Ka") return AxiomName::Ka;
    if (name == "Pra") return AxiomName::Pra;
    if (name == "Kb") return AxiomName::KbExperimental;
    if (name == "Prb") return AxiomName::PrbExperimental;
    throw InputError("unknown axiom '" + name + "'");
}

std::string to_string(AxiomName a) {
    switch (a) {
    case AxiomName::Astar: return "Astar";
    case AxiomName::AK: return "AK";
    case AxiomName::Ka: return "Ka";
    case AxiomName::Pra: return "Pra";
    case AxiomName::KbExperimental: return "Kb";
    case AxiomName::PrbExperimental: return "Prb";
    }
    return "?";
}

namespace {

Formula know(KReading k, const std::string& agent, Formula body) {
    return k == KReading::Implicit ? f_ik(agent, std::move(body))
                                   : f_xk(agent, std::move(body));
}

Formula lik_positive(const std::string& agent, Formula arg) {
    return f_likelihood(agent, {{Rational(1), std::move(arg)}}, Rel::Gt, Rational(0));
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::none_of(a.begin(), a.end(),
                        [&](const std::string& p) { return b.count(p) > 0; });
}

} // namespace

AxiomInstanceParts axiom_instance_parts(AxiomName axiom, const AxiomParams& p, KReading k) {
    if (!p.trigger.valid()) throw InputError("axiom instance needs a trigger formula");
    if (!p.psi.valid()) throw InputError("axiom instance needs a schematic formula");
    if (p.i.empty()) throw InputError("axiom instance needs the discovering agent");
    const Formula& phi = p.trigger;
    const Formula& psi = p.psi;
    const std::string& i = p.i;

    switch (axiom) {
    case AxiomName::Astar: {
        if (!disjoint(props(phi), props(psi))) {
            throw InputError("the awareness scheme needs trigger and content with "
                             "disjoint propositions");
        }
        Formula lhs = f_aware(i, psi);
        Formula rhs = f_dynamic(phi, i, f_aware(i, f_and(phi, psi)));
        return {f_iff(lhs, rhs), lhs};
    }
    case AxiomName::AK: {
        if (p.j.empty() || p.j == i) {
            throw InputError("the bystander scheme needs a second agent distinct from "
                             "the discoverer");
        }
        Formula lhs = f_and(know(k, p.j, psi), f_aware(p.j, psi));
        Formula rhs = f_dynamic(
            phi, i, f_and(know(k, p.j, psi), f_dynamic(phi, i, f_aware(p.j, psi))));
        return {f_iff(lhs, rhs), lhs};
    }
    case AxiomName::Ka: {
        Formula consis = f_consis(phi, i);
        Formula ant = f_and(lik_positive(i, consis), know(k, i, f_implies(consis, psi)));
        Formula whole = f_implies(ant, f_dynamic(phi, i, know(k, i, psi)));
        return {whole, ant};
    }
    case AxiomName::Pra: {
        Formula consis = f_consis(phi, i);
        Formula ant = f_likelihood(i, {{Rational(1), f_and(psi, consis)}, {-p.alpha, consis}},
                                   Rel::Gt, Rational(0));
        Formula whole = f_implies(
            ant, f_dynamic(phi, i,
                           f_likelihood(i, {{Rational(1), psi}}, Rel::Gt, p.alpha)));
        return {whole, ant};
    }
    case AxiomName::KbExperimental: {
        Formula consis = f_consis(phi, i);
        Formula psi_at_trigger = substitute(psi, p.var, phi);
        Formula ant =
            f_and(lik_positive(i, consis), f_dynamic(phi, i, know(k, i, psi_at_trigger)));
        Formula whole =
            f_implies(ant, know(k, i, f_implies(consis, f_exists(p.var, psi))));
        return {whole, ant};
    }
    case AxiomName::PrbExperimental: {
        Formula consis = f_consis(phi, i);
        Formula psi_at_trigger = substitute(psi, p.var, phi);
        Formula ant = f_and(
            lik_positive(i, consis),
            f_dynamic(phi, i,
                      f_likelihood(i, {{Rational(1), psi_at_trigger}}, Rel::Gt, p.alpha)));
        Formula conseq = f_exists(
            p.var, f_likelihood(i, {{Rational(1), f_and(psi, consis)}, {-p.alpha, consis}},
                                Rel::Gt, Rational(0)));
        return {f_implies(ant, conseq), ant};
    }
    }
    throw InputError("unknown axiom");
}

Formula axiom_instance(AxiomName axiom, const AxiomParams& p, KReading k) {
    return axiom_instance_parts(axiom, p, k).whole;
}

// --- random structures ------------------------------------------------------

namespace {

size_t rint(std::mt19937_64& rng, size_t n) { return static_cast<size_t>(rng() % n); }

bool rbool(std::mt19937_64& rng) { return (rng() & 1) != 0; }

bool chance(std::mt19937_64& rng, std::uint64_t num, std::uint64_t den) {
    return rng() % den < num;
}

} // namespace

AwarenessModel random_model(const GeneratorConfig& cfg, std::mt19937_64& rng) {
    if (cfg.n_agents < 1 || cfg.n_states < 1 || cfg.n_real < 0 || cfg.n_shadow < 0 ||
        cfg.n_real + cfg.n_shadow < 1) {
        throw InputError("generator needs at least one agent, one state, and one proposition");
    }

    AwarenessModel m;
    static const char* kAgentNames[] = {"i", "j", "k", "h"};
    for (int a = 0; a < cfg.n_agents; ++a) {
        m.agents.push_back(a < 4 ? kAgentNames[a] : "g" + std::to_string(a + 1));
    }
    for (int r = 0; r < cfg.n_real; ++r) m.real_props.push_back("p" + std::to_string(r + 1));
    for (int x = 0; x < cfg.n_shadow; ++x) m.shadow_props.push_back("x" + std::to_string(x + 1));
    for (int s = 0; s < cfg.n_states; ++s) m.states.push_back("t" + std::to_string(s + 1));

    std::vector<std::string> pool = m.real_props;
    pool.insert(pool.end(), m.shadow_props.begin(), m.shadow_props.end());

    for (const auto& s : m.states) {
        std::set<std::string> lang;
        for (const auto& p : pool) {
            if (rbool(rng)) lang.insert(p);
        }
        if (lang.empty()) lang.insert(pool[rint(rng, pool.size())]);
        m.language[s] = std::move(lang);
    }

    // Each agent's possibility sets form clusters: a set of mutually
    // accessible states, with every other state pointing at one cluster.
    struct Cells {
        std::vector<std::vector<std::string>> cells;
        std::map<std::string, size_t> point; // state -> cell it looks at
    };
    std::map<std::string, Cells> structure;
    for (const auto& a : m.agents) {
        Cells c;
        std::vector<std::string> recurrent;
        for (const auto& s : m.states) {
            if (chance(rng, 2, 3)) recurrent.push_back(s);
        }
        if (recurrent.empty()) recurrent.push_back(m.states[rint(rng, m.states.size())]);
        for (size_t n = recurrent.size(); n > 1; --n) { // Fisher-Yates
            std::swap(recurrent[n - 1], recurrent[rint(rng, n)]);
        }
        for (const auto& s : recurrent) {
            if (c.cells.empty() || rbool(rng)) c.cells.emplace_back();
            c.cells.back().push_back(s);
            c.point[s] = c.cells.size() - 1;
        }
        for (const auto& s : m.states) {
            if (!c.point.count(s)) c.point[s] = rint(rng, c.cells.size());
        }
        structure[a] = std::move(c);
    }

    // Grow languages until every state can be aware of all real propositions
    // present anywhere in the cluster it looks at.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& a : m.agents) {
            const Cells& c = structure.at(a);
            for (size_t ci = 0; ci < c.cells.size(); ++ci) {
                std::set<std::string> floor;
                for (const auto& t : c.cells[ci]) {
                    for (const auto& p : m.language[t]) {
                        if (m.is_real(p)) floor.insert(p);
                    }
                }
                for (const auto& [s, target] : c.point) {
                    if (target != ci) continue;
                    for (const auto& p : floor) {
                        if (m.language[s].insert(p).second) changed = true;
                    }
                }
            }
        }
    }

    for (const auto& a : m.agents) {
        const Cells& c = structure.at(a);
        std::vector<std::set<std::string>> cell_aware(c.cells.size());
        for (size_t ci = 0; ci < c.cells.size(); ++ci) {
            std::set<std::string> floor;
            for (const auto& t : c.cells[ci]) {
                for (const auto& p : m.language[t]) {
                    if (m.is_real(p)) floor.insert(p);
                }
            }
            std::set<std::string> ceiling = pool.empty() ? std::set<std::string>{}
                                                         : std::set<std::string>(pool.begin(),
                                                                                 pool.end());
            for (const auto& [s, target] : c.point) {
                if (target != ci) continue;
                std::set<std::string> cut;
                std::set_intersection(ceiling.begin(), ceiling.end(), m.language[s].begin(),
                                      m.language[s].end(), std::inserter(cut, cut.begin()));
                ceiling = std::move(cut);
            }
            std::set<std::string> aw = floor;
            for (const auto& p : ceiling) {
                if (!aw.count(p) && rbool(rng)) aw.insert(p);
            }
            cell_aware[ci] = std::move(aw);
        }
        for (const auto& s : m.states) {
            m.awareness[a][s] = cell_aware[c.point.at(s)];
        }
    }

    for (const auto& s : m.states) {
        for (const auto& p : m.language[s]) {
            m.valuation[s][p] = rbool(rng);
        }
    }

    for (const auto& a : m.agents) {
        const Cells& c = structure.at(a);
        std::vector<std::map<std::string, Rational>> cell_dist(c.cells.size());
        for (size_t ci = 0; ci < c.cells.size(); ++ci) {
            std::vector<std::string> members = c.cells[ci];
            std::sort(members.begin(), members.end());
            std::vector<std::uint64_t> w(members.size());
            std::uint64_t total = 0;
            for (auto& x : w) {
                x = rng() % 4;
                total += x;
            }
            if (total == 0) {
                w[0] = 1;
                total = 1;
            }
            for (size_t n = 0; n < members.size(); ++n) {
                if (w[n] > 0) {
                    cell_dist[ci][members[n]] =
                        Rational(static_cast<long>(w[n]), static_cast<long>(total));
                }
            }
        }
        for (const auto& s : m.states) {
            size_t ci = c.point.at(s);
            m.access[a][s] = std::set<std::string>(c.cells[ci].begin(), c.cells[ci].end());
            m.prob[a][s] = cell_dist[ci];
        }
    }

    return m;
}

namespace {

Formula random_sentence_over(const AwarenessModel& m,
                             const std::vector<Proposition>& atoms, std::mt19937_64& rng,
                             int depth) {
    auto atom = [&]() { return f_atom(atoms[rint(rng, atoms.size())]); };
    if (depth <= 0 || chance(rng, 1, 4)) return atom();
    const std::string& ag = m.agents[rint(rng, m.agents.size())];
    switch (rng() % 5) {
    case 0: return f_not(random_sentence_over(m, atoms, rng, depth - 1));
    case 1:
        return f_and(random_sentence_over(m, atoms, rng, depth - 1),
                     random_sentence_over(m, atoms, rng, depth - 1));
    case 2: return f_aware(ag, random_sentence_over(m, atoms, rng, depth - 1));
    case 3: {
        Formula body = random_sentence_over(m, atoms, rng, depth - 1);
        return rbool(rng) ? f_xk(ag, std::move(body)) : f_ik(ag, std::move(body));
    }
    default: {
        static const Rational kBounds[] = {Rational(0), Rational(1, 4), Rational(1, 2),
                                           Rational(3, 4), Rational(1)};
        Rel rel = static_cast<Rel>(rng() % 5);
        return f_likelihood(ag,
                            {{Rational(1), random_sentence_over(m, atoms, rng, depth - 1)}},
                            rel, kBounds[rint(rng, 5)]);
    }
    }
}

std::vector<Proposition> atom_pool(const AwarenessModel& m,
                                   const std::set<std::string>& excluded) {
    std::vector<Proposition> atoms;
    for (const auto& p : m.real_props) {
        if (!excluded.count(p)) atoms.push_back({p, PropKind::Real});
    }
    for (const auto& p : m.shadow_props) {
        if (!excluded.count(p)) atoms.push_back({p, PropKind::Shadow});
    }
    return atoms;
}

Formula random_boolean_over(const std::vector<Proposition>& atoms, std::mt19937_64& rng,
                            int depth) {
    if (depth <= 0 || chance(rng, 1, 3)) return f_atom(atoms[rint(rng, atoms.size())]);
    switch (rng() % 3) {
    case 0: return f_not(random_boolean_over(atoms, rng, depth - 1));
    case 1:
        return f_and(random_boolean_over(atoms, rng, depth - 1),
                     random_boolean_over(atoms, rng, depth - 1));
    default:
        return f_or(random_boolean_over(atoms, rng, depth - 1),
                    random_boolean_over(atoms, rng, depth - 1));
    }
}

// A disjunction of valuation patterns over the real propositions common to
// every state the agent considers possible at the anchor, covering exactly
// the patterns shown by the absorbing states. True at each of them, false or
// gated nowhere that matters, and transported intact by replacement schemes.
Formula pattern_psi(const AwarenessModel& m, const Formula& trigger, const std::string& i,
                    const std::string& anchor) {
    std::set<std::string> common;
    bool first = true;
    for (const auto& t : m.acc(i, anchor)) {
        std::set<std::string> reals;
        for (const auto& p : m.lang(t)) {
            if (m.is_real(p)) reals.insert(p);
        }
        if (first) {
            common = std::move(reals);
            first = false;
        } else {
            std::set<std::string> cut;
            std::set_intersection(common.begin(), common.end(), reals.begin(), reals.end(),
                                  std::inserter(cut, cut.begin()));
            common = std::move(cut);
        }
    }
    if (common.empty()) return Formula();

    std::set<std::string> cons = cons_states(m, trigger, i, anchor);
    std::set<std::vector<bool>> patterns;
    for (const auto& t : m.acc(i, anchor)) {
        if (!cons.count(t)) continue;
        std::vector<bool> key;
        for (const auto& p : common) key.push_back(m.val(t, p));
        patterns.insert(std::move(key));
    }
    if (patterns.empty()) return Formula();

    Formula psi;
    for (const auto& key : patterns) {
        Formula conj;
        size_t n = 0;
        for (const auto& p : common) {
            Formula lit = f_atom(p, PropKind::Real);
            if (!key[n++]) lit = f_not(std::move(lit));
            conj = conj.valid() ? f_and(std::move(conj), std::move(lit)) : std::move(lit);
        }
        psi = psi.valid() ? f_or(std::move(psi), std::move(conj)) : std::move(conj);
    }
    return psi;
}

} // namespace

Formula random_static_sentence(const AwarenessModel& m, std::mt19937_64& rng, int depth) {
    auto atoms = atom_pool(m, {});
    if (atoms.empty()) throw InputError("model has no propositions");
    return random_sentence_over(m, atoms, rng, depth);
}

SoundnessReport check_soundness(AxiomName axiom, const SoundnessOptions& opts) {
    if (opts.gen.n_real < 1) {
        throw InputError("axiom checks need at least one real proposition");
    }
    if (axiom == AxiomName::AK && opts.gen.n_agents < 2) {
        throw InputError("the bystander scheme needs at least two agents");
    }

    SoundnessReport rep;
    rep.axiom = axiom;
    std::mt19937_64 rng(opts.seed);
    static const Rational kAlphas[] = {Rational(0), Rational(1, 4), Rational(1, 2),
                                       Rational(3, 4)};

    for (int n = 0; n < opts.samples; ++n) {
        AwarenessModel m = random_model(opts.gen, rng);

        AxiomParams p;
        p.i = m.agents[rint(rng, m.agents.size())];
        if (axiom == AxiomName::AK) {
            do {
                p.j = m.agents[rint(rng, m.agents.size())];
            } while (p.j == p.i);
        }

        size_t r1 = rint(rng, m.real_props.size());
        p.trigger = f_atom(m.real_props[r1], PropKind::Real);
        if (m.real_props.size() >= 2 && chance(rng, 1, 4)) {
            size_t r2 = rint(rng, m.real_props.size() - 1);
            if (r2 >= r1) ++r2;
            p.trigger = f_and(p.trigger, f_atom(m.real_props[r2], PropKind::Real));
        }
        p.alpha = kAlphas[rint(rng, 4)];

        std::vector<std::string> admissible;
        for (const auto& s : m.states) {
            const auto& L = m.lang(s);
            const auto ps = props(p.trigger);
            if (std::all_of(ps.begin(), ps.end(),
                            [&](const std::string& q) { return L.count(q) > 0; })) {
                admissible.push_back(s);
            }
        }
        // An instance can only be judged where the state's language can
        // express it; elsewhere every formula and its negation are false.
        auto expressible = [&m](const Formula& whole, const std::string& s) {
            const auto need = lang_props(whole);
            const auto& L = m.lang(s);
            return std::all_of(need.begin(), need.end(),
                               [&](const std::string& q) { return L.count(q) > 0; });
        };

        switch (axiom) {
        case AxiomName::Astar:
            p.psi = random_sentence_over(m, atom_pool(m, props(p.trigger)), rng, 2);
            break;
        case AxiomName::AK:
            p.psi = random_static_sentence(m, rng, 2);
            break;
        case AxiomName::Ka:
        case AxiomName::Pra: {
            Formula constructed;
            if (!admissible.empty() && rbool(rng)) {
                constructed = pattern_psi(m, p.trigger, p.i,
                                          admissible[rint(rng, admissible.size())]);
            }
            if (constructed.valid()) {
                p.psi = constructed;
            } else {
                // real propositions only: they survive replacement schemes
                std::vector<Proposition> reals;
                for (const auto& q : m.real_props) reals.push_back({q, PropKind::Real});
                p.psi = random_boolean_over(reals, rng, 2);
            }
            break;
        }
        case AxiomName::KbExperimental:
        case AxiomName::PrbExperimental: {
            p.var = "x";
            Formula body = f_var("x");
            if (rbool(rng)) {
                body = f_and(body,
                             f_atom(m.real_props[rint(rng, m.real_props.size())],
                                    PropKind::Real));
            }
            p.psi = body;
            break;
        }
        }

        AxiomInstanceParts parts = axiom_instance_parts(axiom, p, opts.k_reading);
        rep.models++;

        TransitionMode mode = m.agents.size() == 1 ? TransitionMode::SingleAgent
                                                   : TransitionMode::MultiAgent;
        for (const auto& s : admissible) {
            if (!expressible(parts.whole, s)) continue;
            if (axiom == AxiomName::Astar || axiom == AxiomName::AK) {
                // The biconditional schemes describe the update itself, so
                // they are only meaningful where the update exists.
                try {
                    build_transition(m, s, p.trigger, p.i, mode);
                } catch (const EvalError&) {
                    continue;
                }
            }
            rep.evaluations++;
            bool ant = satisfies(m, s, parts.antecedent);
            if (ant) rep.non_vacuous++;
            if (!satisfies(m, s, parts.whole)) {
                rep.failures++;
                if (rep.counterexamples.size() < 3) {
                    rep.counterexamples.push_back({save_model(m), s, render(parts.whole),
                                                   ant ? "antecedent held"
                                                       : "antecedent failed"});
                }
            }
        }
    }
    return rep;
}

} // namespace aware
