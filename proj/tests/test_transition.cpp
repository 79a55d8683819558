#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "aware/axioms.hpp"
#include "aware/errors.hpp"
#include "aware/model.hpp"
#include "aware/semantics.hpp"
#include "aware/transition.hpp"

using namespace aware;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

bool clause_status(const VerificationReport& rep, const std::string& clause,
                   ClauseStatus status) {
    for (const auto& e : rep.entries) {
        if (e.clause == clause) return e.status == status;
    }
    return false;
}

// Content signature used to narrow isomorphism candidates.
std::string signature(const AwarenessModel& m, const std::string& s) {
    std::string sig;
    for (const auto& p : m.lang(s)) sig += p + (m.val(s, p) ? "+" : "-");
    for (const auto& a : m.agents) {
        sig += "|" + a + ":";
        for (const auto& p : m.aware_set(a, s)) sig += p + ",";
    }
    return sig;
}

bool extend_isomorphism(const AwarenessModel& a, const AwarenessModel& b,
                        const std::vector<std::string>& order, size_t idx,
                        std::map<std::string, std::string>& image,
                        std::set<std::string>& used) {
    auto edges_match = [&]() {
        for (const auto& agent : a.agents) {
            for (const auto& [s, t_img] : image) {
                for (const auto& t : a.acc(agent, s)) {
                    auto it = image.find(t);
                    if (it == image.end()) continue;
                    if (!b.acc(agent, t_img).count(it->second)) return false;
                    if (a.pr(agent, s, t) != b.pr(agent, t_img, it->second)) return false;
                }
                if (a.acc(agent, s).size() != b.acc(agent, t_img).size()) return false;
            }
        }
        return true;
    };
    if (idx == order.size()) return edges_match();
    const std::string& s = order[idx];
    for (const auto& t : b.states) {
        if (used.count(t) || signature(a, s) != signature(b, t)) continue;
        image[s] = t;
        used.insert(t);
        if (edges_match() && extend_isomorphism(a, b, order, idx + 1, image, used)) return true;
        image.erase(s);
        used.erase(t);
    }
    return false;
}

// A bijection witnessing that the two structures agree on languages,
// valuations, awareness, access, and probabilities.
std::map<std::string, std::string> find_isomorphism(const AwarenessModel& a,
                                                    const AwarenessModel& b) {
    std::map<std::string, std::string> image;
    std::set<std::string> used;
    if (a.states.size() != b.states.size() || a.agents != b.agents) return {};
    if (!extend_isomorphism(a, b, a.states, 0, image, used)) return {};
    return image;
}

} // namespace

TEST_CASE("a single-agent discovery splits beliefs across the stand-ins") {
    AwarenessModel m = load_model_file(fixture_path("discovery_single.json"));
    Formula trigger = f_atom("p");

    TransitionResult res =
        build_transition(m, "s", trigger, "i", TransitionMode::SingleAgent);
    CHECK(res.after.states.size() == 3);
    CHECK(!res.unconstrained);
    CHECK(validate(res.after).ok());

    const auto& K = res.after.acc("i", res.root);
    CHECK(K.size() == 2);
    // the updated root is aware of the discovery
    CHECK(res.after.aware_set("i", res.root).count("p") == 1);

    // exactly one considered state renders p true, with probability 1/2
    std::vector<std::string> p_true;
    for (const auto& t : K) {
        if (res.after.lang(t).count("p") && res.after.val(t, "p")) p_true.push_back(t);
    }
    REQUIRE(p_true.size() == 1);
    CHECK(res.after.pr("i", res.root, p_true[0]) == Rational(1, 2));

    VerificationReport rep =
        verify_transition(m, res.after, res.relation, trigger, "i", "s",
                          TransitionMode::SingleAgent, res.root);
    CHECK(rep.ok());
}

TEST_CASE("explicit stand-in weights steer the posterior") {
    AwarenessModel m = load_model_file(fixture_path("discovery_single.json"));
    Formula trigger = f_atom("p");

    TransitionRuleHandle rule;
    rule.weight.kind = WeightPolicy::Kind::Explicit;

    SUBCASE("even weights reproduce the uniform split") {
        rule.weight.weights = {{"t", {{"p~q", Rational(1, 2)}, {"p~q'", Rational(1, 2)}}}};
        TransitionResult res = build_transition(m, "s", trigger, "i",
                                                TransitionMode::SingleAgent, rule);
        TransitionResult uni =
            build_transition(m, "s", trigger, "i", TransitionMode::SingleAgent);
        CHECK(save_model(res.after) == save_model(uni.after));
    }
    SUBCASE("a skewed weight shifts exactly that much mass") {
        rule.weight.weights = {{"t", {{"p~q", Rational(1, 4)}, {"p~q'", Rational(3, 4)}}}};
        TransitionResult res = build_transition(m, "s", trigger, "i",
                                                TransitionMode::SingleAgent, rule);
        Rational on_true = 0;
        for (const auto& t : res.after.acc("i", res.root)) {
            if (res.after.lang(t).count("p") && res.after.val(t, "p")) {
                on_true += res.after.pr("i", res.root, t);
            }
        }
        CHECK(on_true == Rational(1, 4));
        CHECK(verify_transition(m, res.after, res.relation, trigger, "i", "s",
                                TransitionMode::SingleAgent, res.root)
                  .ok());
    }
    SUBCASE("weights that do not sum to one are rejected") {
        rule.weight.weights = {{"t", {{"p~q", Rational(1, 4)}, {"p~q'", Rational(1, 4)}}}};
        CHECK_THROWS_AS(build_transition(m, "s", trigger, "i",
                                         TransitionMode::SingleAgent, rule),
                        InputError);
    }
}

TEST_CASE("the multi-agent discovery reproduces the eight-state structure") {
    AwarenessModel before = load_model_file(fixture_path("three_state.json"));
    AwarenessModel golden = load_model_file(fixture_path("discovery_multi_after.json"));
    std::vector<TransitionTriple> golden_rel =
        load_relation_file(fixture_path("discovery_multi_T.json"));
    Formula trigger = f_atom("p'");

    TransitionResult res =
        build_transition(before, "s1", trigger, "i", TransitionMode::MultiAgent);
    REQUIRE(res.after.states.size() == 8);

    auto image = find_isomorphism(res.after, golden);
    REQUIRE(!image.empty());
    CHECK(image.at(res.root) == "r1");

    // the relation corresponds triple-for-triple through the bijection
    std::set<std::string> got, want;
    for (const auto& tr : res.relation) {
        got.insert(tr.from + ">" + image.at(tr.to) + ">" + tr.scheme.id_string());
    }
    for (const auto& tr : golden_rel) {
        want.insert(tr.from + ">" + tr.to + ">" + tr.scheme.id_string());
    }
    CHECK(got == want);

    // both the builder's output and the hand-entered golden satisfy T1-T4
    CHECK(verify_transition(before, res.after, res.relation, trigger, "i", "s1",
                            TransitionMode::MultiAgent, res.root)
              .ok());
    CHECK(verify_transition(before, golden, golden_rel, trigger, "i", "s1",
                            TransitionMode::MultiAgent, "r1")
              .ok());
}

TEST_CASE("after the discovery the agent knows it and others see it") {
    AwarenessModel before = load_model_file(fixture_path("three_state.json"));
    TransitionResult res =
        build_transition(before, "s1", f_atom("p'"), "i", TransitionMode::MultiAgent);
    SymbolTable tab = res.after.symbols();
    CHECK(satisfies(res.after, res.root, parse_formula("X[i] p", &tab)));
    CHECK(satisfies(res.after, res.root, parse_formula("X[j] ~A[i] p'", &tab)));
    // at the state i now considers, i believes itself fully aware
    std::string updated;
    for (const auto& t : res.after.acc("i", res.root)) updated = t;
    CHECK(satisfies(res.after, updated,
                    parse_formula("forall x. A[i](x)", &tab)));
}

TEST_CASE("pruning keeps exactly the states the root can reach") {
    AwarenessModel before = load_model_file(fixture_path("three_state.json"));
    TransitionResult res =
        build_transition(before, "s1", f_atom("p'"), "i", TransitionMode::MultiAgent,
                         {}, PruneMode::Reachable);
    CHECK(res.after.states.size() == 7);
    CHECK(verify_transition(before, res.after, res.relation, f_atom("p'"), "i", "s1",
                            TransitionMode::MultiAgent, res.root)
              .ok());
}

TEST_CASE("discovering something already noticed changes nothing") {
    AwarenessModel before = load_model_file(fixture_path("three_state.json"));
    TransitionResult res =
        build_transition(before, "s1", f_atom("p"), "i", TransitionMode::MultiAgent);
    CHECK(res.root == "s1");
    CHECK(save_model(res.after) == save_model(before));
    CHECK(res.relation.size() == before.states.size());
    for (const auto& tr : res.relation) {
        CHECK(tr.from == tr.to);
        CHECK(tr.scheme.is_id());
    }
    CHECK(verify_transition(before, res.after, res.relation, f_atom("p"), "i", "s1",
                            TransitionMode::MultiAgent, res.root)
              .ok());
}

TEST_CASE("posterior mass is the conditioned prior, state by state") {
    std::mt19937_64 rng(4242);
    int instances = 0;
    while (instances < 200) {
        GeneratorConfig cfg;
        cfg.n_agents = 1;
        cfg.n_states = 3 + static_cast<int>(rng() % 3);
        AwarenessModel m = random_model(cfg, rng);
        const std::string anchor = m.states[rng() % m.states.size()];

        std::vector<std::string> in_lang;
        for (const auto& p : m.real_props) {
            if (m.lang(anchor).count(p) && !m.aware_set("i", anchor).count(p)) {
                in_lang.push_back(p);
            }
        }
        if (in_lang.empty()) continue;
        Formula trigger = f_atom(in_lang[rng() % in_lang.size()], PropKind::Real);

        std::set<std::string> cons = cons_states(m, trigger, "i", anchor);
        Rational denom = m.pr_mass("i", anchor, cons);
        if (denom == 0) continue;

        TransitionResult res;
        try {
            res = build_transition(m, anchor, trigger, "i", TransitionMode::SingleAgent);
        } catch (const EvalError&) {
            continue; // no considered state can absorb the discovery
        }
        ++instances;
        CHECK(!res.unconstrained);

        // group the updated states by their origin
        std::map<std::string, Rational> rep_mass;
        Rational total = 0;
        for (const auto& tr : res.relation) {
            if (tr.to == res.root) continue;
            Rational mass = res.after.pr("i", res.root, tr.to);
            rep_mass[tr.from] += mass;
            total += mass;
        }
        CHECK(total == Rational(1));
        for (const auto& [origin, mass] : rep_mass) {
            CHECK(cons.count(origin) == 1);
            CHECK(mass == m.pr("i", anchor, origin) / denom);
        }
    }
}

TEST_CASE("zero prior mass on the absorbing states yields a uniform posterior") {
    AwarenessModel m = load_model(R"({
      "agents": ["i"],
      "real_props": ["p", "r"],
      "shadow_props": ["q"],
      "states": [
        {"name": "s", "language": ["p", "r"], "valuation": {"p": true, "r": true},
         "awareness": {"i": ["r"]}},
        {"name": "t1", "language": ["r"], "valuation": {"r": true},
         "awareness": {"i": ["r"]}},
        {"name": "t2", "language": ["q", "r"], "valuation": {"q": true, "r": false},
         "awareness": {"i": ["r"]}}
      ],
      "access": {"i": {"s": ["t1", "t2"], "t1": ["t1", "t2"], "t2": ["t1", "t2"]}},
      "prob": {"i": {"s": {"t1": "1"}, "t1": {"t1": "1"}, "t2": {"t1": "1"}}}
    })");
    REQUIRE(validate(m).ok());
    TransitionResult res =
        build_transition(m, "s", f_atom("p"), "i", TransitionMode::SingleAgent);
    CHECK(res.unconstrained);
    const auto& K = res.after.acc("i", res.root);
    REQUIRE(K.size() == 1); // t2's single stand-in for p
    CHECK(res.after.pr("i", res.root, *K.begin()) == Rational(1));
    CHECK(validate(res.after).ok());
}

TEST_CASE("impossible discoveries are rejected") {
    AwarenessModel m = load_model_file(fixture_path("discovery_single.json"));
    // vocabulary missing at the anchor
    CHECK_THROWS_AS(build_transition(m, "t", f_atom("p"), "i",
                                     TransitionMode::SingleAgent),
                    EvalError);
    AwarenessModel multi = load_model_file(fixture_path("three_state.json"));
    // single-agent build of a two-agent structure
    CHECK_THROWS_AS(build_transition(multi, "s1", f_atom("p'"), "i",
                                     TransitionMode::SingleAgent),
                    InputError);
    // nothing the agent considers can absorb a two-proposition discovery
    AwarenessModel narrow = load_model(R"({
      "agents": ["i"],
      "real_props": ["p", "r"],
      "shadow_props": ["q"],
      "states": [
        {"name": "s", "language": ["p", "r"], "valuation": {"p": true, "r": true},
         "awareness": {"i": []}},
        {"name": "t", "language": ["q"], "valuation": {"q": true},
         "awareness": {"i": []}}
      ],
      "access": {"i": {"s": ["t"], "t": ["t"]}},
      "prob": {"i": {"s": {"t": "1"}, "t": {"t": "1"}}}
    })");
    REQUIRE(validate(narrow).ok());
    CHECK_THROWS_AS(build_transition(narrow, "s", f_and(f_atom("p"), f_atom("r")), "i",
                                     TransitionMode::SingleAgent),
                    EvalError);
}

TEST_CASE("schemes restrict to the pairs that can act at a state") {
    ReplacementScheme f;
    f.mapping = {{"p", "q"}, {"r", "u"}};
    CHECK(f.id_string() == "p~q+r~u");
    CHECK(f.sources() == std::set<std::string>{"p", "r"});
    CHECK(f.images() == std::set<std::string>{"q", "u"});

    ReplacementScheme eff = effective_scheme(f, {"q", "z"});
    CHECK(eff.mapping == std::map<std::string, std::string>{{"p", "q"}});
    // the source must be novel: p already present blocks the pair
    CHECK(effective_scheme(f, {"p", "q"}).is_id());
    CHECK(ReplacementScheme{}.id_string() == "id");
}

TEST_CASE("replacement content checks match the golden correspondence") {
    AwarenessModel before = load_model_file(fixture_path("three_state.json"));
    AwarenessModel after = load_model_file(fixture_path("discovery_multi_after.json"));
    ReplacementScheme swap;
    swap.mapping = {{"p'", "q"}};
    CHECK(is_f_replacement(before, "s2", after, "u2", swap));
    CHECK(is_f_replacement(before, "s1", after, "b1", ReplacementScheme{}));
    CHECK(!is_f_replacement(before, "s2", after, "u2", ReplacementScheme{}));
    CHECK(!is_f_replacement(before, "s3", after, "u2", swap));
}

TEST_CASE("the verifier pinpoints each broken clause") {
    AwarenessModel before = load_model_file(fixture_path("three_state.json"));
    AwarenessModel golden = load_model_file(fixture_path("discovery_multi_after.json"));
    std::vector<TransitionTriple> rel =
        load_relation_file(fixture_path("discovery_multi_T.json"));
    Formula trigger = f_atom("p'");
    auto check = [&](const AwarenessModel& tampered, const std::string& clause) {
        VerificationReport rep = verify_transition(before, tampered, rel, trigger, "i",
                                                   "s1", TransitionMode::MultiAgent, "r1");
        CHECK(!rep.ok());
        CHECK(clause_status(rep, clause, ClauseStatus::Fail));
    };

    SUBCASE("T1 content rewrite") {
        AwarenessModel t = golden;
        t.valuation["b1"]["p"] = false;
        check(t, "T1");
    }
    SUBCASE("T2 root awareness") {
        AwarenessModel t = golden;
        t.awareness["i"]["r1"] = {"p"};
        check(t, "T2");
    }
    SUBCASE("T3b posterior mass") {
        AwarenessModel t = golden;
        t.prob["i"]["r1"] = {{"u2", Rational(1, 2)}};
        check(t, "T3b");
    }
    SUBCASE("T3c bystander awareness at the considered state") {
        AwarenessModel t = golden;
        t.awareness["j"]["u2"] = {"p"};
        check(t, "T3c");
    }
    SUBCASE("T4b undisturbed views") {
        AwarenessModel t = golden;
        t.access["j"]["u2"] = {"b1"};
        check(t, "T4b");
    }
}

TEST_CASE("relation JSON round-trips") {
    std::vector<TransitionTriple> rel =
        load_relation_file(fixture_path("discovery_multi_T.json"));
    REQUIRE(rel.size() == 8);
    std::string text = save_relation(rel);
    std::vector<TransitionTriple> back = load_relation(text);
    REQUIRE(back.size() == rel.size());
    for (size_t k = 0; k < rel.size(); ++k) {
        CHECK(back[k].from == rel[k].from);
        CHECK(back[k].to == rel[k].to);
        CHECK(back[k].scheme == rel[k].scheme);
    }
    CHECK_THROWS_AS(load_relation("{}"), InputError);
}
