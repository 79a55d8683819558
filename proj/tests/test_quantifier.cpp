#include "doctest.h"

#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aware/axioms.hpp"
#include "aware/errors.hpp"
#include "aware/model.hpp"
#include "aware/semantics.hpp"

using namespace aware;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

using Key = std::pair<std::set<std::string>, std::set<std::string>>; // props, extension

Key key_of(const AwarenessModel& m, const Formula& f) {
    return {props(f), intension(m, f)};
}

// Every quantifier-free sentence over the anchor state's vocabulary up to the
// given connective depth, one representative per (propositions, extension)
// class. Collapsing the classes is what makes depth 4 enumerable; the
// interchangeability test below justifies it.
std::vector<Formula> enumerate_sentences(const AwarenessModel& m, const std::string& anchor,
                                         int max_depth) {
    static const Rational grid[] = {Rational(0),    Rational(1, 4), Rational(1, 3),
                                    Rational(1, 2), Rational(2, 3), Rational(3, 4),
                                    Rational(1)};
    std::map<Key, Formula> seen;
    std::vector<Formula> frontier;
    auto add = [&](const Formula& f) {
        Key k = key_of(m, f);
        if (seen.emplace(k, f).second) frontier.push_back(f);
    };
    for (const auto& p : m.lang(anchor)) {
        add(f_atom(p, m.is_shadow(p) ? PropKind::Shadow : PropKind::Real));
    }
    for (int depth = 1; depth <= max_depth; ++depth) {
        std::vector<Formula> previous;
        previous.reserve(seen.size());
        for (const auto& [k, f] : seen) previous.push_back(f);
        frontier.clear();
        for (const Formula& f : previous) {
            add(f_not(f));
            for (const Formula& g : previous) add(f_and(f, g));
            for (const auto& a : m.agents) {
                add(f_aware(a, f));
                add(f_xk(a, f));
                for (const Rational& b : grid) {
                    for (int r = 0; r < 5; ++r) {
                        add(f_likelihood(a, {{Rational(1), f}}, static_cast<Rel>(r), b));
                    }
                }
            }
        }
    }
    std::vector<Formula> out;
    out.reserve(seen.size());
    for (const auto& [k, f] : seen) out.push_back(f);
    return out;
}

bool oracle_forall(const AwarenessModel& m, const std::string& anchor, const Formula& body,
                   const std::vector<Formula>& domain) {
    for (const Formula& c : domain) {
        if (!satisfies(m, anchor, substitute(body, "x", c))) return false;
    }
    return true;
}

bool oracle_exists(const AwarenessModel& m, const std::string& anchor, const Formula& body,
                   const std::vector<Formula>& domain) {
    for (const Formula& c : domain) {
        if (satisfies(m, anchor, substitute(body, "x", c))) return true;
    }
    return false;
}

AwarenessModel small_model(std::mt19937_64& rng, int agents) {
    GeneratorConfig cfg;
    cfg.n_agents = agents;
    cfg.n_states = 3;
    cfg.n_real = 1;
    cfg.n_shadow = 1; // languages hold at most two propositions
    return random_model(cfg, rng);
}

} // namespace

TEST_CASE("fixpoint quantification agrees with brute-force enumeration") {
    std::mt19937_64 rng(1234);
    int disagreements = 0;
    for (int k = 0; k < 100; ++k) {
        AwarenessModel m = small_model(rng, 1 + static_cast<int>(k % 2));
        REQUIRE(validate(m).ok());
        const std::string i = m.agents[0];
        const std::string j = m.agents.back();

        Formula all_aware = f_forall("x", f_aware(i, f_var("x")));
        Formula some_unaware = f_exists("x", f_not(f_aware(i, f_var("x"))));
        Formula dominance =
            f_forall("x", f_implies(f_aware(j, f_var("x")), f_aware(i, f_var("x"))));

        for (const auto& s : m.states) {
            std::vector<Formula> domain = enumerate_sentences(m, s, 4);
            if (satisfies(m, s, all_aware) !=
                oracle_forall(m, s, f_aware(i, f_var("x")), domain)) {
                ++disagreements;
            }
            if (satisfies(m, s, some_unaware) !=
                oracle_exists(m, s, f_not(f_aware(i, f_var("x"))), domain)) {
                ++disagreements;
            }
            if (satisfies(m, s, dominance) !=
                oracle_forall(m, s, f_implies(f_aware(j, f_var("x")), f_aware(i, f_var("x"))),
                              domain)) {
                ++disagreements;
            }
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("sentences with equal fingerprints are interchangeable everywhere") {
    std::mt19937_64 rng(555);
    std::vector<Formula> contexts = {
        f_aware("i", f_var("x")),
        f_not(f_var("x")),
        f_xk("i", f_var("x")),
        f_likelihood("i", {{Rational(1), f_var("x")}}, Rel::Gt, Rational(1, 4)),
        f_and(f_var("x"), f_var("x")),
    };
    int pairs_tested = 0;
    for (int k = 0; k < 40 && pairs_tested < 60; ++k) {
        AwarenessModel m = small_model(rng, 1);
        // the generator names its single agent "i"
        REQUIRE(m.has_agent("i"));
        for (const auto& s : m.states) {
            std::map<Key, std::vector<Formula>> classes;
            for (const Formula& f : enumerate_sentences(m, s, 2)) {
                classes[key_of(m, f)].push_back(f);
            }
            // representatives were deduplicated, so regenerate a few raw pairs
            for (const auto& p : m.lang(s)) {
                Formula a = f_atom(p, m.is_shadow(p) ? PropKind::Shadow : PropKind::Real);
                Formula twice = f_and(a, a);  // same fingerprint as the atom
                Formula thrice = f_and(a, f_and(a, a));
                classes[key_of(m, twice)].push_back(twice);
                classes[key_of(m, thrice)].push_back(thrice);
            }
            for (const auto& [key, members] : classes) {
                if (members.size() < 2) continue;
                ++pairs_tested;
                for (const Formula& ctx : contexts) {
                    for (const auto& t : m.states) {
                        CHECK(satisfies(m, t, substitute(ctx, "x", members.front())) ==
                              satisfies(m, t, substitute(ctx, "x", members.back())));
                    }
                }
            }
        }
    }
    CHECK(pairs_tested >= 10);
}

TEST_CASE("full awareness is exactly awareness of the whole language") {
    std::mt19937_64 rng(777);
    for (int k = 0; k < 60; ++k) {
        AwarenessModel m = small_model(rng, 1 + static_cast<int>(k % 3 == 0));
        for (const auto& i : m.agents) {
            Formula all_aware = f_forall("x", f_aware(i, f_var("x")));
            for (const auto& s : m.states) {
                CHECK(satisfies(m, s, all_aware) == (m.aware_set(i, s) == m.lang(s)));
            }
        }
    }
}

TEST_CASE("a true witness inside awareness exists exactly when awareness is nonempty") {
    std::mt19937_64 rng(778);
    for (int k = 0; k < 60; ++k) {
        AwarenessModel m = small_model(rng, 1);
        Formula f = f_exists("x", f_and(f_var("x"), f_aware("i", f_var("x"))));
        for (const auto& s : m.states) {
            CHECK(satisfies(m, s, f) == !m.aware_set("i", s).empty());
        }
    }
}

TEST_CASE("partial awareness splits into an aware and an unaware witness") {
    std::mt19937_64 rng(779);
    for (int k = 0; k < 60; ++k) {
        AwarenessModel m = small_model(rng, 1);
        Formula f = f_exists("x", f_and(f_aware("i", f_var("x")),
                                        f_exists("y", f_not(f_aware("i", f_var("y"))))));
        for (const auto& s : m.states) {
            const auto& A = m.aware_set("i", s);
            bool expected = !A.empty() && A != m.lang(s);
            CHECK(satisfies(m, s, f) == expected);
        }
    }
}

TEST_CASE("nested quantifiers respect the environment") {
    std::mt19937_64 rng(780);
    Formula monotone = f_forall(
        "x", f_forall("y", f_implies(f_aware("i", f_and(f_var("x"), f_var("y"))),
                                     f_aware("i", f_var("x")))));
    for (int k = 0; k < 30; ++k) {
        AwarenessModel m = small_model(rng, 1);
        for (const auto& s : m.states) {
            CHECK(satisfies(m, s, monotone));
        }
    }
}

TEST_CASE("rebinding the same variable shadows the outer binding") {
    std::mt19937_64 rng(781);
    for (int k = 0; k < 30; ++k) {
        AwarenessModel m = small_model(rng, 2);
        const std::string& i = m.agents[0];
        const std::string& j = m.agents[1];
        Formula shadowed =
            f_forall("x", f_and(f_aware(i, f_var("x")),
                                f_forall("x", f_aware(j, f_var("x")))));
        Formula split = f_and(f_forall("x", f_aware(i, f_var("x"))),
                              f_forall("y", f_aware(j, f_var("y"))));
        for (const auto& s : m.states) {
            CHECK(satisfies(m, s, shadowed) == satisfies(m, s, split));
        }
    }
}

TEST_CASE("a quantified variable may not cross a discovery operator") {
    AwarenessModel m = load_model_file(fixture_path("three_state.json"));
    Formula crossing =
        f_forall("x", f_dynamic(f_atom("p"), "i", f_aware("i", f_var("x"))));
    CHECK_THROWS_AS(satisfies(m, "s1", crossing), EvalError);

    // a discovery beside the variable is fine
    Formula beside = f_forall(
        "x", f_and(f_aware("i", f_var("x")), f_dynamic(f_atom("p"), "i", f_atom("p"))));
    CHECK_NOTHROW(satisfies(m, "s1", beside));
}

TEST_CASE("the linear closure only grows the quantifier domain") {
    std::mt19937_64 rng(782);
    for (int k = 0; k < 20; ++k) {
        AwarenessModel m = small_model(rng, 1);
        for (const auto& s : m.states) {
            auto basic = definable_fingerprints(m, s, ClosureMode::Basic);
            auto linear = definable_fingerprints(m, s, ClosureMode::Linear);
            std::set<Fingerprint> linear_set(linear.begin(), linear.end());
            for (const Fingerprint& fp : basic) {
                CHECK(linear_set.count(fp) == 1);
            }
            CHECK(linear.size() >= basic.size());
        }
    }
}

TEST_CASE("closure mode is plumbed through evaluation options") {
    AwarenessModel m = load_model_file(fixture_path("three_state.json"));
    EvalOptions opts;
    opts.closure = ClosureMode::Linear;
    Formula f = f_forall("x", f_aware("i", f_var("x")));
    // s3's language is {p} and i is aware of p: true under both closures
    CHECK(satisfies(m, "s3", f, opts));
    CHECK(satisfies(m, "s3", f));
    CHECK(!satisfies(m, "s1", f, opts));
}
