#include "doctest.h"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "aware/disclosure.hpp"
#include "aware/errors.hpp"
#include "aware/model.hpp"

using namespace aware;
using nlohmann::json;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

json fixture_json() {
    std::ifstream in(fixture_path("rating_disclosure.json"));
    REQUIRE(in.good());
    json doc;
    in >> doc;
    return doc;
}

} // namespace

TEST_CASE("the market structure is well-formed and correctly wired") {
    DisclosureConfig cfg = load_disclosure_config_file(fixture_path("rating_disclosure.json"));
    CHECK(cfg.n_qualities == 3);
    CHECK(cfg.n_types == 2);

    AwarenessModel m = build_disclosure_model(cfg);
    CHECK(validate(m).ok());
    CHECK(m.states.size() == 12); // one market and one conception state per pair

    // the buyer cannot tell qualities apart but knows its own type
    CHECK(m.acc("b", market_state(1, 1)) ==
          std::set<std::string>{conception_state(1, 1), conception_state(2, 1),
                                conception_state(3, 1)});
    // the seller cannot tell buyer types apart but knows its quality
    CHECK(m.acc("s", market_state(2, 1)) ==
          std::set<std::string>{market_state(2, 1), market_state(2, 2)});
    // the buyer starts aware of nothing; the seller misses nothing
    CHECK(m.aware_set("b", market_state(1, 1)).empty());
    CHECK(m.aware_set("s", market_state(1, 1)) == m.lang(market_state(1, 1)));
}

TEST_CASE("undisclosed willingness to pay is the prior expected utility") {
    DisclosureConfig cfg = load_disclosure_config_file(fixture_path("rating_disclosure.json"));
    CHECK(no_disclosure_wtp(cfg, 1) == Rational(7, 4));
    CHECK(no_disclosure_wtp(cfg, 2) == Rational(7, 4));
}

TEST_CASE("disclosure routes a rating through the buyer's stand-in") {
    DisclosureConfig cfg = load_disclosure_config_file(fixture_path("rating_disclosure.json"));

    // the fully-conceiving type reads each rating at face value
    WtpResult fine = willingness_to_pay(cfg, 1, "p2");
    CHECK(fine.wtp == Rational(2));
    CHECK(fine.posterior == std::vector<Rational>{Rational(0), Rational(1), Rational(0)});

    // the coarse type folds p2 into its low-quality stand-in
    WtpResult coarse = willingness_to_pay(cfg, 2, "p2");
    CHECK(coarse.wtp == Rational(4, 3));
    CHECK(coarse.posterior ==
          std::vector<Rational>{Rational(2, 3), Rational(1, 3), Rational(0)});

    // both types understand the top rating perfectly
    CHECK(willingness_to_pay(cfg, 1, "p3").wtp == Rational(3));
    CHECK(willingness_to_pay(cfg, 2, "p3").wtp == Rational(3));
}

TEST_CASE("sellers disclose exactly when it beats the blended status quo") {
    DisclosureConfig cfg = load_disclosure_config_file(fixture_path("rating_disclosure.json"));
    DisclosureOutcome out = disclosure_outcome(cfg);

    CHECK(out.no_disclosure.at(1) == Rational(7, 4));
    CHECK(out.decisions.at(1) == Decision::Withhold);
    CHECK(out.decisions.at(2) == Decision::Disclose); // belief 3/4 clears the bar
    CHECK(out.decisions.at(3) == Decision::Disclose);
    CHECK(out.disclosed.at(1).at("p2").wtp == Rational(2));
    CHECK(out.disclosed.at(2).at("p2").wtp == Rational(4, 3));
    CHECK(to_string(Decision::Disclose) == "Disclose");
    CHECK(to_string(Decision::Withhold) == "Withhold");
}

TEST_CASE("the middle quality flips exactly above the critical belief") {
    // blended disclosed price: beta*2 + (1-beta)*4/3, flat undisclosed 7/4;
    // equality at beta = 5/8, and ties favor withholding
    auto decide = [&](const std::string& beta_lo, const std::string& beta_hi) {
        json doc = fixture_json();
        doc["seller_beliefs"]["2"] = {beta_lo, beta_hi};
        DisclosureConfig cfg = load_disclosure_config(doc.dump());
        return disclosure_outcome(cfg).decisions.at(2);
    };
    CHECK(decide("1/2", "1/2") == Decision::Withhold);
    CHECK(decide("5/8", "3/8") == Decision::Withhold);
    CHECK(decide("11/16", "5/16") == Decision::Disclose);
}

TEST_CASE("the scenario loader rejects malformed structures") {
    SUBCASE("priors must sum to one") {
        json doc = fixture_json();
        doc["priors"]["1"] = {"1/2", "1/4", "1/8"};
        CHECK_THROWS_AS(load_disclosure_config(doc.dump()), InputError);
    }
    SUBCASE("rating bands must cover every quality") {
        json doc = fixture_json();
        doc["ratings"] = json::array(
            {{{"name", "p1"}, {"qualities", {1}}}, {{"name", "p2"}, {"qualities", {2}}}});
        CHECK_THROWS_AS(load_disclosure_config(doc.dump()), InputError);
    }
    SUBCASE("rating bands may not overlap") {
        json doc = fixture_json();
        doc["ratings"][0]["qualities"] = {1, 2};
        CHECK_THROWS_AS(load_disclosure_config(doc.dump()), InputError);
    }
    SUBCASE("every rating needs a stand-in per coarse type") {
        json doc = fixture_json();
        doc["shadow_structures"]["2"]["replacements"].erase("p2");
        CHECK_THROWS_AS(load_disclosure_config(doc.dump()), InputError);
    }
    SUBCASE("stand-ins may not reuse rating names") {
        json doc = fixture_json();
        doc["shadow_structures"]["1"]["shadows"][0]["name"] = "p1";
        CHECK_THROWS_AS(load_disclosure_config(doc.dump()), InputError);
    }
    SUBCASE("unknown keys are rejected") {
        json doc = fixture_json();
        doc["discount"] = "1/2";
        CHECK_THROWS_AS(load_disclosure_config(doc.dump()), InputError);
    }
    SUBCASE("seller beliefs are required for every quality") {
        json doc = fixture_json();
        doc["seller_beliefs"].erase("3");
        CHECK_THROWS_AS(load_disclosure_config(doc.dump()), InputError);
    }
}
