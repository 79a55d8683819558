#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "aware/semantics.hpp"

namespace aware {

// A certified quality rating: true exactly at the listed qualities.
struct RatingSpec {
    std::string name;
    std::set<int> qualities;
};

struct ShadowSpec {
    std::string name;
    std::set<int> qualities;
};

// One buyer type's conception: its shadow vocabulary and which shadow stands
// in for each rating the buyer has not conceived.
struct ShadowStructure {
    std::vector<ShadowSpec> shadows;
    std::map<std::string, std::string> replacements; // rating -> shadow
};

struct DisclosureConfig {
    int n_qualities = 0;
    int n_types = 0;
    std::map<int, std::vector<Rational>> priors;        // type -> prior over qualities
    std::vector<Rational> utilities;                    // utility of quality n (default n)
    std::vector<RatingSpec> ratings;                    // ordered coarse-to-fine bands
    std::map<int, ShadowStructure> structures;          // type -> conception
    std::map<int, std::vector<Rational>> seller_beliefs; // quality -> belief over types
};

DisclosureConfig load_disclosure_config(const std::string& json_text);
DisclosureConfig load_disclosure_config_file(const std::string& path);

// The two-agent market structure: for each quality and buyer type, one state
// where the ratings are the language and one where the buyer's conception
// is. The buyer cannot tell qualities apart; the seller cannot tell buyer
// types apart.
AwarenessModel build_disclosure_model(const DisclosureConfig& cfg);

// Names of the model's states.
std::string market_state(int quality, int type);     // ratings language
std::string conception_state(int quality, int type); // buyer-conception language

// Expected utility of the good under the buyer's prior, before any rating is
// shown.
Rational no_disclosure_wtp(const DisclosureConfig& cfg, int type);

struct WtpResult {
    Rational wtp;
    std::vector<Rational> posterior; // over qualities, after seeing the rating
};

// What a type-m buyer pays after the seller discloses the rating: the rating
// is routed through the type's stand-in shadow by the awareness transition,
// then the buyer conditions on it being true.
WtpResult willingness_to_pay(const DisclosureConfig& cfg, int type, const std::string& rating);

enum class Decision { Disclose, Withhold };

struct DisclosureOutcome {
    std::map<int, Rational> no_disclosure;                     // per type
    std::map<int, std::map<std::string, WtpResult>> disclosed; // type -> rating -> result
    std::map<int, Decision> decisions;                         // per quality
};

// Full table plus the seller's decision at each quality: disclose exactly
// when the belief-weighted disclosed price strictly beats the belief-weighted
// undisclosed price.
DisclosureOutcome disclosure_outcome(const DisclosureConfig& cfg);

std::string to_string(Decision d);

} // namespace aware
