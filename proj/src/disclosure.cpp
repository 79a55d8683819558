#include "aware/disclosure.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aware/errors.hpp"
#include "aware/transition.hpp"

namespace aware {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kBuyer = "b";
constexpr const char* kSeller = "s";

void require_keys(const json& obj, const std::set<std::string>& keys, const std::string& ctx) {
    for (const auto& k : keys) {
        if (!obj.contains(k)) throw InputError(ctx + ": missing key '" + k + "'");
    }
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (!keys.count(k)) throw InputError(ctx + ": unknown key '" + k + "'");
    }
}

std::vector<Rational> parse_distribution(const json& arr, size_t expected,
                                         const std::string& ctx) {
    if (!arr.is_array() || arr.size() != expected) {
        throw InputError(ctx + ": expected an array of " + std::to_string(expected) +
                         " rationals");
    }
    std::vector<Rational> out;
    Rational total = 0;
    for (const auto& cell : arr) {
        if (!cell.is_string()) throw InputError(ctx + ": entries must be rational strings");
        Rational v = parse_rational(cell.get<std::string>());
        if (v < 0) throw InputError(ctx + ": negative probability");
        total += v;
        out.push_back(std::move(v));
    }
    if (total != 1) throw InputError(ctx + ": probabilities must sum to 1");
    return out;
}

std::set<int> parse_qualities(const json& arr, int n_qualities, const std::string& ctx) {
    if (!arr.is_array() || arr.empty()) {
        throw InputError(ctx + ": expected a non-empty array of qualities");
    }
    std::set<int> out;
    for (const auto& cell : arr) {
        if (!cell.is_number_integer()) throw InputError(ctx + ": qualities must be integers");
        int q = cell.get<int>();
        if (q < 1 || q > n_qualities) {
            throw InputError(ctx + ": quality " + std::to_string(q) + " out of range");
        }
        if (!out.insert(q).second) {
            throw InputError(ctx + ": duplicate quality " + std::to_string(q));
        }
    }
    return out;
}

int parse_index_key(const std::string& key, int upper, const std::string& ctx) {
    try {
        size_t pos = 0;
        int v = std::stoi(key, &pos);
        if (pos != key.size() || v < 1 || v > upper) throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        throw InputError(ctx + ": bad index key '" + key + "'");
    }
}

int quality_of_conception_state(const std::string& name) {
    // conception states are named t<quality>_<type>
    auto underscore = name.find('_');
    return std::stoi(name.substr(1, underscore - 1));
}

} // namespace

std::string market_state(int quality, int type) {
    return "s" + std::to_string(quality) + "_" + std::to_string(type);
}

std::string conception_state(int quality, int type) {
    return "t" + std::to_string(quality) + "_" + std::to_string(type);
}

DisclosureConfig load_disclosure_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("bad JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("scenario: expected an object");
    require_keys(doc,
                 {"qualities", "buyer_types", "priors", "utilities", "ratings",
                  "shadow_structures", "seller_beliefs"},
                 "scenario");

    DisclosureConfig cfg;
    if (!doc["qualities"].is_number_integer() || doc["qualities"].get<int>() < 1) {
        throw InputError("scenario: 'qualities' must be a positive integer");
    }
    if (!doc["buyer_types"].is_number_integer() || doc["buyer_types"].get<int>() < 1) {
        throw InputError("scenario: 'buyer_types' must be a positive integer");
    }
    cfg.n_qualities = doc["qualities"].get<int>();
    cfg.n_types = doc["buyer_types"].get<int>();

    if (!doc["priors"].is_object()) throw InputError("scenario: 'priors' must be an object");
    for (const auto& [key, arr] : doc["priors"].items()) {
        int type = parse_index_key(key, cfg.n_types, "priors");
        cfg.priors[type] =
            parse_distribution(arr, static_cast<size_t>(cfg.n_qualities), "priors[" + key + "]");
    }
    for (int type = 1; type <= cfg.n_types; ++type) {
        if (!cfg.priors.count(type)) {
            throw InputError("priors: missing buyer type " + std::to_string(type));
        }
    }

    if (!doc["utilities"].is_array() ||
        doc["utilities"].size() != static_cast<size_t>(cfg.n_qualities)) {
        throw InputError("scenario: 'utilities' must list one value per quality");
    }
    for (const auto& cell : doc["utilities"]) {
        if (!cell.is_string()) throw InputError("utilities: entries must be rational strings");
        cfg.utilities.push_back(parse_rational(cell.get<std::string>()));
    }

    if (!doc["ratings"].is_array() || doc["ratings"].empty()) {
        throw InputError("scenario: 'ratings' must be a non-empty array");
    }
    std::set<std::string> rating_names;
    int next_quality = 1;
    for (const auto& r : doc["ratings"]) {
        if (!r.is_object()) throw InputError("ratings: entries must be objects");
        require_keys(r, {"name", "qualities"}, "rating");
        RatingSpec spec;
        spec.name = r["name"].get<std::string>();
        if (spec.name.empty() || !rating_names.insert(spec.name).second) {
            throw InputError("ratings: missing or duplicate name '" + spec.name + "'");
        }
        spec.qualities = parse_qualities(r["qualities"], cfg.n_qualities, "rating " + spec.name);
        // ratings are contiguous bands in increasing order, jointly covering
        // every quality
        if (*spec.qualities.begin() != next_quality ||
            *spec.qualities.rbegin() - *spec.qualities.begin() + 1 !=
                static_cast<int>(spec.qualities.size())) {
            throw InputError("ratings: '" + spec.name +
                             "' breaks the increasing banded partition of qualities");
        }
        next_quality = *spec.qualities.rbegin() + 1;
        cfg.ratings.push_back(std::move(spec));
    }
    if (next_quality != cfg.n_qualities + 1) {
        throw InputError("ratings: bands do not cover every quality");
    }

    if (!doc["shadow_structures"].is_object()) {
        throw InputError("scenario: 'shadow_structures' must be an object");
    }
    for (const auto& [key, st] : doc["shadow_structures"].items()) {
        int type = parse_index_key(key, cfg.n_types, "shadow_structures");
        if (!st.is_object()) throw InputError("shadow_structures: entries must be objects");
        require_keys(st, {"shadows", "replacements"}, "shadow structure " + key);
        ShadowStructure out;
        std::set<std::string> shadow_names;
        if (!st["shadows"].is_array() || st["shadows"].empty()) {
            throw InputError("shadow structure " + key + ": needs at least one shadow");
        }
        for (const auto& sh : st["shadows"]) {
            require_keys(sh, {"name", "qualities"}, "shadow");
            ShadowSpec spec;
            spec.name = sh["name"].get<std::string>();
            if (spec.name.empty() || rating_names.count(spec.name) ||
                !shadow_names.insert(spec.name).second) {
                throw InputError("shadow structure " + key + ": bad shadow name '" +
                                 spec.name + "'");
            }
            spec.qualities =
                parse_qualities(sh["qualities"], cfg.n_qualities, "shadow " + spec.name);
            out.shadows.push_back(std::move(spec));
        }
        if (!st["replacements"].is_object()) {
            throw InputError("shadow structure " + key + ": 'replacements' must be an object");
        }
        for (const auto& [rating, shadow] : st["replacements"].items()) {
            if (!rating_names.count(rating)) {
                throw InputError("shadow structure " + key + ": replacement for unknown "
                                 "rating '" + rating + "'");
            }
            if (!shadow.is_string() || !shadow_names.count(shadow.get<std::string>())) {
                throw InputError("shadow structure " + key + ": replacement of '" + rating +
                                 "' is not a declared shadow");
            }
            out.replacements[rating] = shadow.get<std::string>();
        }
        for (const auto& name : rating_names) {
            if (!out.replacements.count(name)) {
                throw InputError("shadow structure " + key + ": no replacement for rating '" +
                                 name + "'");
            }
        }
        cfg.structures[type] = std::move(out);
    }
    for (int type = 1; type <= cfg.n_types; ++type) {
        if (!cfg.structures.count(type)) {
            throw InputError("shadow_structures: missing buyer type " + std::to_string(type));
        }
    }

    if (!doc["seller_beliefs"].is_object()) {
        throw InputError("scenario: 'seller_beliefs' must be an object");
    }
    for (const auto& [key, arr] : doc["seller_beliefs"].items()) {
        int q = parse_index_key(key, cfg.n_qualities, "seller_beliefs");
        cfg.seller_beliefs[q] = parse_distribution(arr, static_cast<size_t>(cfg.n_types),
                                                   "seller_beliefs[" + key + "]");
    }
    for (int q = 1; q <= cfg.n_qualities; ++q) {
        if (!cfg.seller_beliefs.count(q)) {
            throw InputError("seller_beliefs: missing quality " + std::to_string(q));
        }
    }

    return cfg;
}

DisclosureConfig load_disclosure_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_disclosure_config(buf.str());
}

AwarenessModel build_disclosure_model(const DisclosureConfig& cfg) {
    AwarenessModel m;
    m.agents = {kBuyer, kSeller};

    std::set<std::string> ratings;
    for (const auto& r : cfg.ratings) {
        m.real_props.push_back(r.name);
        ratings.insert(r.name);
    }
    std::set<std::string> seen_shadows;
    for (int type = 1; type <= cfg.n_types; ++type) {
        for (const auto& sh : cfg.structures.at(type).shadows) {
            if (seen_shadows.insert(sh.name).second) m.shadow_props.push_back(sh.name);
        }
    }

    for (int n = 1; n <= cfg.n_qualities; ++n) {
        for (int type = 1; type <= cfg.n_types; ++type) {
            m.states.push_back(market_state(n, type));
        }
    }
    for (int n = 1; n <= cfg.n_qualities; ++n) {
        for (int type = 1; type <= cfg.n_types; ++type) {
            m.states.push_back(conception_state(n, type));
        }
    }

    for (int n = 1; n <= cfg.n_qualities; ++n) {
        for (int type = 1; type <= cfg.n_types; ++type) {
            const std::string ms = market_state(n, type);
            m.language[ms] = ratings;
            for (const auto& r : cfg.ratings) {
                m.valuation[ms][r.name] = r.qualities.count(n) > 0;
            }
            m.awareness[kBuyer][ms] = {};
            m.awareness[kSeller][ms] = ratings;

            const std::string cs = conception_state(n, type);
            const ShadowStructure& st = cfg.structures.at(type);
            std::set<std::string> conception;
            for (const auto& sh : st.shadows) conception.insert(sh.name);
            m.language[cs] = conception;
            for (const auto& sh : st.shadows) {
                m.valuation[cs][sh.name] = sh.qualities.count(n) > 0;
            }
            m.awareness[kBuyer][cs] = {};
            m.awareness[kSeller][cs] = conception;
        }
    }

    for (int n = 1; n <= cfg.n_qualities; ++n) {
        for (int type = 1; type <= cfg.n_types; ++type) {
            const std::string ms = market_state(n, type);
            const std::string cs = conception_state(n, type);

            // The buyer cannot tell qualities apart and entertains only the
            // conception states of its own type.
            std::set<std::string> cell;
            std::map<std::string, Rational> dist;
            for (int q = 1; q <= cfg.n_qualities; ++q) {
                cell.insert(conception_state(q, type));
                const Rational& mass = cfg.priors.at(type)[static_cast<size_t>(q - 1)];
                if (mass > 0) dist[conception_state(q, type)] = mass;
            }
            m.access[kBuyer][ms] = cell;
            m.access[kBuyer][cs] = cell;
            m.prob[kBuyer][ms] = dist;
            m.prob[kBuyer][cs] = dist;

            // The seller knows the quality but not the buyer's type.
            std::set<std::string> seller_cell;
            std::map<std::string, Rational> seller_dist;
            for (int t2 = 1; t2 <= cfg.n_types; ++t2) {
                seller_cell.insert(market_state(n, t2));
                const Rational& mass = cfg.seller_beliefs.at(n)[static_cast<size_t>(t2 - 1)];
                if (mass > 0) seller_dist[market_state(n, t2)] = mass;
            }
            m.access[kSeller][ms] = seller_cell;
            m.prob[kSeller][ms] = seller_dist;
            m.access[kSeller][cs] = {cs};
            m.prob[kSeller][cs] = {{cs, Rational(1)}};
        }
    }

    return m;
}

Rational no_disclosure_wtp(const DisclosureConfig& cfg, int type) {
    if (!cfg.priors.count(type)) throw InputError("unknown buyer type");
    Rational out = 0;
    for (int n = 1; n <= cfg.n_qualities; ++n) {
        out += cfg.priors.at(type)[static_cast<size_t>(n - 1)] *
               cfg.utilities[static_cast<size_t>(n - 1)];
    }
    return out;
}

WtpResult willingness_to_pay(const DisclosureConfig& cfg, int type, const std::string& rating) {
    if (!cfg.structures.count(type)) throw InputError("unknown buyer type");
    const RatingSpec* spec = nullptr;
    for (const auto& r : cfg.ratings) {
        if (r.name == rating) spec = &r;
    }
    if (!spec) throw InputError("unknown rating '" + rating + "'");

    AwarenessModel m = build_disclosure_model(cfg);

    ReplacementScheme f;
    f.mapping[rating] = cfg.structures.at(type).replacements.at(rating);
    TransitionRuleHandle rule;
    rule.scheme.kind = SchemePolicy::Kind::Listed;
    rule.scheme.schemes = {f};

    const std::string anchor = market_state(*spec->qualities.begin(), type);
    TransitionResult res = build_transition(m, anchor, f_atom(rating, PropKind::Real), kBuyer,
                                            TransitionMode::MultiAgent, rule, PruneMode::Full);

    std::map<std::string, std::string> origin; // updated state -> conception state
    for (const auto& tr : res.relation) {
        origin[tr.to] = tr.from;
    }

    // The buyer conditions on what was just disclosed actually being true.
    std::vector<Rational> posterior(static_cast<size_t>(cfg.n_qualities), Rational(0));
    Rational total = 0;
    for (const auto& u : res.after.acc(kBuyer, res.root)) {
        if (!res.after.lang(u).count(rating) || !res.after.val(u, rating)) continue;
        Rational mass = res.after.pr(kBuyer, res.root, u);
        posterior[static_cast<size_t>(quality_of_conception_state(origin.at(u)) - 1)] += mass;
        total += mass;
    }
    if (total == 0) {
        throw EvalError("the disclosed rating is incompatible with the buyer's conception");
    }

    WtpResult out;
    out.wtp = 0;
    for (size_t n = 0; n < posterior.size(); ++n) {
        posterior[n] /= total;
        out.wtp += posterior[n] * cfg.utilities[n];
    }
    out.posterior = std::move(posterior);
    return out;
}

DisclosureOutcome disclosure_outcome(const DisclosureConfig& cfg) {
    DisclosureOutcome out;
    for (int type = 1; type <= cfg.n_types; ++type) {
        out.no_disclosure[type] = no_disclosure_wtp(cfg, type);
        for (const auto& r : cfg.ratings) {
            out.disclosed[type][r.name] = willingness_to_pay(cfg, type, r.name);
        }
    }
    for (int n = 1; n <= cfg.n_qualities; ++n) {
        const RatingSpec* held = nullptr;
        for (const auto& r : cfg.ratings) {
            if (r.qualities.count(n)) held = &r;
        }
        Rational disclose_value = 0;
        Rational withhold_value = 0;
        for (int type = 1; type <= cfg.n_types; ++type) {
            const Rational& belief = cfg.seller_beliefs.at(n)[static_cast<size_t>(type - 1)];
            disclose_value += belief * out.disclosed.at(type).at(held->name).wtp;
            withhold_value += belief * out.no_disclosure.at(type);
        }
        out.decisions[n] =
            disclose_value > withhold_value ? Decision::Disclose : Decision::Withhold;
    }
    return out;
}

std::string to_string(Decision d) {
    return d == Decision::Disclose ? "Disclose" : "Withhold";
}

} // namespace aware
