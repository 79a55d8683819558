#include "aware/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aware/errors.hpp"

namespace aware {

using json = nlohmann::ordered_json;

// --- accessors ---------------------------------------------------------------

namespace {
const std::set<std::string> kEmptySet;

bool valid_prop_name(const std::string& s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    });
}
} // namespace

bool AwarenessModel::has_state(const std::string& s) const { return language.count(s) > 0; }

bool AwarenessModel::has_agent(const std::string& a) const {
    return std::find(agents.begin(), agents.end(), a) != agents.end();
}

bool AwarenessModel::is_real(const std::string& prop) const {
    return std::find(real_props.begin(), real_props.end(), prop) != real_props.end();
}

bool AwarenessModel::is_shadow(const std::string& prop) const {
    return std::find(shadow_props.begin(), shadow_props.end(), prop) != shadow_props.end();
}

bool AwarenessModel::is_prop(const std::string& prop) const {
    return is_real(prop) || is_shadow(prop);
}

const std::set<std::string>& AwarenessModel::lang(const std::string& s) const {
    auto it = language.find(s);
    return it == language.end() ? kEmptySet : it->second;
}

const std::set<std::string>& AwarenessModel::aware_set(const std::string& agent,
                                                       const std::string& s) const {
    auto ait = awareness.find(agent);
    if (ait == awareness.end()) return kEmptySet;
    auto sit = ait->second.find(s);
    return sit == ait->second.end() ? kEmptySet : sit->second;
}

const std::set<std::string>& AwarenessModel::acc(const std::string& agent,
                                                 const std::string& s) const {
    auto ait = access.find(agent);
    if (ait == access.end()) return kEmptySet;
    auto sit = ait->second.find(s);
    return sit == ait->second.end() ? kEmptySet : sit->second;
}

bool AwarenessModel::val(const std::string& s, const std::string& prop) const {
    auto sit = valuation.find(s);
    if (sit == valuation.end()) return false;
    auto pit = sit->second.find(prop);
    return pit != sit->second.end() && pit->second;
}

Rational AwarenessModel::pr(const std::string& agent, const std::string& s,
                            const std::string& t) const {
    auto ait = prob.find(agent);
    if (ait == prob.end()) return 0;
    auto sit = ait->second.find(s);
    if (sit == ait->second.end()) return 0;
    auto tit = sit->second.find(t);
    return tit == sit->second.end() ? Rational(0) : tit->second;
}

Rational AwarenessModel::pr_mass(const std::string& agent, const std::string& s,
                                 const std::set<std::string>& targets) const {
    Rational total = 0;
    for (const auto& t : targets) total += pr(agent, s, t);
    return total;
}

SymbolTable AwarenessModel::symbols() const {
    SymbolTable t;
    t.agents.insert(agents.begin(), agents.end());
    t.real_props.insert(real_props.begin(), real_props.end());
    t.shadow_props.insert(shadow_props.begin(), shadow_props.end());
    return t;
}

// --- validation ---------------------------------------------------------------

namespace {

std::map<std::string, Rational> nonzero_row(const AwarenessModel& m, const std::string& agent,
                                            const std::string& s) {
    std::map<std::string, Rational> row;
    auto ait = m.prob.find(agent);
    if (ait == m.prob.end()) return row;
    auto sit = ait->second.find(s);
    if (sit == ait->second.end()) return row;
    for (const auto& [t, r] : sit->second) {
        if (r != 0) row[t] = r;
    }
    return row;
}

std::string join(const std::set<std::string>& xs) {
    std::string out;
    for (const auto& x : xs) {
        if (!out.empty()) out += ",";
        out += x;
    }
    return out;
}

} // namespace

ValidationReport validate(const AwarenessModel& m) {
    ValidationReport rep;
    auto flag = [&](const std::string& inv, const std::string& where, const std::string& detail) {
        rep.violations.push_back({inv, where, detail});
    };

    for (const auto& i : m.agents) {
        for (const auto& s : m.states) {
            const auto& K = m.acc(i, s);
            const std::string where = "agent " + i + ", state " + s;

            if (K.empty()) flag("V1", where, "no considered state");

            for (const auto& t : K) {
                for (const auto& u : m.acc(i, t)) {
                    if (!K.count(u)) {
                        flag("V2", where, "considers " + t + " but not " + t + "'s successor " + u);
                    }
                }
                for (const auto& u : K) {
                    if (!m.acc(i, t).count(u)) {
                        flag("V3", where, t + " does not consider fellow member " + u);
                    }
                }
            }

            Rational total = 0;
            if (auto prob_it = m.prob.find(i); prob_it != m.prob.end()) {
                if (auto row_it = prob_it->second.find(s); row_it != prob_it->second.end()) {
                    for (const auto& [t, r] : row_it->second) {
                        total += r;
                        if (r < 0 || r > 1) {
                            flag("V4", where, "probability of " + t + " is " + format_rational(r));
                        }
                        if (r > 0 && !K.count(t)) {
                            flag("V4", where, "positive mass " + format_rational(r) +
                                                  " on unconsidered state " + t);
                        }
                    }
                }
            }
            if (total != 1) {
                flag("V4", where, "total mass " + format_rational(total));
            }

            auto row_s = nonzero_row(m, i, s);
            for (const auto& t : K) {
                if (nonzero_row(m, i, t) != row_s) {
                    flag("V5", where, "probabilities at considered state " + t + " differ");
                }
                if (m.aware_set(i, t) != m.aware_set(i, s)) {
                    flag("V6", where, "awareness at considered state " + t + " differs");
                }
                for (const auto& p : m.lang(t)) {
                    if (!m.is_shadow(p) && !m.aware_set(i, s).count(p)) {
                        flag("V8", where,
                             "considered state " + t + " mentions " + p + " outside awareness");
                    }
                }
            }
        }
    }

    for (const auto& s : m.states) {
        std::set<std::string> awareness_union;
        for (const auto& i : m.agents) {
            const auto& A = m.aware_set(i, s);
            awareness_union.insert(A.begin(), A.end());
            for (const auto& p : A) {
                if (!m.lang(s).count(p)) {
                    flag("V10", "agent " + i + ", state " + s,
                         "aware of " + p + " outside the language");
                }
            }
        }
        for (const auto& p : awareness_union) {
            if (!m.lang(s).count(p)) {
                flag("V7", "state " + s, "awareness union member " + p + " outside the language");
            }
        }

        std::set<std::string> val_domain;
        if (m.valuation.count(s)) {
            for (const auto& [p, v] : m.valuation.at(s)) {
                (void)v;
                val_domain.insert(p);
            }
        }
        if (val_domain != m.lang(s)) {
            flag("V9", "state " + s,
                 "valuation domain {" + join(val_domain) + "} differs from language {" +
                     join(m.lang(s)) + "}");
        }
    }

    return rep;
}

// --- JSON I/O -----------------------------------------------------------------

namespace {

void require_keys(const json& obj, const std::set<std::string>& keys, const std::string& ctx) {
    if (!obj.is_object()) throw InputError(ctx + ": expected an object");
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (!keys.count(k)) throw InputError(ctx + ": unknown key '" + k + "'");
    }
    for (const auto& k : keys) {
        if (!obj.contains(k)) throw InputError(ctx + ": missing key '" + k + "'");
    }
}

std::vector<std::string> string_array(const json& arr, const std::string& ctx) {
    if (!arr.is_array()) throw InputError(ctx + ": expected an array");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw InputError(ctx + ": expected strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

AwarenessModel load_model(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError(std::string("model JSON: ") + e.what());
    }
    require_keys(doc, {"agents", "real_props", "shadow_props", "states", "access", "prob"},
                 "model");

    AwarenessModel m;
    m.agents = string_array(doc["agents"], "agents");
    if (m.agents.empty()) throw InputError("model: needs at least one agent");
    {
        std::set<std::string> seen;
        for (const auto& a : m.agents) {
            if (!valid_prop_name(a)) throw InputError("model: bad agent name '" + a + "'");
            if (!seen.insert(a).second) throw InputError("model: duplicate agent '" + a + "'");
        }
    }

    m.real_props = string_array(doc["real_props"], "real_props");
    m.shadow_props = string_array(doc["shadow_props"], "shadow_props");
    {
        std::set<std::string> seen;
        for (const auto& p : m.real_props) {
            if (!valid_prop_name(p)) throw InputError("model: bad proposition name '" + p + "'");
            if (!seen.insert(p).second) throw InputError("model: duplicate proposition '" + p + "'");
        }
        for (const auto& p : m.shadow_props) {
            if (!valid_prop_name(p)) throw InputError("model: bad proposition name '" + p + "'");
            if (!seen.insert(p).second) throw InputError("model: duplicate proposition '" + p + "'");
        }
    }

    if (!doc["states"].is_array()) throw InputError("states: expected an array");
    for (const auto& st : doc["states"]) {
        require_keys(st, {"name", "language", "valuation", "awareness"}, "state");
        if (!st["name"].is_string()) throw InputError("state: name must be a string");
        std::string name = st["name"].get<std::string>();
        if (name.empty()) throw InputError("state: empty name");
        if (m.has_state(name)) throw InputError("state: duplicate name '" + name + "'");
        m.states.push_back(name);

        auto langs = string_array(st["language"], "state " + name + " language");
        std::set<std::string>& L = m.language[name];
        for (const auto& p : langs) {
            if (!m.is_prop(p)) {
                throw InputError("state " + name + ": undeclared proposition '" + p + "'");
            }
            if (!L.insert(p).second) {
                throw InputError("state " + name + ": duplicate language entry '" + p + "'");
            }
        }

        if (!st["valuation"].is_object()) {
            throw InputError("state " + name + ": valuation must be an object");
        }
        auto& V = m.valuation[name];
        for (const auto& [p, v] : st["valuation"].items()) {
            if (!m.is_prop(p)) {
                throw InputError("state " + name + ": undeclared proposition '" + p + "'");
            }
            if (!v.is_boolean()) {
                throw InputError("state " + name + ": valuation of '" + p + "' must be a bool");
            }
            V[p] = v.get<bool>();
        }

        if (!st["awareness"].is_object()) {
            throw InputError("state " + name + ": awareness must be an object");
        }
        for (const auto& [a, arr] : st["awareness"].items()) {
            if (!m.has_agent(a)) throw InputError("state " + name + ": unknown agent '" + a + "'");
            auto props = string_array(arr, "state " + name + " awareness of " + a);
            auto& A = m.awareness[a][name];
            for (const auto& p : props) {
                if (!m.is_prop(p)) {
                    throw InputError("state " + name + ": undeclared proposition '" + p + "'");
                }
                A.insert(p);
            }
        }
        for (const auto& a : m.agents) {
            if (!st["awareness"].contains(a)) {
                throw InputError("state " + name + ": missing awareness for agent '" + a + "'");
            }
        }
    }
    if (m.states.empty()) throw InputError("model: needs at least one state");

    if (!doc["access"].is_object()) throw InputError("access: expected an object");
    for (const auto& [a, rows] : doc["access"].items()) {
        if (!m.has_agent(a)) throw InputError("access: unknown agent '" + a + "'");
        if (!rows.is_object()) throw InputError("access: rows must be objects");
        for (const auto& [s, arr] : rows.items()) {
            if (!m.has_state(s)) throw InputError("access: unknown state '" + s + "'");
            for (const auto& t : string_array(arr, "access of " + a + " at " + s)) {
                if (!m.has_state(t)) {
                    throw InputError("access: unknown target state '" + t + "'");
                }
                m.access[a][s].insert(t);
            }
        }
    }
    for (const auto& a : m.agents) {
        if (!doc["access"].contains(a)) throw InputError("access: missing agent '" + a + "'");
    }

    if (!doc["prob"].is_object()) throw InputError("prob: expected an object");
    for (const auto& [a, rows] : doc["prob"].items()) {
        if (!m.has_agent(a)) throw InputError("prob: unknown agent '" + a + "'");
        if (!rows.is_object()) throw InputError("prob: rows must be objects");
        for (const auto& [s, row] : rows.items()) {
            if (!m.has_state(s)) throw InputError("prob: unknown state '" + s + "'");
            if (!row.is_object()) throw InputError("prob: entries must be objects");
            for (const auto& [t, r] : row.items()) {
                if (!m.has_state(t)) throw InputError("prob: unknown target state '" + t + "'");
                if (!r.is_string()) {
                    throw InputError("prob: value at " + s + "->" + t + " must be a string");
                }
                m.prob[a][s][t] = parse_rational(r.get<std::string>());
            }
        }
    }
    for (const auto& a : m.agents) {
        if (!doc["prob"].contains(a)) throw InputError("prob: missing agent '" + a + "'");
        m.prob[a]; // ensure the agent key exists even with no rows
    }

    return m;
}

AwarenessModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_model(ss.str());
}

std::string save_model(const AwarenessModel& m) {
    json doc;
    doc["agents"] = m.agents;
    doc["real_props"] = m.real_props;
    doc["shadow_props"] = m.shadow_props;
    doc["states"] = json::array();
    for (const auto& s : m.states) {
        json st;
        st["name"] = s;
        st["language"] = m.lang(s);
        json val = json::object();
        if (m.valuation.count(s)) {
            for (const auto& [p, v] : m.valuation.at(s)) val[p] = v;
        }
        st["valuation"] = std::move(val);
        json aw = json::object();
        for (const auto& a : m.agents) aw[a] = m.aware_set(a, s);
        st["awareness"] = std::move(aw);
        doc["states"].push_back(std::move(st));
    }
    json acc = json::object();
    for (const auto& a : m.agents) {
        json rows = json::object();
        for (const auto& s : m.states) {
            if (!m.acc(a, s).empty()) rows[s] = m.acc(a, s);
        }
        acc[a] = std::move(rows);
    }
    doc["access"] = std::move(acc);
    json prob = json::object();
    for (const auto& a : m.agents) {
        json rows = json::object();
        for (const auto& s : m.states) {
            auto ait = m.prob.find(a);
            if (ait == m.prob.end()) continue;
            auto sit = ait->second.find(s);
            if (sit == ait->second.end() || sit->second.empty()) continue;
            json row = json::object();
            for (const auto& [t, r] : sit->second) row[t] = format_rational(r);
            rows[s] = std::move(row);
        }
        prob[a] = std::move(rows);
    }
    doc["prob"] = std::move(prob);
    return doc.dump(2) + "\n";
}

} // namespace aware
