#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aware/axioms.hpp"
#include "aware/disclosure.hpp"
#include "aware/dot.hpp"
#include "aware/errors.hpp"
#include "aware/model.hpp"
#include "aware/semantics.hpp"
#include "aware/transition.hpp"

using json = nlohmann::ordered_json;
using namespace aware;

namespace {

void emit(const json& doc, bool pretty) {
    std::cout << (pretty ? doc.dump(2) : doc.dump()) << "\n";
}

Formula parse_with_model(const AwarenessModel& m, const std::string& text) {
    SymbolTable symbols = m.symbols();
    return parse_formula(text, &symbols);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

WeightPolicy parse_weights(const json& obj, const std::string& ctx) {
    if (!obj.is_object()) throw InputError(ctx + ": 'weights' must be an object");
    WeightPolicy policy;
    policy.kind = WeightPolicy::Kind::Explicit;
    for (const auto& [state, row] : obj.items()) {
        if (!row.is_object()) throw InputError(ctx + ": weight rows must be objects");
        for (const auto& [scheme_id, cell] : row.items()) {
            if (!cell.is_string()) {
                throw InputError(ctx + ": weights must be rational strings");
            }
            policy.weights[state][scheme_id] = parse_rational(cell.get<std::string>());
        }
    }
    return policy;
}

SchemePolicy parse_schemes(const json& arr, const std::string& ctx) {
    if (!arr.is_array()) throw InputError(ctx + ": 'schemes' must be an array");
    SchemePolicy policy;
    policy.kind = SchemePolicy::Kind::Listed;
    for (const auto& item : arr) {
        if (!item.is_object()) throw InputError(ctx + ": schemes must be objects");
        ReplacementScheme f;
        for (const auto& [src, img] : item.items()) {
            if (!img.is_string()) throw InputError(ctx + ": scheme images must be strings");
            f.mapping[src] = img.get<std::string>();
        }
        policy.schemes.push_back(std::move(f));
    }
    return policy;
}

TransitionRuleHandle load_rule_file(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw InputError(std::string("rule file: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("rule file: expected an object");
    TransitionRuleHandle rule;
    for (const auto& [key, value] : doc.items()) {
        if (key == "weights") {
            rule.weight = parse_weights(value, "rule file");
        } else if (key == "schemes") {
            rule.scheme = parse_schemes(value, "rule file");
        } else {
            throw InputError("rule file: unknown key '" + key + "'");
        }
    }
    return rule;
}

json relation_json(const std::vector<TransitionTriple>& relation) {
    json arr = json::array();
    for (const auto& tr : relation) {
        json scheme = json::object();
        for (const auto& [p, q] : tr.scheme.mapping) scheme[p] = q;
        arr.push_back({{"from", tr.from}, {"to", tr.to}, {"scheme", std::move(scheme)}});
    }
    return arr;
}

TransitionMode mode_of(const std::string& flag, const AwarenessModel& m) {
    if (flag == "single") return TransitionMode::SingleAgent;
    if (flag == "multi") return TransitionMode::MultiAgent;
    return m.agents.size() == 1 ? TransitionMode::SingleAgent : TransitionMode::MultiAgent;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"awareness-dynamics model checker"};
    app.require_subcommand(1);

    std::string model_path, before_path, after_path, relation_path, scenario_path;
    std::string state, anchor, agent, formula_text;
    std::string tau = "uniform", mode_flag = "auto", closure_flag = "basic";
    std::string weights_path, out_prefix = "out", axiom_name, experimental_name;
    std::string k_reading_flag = "implicit";
    std::optional<std::string> state_after;
    bool pretty = false, trace = false, prune = false, agent_colors = false;
    int samples = 200;
    std::uint64_t seed = 0;
    GeneratorConfig gen;

    auto* validate_cmd = app.add_subcommand("validate", "check structural invariants");
    validate_cmd->add_option("model", model_path)->required();
    validate_cmd->add_flag("--pretty", pretty);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a formula at a state");
    eval_cmd->add_option("model", model_path)->required();
    eval_cmd->add_option("--state", state)->required();
    eval_cmd->add_option("--formula", formula_text)->required();
    eval_cmd->add_option("--tau", tau, "uniform, or a rule file path");
    eval_cmd->add_option("--mode", mode_flag)->check(CLI::IsMember({"auto", "single", "multi"}));
    eval_cmd->add_option("--quantifier-closure", closure_flag)
        ->check(CLI::IsMember({"basic", "linear"}));
    eval_cmd->add_flag("--prune,!--no-prune", prune, "drop unreachable updated states");
    eval_cmd->add_flag("--trace", trace);
    eval_cmd->add_flag("--pretty", pretty);

    auto* cons_cmd = app.add_subcommand("cons", "states that can absorb a discovery");
    cons_cmd->add_option("model", model_path)->required();
    cons_cmd->add_option("--formula", formula_text)->required();
    cons_cmd->add_option("--agent", agent)->required();
    cons_cmd->add_option("--anchor", anchor)->required();
    cons_cmd->add_flag("--pretty", pretty);

    auto* transition_cmd = app.add_subcommand("transition", "build the updated model");
    transition_cmd->add_option("model", model_path)->required();
    transition_cmd->add_option("--state", state)->required();
    transition_cmd->add_option("--formula", formula_text)->required();
    transition_cmd->add_option("--agent", agent)->required();
    transition_cmd->add_option("--weights", weights_path, "rule file with explicit weights");
    transition_cmd->add_option("--mode", mode_flag)
        ->check(CLI::IsMember({"auto", "single", "multi"}));
    transition_cmd->add_option("--out", out_prefix, "prefix for .model.json and .T.json");
    transition_cmd->add_flag("--prune,!--no-prune", prune);
    transition_cmd->add_flag("--pretty", pretty);

    auto* verify_cmd = app.add_subcommand("verify", "check a claimed transition relation");
    verify_cmd->add_option("before", before_path)->required();
    verify_cmd->add_option("after", after_path)->required();
    verify_cmd->add_option("relation", relation_path)->required();
    verify_cmd->add_option("--formula", formula_text)->required();
    verify_cmd->add_option("--agent", agent)->required();
    verify_cmd->add_option("--state", state)->required();
    verify_cmd->add_option("--mode", mode_flag)
        ->check(CLI::IsMember({"auto", "single", "multi"}));
    verify_cmd->add_option("--state-after", state_after,
                           "the after-model state standing for the anchor");
    verify_cmd->add_flag("--pretty", pretty);

    auto* axioms_cmd = app.add_subcommand("axioms", "sample models against an axiom scheme");
    auto* ax_opt = axioms_cmd->add_option("--axiom", axiom_name)
                       ->check(CLI::IsMember({"Astar", "AK", "Ka", "Pra"}));
    auto* exp_opt = axioms_cmd->add_option("--experimental", experimental_name,
                                           "non-normative reading of a garbled scheme")
                        ->check(CLI::IsMember({"Kb", "Prb"}));
    ax_opt->excludes(exp_opt);
    axioms_cmd->add_option("--samples", samples)->check(CLI::PositiveNumber);
    axioms_cmd->add_option("--seed", seed);
    axioms_cmd->add_option("--agents", gen.n_agents)->check(CLI::PositiveNumber);
    axioms_cmd->add_option("--states", gen.n_states)->check(CLI::PositiveNumber);
    axioms_cmd->add_option("--reals", gen.n_real)->check(CLI::PositiveNumber);
    axioms_cmd->add_option("--shadows", gen.n_shadow)->check(CLI::NonNegativeNumber);
    axioms_cmd->add_option("--k-reading", k_reading_flag)
        ->check(CLI::IsMember({"implicit", "explicit"}));
    axioms_cmd->add_flag("--pretty", pretty);

    auto* disclose_cmd = app.add_subcommand("disclose", "run a disclosure scenario");
    disclose_cmd->add_option("scenario", scenario_path)->required();
    disclose_cmd->add_flag("--pretty", pretty);

    auto* dot_cmd = app.add_subcommand("export-dot", "emit the model as a DOT digraph");
    dot_cmd->add_option("model", model_path)->required();
    dot_cmd->add_flag("--agent-colors", agent_colors);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate_cmd) {
            AwarenessModel m = load_model_file(model_path);
            ValidationReport rep = validate(m);
            json out;
            out["ok"] = rep.ok();
            out["violations"] = json::array();
            for (const auto& v : rep.violations) {
                out["violations"].push_back(
                    {{"invariant", v.invariant}, {"where", v.where}, {"detail", v.detail}});
            }
            emit(out, pretty);
            return rep.ok() ? 0 : 1;
        }

        if (*eval_cmd) {
            AwarenessModel m = load_model_file(model_path);
            Formula f = parse_with_model(m, formula_text);
            EvalOptions opts;
            opts.closure = closure_flag == "linear" ? ClosureMode::Linear : ClosureMode::Basic;
            opts.prune = prune ? PruneMode::Reachable : PruneMode::Full;
            if (mode_flag != "auto") opts.mode = mode_of(mode_flag, m);
            if (tau != "uniform") opts.rule = load_rule_file(tau);
            std::vector<std::string> trace_lines;
            if (trace) opts.trace = &trace_lines;
            bool value = satisfies(m, state, f, opts);
            json out;
            out["state"] = state;
            out["formula"] = render(f);
            out["value"] = value;
            if (trace) out["trace"] = trace_lines;
            emit(out, pretty);
            return value ? 0 : 1;
        }

        if (*cons_cmd) {
            AwarenessModel m = load_model_file(model_path);
            Formula f = parse_with_model(m, formula_text);
            std::set<std::string> states = cons_states(m, f, agent, anchor);
            json out;
            out["anchor"] = anchor;
            out["agent"] = agent;
            out["formula"] = render(f);
            out["states"] = states;
            emit(out, pretty);
            return 0;
        }

        if (*transition_cmd) {
            AwarenessModel m = load_model_file(model_path);
            Formula f = parse_with_model(m, formula_text);
            TransitionRuleHandle rule;
            if (!weights_path.empty()) rule = load_rule_file(weights_path);
            TransitionResult res = build_transition(
                m, state, f, agent, mode_of(mode_flag, m), rule,
                prune ? PruneMode::Reachable : PruneMode::Full);
            write_file(out_prefix + ".model.json", save_model(res.after));
            write_file(out_prefix + ".T.json", save_relation(res.relation));
            json out;
            out["root"] = res.root;
            out["states"] = res.after.states.size();
            out["unconstrained"] = res.unconstrained;
            out["relation"] = relation_json(res.relation);
            out["notes"] = res.notes;
            out["model_file"] = out_prefix + ".model.json";
            out["relation_file"] = out_prefix + ".T.json";
            emit(out, pretty);
            return 0;
        }

        if (*verify_cmd) {
            AwarenessModel before = load_model_file(before_path);
            AwarenessModel after = load_model_file(after_path);
            std::vector<TransitionTriple> relation = load_relation_file(relation_path);
            Formula f = parse_with_model(before, formula_text);
            VerificationReport rep =
                verify_transition(before, after, relation, f, agent, state,
                                  mode_of(mode_flag, before), state_after);
            json out;
            out["ok"] = rep.ok();
            out["clauses"] = json::array();
            for (const auto& c : rep.entries) {
                const char* status = c.status == ClauseStatus::Pass      ? "pass"
                                     : c.status == ClauseStatus::Vacuous ? "vacuous"
                                                                         : "fail";
                json entry = {{"clause", c.clause}, {"status", status}};
                if (!c.witness.empty()) entry["witness"] = c.witness;
                out["clauses"].push_back(std::move(entry));
            }
            emit(out, pretty);
            return rep.ok() ? 0 : 1;
        }

        if (*axioms_cmd) {
            if (axiom_name.empty() && experimental_name.empty()) {
                std::cerr << "axioms: pass --axiom or --experimental\n";
                return 2;
            }
            SoundnessOptions opts;
            opts.samples = samples;
            opts.seed = seed;
            opts.gen = gen;
            opts.k_reading =
                k_reading_flag == "explicit" ? KReading::Explicit : KReading::Implicit;
            AxiomName axiom = axiom_from_string(
                axiom_name.empty() ? experimental_name : axiom_name);
            SoundnessReport rep = check_soundness(axiom, opts);
            json out;
            out["axiom"] = to_string(rep.axiom);
            out["experimental"] = !experimental_name.empty();
            out["models"] = rep.models;
            out["evaluations"] = rep.evaluations;
            out["non_vacuous"] = rep.non_vacuous;
            out["failures"] = rep.failures;
            out["counterexamples"] = json::array();
            for (const auto& c : rep.counterexamples) {
                out["counterexamples"].push_back({{"state", c.state},
                                                  {"instance", c.instance},
                                                  {"detail", c.detail},
                                                  {"model", json::parse(c.model_json)}});
            }
            emit(out, pretty);
            return rep.ok() ? 0 : 1;
        }

        if (*disclose_cmd) {
            DisclosureConfig cfg = load_disclosure_config_file(scenario_path);
            DisclosureOutcome res = disclosure_outcome(cfg);
            json out;
            out["no_disclosure"] = json::object();
            for (const auto& [type, wtp] : res.no_disclosure) {
                out["no_disclosure"][std::to_string(type)] = format_rational(wtp);
            }
            out["disclosed"] = json::object();
            for (const auto& [type, per_rating] : res.disclosed) {
                json block = json::object();
                for (const auto& [rating, wtp] : per_rating) {
                    json posterior = json::array();
                    for (const auto& q : wtp.posterior) posterior.push_back(format_rational(q));
                    block[rating] = {{"wtp", format_rational(wtp.wtp)},
                                     {"posterior", std::move(posterior)}};
                }
                out["disclosed"][std::to_string(type)] = std::move(block);
            }
            out["decisions"] = json::object();
            for (const auto& [quality, decision] : res.decisions) {
                out["decisions"][std::to_string(quality)] = to_string(decision);
            }
            emit(out, pretty);
            return 0;
        }

        if (*dot_cmd) {
            AwarenessModel m = load_model_file(model_path);
            std::cout << to_dot(m, agent_colors);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
