#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aware/semantics.hpp"

namespace aware {

enum class AxiomName { Astar, AK, Ka, Pra, KbExperimental, PrbExperimental };

AxiomName axiom_from_string(const std::string& name);
std::string to_string(AxiomName a);

// Which knowledge operator the axiom schemes use.
enum class KReading { Implicit, Explicit };

struct AxiomParams {
    Formula trigger;       // the formula being discovered
    std::string i;         // the discovering agent
    std::string j;         // the bystander agent (AK)
    Formula psi;           // schematic content
    Rational alpha;        // likelihood bound (Pra/Prb)
    std::string var = "x"; // bound variable (experimental schemes)
};

// The scheme instantiated at the given parameters. For the awareness scheme
// the trigger and psi must not share propositions.
Formula axiom_instance(AxiomName axiom, const AxiomParams& p, KReading k = KReading::Implicit);

// The instance split as antecedent -> consequent where the scheme has that
// shape (used for vacuity accounting); for biconditional schemes the
// antecedent is the left side.
struct AxiomInstanceParts {
    Formula whole;
    Formula antecedent;
};
AxiomInstanceParts axiom_instance_parts(AxiomName axiom, const AxiomParams& p,
                                        KReading k = KReading::Implicit);

struct GeneratorConfig {
    int n_agents = 2;
    int n_states = 4;
    int n_real = 2;
    int n_shadow = 2;
};

// A random structure satisfying every well-formedness invariant. Identical
// seeds give identical models.
AwarenessModel random_model(const GeneratorConfig& cfg, std::mt19937_64& rng);

// A random sentence over the model's propositions (atoms, negation,
// conjunction, awareness, knowledge, single-term likelihood comparisons).
Formula random_static_sentence(const AwarenessModel& m, std::mt19937_64& rng, int depth);

struct SoundnessOptions {
    int samples = 200;
    std::uint64_t seed = 0;
    GeneratorConfig gen;
    KReading k_reading = KReading::Implicit;
};

struct Counterexample {
    std::string model_json;
    std::string state;
    std::string instance;
    std::string detail;
};

struct SoundnessReport {
    AxiomName axiom = AxiomName::Astar;
    int models = 0;
    int evaluations = 0;  // (model, admissible state) pairs
    int non_vacuous = 0;  // evaluations whose antecedent held
    int failures = 0;
    std::vector<Counterexample> counterexamples; // capped
    bool ok() const { return failures == 0; }
};

// Samples random models, instantiates the scheme with generated parameters,
// and evaluates it at every state whose language contains the trigger's
// propositions.
SoundnessReport check_soundness(AxiomName axiom, const SoundnessOptions& opts);

} // namespace aware
