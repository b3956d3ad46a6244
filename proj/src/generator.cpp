#include "clausevec/generator.hpp"

#include <json.hpp>

#include "clausevec/errors.hpp"
#include "clausevec/rng.hpp"

namespace clausevec {

void GeneratorConfig::validate() const {
    if (num_clauses < 0) throw ConfigError("generator: num_clauses must be >= 0");
    if (num_predicates < 1) throw ConfigError("generator: need at least one predicate");
    if (max_arity < 0) throw ConfigError("generator: max_arity must be >= 0");
    if (max_term_depth < 0) throw ConfigError("generator: max_term_depth must be >= 0");
    if (min_literals < 1 || max_literals < min_literals)
        throw ConfigError("generator: literal range must satisfy 1 <= min <= max");
    if (num_variables < 1) throw ConfigError("generator: need at least one variable");
    if (num_functions < 0 || num_constants < 0)
        throw ConfigError("generator: symbol counts must be >= 0");
    if (negative_probability < 0 || negative_probability > 1 || equality_probability < 0 ||
        equality_probability > 1 || skolem_fraction < 0 || skolem_fraction > 1)
        throw ConfigError("generator: probabilities must lie in [0,1]");
}

GeneratorConfig GeneratorConfig::from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("generator config: ") + e.what());
    }
    GeneratorConfig cfg;
    try {
        cfg.num_clauses = j.value("num_clauses", cfg.num_clauses);
        cfg.num_predicates = j.value("num_predicates", cfg.num_predicates);
        cfg.num_functions = j.value("num_functions", cfg.num_functions);
        cfg.num_constants = j.value("num_constants", cfg.num_constants);
        cfg.max_arity = j.value("max_arity", cfg.max_arity);
        cfg.max_term_depth = j.value("max_term_depth", cfg.max_term_depth);
        cfg.min_literals = j.value("min_literals", cfg.min_literals);
        cfg.max_literals = j.value("max_literals", cfg.max_literals);
        cfg.num_variables = j.value("num_variables", cfg.num_variables);
        cfg.negative_probability = j.value("negative_probability", cfg.negative_probability);
        cfg.equality_probability = j.value("equality_probability", cfg.equality_probability);
        cfg.skolem_fraction = j.value("skolem_fraction", cfg.skolem_fraction);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("generator config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string GeneratorConfig::to_json() const {
    nlohmann::json j{{"num_clauses", num_clauses},
                     {"num_predicates", num_predicates},
                     {"num_functions", num_functions},
                     {"num_constants", num_constants},
                     {"max_arity", max_arity},
                     {"max_term_depth", max_term_depth},
                     {"min_literals", min_literals},
                     {"max_literals", max_literals},
                     {"num_variables", num_variables},
                     {"negative_probability", negative_probability},
                     {"equality_probability", equality_probability},
                     {"skolem_fraction", skolem_fraction}};
    return j.dump(2);
}

namespace {

struct Symbols {
    std::vector<std::pair<std::string, int>> predicates;  // name, arity
    std::vector<std::pair<std::string, int>> functions;   // arity >= 1
    std::vector<std::string> constants;
    std::vector<std::string> variables;
};

Symbols make_symbols(const GeneratorConfig& cfg) {
    Symbols s;
    for (int i = 0; i < cfg.num_predicates; ++i)
        s.predicates.emplace_back("p" + std::to_string(i), i % (cfg.max_arity + 1));
    int num_skolem =
        static_cast<int>(cfg.skolem_fraction * cfg.num_functions + 0.5);
    for (int i = 0; i < cfg.num_functions; ++i) {
        std::string name =
            i < num_skolem ? "sk" + std::to_string(i) : "f" + std::to_string(i);
        int arity = cfg.max_arity > 0 ? 1 + i % cfg.max_arity : 0;
        if (arity == 0) continue;  // max_arity 0: no proper functions
        s.functions.emplace_back(name, arity);
    }
    for (int i = 0; i < cfg.num_constants; ++i) s.constants.push_back("c" + std::to_string(i));
    for (int i = 0; i < cfg.num_variables; ++i)
        s.variables.push_back("X" + std::to_string(i + 1));
    return s;
}

Term random_term(Rng& rng, const Symbols& sym, const GeneratorConfig& cfg, int depth_budget) {
    bool can_descend = depth_budget > 0 && !sym.functions.empty();
    if (can_descend && rng.bernoulli(0.5)) {
        const auto& [name, arity] = sym.functions[rng.uniform_int(
            0, static_cast<int>(sym.functions.size()) - 1)];
        std::vector<Term> args;
        args.reserve(arity);
        for (int i = 0; i < arity; ++i)
            args.push_back(random_term(rng, sym, cfg, depth_budget - 1));
        return Term::fn(name, std::move(args));
    }
    // Leaf: variable or constant.
    if (!sym.constants.empty() && rng.bernoulli(0.4)) {
        return Term::fn(
            sym.constants[rng.uniform_int(0, static_cast<int>(sym.constants.size()) - 1)]);
    }
    return Term::var(
        sym.variables[rng.uniform_int(0, static_cast<int>(sym.variables.size()) - 1)]);
}

Literal random_literal(Rng& rng, const Symbols& sym, const GeneratorConfig& cfg) {
    Literal lit;
    lit.polarity = rng.bernoulli(cfg.negative_probability) ? Polarity::negative
                                                           : Polarity::positive;
    if (cfg.max_arity > 0 && rng.bernoulli(cfg.equality_probability)) {
        lit.predicate = "=";
        lit.args.push_back(random_term(rng, sym, cfg, cfg.max_term_depth));
        lit.args.push_back(random_term(rng, sym, cfg, cfg.max_term_depth));
        return lit;
    }
    const auto& [name, arity] =
        sym.predicates[rng.uniform_int(0, static_cast<int>(sym.predicates.size()) - 1)];
    lit.predicate = name;
    lit.args.reserve(arity);
    for (int i = 0; i < arity; ++i)
        lit.args.push_back(random_term(rng, sym, cfg, cfg.max_term_depth));
    return lit;
}

}  // namespace

Problem generate_random_clauses(uint64_t seed, const GeneratorConfig& config) {
    config.validate();
    Symbols sym = make_symbols(config);
    Rng rng(seed);
    Problem problem;
    problem.clauses.reserve(config.num_clauses);
    for (int i = 0; i < config.num_clauses; ++i) {
        Clause clause;
        clause.id = "g" + std::to_string(i + 1);
        clause.role = ClauseRole::axiom;
        int n = rng.uniform_int(config.min_literals, config.max_literals);
        clause.literals.reserve(n);
        for (int k = 0; k < n; ++k) clause.literals.push_back(random_literal(rng, sym, config));
        problem.clauses.push_back(std::move(clause));
    }
    problem.signature = compute_signature(problem.clauses);
    return problem;
}

}  // namespace clausevec
