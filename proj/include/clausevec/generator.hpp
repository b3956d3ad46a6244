#pragma once

#include <cstdint>
#include <string>

#include "clausevec/fol.hpp"

namespace clausevec {

// Random-clause generator for desk-scale corpora. Generation is a pure
// function of (seed, config): byte-identical output across runs and
// platforms.
struct GeneratorConfig {
    int num_clauses = 100;
    int num_predicates = 4;
    int num_functions = 3;  // arity >= 1; a fraction is named sk<i>
    int num_constants = 3;
    int max_arity = 2;      // predicates and functions
    int max_term_depth = 2;
    int min_literals = 1;
    int max_literals = 3;
    int num_variables = 4;  // per-clause variable pool X1..Xk
    double negative_probability = 0.35;
    double equality_probability = 0.15;
    double skolem_fraction = 0.25;

    // Throws ConfigError on nonsense (zero predicates, negative depth, ...).
    void validate() const;

    static GeneratorConfig from_json(const std::string& json_text);
    std::string to_json() const;
};

Problem generate_random_clauses(uint64_t seed, const GeneratorConfig& config);

}  // namespace clausevec
