#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace clausevec {

// ---------------------------------------------------------------------------
// Clause model. Values are immutable once built and safe to share across
// threads; all operations on them are pure.
// ---------------------------------------------------------------------------

enum class TermKind { variable, function };

// A first-order term: a variable or a function application. A zero-argument
// function is a constant.
struct Term {
    TermKind kind = TermKind::variable;
    std::string name;
    std::vector<Term> args;  // empty for variables and constants

    static Term var(std::string name) { return {TermKind::variable, std::move(name), {}}; }
    static Term fn(std::string name, std::vector<Term> args = {}) {
        return {TermKind::function, std::move(name), std::move(args)};
    }
    bool is_variable() const { return kind == TermKind::variable; }
    bool operator==(const Term&) const = default;
};

enum class Polarity { positive, negative };

struct Literal {
    Polarity polarity = Polarity::positive;
    std::string predicate;
    std::vector<Term> args;

    bool is_negative() const { return polarity == Polarity::negative; }
    bool operator==(const Literal&) const = default;
};

enum class ClauseRole { axiom, negated_conjecture, derived };

// A disjunction of literals. The literal list keeps source order, but every
// encoder downstream treats it as a multiset.
struct Clause {
    std::string id;
    ClauseRole role = ClauseRole::axiom;
    std::vector<Literal> literals;

    bool operator==(const Clause&) const = default;
};

enum class SymbolKind { predicate, function };

struct SymbolInfo {
    SymbolKind kind;
    int arity;
    bool operator==(const SymbolInfo&) const = default;
};

struct Problem {
    std::vector<Clause> clauses;
    // Exactly the non-variable symbols occurring in `clauses`.
    std::map<std::string, SymbolInfo> signature;
};

// ---------------------------------------------------------------------------
// Symbol classification. TPTP files carry no skolem marker, so skolem
// symbols are recognized by a configurable name-prefix list.
// ---------------------------------------------------------------------------

struct SkolemPolicy {
    bool enabled = true;  // false: nothing is classified as skolem
    std::vector<std::string> prefixes = {"sk", "esk", "skolem"};

    static SkolemPolicy none() { return {false, {}}; }
};

enum class SymbolClass { variable, skolem, plain };

SymbolClass classify_symbol(std::string_view name, const SkolemPolicy& policy);

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& msg, int line, int column);
};

// Inconsistent arity (or predicate/function kind) for one symbol.
struct ArityError : ParseError {
    std::string symbol;
    int arity_seen = 0;
    int arity_now = 0;
    ArityError(const std::string& symbol, int seen, int now, int line, int column);
    using ParseError::ParseError;
};

struct IncludeError : ParseError {
    using ParseError::ParseError;
};

struct ParseOptions {
    // Directory against which include(...) directives are resolved. Includes
    // are an error when unset.
    std::optional<std::string> include_root;
};

// Parses a sequence of TPTP `cnf(name, role, formula).` statements.
// `%` line comments, `/* */` block comments and include directives are
// handled. Equality atoms `a = b` / `a != b` are normalized to the binary
// predicate `=` with the corresponding polarity.
Problem parse_cnf_problem(std::string_view text, const ParseOptions& opts = {});

// ---------------------------------------------------------------------------
// Printing. parse(print(c)) is structurally equal to c.
// ---------------------------------------------------------------------------

std::string term_to_string(const Term& term);
std::string literal_to_string(const Literal& literal);

// `auto_index` numbers clauses that lack an id (rendered as c<n>).
std::string clause_to_string(const Clause& clause, int auto_index = 1);
std::string problem_to_string(const Problem& problem);

// Re-derives the signature from the clause list; throws ArityError on
// inconsistency. parse and the generator both go through this.
std::map<std::string, SymbolInfo> compute_signature(const std::vector<Clause>& clauses);

// Distinct variable names of a clause, in order of first occurrence.
std::vector<std::string> clause_variables(const Clause& clause);

}  // namespace clausevec
