#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string_view>
#include <string>

#include "clausevec/featurevec.hpp"
#include "clausevec/fol.hpp"

namespace clausevec {

// Node labels used by the pattern features.
namespace tokens {
inline const std::string positive_sign = "⊕";  // ⊕
inline const std::string negative_sign = "⊖";  // ⊖
inline const std::string wildcard = "*";
inline const std::string padding = "⊥";  // ⊥
}  // namespace tokens

// ---------------------------------------------------------------------------
// Term walks: every directed 3-node root-oriented path in a literal's parse
// tree, with a sign root above the predicate and variables/skolem terms
// collapsed to the wildcard.
// ---------------------------------------------------------------------------

struct WalkFeature {
    std::array<std::string, 3> labels;
    auto operator<=>(const WalkFeature&) const = default;
};

using WalkCounts = std::map<WalkFeature, int>;

WalkCounts term_walks(const Clause& clause, const SkolemPolicy& policy = {});

// `walk|a1|a2|a3`; '|' cannot occur in TPTP symbols, so this is injective.
std::string linearize_walk(const WalkFeature& walk);

// ---------------------------------------------------------------------------
// Chain patterns: one per root-to-leaf path of a literal, keeping the focused
// argument at every level and wildcarding the rest.
// ---------------------------------------------------------------------------

struct ChainStep {
    int position = 0;  // 1-based position within the parent
    std::string function;
    int arity = 0;
    auto operator<=>(const ChainStep&) const = default;
};

struct ChainPattern {
    Polarity polarity = Polarity::positive;
    std::string predicate;
    int predicate_arity = 0;
    std::vector<ChainStep> spine;
    int terminal_position = 0;   // 0 for a 0-ary predicate (no path below it)
    std::string terminal;        // wildcard or a constant name; empty for 0-ary
    auto operator<=>(const ChainPattern&) const = default;
};

using ChainCounts = std::map<ChainPattern, int>;

ChainCounts chain_patterns(const Literal& literal, const SkolemPolicy& policy = {});
ChainCounts chain_patterns(const Clause& clause, const SkolemPolicy& policy = {});

// `pos|q(*,f(*))` / `neg|q(*,*)`: polarity prefix plus the reconstructed
// pattern term with '*' in every non-focused argument position.
std::string linearize_chain(const ChainPattern& pattern);

// The pattern term alone, without the polarity prefix.
std::string chain_pattern_body(const ChainPattern& pattern);

// ---------------------------------------------------------------------------
// Hashing and fixed-size encoding
// ---------------------------------------------------------------------------

// Index of a linearized feature: the first 8 bytes of its MD5 digest read as
// a big-endian integer, mod d. Bit-exact across platforms.
int hash_feature(std::string_view linearization, int d);

enum class WalkMode { hashed, vocabulary };

struct PatternConfig {
    int d = 64;
    WalkMode walk_mode = WalkMode::hashed;
    // linearized walk -> vector index; required in vocabulary mode.
    std::optional<std::map<std::string, int>> vocabulary;
    SkolemPolicy skolem;
};

// Vocabulary over a corpus: all walk linearizations, sorted, indexed from 0.
std::map<std::string, int> build_walk_vocabulary(const std::vector<Clause>& clauses,
                                                 const SkolemPolicy& policy = {});

// Length d (hashed) or vocabulary-size (vocabulary) count vector. In
// vocabulary mode unseen features are dropped; *dropped reports how many.
FeatureVector encode_term_walks(const Clause& clause, const PatternConfig& cfg,
                                int* dropped = nullptr);

// Length 2d: positive-literal patterns hashed into [0,d), negative into [d,2d).
FeatureVector encode_chain_patterns(const Clause& clause, const PatternConfig& cfg);

}  // namespace clausevec
