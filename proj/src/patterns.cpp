#include "clausevec/patterns.hpp"

#include "clausevec/errors.hpp"
#include "clausevec/md5.hpp"

namespace clausevec {

namespace {

// Walk enumeration runs directly over the term structure; labels are views
// into existing symbol strings (or the fixed tokens), so the hot encode path
// allocates nothing per node.

// A term's node label; variables and skolem-headed terms collapse to the
// wildcard and hide their children.
std::string_view walk_label(const Term& term, const SkolemPolicy& policy) {
    if (term.kind == TermKind::variable ||
        classify_symbol(term.name, policy) == SymbolClass::skolem)
        return tokens::wildcard;
    return term.name;
}

bool walk_hides_children(const Term& term, const SkolemPolicy& policy) {
    return term.kind == TermKind::variable ||
           classify_symbol(term.name, policy) == SymbolClass::skolem;
}

// Emits every directed 3-node path of the literal's sign-rooted label tree,
// one call per path occurrence. A literal too shallow for any such path
// (0-ary predicate) emits its maximal root path padded with the reserved
// label instead of nothing.
template <class Emit>
void for_each_walk(const Literal& lit, const SkolemPolicy& policy, const Emit& emit) {
    std::string_view sign = lit.is_negative() ? tokens::negative_sign : tokens::positive_sign;
    if (lit.args.empty()) {
        emit(sign, lit.predicate, tokens::padding);
        return;
    }
    for (const auto& arg : lit.args) emit(sign, lit.predicate, walk_label(arg, policy));

    // (parent, child, grandchild) paths rooted anywhere in the term trees.
    auto descend = [&](const auto& self, std::string_view parent, const Term& term) -> void {
        if (walk_hides_children(term, policy)) return;
        for (const auto& child : term.args) emit(parent, term.name, walk_label(child, policy));
        for (const auto& child : term.args) self(self, term.name, child);
    };
    for (const auto& arg : lit.args) descend(descend, lit.predicate, arg);
}

}  // namespace

WalkCounts term_walks(const Clause& clause, const SkolemPolicy& policy) {
    WalkCounts counts;
    for (const auto& lit : clause.literals)
        for_each_walk(lit, policy,
                      [&](std::string_view a, std::string_view b, std::string_view c) {
                          ++counts[WalkFeature{
                              {std::string(a), std::string(b), std::string(c)}}];
                      });
    return counts;
}

std::string linearize_walk(const WalkFeature& walk) {
    return "walk|" + walk.labels[0] + "|" + walk.labels[1] + "|" + walk.labels[2];
}

// --- chain patterns ----------------------------------------------------------

namespace {

void collect_chains(const Literal& lit, const SkolemPolicy& policy, ChainCounts& out) {
    ChainPattern base;
    base.polarity = lit.polarity;
    base.predicate = lit.predicate;
    base.predicate_arity = static_cast<int>(lit.args.size());

    if (lit.args.empty()) {
        ++out[base];
        return;
    }

    // Depth-first walk over (term, position-in-parent) keeping the spine so far.
    struct Walker {
        const SkolemPolicy& policy;
        ChainCounts& out;
        ChainPattern& pattern;

        void descend(const Term& term, int position) {
            bool is_leaf = term.kind == TermKind::variable || term.args.empty() ||
                           classify_symbol(term.name, policy) == SymbolClass::skolem;
            if (is_leaf) {
                bool wild = term.kind == TermKind::variable ||
                            classify_symbol(term.name, policy) != SymbolClass::plain;
                pattern.terminal_position = position;
                pattern.terminal = wild ? tokens::wildcard : term.name;
                ++out[pattern];
                return;
            }
            pattern.spine.push_back(
                {position, term.name, static_cast<int>(term.args.size())});
            for (size_t i = 0; i < term.args.size(); ++i)
                descend(term.args[i], static_cast<int>(i + 1));
            pattern.spine.pop_back();
        }
    } walker{policy, out, base};

    for (size_t i = 0; i < lit.args.size(); ++i)
        walker.descend(lit.args[i], static_cast<int>(i + 1));
}

std::string wildcards(int arity, int focus, const std::string& focused_text) {
    std::string out = "(";
    for (int i = 1; i <= arity; ++i) {
        if (i > 1) out += ",";
        out += i == focus ? focused_text : tokens::wildcard;
    }
    out += ")";
    return out;
}

}  // namespace

ChainCounts chain_patterns(const Literal& literal, const SkolemPolicy& policy) {
    ChainCounts out;
    collect_chains(literal, policy, out);
    return out;
}

ChainCounts chain_patterns(const Clause& clause, const SkolemPolicy& policy) {
    ChainCounts out;
    for (const auto& lit : clause.literals) collect_chains(lit, policy, out);
    return out;
}

std::string chain_pattern_body(const ChainPattern& pattern) {
    if (pattern.predicate_arity == 0) return pattern.predicate;
    // Build innermost-out: terminal, then spine functions, then the predicate.
    std::string text = pattern.terminal;
    for (auto it = pattern.spine.rbegin(); it != pattern.spine.rend(); ++it) {
        int focus = (it == pattern.spine.rbegin()) ? pattern.terminal_position
                                                   : std::prev(it)->position;
        // focus is the position of the element below this spine function.
        text = it->function + wildcards(it->arity, focus, text);
    }
    int top_focus = pattern.spine.empty() ? pattern.terminal_position : pattern.spine.front().position;
    return pattern.predicate + wildcards(pattern.predicate_arity, top_focus, text);
}

std::string linearize_chain(const ChainPattern& pattern) {
    return (pattern.polarity == Polarity::negative ? "neg|" : "pos|") +
           chain_pattern_body(pattern);
}

// --- hashing / encoding -------------------------------------------------------

int hash_feature(std::string_view linearization, int d) {
    if (d < 1) throw ConfigError("hash_feature: d must be >= 1");
    return static_cast<int>(md5_prefix64(linearization) % static_cast<uint64_t>(d));
}

std::map<std::string, int> build_walk_vocabulary(const std::vector<Clause>& clauses,
                                                 const SkolemPolicy& policy) {
    std::map<std::string, int> vocab;  // ordered: lexicographic determinism
    for (const auto& clause : clauses)
        for (const auto& [walk, n] : term_walks(clause, policy)) vocab[linearize_walk(walk)] = 0;
    int index = 0;
    for (auto& [text, idx] : vocab) idx = index++;
    return vocab;
}

FeatureVector encode_term_walks(const Clause& clause, const PatternConfig& cfg, int* dropped) {
    if (cfg.d < 1) throw ConfigError("encode_term_walks: d must be >= 1");
    FeatureVector fv;
    fv.id = clause.id;
    fv.encoder = "term_walks";
    fv.d = cfg.d;
    if (dropped) *dropped = 0;
    if (cfg.walk_mode == WalkMode::vocabulary) {
        if (!cfg.vocabulary)
            throw ConfigError("encode_term_walks: vocabulary mode without a vocabulary");
        fv.values.assign(cfg.vocabulary->size(), 0.0);
        for (const auto& [walk, n] : term_walks(clause, cfg.skolem)) {
            auto it = cfg.vocabulary->find(linearize_walk(walk));
            if (it == cfg.vocabulary->end()) {
                if (dropped) *dropped += n;
                continue;
            }
            fv.values[it->second] += n;
        }
        return fv;
    }
    // Hashed mode: accumulate one count per path occurrence straight into the
    // vector; a reused buffer keeps the hot path allocation-free.
    fv.values.assign(cfg.d, 0.0);
    std::string buffer;
    buffer.reserve(64);
    for (const auto& lit : clause.literals) {
        for_each_walk(lit, cfg.skolem,
                      [&](std::string_view a, std::string_view b, std::string_view c) {
                          buffer.assign("walk|");
                          buffer += a;
                          buffer += '|';
                          buffer += b;
                          buffer += '|';
                          buffer += c;
                          fv.values[hash_feature(buffer, cfg.d)] += 1.0;
                      });
    }
    return fv;
}

FeatureVector encode_chain_patterns(const Clause& clause, const PatternConfig& cfg) {
    if (cfg.d < 1) throw ConfigError("encode_chain_patterns: d must be >= 1");
    FeatureVector fv;
    fv.id = clause.id;
    fv.encoder = "chain_patterns";
    fv.d = cfg.d;
    fv.values.assign(size_t{2} * cfg.d, 0.0);
    for (const auto& [pattern, n] : chain_patterns(clause, cfg.skolem)) {
        int offset = pattern.polarity == Polarity::negative ? cfg.d : 0;
        fv.values[offset + hash_feature(linearize_chain(pattern), cfg.d)] += n;
    }
    return fv;
}

}  // namespace clausevec
