#include "clausevec/graph.hpp"

#include <map>
#include <tuple>

#include <json.hpp>

#include "clausevec/errors.hpp"

namespace clausevec {

namespace {

constexpr const char* kDisjunction = "|";
constexpr const char* kNegation = "~";
constexpr const char* kVarOccurrence = "var";

EdgeType arg_edge_type(const std::string& parent_symbol) {
    return parent_symbol == "=" ? EdgeType::commutative_arg : EdgeType::other;
}

// --- name-shared tree -------------------------------------------------------

struct TreeBuilder {
    FormulaGraph graph;
    std::map<std::string, int> name_nodes;
    bool with_name_nodes;

    int add_node(std::string label, NodeKind kind) {
        graph.nodes.push_back({std::move(label), kind});
        return graph.node_count() - 1;
    }

    void add_edge(int src, int dst, int pos, EdgeType type) {
        graph.edges.push_back({src, dst, pos, type});
    }

    int name_node_for(const std::string& name) {
        auto it = name_nodes.find(name);
        if (it != name_nodes.end()) return it->second;
        int idx = add_node(name, NodeKind::name_node);
        name_nodes.emplace(name, idx);
        return idx;
    }

    void build_term(const Term& term, int parent, int pos, EdgeType type) {
        if (term.kind == TermKind::variable) {
            int occ = add_node(kVarOccurrence, NodeKind::function);
            add_edge(parent, occ, pos, type);
            if (with_name_nodes) add_edge(occ, name_node_for(term.name), 0, EdgeType::to_name);
            return;
        }
        int node = add_node(term.name, NodeKind::function);
        add_edge(parent, node, pos, type);
        if (term.args.empty()) {
            if (with_name_nodes) add_edge(node, name_node_for(term.name), 0, EdgeType::to_name);
            return;
        }
        for (size_t i = 0; i < term.args.size(); ++i)
            build_term(term.args[i], node, static_cast<int>(i + 1),
                       arg_edge_type(term.name));
    }

    FormulaGraph build(const Clause& clause) {
        graph.root = add_node(kDisjunction, NodeKind::clause_root);
        for (size_t li = 0; li < clause.literals.size(); ++li) {
            const Literal& lit = clause.literals[li];
            int pos = static_cast<int>(li + 1);
            int atom_parent = graph.root;
            int atom_pos = pos;
            EdgeType atom_type = EdgeType::commutative_arg;  // from the disjunction root
            if (lit.is_negative()) {
                int neg = add_node(kNegation, NodeKind::negation);
                add_edge(graph.root, neg, pos, EdgeType::commutative_arg);
                atom_parent = neg;
                atom_pos = 1;
                atom_type = EdgeType::other;
            }
            int atom = add_node(lit.predicate, NodeKind::predicate);
            add_edge(atom_parent, atom, atom_pos, atom_type);
            for (size_t i = 0; i < lit.args.size(); ++i)
                build_term(lit.args[i], atom, static_cast<int>(i + 1),
                           arg_edge_type(lit.predicate));
        }
        return std::move(graph);
    }
};

}  // namespace

FormulaGraph build_name_shared_tree(const Clause& clause) {
    TreeBuilder builder{{}, {}, /*with_name_nodes=*/true};
    return builder.build(clause);
}

FormulaGraph build_unshared_tree(const Clause& clause) {
    TreeBuilder builder{{}, {}, /*with_name_nodes=*/false};
    return builder.build(clause);
}

// --- shared-subexpression DAG -------------------------------------------------

namespace {

// Maximal structural sharing via hash-consing. Nodes are created in
// depth-first post-order of first occurrence (children exist before the key
// of their parent), which keeps construction order deterministic and stable
// under alpha-renaming.
struct DagBuilder {
    FormulaGraph graph;
    // (kind, label, child ids) -> node. Child order matters: f(A,B) != f(B,A).
    std::map<std::tuple<NodeKind, std::string, std::vector<int>>, int> interned;

    int add_node(std::string label, NodeKind kind) {
        graph.nodes.push_back({std::move(label), kind});
        return graph.node_count() - 1;
    }

    int intern(NodeKind kind, const std::string& label, const std::vector<int>& children,
               EdgeType child_type) {
        auto key = std::make_tuple(kind, label, children);
        auto it = interned.find(key);
        if (it != interned.end()) return it->second;
        int node = add_node(label, kind);
        for (size_t i = 0; i < children.size(); ++i)
            graph.edges.push_back(
                {node, children[i], static_cast<int>(i + 1), child_type});
        interned.emplace(std::move(key), node);
        return node;
    }

    int build_term(const Term& term) {
        if (term.kind == TermKind::variable)
            return intern(NodeKind::shared_node, term.name, {}, EdgeType::other);
        std::vector<int> children;
        children.reserve(term.args.size());
        for (const auto& arg : term.args) children.push_back(build_term(arg));
        return intern(NodeKind::function, term.name, children, arg_edge_type(term.name));
    }

    FormulaGraph build(const Clause& clause) {
        std::vector<int> tops;
        tops.reserve(clause.literals.size());
        for (const auto& lit : clause.literals) {
            std::vector<int> children;
            children.reserve(lit.args.size());
            for (const auto& arg : lit.args) children.push_back(build_term(arg));
            int atom = intern(NodeKind::predicate, lit.predicate, children,
                              arg_edge_type(lit.predicate));
            if (lit.is_negative())
                atom = intern(NodeKind::negation, kNegation, {atom}, EdgeType::other);
            tops.push_back(atom);
        }
        graph.root = add_node(kDisjunction, NodeKind::clause_root);
        for (size_t i = 0; i < tops.size(); ++i)
            graph.edges.push_back({graph.root, tops[i], static_cast<int>(i + 1),
                                   EdgeType::commutative_arg});
        return std::move(graph);
    }
};

}  // namespace

FormulaGraph build_shared_subexpr_dag(const Clause& clause) {
    DagBuilder builder;
    return builder.build(clause);
}

// --- level schedule -----------------------------------------------------------

LevelSchedule topological_levels(const FormulaGraph& graph) {
    int n = graph.node_count();
    std::vector<std::vector<int>> children(n);
    for (const auto& e : graph.edges) children[e.src].push_back(e.dst);

    std::vector<int> level(n, -1);
    std::vector<int8_t> state(n, 0);  // 0 new, 1 on stack, 2 done
    // Iterative post-order; a back edge to an on-stack node is a cycle.
    for (int start = 0; start < n; ++start) {
        if (state[start] == 2) continue;
        std::vector<std::pair<int, size_t>> stack{{start, 0}};
        state[start] = 1;
        while (!stack.empty()) {
            auto& [u, next_child] = stack.back();
            if (next_child < children[u].size()) {
                int v = children[u][next_child++];
                if (state[v] == 1)
                    throw ConfigError("topological_levels: graph has a cycle");
                if (state[v] == 0) {
                    state[v] = 1;
                    stack.emplace_back(v, 0);
                }
                continue;
            }
            int lvl = 0;
            for (int v : children[u]) lvl = std::max(lvl, level[v] + 1);
            level[u] = lvl;
            state[u] = 2;
            stack.pop_back();
        }
    }

    int max_level = 0;
    for (int u = 0; u < n; ++u) max_level = std::max(max_level, level[u]);
    LevelSchedule schedule;
    schedule.levels.resize(n == 0 ? 0 : max_level + 1);
    for (int u = 0; u < n; ++u) schedule.levels[level[u]].push_back(u);
    return schedule;
}

// --- initial features ----------------------------------------------------------

std::array<int, 95> boc_features(std::string_view symbol, int* ignored) {
    std::array<int, 95> counts{};
    if (ignored) *ignored = 0;
    for (unsigned char c : symbol) {
        if (c >= 32 && c <= 126)
            ++counts[c - 32];
        else if (ignored)
            ++*ignored;
    }
    return counts;
}

// --- serialization ---------------------------------------------------------------

const char* node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::clause_root: return "clause_root";
        case NodeKind::negation: return "negation";
        case NodeKind::predicate: return "predicate";
        case NodeKind::function: return "function";
        case NodeKind::name_node: return "name_node";
        case NodeKind::shared_node: return "shared_node";
    }
    return "?";
}

const char* edge_type_name(EdgeType type) {
    switch (type) {
        case EdgeType::to_name: return "to_name";
        case EdgeType::commutative_arg: return "commutative_arg";
        case EdgeType::other: return "other";
    }
    return "?";
}

std::string graph_to_json(const FormulaGraph& graph, bool include_labels) {
    nlohmann::json j;
    j["root"] = graph.root;
    j["nodes"] = nlohmann::json::array();
    for (const auto& node : graph.nodes) {
        nlohmann::json n{{"kind", node_kind_name(node.kind)}};
        if (include_labels) n["label"] = node.label;
        j["nodes"].push_back(std::move(n));
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& e : graph.edges) {
        j["edges"].push_back(nlohmann::json{{"src", e.src},
                                            {"dst", e.dst},
                                            {"pos", e.arg_position},
                                            {"type", edge_type_name(e.type)}});
    }
    return j.dump();
}

}  // namespace clausevec
