#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "clausevec/fol.hpp"

namespace clausevec {

// ---------------------------------------------------------------------------
// Graph representations of clauses for the GNN encoders.
//
// Two constructions share one graph type:
//   * name-shared tree: the parse tree with one shared name node per distinct
//     variable/constant name, linked from each occurrence (used by the GCNs);
//   * shared-subexpression DAG: maximal structural sharing of subterms, one
//     node per variable (used by the MPNNs).
//
// Edges point parent -> child. Node and edge order is depth-first
// construction order, with name/shared nodes appearing at first occurrence,
// which makes serialization deterministic and stable under alpha-renaming.
// ---------------------------------------------------------------------------

enum class NodeKind : uint8_t {
    clause_root,
    negation,
    predicate,
    function,   // function applications, constants and (in the tree) variable occurrences
    name_node,  // tree construction: shared name of a variable or constant
    shared_node  // DAG construction: a variable
};

enum class EdgeType : uint8_t {
    to_name,          // occurrence -> name node
    commutative_arg,  // from the disjunction root and from '=' atoms
    other
};

struct GraphNode {
    std::string label;  // symbol or operator text; variable occurrences use "var"
    NodeKind kind;
};

struct GraphEdge {
    int src;
    int dst;
    int arg_position;  // 1-based argument index; 0 for non-argument (to_name) edges
    EdgeType type;
};

struct FormulaGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    int root = 0;

    int node_count() const { return static_cast<int>(nodes.size()); }
};

FormulaGraph build_name_shared_tree(const Clause& clause);

FormulaGraph build_shared_subexpr_dag(const Clause& clause);

// Plain parse tree without any sharing; reference construction used to bound
// and cross-check the DAG.
FormulaGraph build_unshared_tree(const Clause& clause);

// Leaves-first level schedule: level(u) = 0 for leaves, else 1 + max over
// children. Every edge runs from a strictly higher level to a lower one.
struct LevelSchedule {
    std::vector<std::vector<int>> levels;
};

// Throws ConfigError on a cyclic graph.
LevelSchedule topological_levels(const FormulaGraph& graph);

// Counts of printable ASCII characters (codes 32..126) in a symbol's text.
// Bytes outside that range are skipped; *ignored counts them.
std::array<int, 95> boc_features(std::string_view symbol, int* ignored = nullptr);

const char* node_kind_name(NodeKind kind);
const char* edge_type_name(EdgeType type);

// JSON serialization with node/edge arrays; include_labels=false strips
// labels (used by the renaming-stability check).
std::string graph_to_json(const FormulaGraph& graph, bool include_labels = true);

}  // namespace clausevec
