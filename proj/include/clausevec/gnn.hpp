#pragma once

#include <cstdint>
#include <string>

#include "clausevec/autodiff.hpp"
#include "clausevec/featurevec.hpp"
#include "clausevec/graph.hpp"

namespace clausevec {

enum class EncoderKind {
    term_walks,
    chain_patterns,
    gcn,
    boc_gcn,
    rgcn,
    mpnn,
    glstm_mpnn
};

EncoderKind encoder_kind_from_string(const std::string& s);
const char* encoder_kind_name(EncoderKind kind);
bool encoder_is_gnn(EncoderKind kind);

enum class Activation { relu, tanh, sigmoid };
enum class Pooling { sum, max, dag_lstm };
enum class InitMode { label_class_lookup, bag_of_characters };

struct EncoderConfig {
    int d = 64;
    int rounds = 2;
    Activation activation = Activation::relu;
    Pooling pooling = Pooling::sum;
    bool bidirectional_messages = true;  // MPNN neighborhoods
    InitMode init = InitMode::label_class_lookup;
    int max_arg = 8;  // argument positions clamp here in edge-feature lookups

    // Applies the per-encoder defaults (pooling, init) for `kind`.
    static EncoderConfig defaults_for(EncoderKind kind);
    // Reads fields from a JSON object; unknown keys are an error.
    static EncoderConfig from_json(const std::string& json_text, EncoderKind kind);
    std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Graph encoders. One instance owns the parameters for one encoder; weights
// are created eagerly from (config, seed), embedding-table entries (node
// classes, edge features) lazily but deterministically keyed by their name.
// Encoding with equal (clause, seed, config) is bit-identical per scalar type.
// ---------------------------------------------------------------------------

template <class S>
class GnnEncoder {
public:
    GnnEncoder(EncoderKind kind, EncoderConfig config, uint64_t seed);

    EncoderKind kind() const { return kind_; }
    const EncoderConfig& config() const { return config_; }
    ParamStore<S>& params() { return params_; }

    // The graph construction this encoder runs on: name-shared tree for the
    // GCN family, shared-subexpression DAG for the MPNN family.
    FormulaGraph build_graph(const Clause& clause) const;

    // Pooled clause embedding, shape (1,d).
    Var<S> encode_on_tape(Tape<S>& tape, const FormulaGraph& graph);

    // Node states after all rounds, shape (n,d); pre-pooling (and for the
    // GCN family, pre-output-linear).
    Var<S> node_states_on_tape(Tape<S>& tape, const FormulaGraph& graph);

    FeatureVector encode(const Clause& clause);
    FeatureVector encode_graph(const FormulaGraph& graph, const std::string& clause_id);

private:
    Var<S> initial_features(Tape<S>& tape, const FormulaGraph& graph);
    Var<S> gcn_rounds(Tape<S>& tape, const FormulaGraph& graph, Var<S> h);
    Var<S> rgcn_rounds(Tape<S>& tape, const FormulaGraph& graph, Var<S> h);
    Var<S> mpnn_rounds(Tape<S>& tape, const FormulaGraph& graph, Var<S> h);
    Var<S> dag_lstm_pool(Tape<S>& tape, const FormulaGraph& graph, Var<S> node_inputs);
    Var<S> pool(Tape<S>& tape, const FormulaGraph& graph, Var<S> h);
    Var<S> activation(Tape<S>& tape, Var<S> x);
    Var<S> class_embedding(Tape<S>& tape, const std::string& cls);
    Var<S> edge_vector(Tape<S>& tape, EdgeType type, int position, bool downward);
    Var<S> mlp2(Tape<S>& tape, Var<S> x, const std::string& prefix);

    EncoderKind kind_;
    EncoderConfig config_;
    uint64_t seed_;
    ParamStore<S> params_;
};

// Node class used by the label_class_lookup initialization. Variable-carrying
// nodes collapse to one class so that alpha-renaming cannot change the
// embedding; other symbols keep their identity.
std::string node_class(const GraphNode& node);

}  // namespace clausevec
