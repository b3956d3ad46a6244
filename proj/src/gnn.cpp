#include "clausevec/gnn.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "clausevec/rng.hpp"

namespace clausevec {

EncoderKind encoder_kind_from_string(const std::string& s) {
    if (s == "term_walks") return EncoderKind::term_walks;
    if (s == "chain_patterns") return EncoderKind::chain_patterns;
    if (s == "gcn") return EncoderKind::gcn;
    if (s == "boc_gcn") return EncoderKind::boc_gcn;
    if (s == "rgcn") return EncoderKind::rgcn;
    if (s == "mpnn") return EncoderKind::mpnn;
    if (s == "glstm_mpnn") return EncoderKind::glstm_mpnn;
    throw ConfigError("unknown encoder '" + s + "'");
}

const char* encoder_kind_name(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::term_walks: return "term_walks";
        case EncoderKind::chain_patterns: return "chain_patterns";
        case EncoderKind::gcn: return "gcn";
        case EncoderKind::boc_gcn: return "boc_gcn";
        case EncoderKind::rgcn: return "rgcn";
        case EncoderKind::mpnn: return "mpnn";
        case EncoderKind::glstm_mpnn: return "glstm_mpnn";
    }
    return "?";
}

bool encoder_is_gnn(EncoderKind kind) {
    return kind != EncoderKind::term_walks && kind != EncoderKind::chain_patterns;
}

EncoderConfig EncoderConfig::defaults_for(EncoderKind kind) {
    EncoderConfig cfg;
    switch (kind) {
        case EncoderKind::boc_gcn:
            cfg.init = InitMode::bag_of_characters;
            break;
        case EncoderKind::mpnn:
            cfg.pooling = Pooling::max;
            break;
        case EncoderKind::glstm_mpnn:
            cfg.pooling = Pooling::dag_lstm;
            break;
        default:
            break;
    }
    return cfg;
}

namespace {

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + s + "'");
}

Pooling pooling_from_string(const std::string& s) {
    if (s == "sum") return Pooling::sum;
    if (s == "max") return Pooling::max;
    if (s == "dag_lstm") return Pooling::dag_lstm;
    throw ConfigError("unknown pooling '" + s + "'");
}

InitMode init_from_string(const std::string& s) {
    if (s == "label_class_lookup") return InitMode::label_class_lookup;
    if (s == "bag_of_characters") return InitMode::bag_of_characters;
    throw ConfigError("unknown init mode '" + s + "'");
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

const char* pooling_name(Pooling p) {
    switch (p) {
        case Pooling::sum: return "sum";
        case Pooling::max: return "max";
        case Pooling::dag_lstm: return "dag_lstm";
    }
    return "?";
}

const char* init_name(InitMode m) {
    return m == InitMode::label_class_lookup ? "label_class_lookup" : "bag_of_characters";
}

}  // namespace

EncoderConfig EncoderConfig::from_json(const std::string& json_text, EncoderKind kind) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("encoder config: ") + e.what());
    }
    EncoderConfig cfg = defaults_for(kind);
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "d")
                cfg.d = value.get<int>();
            else if (key == "rounds")
                cfg.rounds = value.get<int>();
            else if (key == "activation")
                cfg.activation = activation_from_string(value.get<std::string>());
            else if (key == "pooling")
                cfg.pooling = pooling_from_string(value.get<std::string>());
            else if (key == "bidirectional_messages")
                cfg.bidirectional_messages = value.get<bool>();
            else if (key == "init")
                cfg.init = init_from_string(value.get<std::string>());
            else if (key == "max_arg")
                cfg.max_arg = value.get<int>();
            else
                throw ConfigError("encoder config: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("encoder config key '" + key + "': " + e.what());
        }
    }
    if (cfg.d < 1) throw ConfigError("encoder config: d must be >= 1");
    if (cfg.rounds < 0) throw ConfigError("encoder config: rounds must be >= 0");
    if (cfg.max_arg < 0) throw ConfigError("encoder config: max_arg must be >= 0");
    return cfg;
}

std::string EncoderConfig::to_json() const {
    nlohmann::json j{{"d", d},
                     {"rounds", rounds},
                     {"activation", activation_name(activation)},
                     {"pooling", pooling_name(pooling)},
                     {"bidirectional_messages", bidirectional_messages},
                     {"init", init_name(init)},
                     {"max_arg", max_arg}};
    return j.dump();
}

// ---------------------------------------------------------------------------

std::string node_class(const GraphNode& node) {
    switch (node.kind) {
        case NodeKind::clause_root: return "root";
        case NodeKind::negation: return "neg";
        case NodeKind::predicate: return "pred:" + node.label;
        case NodeKind::function:
            return node.label == "var" ? std::string("term:var") : "term:" + node.label;
        case NodeKind::name_node: {
            bool variable = !node.label.empty() && node.label.front() >= 'A' &&
                            node.label.front() <= 'Z';
            return variable ? std::string("name:var") : "name:" + node.label;
        }
        case NodeKind::shared_node: return "term:var";
    }
    return "?";
}

template <class S>
GnnEncoder<S>::GnnEncoder(EncoderKind kind, EncoderConfig config, uint64_t seed)
    : kind_(kind), config_(config), seed_(seed) {
    if (!encoder_is_gnn(kind))
        throw ConfigError(std::string("GnnEncoder: '") + encoder_kind_name(kind) +
                          "' is a pattern encoder");
    int d = config_.d;
    auto make = [&](const std::string& name, int rows, int cols) {
        params_.create(name, xavier_init<S>({rows, cols}, seed_ ^ fnv1a(name)));
    };
    auto make_zero = [&](const std::string& name, int rows, int cols) {
        params_.create(name, Tensor<S>::zeros(rows, cols));
    };
    bool gcn_family = kind == EncoderKind::gcn || kind == EncoderKind::boc_gcn ||
                      kind == EncoderKind::rgcn;
    if (gcn_family) {
        for (int t = 0; t < config_.rounds; ++t) {
            std::string layer = std::to_string(t);
            if (kind == EncoderKind::rgcn) {
                make("rgcn/to_name/W" + layer, d, d);
                make("rgcn/commutative_arg/W" + layer, d, d);
                make("rgcn/other/W" + layer, d, d);
                make("rgcn/self/W" + layer, d, d);
            } else {
                make("gcn/W" + layer, d, d);
            }
        }
        make("out/W", d, d);
        make_zero("out/b", 1, d);
    } else {
        for (int t = 0; t < config_.rounds; ++t) {
            std::string p = "mpnn/" + std::to_string(t);
            make(p + "/FM/W1", 3 * d, d);
            make_zero(p + "/FM/b1", 1, d);
            make(p + "/FM/W2", d, d);
            make_zero(p + "/FM/b2", 1, d);
            make(p + "/FU/W1", 2 * d, d);
            make_zero(p + "/FU/b1", 1, d);
            make(p + "/FU/W2", d, d);
            make_zero(p + "/FU/b2", 1, d);
        }
        if (config_.pooling == Pooling::dag_lstm) {
            make("glstm/Wi", 2 * d, d);
            make_zero("glstm/bi", 1, d);
            make("glstm/Wo", 2 * d, d);
            make_zero("glstm/bo", 1, d);
            make("glstm/Wc", 2 * d, d);
            make_zero("glstm/bc", 1, d);
            make("glstm/Wf", 3 * d, d);
            make_zero("glstm/bf", 1, d);
        }
    }
    if (config_.init == InitMode::bag_of_characters) make("boc/W", 95, d);
}

template <class S>
FormulaGraph GnnEncoder<S>::build_graph(const Clause& clause) const {
    switch (kind_) {
        case EncoderKind::gcn:
        case EncoderKind::boc_gcn:
        case EncoderKind::rgcn:
            return build_name_shared_tree(clause);
        default:
            return build_shared_subexpr_dag(clause);
    }
}

template <class S>
Var<S> GnnEncoder<S>::class_embedding(Tape<S>& tape, const std::string& cls) {
    std::string name = "emb/" + cls;
    params_.get_or_create(name, [&] {
        return xavier_init<S>({1, config_.d}, seed_ ^ fnv1a(name));
    });
    return tape.param(params_, name);
}

template <class S>
Var<S> GnnEncoder<S>::edge_vector(Tape<S>& tape, EdgeType type, int position, bool downward) {
    // Operands of commutative operators are unordered: drop their position so
    // that literal permutation cannot change the message.
    int pos = type == EdgeType::commutative_arg ? 0 : std::min(position, config_.max_arg);
    std::string name = std::string("edge/") + edge_type_name(type) + "/" +
                       std::to_string(pos) + (downward ? "/down" : "/up");
    params_.get_or_create(name, [&] {
        return xavier_init<S>({1, config_.d}, seed_ ^ fnv1a(name));
    });
    return tape.param(params_, name);
}

template <class S>
Var<S> GnnEncoder<S>::initial_features(Tape<S>& tape, const FormulaGraph& graph) {
    int n = graph.node_count();
    if (config_.init == InitMode::bag_of_characters) {
        Tensor<S> counts = Tensor<S>::zeros(n, 95);
        for (int u = 0; u < n; ++u) {
            auto boc = boc_features(graph.nodes[u].label);
            for (int j = 0; j < 95; ++j) counts.at(u, j) = static_cast<S>(boc[j]);
        }
        return tape.matmul(tape.lift(std::move(counts)), tape.param(params_, "boc/W"));
    }
    // One learned row per node class, assembled in class-first-use order.
    std::vector<std::string> classes;
    std::vector<int> class_of(n);
    std::map<std::string, int> index;
    for (int u = 0; u < n; ++u) {
        std::string cls = node_class(graph.nodes[u]);
        auto [it, inserted] = index.emplace(cls, static_cast<int>(classes.size()));
        if (inserted) classes.push_back(cls);
        class_of[u] = it->second;
    }
    std::vector<Var<S>> rows;
    rows.reserve(classes.size());
    for (const auto& cls : classes) rows.push_back(class_embedding(tape, cls));
    return tape.gather_rows(tape.concat_rows(rows), class_of);
}

template <class S>
Var<S> GnnEncoder<S>::activation(Tape<S>& tape, Var<S> x) {
    switch (config_.activation) {
        case Activation::relu: return tape.relu(x);
        case Activation::tanh: return tape.tanh_(x);
        case Activation::sigmoid: return tape.sigmoid(x);
    }
    return x;
}

namespace {

// Symmetric-normalized dense adjacency with self-loops:
// A_hat = D^-1/2 (A + I) D^-1/2 over deduplicated undirected edges.
template <class S>
Tensor<S> normalized_adjacency(const FormulaGraph& graph) {
    int n = graph.node_count();
    Tensor<S> a = Tensor<S>::zeros(n, n);
    for (const auto& e : graph.edges) {
        a.at(e.src, e.dst) = S(1);
        a.at(e.dst, e.src) = S(1);
    }
    for (int u = 0; u < n; ++u) a.at(u, u) = S(1);
    std::vector<S> inv_sqrt_deg(n);
    for (int u = 0; u < n; ++u) {
        S deg = 0;
        for (int v = 0; v < n; ++v) deg += a.at(u, v);
        inv_sqrt_deg[u] = S(1) / std::sqrt(deg);
    }
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) a.at(u, v) *= inv_sqrt_deg[u] * inv_sqrt_deg[v];
    return a;
}

// Row-normalized per-type adjacency (undirected view, multi-edges counted):
// A_r[u][v] = count(u ~r~ v) / |N_{u,r}|.
template <class S>
Tensor<S> relation_adjacency(const FormulaGraph& graph, EdgeType type) {
    int n = graph.node_count();
    Tensor<S> a = Tensor<S>::zeros(n, n);
    for (const auto& e : graph.edges) {
        if (e.type != type) continue;
        a.at(e.src, e.dst) += S(1);
        a.at(e.dst, e.src) += S(1);
    }
    for (int u = 0; u < n; ++u) {
        S total = 0;
        for (int v = 0; v < n; ++v) total += a.at(u, v);
        if (total == S(0)) continue;
        for (int v = 0; v < n; ++v) a.at(u, v) /= total;
    }
    return a;
}

}  // namespace

template <class S>
Var<S> GnnEncoder<S>::gcn_rounds(Tape<S>& tape, const FormulaGraph& graph, Var<S> h) {
    Var<S> adj = tape.lift(normalized_adjacency<S>(graph));
    for (int t = 0; t < config_.rounds; ++t) {
        Var<S> w = tape.param(params_, "gcn/W" + std::to_string(t));
        h = activation(tape, tape.matmul(adj, tape.matmul(h, w)));
    }
    return h;
}

template <class S>
Var<S> GnnEncoder<S>::rgcn_rounds(Tape<S>& tape, const FormulaGraph& graph, Var<S> h) {
    static constexpr EdgeType kTypes[] = {EdgeType::to_name, EdgeType::commutative_arg,
                                          EdgeType::other};
    std::vector<Var<S>> adj;
    for (EdgeType type : kTypes) adj.push_back(tape.lift(relation_adjacency<S>(graph, type)));
    for (int t = 0; t < config_.rounds; ++t) {
        std::string layer = std::to_string(t);
        Var<S> acc = tape.matmul(h, tape.param(params_, "rgcn/self/W" + layer));
        for (size_t r = 0; r < 3; ++r) {
            std::string name = std::string("rgcn/") + edge_type_name(kTypes[r]) + "/W" + layer;
            acc = tape.add(acc, tape.matmul(adj[r], tape.matmul(h, tape.param(params_, name))));
        }
        h = activation(tape, acc);
    }
    return h;
}

template <class S>
Var<S> GnnEncoder<S>::mpnn_rounds(Tape<S>& tape, const FormulaGraph& graph, Var<S> h) {
    int n = graph.node_count();
    // One entry per directed message. "down" messages run parent -> child.
    std::vector<int> recv, send;
    std::vector<Var<S>> edge_rows;
    for (const auto& e : graph.edges) {
        recv.push_back(e.src);
        send.push_back(e.dst);
        edge_rows.push_back(edge_vector(tape, e.type, e.arg_position, /*downward=*/false));
        if (config_.bidirectional_messages) {
            recv.push_back(e.dst);
            send.push_back(e.src);
            edge_rows.push_back(edge_vector(tape, e.type, e.arg_position, /*downward=*/true));
        }
    }
    Var<S> edge_feats;
    if (!recv.empty()) edge_feats = tape.concat_rows(edge_rows);
    for (int t = 0; t < config_.rounds; ++t) {
        std::string p = "mpnn/" + std::to_string(t);
        Var<S> m;
        if (!recv.empty()) {
            Var<S> hr = tape.gather_rows(h, recv);
            Var<S> hs = tape.gather_rows(h, send);
            Var<S> messages = mlp2(tape, tape.concat_cols({hr, hs, edge_feats}), p + "/FM");
            m = tape.segment_sum(messages, recv, n);
        } else {
            // Edgeless graph: every node is isolated, messages are zero.
            m = tape.lift(Tensor<S>::zeros(n, config_.d));
        }
        Var<S> update = mlp2(tape, tape.concat_cols({h, m}), p + "/FU");
        h = tape.add(h, update);
    }
    return h;
}

template <class S>
Var<S> GnnEncoder<S>::mlp2(Tape<S>& tape, Var<S> x, const std::string& prefix) {
    Var<S> hidden = tape.relu(tape.add(tape.matmul(x, tape.param(params_, prefix + "/W1")),
                                       tape.param(params_, prefix + "/b1")));
    return tape.add(tape.matmul(hidden, tape.param(params_, prefix + "/W2")),
                    tape.param(params_, prefix + "/b2"));
}

template <class S>
Var<S> GnnEncoder<S>::dag_lstm_pool(Tape<S>& tape, const FormulaGraph& graph,
                                    Var<S> node_inputs) {
    int n = graph.node_count();
    int d = config_.d;
    LevelSchedule schedule = topological_levels(graph);

    std::vector<std::vector<const GraphEdge*>> out_edges(n);
    for (const auto& e : graph.edges) out_edges[e.src].push_back(&e);

    Var<S> wi = tape.param(params_, "glstm/Wi"), bi = tape.param(params_, "glstm/bi");
    Var<S> wo = tape.param(params_, "glstm/Wo"), bo = tape.param(params_, "glstm/bo");
    Var<S> wc = tape.param(params_, "glstm/Wc"), bc = tape.param(params_, "glstm/bc");
    Var<S> wf = tape.param(params_, "glstm/Wf"), bf = tape.param(params_, "glstm/bf");

    Var<S> h_all = tape.lift(Tensor<S>::zeros(n, d));
    Var<S> c_all = tape.lift(Tensor<S>::zeros(n, d));

    for (const auto& level : schedule.levels) {
        int m = static_cast<int>(level.size());
        Var<S> x = tape.gather_rows(node_inputs, level);

        // Child edges of this level, in (level order, edge order).
        std::vector<int> slot_of_edge, child_of_edge, parent_of_edge;
        std::vector<Var<S>> edge_rows;
        for (int slot = 0; slot < m; ++slot) {
            for (const GraphEdge* e : out_edges[level[slot]]) {
                slot_of_edge.push_back(slot);
                child_of_edge.push_back(e->dst);
                parent_of_edge.push_back(e->src);
                edge_rows.push_back(
                    edge_vector(tape, e->type, e->arg_position, /*downward=*/true));
            }
        }

        Var<S> h_children_sum;
        Var<S> child_h;
        bool has_children = !slot_of_edge.empty();
        if (has_children) {
            child_h = tape.gather_rows(h_all, child_of_edge);
            h_children_sum = tape.segment_sum(child_h, slot_of_edge, m);
        } else {
            h_children_sum = tape.lift(Tensor<S>::zeros(m, d));
        }

        Var<S> xh = tape.concat_cols({x, h_children_sum});
        Var<S> input_gate = tape.sigmoid(tape.add(tape.matmul(xh, wi), bi));
        Var<S> output_gate = tape.sigmoid(tape.add(tape.matmul(xh, wo), bo));
        Var<S> candidate = tape.tanh_(tape.add(tape.matmul(xh, wc), bc));
        Var<S> c = tape.mul(input_gate, candidate);

        if (has_children) {
            // Per-child forget gates modulate each child's memory cell.
            Var<S> xf = tape.concat_cols({tape.gather_rows(node_inputs, parent_of_edge),
                                          child_h, tape.concat_rows(edge_rows)});
            Var<S> forget = tape.sigmoid(tape.add(tape.matmul(xf, wf), bf));
            Var<S> child_c = tape.gather_rows(c_all, child_of_edge);
            Var<S> forgotten = tape.segment_sum(tape.mul(forget, child_c), slot_of_edge, m);
            c = tape.add(c, forgotten);
        }

        Var<S> h = tape.mul(output_gate, tape.tanh_(c));
        h_all = tape.scatter_rows(h_all, level, h);
        c_all = tape.scatter_rows(c_all, level, c);
    }

    return tape.gather_rows(h_all, {graph.root});
}

template <class S>
Var<S> GnnEncoder<S>::node_states_on_tape(Tape<S>& tape, const FormulaGraph& graph) {
    Var<S> h = initial_features(tape, graph);
    switch (kind_) {
        case EncoderKind::gcn:
        case EncoderKind::boc_gcn:
            return gcn_rounds(tape, graph, h);
        case EncoderKind::rgcn:
            return rgcn_rounds(tape, graph, h);
        default:
            return mpnn_rounds(tape, graph, h);
    }
}

template <class S>
Var<S> GnnEncoder<S>::pool(Tape<S>& tape, const FormulaGraph& graph, Var<S> h) {
    switch (config_.pooling) {
        case Pooling::sum: return tape.row_sum(h);
        case Pooling::max: return tape.row_max(h);
        case Pooling::dag_lstm: return dag_lstm_pool(tape, graph, h);
    }
    return h;
}

template <class S>
Var<S> GnnEncoder<S>::encode_on_tape(Tape<S>& tape, const FormulaGraph& graph) {
    Var<S> h = node_states_on_tape(tape, graph);
    bool gcn_family = kind_ == EncoderKind::gcn || kind_ == EncoderKind::boc_gcn ||
                      kind_ == EncoderKind::rgcn;
    if (gcn_family) {
        h = tape.add(tape.matmul(h, tape.param(params_, "out/W")),
                     tape.param(params_, "out/b"));
    }
    return pool(tape, graph, h);
}

template <class S>
FeatureVector GnnEncoder<S>::encode_graph(const FormulaGraph& graph,
                                          const std::string& clause_id) {
    Tape<S> tape;
    Var<S> pooled = encode_on_tape(tape, graph);
    const Tensor<S>& value = tape.value(pooled);
    FeatureVector fv;
    fv.id = clause_id;
    fv.encoder = encoder_kind_name(kind_);
    fv.d = config_.d;
    fv.values.assign(value.data(), value.data() + value.size());
    for (double v : fv.values)
        if (!std::isfinite(v))
            throw NumericError("encoder '" + fv.encoder + "' produced a non-finite value");
    return fv;
}

template <class S>
FeatureVector GnnEncoder<S>::encode(const Clause& clause) {
    return encode_graph(build_graph(clause), clause.id);
}

template class GnnEncoder<float>;
template class GnnEncoder<double>;

}  // namespace clausevec
