#pragma once

#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "clausevec/tensor.hpp"

namespace clausevec {

template <class S>
class Tape;

// Handle to a node on a tape.
template <class S>
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Named parameter collection with deterministic (insertion) iteration order.
template <class S>
class ParamStore {
public:
    bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

    Tensor<S>& at(const std::string& name) {
        auto it = tensors_.find(name);
        if (it == tensors_.end()) throw ConfigError("unknown parameter '" + name + "'");
        return it->second;
    }
    const Tensor<S>& at(const std::string& name) const {
        return const_cast<ParamStore*>(this)->at(name);
    }

    Tensor<S>& create(const std::string& name, Tensor<S> value) {
        if (contains(name)) throw ConfigError("parameter '" + name + "' already exists");
        value.requires_grad = true;
        order_.push_back(name);
        return tensors_.emplace(name, std::move(value)).first->second;
    }

    template <class MakeFn>
    Tensor<S>& get_or_create(const std::string& name, MakeFn&& make) {
        auto it = tensors_.find(name);
        if (it != tensors_.end()) return it->second;
        return create(name, make());
    }

    const std::vector<std::string>& names() const { return order_; }
    size_t count() const { return order_.size(); }

    size_t scalar_count() const {
        size_t n = 0;
        for (const auto& name : order_) n += tensors_.at(name).size();
        return n;
    }

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor<S>> tensors_;
};

// Reverse-mode tape. One tape per forward pass; ops append nodes, backward()
// walks them in reverse creation order. Creation order is also the canonical
// (deterministic) reduction order everywhere.
template <class S>
class Tape {
public:
    // Constant input (no gradient).
    Var<S> lift(Tensor<S> value);
    // Differentiable input.
    Var<S> leaf(Tensor<S> value);
    // Binds a stored parameter; repeated binds of one name return one node.
    Var<S> param(ParamStore<S>& store, const std::string& name);

    const Tensor<S>& value(Var<S> v) const { return nodes_[v.id].value; }
    const Tensor<S>& grad(Var<S> v) const;

    // --- primitive operations (forward + reverse-mode gradient) ---
    Var<S> matmul(Var<S> a, Var<S> b);
    Var<S> add(Var<S> a, Var<S> b);  // same shape, or b a (1,k) row to broadcast
    Var<S> sub(Var<S> a, Var<S> b);
    Var<S> mul(Var<S> a, Var<S> b);  // elementwise
    Var<S> scale(Var<S> a, S c);
    Var<S> relu(Var<S> a);
    Var<S> tanh_(Var<S> a);
    Var<S> sigmoid(Var<S> a);
    Var<S> concat_cols(const std::vector<Var<S>>& parts);
    Var<S> concat_rows(const std::vector<Var<S>>& parts);
    Var<S> gather_rows(Var<S> a, std::vector<int> index);
    // Copy of `base` with base[index[i]] replaced by rows[i]; indices unique.
    Var<S> scatter_rows(Var<S> base, std::vector<int> index, Var<S> rows);
    Var<S> segment_sum(Var<S> rows, std::vector<int> segments, int num_segments);
    Var<S> segment_max(Var<S> rows, std::vector<int> segments, int num_segments);
    Var<S> row_sum(Var<S> a);  // (n,k) -> (1,k)
    Var<S> row_max(Var<S> a);  // (n,k) -> (1,k)
    Var<S> sum_all(Var<S> a);  // (n,k) -> (1,1)
    Var<S> mean_all(Var<S> a);
    // Numerically stable mean binary cross-entropy on logits; labels in {0,1}.
    Var<S> bce_with_logits(Var<S> logits, std::vector<S> labels);

    // Seeds d(root)/d(root) = 1 and accumulates gradients into every
    // requires-grad node reachable from `root`. Forward values are not
    // touched. `root` must be scalar.
    void backward(Var<S> root);

    // Parameters bound via param(), in bind order.
    const std::vector<std::pair<std::string, Var<S>>>& bound_params() const { return bound_; }
    // Gradients of bound parameters after backward(); absent entries are zero.
    std::map<std::string, Tensor<S>> param_grads() const;

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor<S> value;
        Tensor<S> grad;  // allocated on first touch
        bool requires_grad = false;
        std::function<void(Tape&)> backprop;
    };

    Var<S> push(Tensor<S> value, bool requires_grad, std::function<void(Tape&)> backprop);
    Tensor<S>& grad_buf(int id);
    bool any_grad(std::initializer_list<Var<S>> vars) const;
    void check_2d_match(const char* op, Var<S> a, Var<S> b) const;

    std::vector<Node> nodes_;
    std::vector<std::pair<std::string, Var<S>>> bound_;
    std::unordered_map<std::string, int> bound_index_;
};

// --- initialization, optimizer, loss, gradient checking ---

// Uniform in +-sqrt(6/(fan_in+fan_out)); 2-D shapes only; deterministic per seed.
template <class S>
Tensor<S> xavier_init(const std::vector<int>& shape, uint64_t seed);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard bias-corrected Adam. Step counts are kept per parameter so that
// lazily materialized parameters (embedding-table rows) are bias-corrected by
// their own age.
template <class S>
class AdamState {
public:
    explicit AdamState(AdamConfig config = {}) : config_(config) {}

    // `allow_missing`: parameters without a gradient entry are skipped
    // (sparse update for embedding tables) instead of raising.
    void step(ParamStore<S>& params, const std::map<std::string, Tensor<S>>& grads,
              bool allow_missing = false);

    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::unordered_map<std::string, Tensor<S>> m_, v_;
    std::unordered_map<std::string, int64_t> steps_;
};

template <class S>
void adam_step(ParamStore<S>& params, const std::map<std::string, Tensor<S>>& grads,
               AdamState<S>& state, bool allow_missing = false) {
    state.step(params, grads, allow_missing);
}

struct GradcheckOptions {
    double h = 1e-5;
    int max_coords = 200;  // coordinate subsample size
    uint64_t seed = 0;
};

struct GradcheckResult {
    double max_rel_err = 0.0;
    int coords_checked = 0;
};

// Compares the analytic gradient of the scalar-valued `f` against central
// finite differences, coordinate by coordinate; relative error is
// |a-n| / max(1, |a|, |n|). Double precision only.
GradcheckResult gradcheck(ParamStore<double>& params,
                          const std::function<Var<double>(Tape<double>&, ParamStore<double>&)>& f,
                          const GradcheckOptions& options = {});

// Checkpoints: <prefix>.json manifest + <prefix>.bin little-endian blob.
template <class S>
void save_checkpoint(const ParamStore<S>& params, const std::string& path_prefix);
template <class S>
void load_checkpoint(ParamStore<S>& params, const std::string& path_prefix);

}  // namespace clausevec
