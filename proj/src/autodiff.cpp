#include "clausevec/autodiff.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "clausevec/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace clausevec {

// --- tape core ---------------------------------------------------------------

template <class S>
Var<S> Tape<S>::push(Tensor<S> value, bool requires_grad,
                     std::function<void(Tape&)> backprop) {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, std::move(backprop)});
    return Var<S>{static_cast<int>(nodes_.size()) - 1};
}

template <class S>
Tensor<S>& Tape<S>::grad_buf(int id) {
    Node& node = nodes_[id];
    if (node.grad.empty()) node.grad = Tensor<S>(node.value.shape());
    return node.grad;
}

template <class S>
const Tensor<S>& Tape<S>::grad(Var<S> v) const {
    return const_cast<Tape*>(this)->grad_buf(v.id);
}

template <class S>
bool Tape<S>::any_grad(std::initializer_list<Var<S>> vars) const {
    for (Var<S> v : vars)
        if (nodes_[v.id].requires_grad) return true;
    return false;
}

template <class S>
Var<S> Tape<S>::lift(Tensor<S> value) {
    value.requires_grad = false;
    return push(std::move(value), false, nullptr);
}

template <class S>
Var<S> Tape<S>::leaf(Tensor<S> value) {
    value.requires_grad = true;
    return push(std::move(value), true, nullptr);
}

template <class S>
Var<S> Tape<S>::param(ParamStore<S>& store, const std::string& name) {
    auto it = bound_index_.find(name);
    if (it != bound_index_.end()) return bound_[it->second].second;
    Var<S> v = leaf(store.at(name));
    bound_index_.emplace(name, static_cast<int>(bound_.size()));
    bound_.emplace_back(name, v);
    return v;
}

template <class S>
void Tape<S>::backward(Var<S> root) {
    const Node& top = nodes_[root.id];
    if (top.value.size() != 1)
        throw ShapeError("backward: root must be scalar, got " + top.value.shape_string());
    grad_buf(root.id)[0] = S(1);
    // Nodes are created parents-first, so reverse id order is a topological
    // order of the computation graph.
    for (int id = root.id; id >= 0; --id) {
        Node& node = nodes_[id];
        if (!node.backprop) continue;
        if (node.grad.empty()) continue;  // not on a path to the root
        node.backprop(*this);
    }
}

template <class S>
std::map<std::string, Tensor<S>> Tape<S>::param_grads() const {
    std::map<std::string, Tensor<S>> out;
    for (const auto& [name, var] : bound_) {
        const Node& node = nodes_[var.id];
        if (!node.grad.empty()) out.emplace(name, node.grad);
    }
    return out;
}

template <class S>
void Tape<S>::check_2d_match(const char* op, Var<S> a, Var<S> b) const {
    const auto& ta = nodes_[a.id].value;
    const auto& tb = nodes_[b.id].value;
    if (!ta.same_shape(tb))
        throw ShapeError(std::string(op) + ": shape mismatch " + ta.shape_string() + " vs " +
                         tb.shape_string());
}

// All backprop closures capture node ids only and re-fetch tensors through
// the tape, since nodes_ may reallocate as the graph grows.

// --- primitive ops -------------------------------------------------------------

template <class S>
Var<S> Tape<S>::matmul(Var<S> a, Var<S> b) {
    const auto& ta = nodes_[a.id].value;
    const auto& tb = nodes_[b.id].value;
    if (ta.cols() != tb.rows())
        throw ShapeError("matmul: inner dims differ, " + ta.shape_string() + " x " +
                         tb.shape_string());
    int n = ta.rows(), k = ta.cols(), m = tb.cols();
    Tensor<S> value = Tensor<S>::zeros(n, m);
    for (int i = 0; i < n; ++i) {
        const S* arow = ta.data() + static_cast<size_t>(i) * k;
        S* orow = value.data() + static_cast<size_t>(i) * m;
        for (int l = 0; l < k; ++l) {
            S av = arow[l];
            if (av == S(0)) continue;
            const S* brow = tb.data() + static_cast<size_t>(l) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    bool rg = any_grad({a, b});
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a, b, n, k, m](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            if (t.nodes_[a.id].requires_grad) {
                // dA += G B^T
                Tensor<S>& da = t.grad_buf(a.id);
                const Tensor<S>& vb = t.nodes_[b.id].value;
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < k; ++l) {
                        S acc = 0;
                        const S* grow = g.data() + static_cast<size_t>(i) * m;
                        const S* brow = vb.data() + static_cast<size_t>(l) * m;
                        for (int j = 0; j < m; ++j) acc += grow[j] * brow[j];
                        da.at(i, l) += acc;
                    }
            }
            if (t.nodes_[b.id].requires_grad) {
                // dB += A^T G
                Tensor<S>& db = t.grad_buf(b.id);
                const Tensor<S>& va = t.nodes_[a.id].value;
                for (int i = 0; i < n; ++i) {
                    const S* arow = va.data() + static_cast<size_t>(i) * k;
                    const S* grow = g.data() + static_cast<size_t>(i) * m;
                    for (int l = 0; l < k; ++l) {
                        S av = arow[l];
                        if (av == S(0)) continue;
                        S* drow = db.data() + static_cast<size_t>(l) * m;
                        for (int j = 0; j < m; ++j) drow[j] += av * grow[j];
                    }
                }
            }
        };
    return out;
}

template <class S>
Var<S> Tape<S>::add(Var<S> a, Var<S> b) {
    const auto& ta = nodes_[a.id].value;
    const auto& tb = nodes_[b.id].value;
    bool broadcast = tb.rows() == 1 && ta.rows() != 1 && ta.cols() == tb.cols();
    if (!broadcast) check_2d_match("add", a, b);
    Tensor<S> value = ta;
    value.requires_grad = false;
    int n = ta.rows(), k = ta.cols();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) value.at(i, j) += tb.at(broadcast ? 0 : i, j);
    bool rg = any_grad({a, b});
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a, b, broadcast, n, k](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            if (t.nodes_[a.id].requires_grad) {
                Tensor<S>& da = t.grad_buf(a.id);
                for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
            }
            if (t.nodes_[b.id].requires_grad) {
                Tensor<S>& db = t.grad_buf(b.id);
                if (!broadcast) {
                    for (size_t i = 0; i < g.size(); ++i) db[i] += g[i];
                } else {
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < k; ++j) db[static_cast<size_t>(j)] += g.at(i, j);
                }
            }
        };
    return out;
}

template <class S>
Var<S> Tape<S>::sub(Var<S> a, Var<S> b) {
    return add(a, scale(b, S(-1)));
}

template <class S>
Var<S> Tape<S>::mul(Var<S> a, Var<S> b) {
    check_2d_match("mul", a, b);
    const auto& ta = nodes_[a.id].value;
    const auto& tb = nodes_[b.id].value;
    Tensor<S> value = ta;
    value.requires_grad = false;
    for (size_t i = 0; i < value.size(); ++i) value[i] *= tb[i];
    bool rg = any_grad({a, b});
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a, b](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            if (t.nodes_[a.id].requires_grad) {
                Tensor<S>& da = t.grad_buf(a.id);
                const Tensor<S>& vb = t.nodes_[b.id].value;
                for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * vb[i];
            }
            if (t.nodes_[b.id].requires_grad) {
                Tensor<S>& db = t.grad_buf(b.id);
                const Tensor<S>& va = t.nodes_[a.id].value;
                for (size_t i = 0; i < g.size(); ++i) db[i] += g[i] * va[i];
            }
        };
    return out;
}

template <class S>
Var<S> Tape<S>::scale(Var<S> a, S c) {
    const auto& ta = nodes_[a.id].value;
    Tensor<S> value = ta;
    value.requires_grad = false;
    for (size_t i = 0; i < value.size(); ++i) value[i] *= c;
    bool rg = nodes_[a.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a, c](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            Tensor<S>& da = t.grad_buf(a.id);
            for (size_t i = 0; i < g.size(); ++i) da[i] += c * g[i];
        };
    return out;
}

template <class S>
Var<S> Tape<S>::relu(Var<S> a) {
    const auto& ta = nodes_[a.id].value;
    Tensor<S> value = ta;
    value.requires_grad = false;
    for (size_t i = 0; i < value.size(); ++i) value[i] = value[i] > S(0) ? value[i] : S(0);
    bool rg = nodes_[a.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            const Tensor<S>& va = t.nodes_[a.id].value;
            Tensor<S>& da = t.grad_buf(a.id);
            for (size_t i = 0; i < g.size(); ++i) da[i] += va[i] > S(0) ? g[i] : S(0);
        };
    return out;
}

template <class S>
Var<S> Tape<S>::tanh_(Var<S> a) {
    const auto& ta = nodes_[a.id].value;
    Tensor<S> value = ta;
    value.requires_grad = false;
    for (size_t i = 0; i < value.size(); ++i) value[i] = std::tanh(value[i]);
    bool rg = nodes_[a.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            const Tensor<S>& y = t.nodes_[out.id].value;
            Tensor<S>& da = t.grad_buf(a.id);
            for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (S(1) - y[i] * y[i]);
        };
    return out;
}

template <class S>
Var<S> Tape<S>::sigmoid(Var<S> a) {
    const auto& ta = nodes_[a.id].value;
    Tensor<S> value = ta;
    value.requires_grad = false;
    for (size_t i = 0; i < value.size(); ++i) {
        S x = value[i];
        value[i] = x >= S(0) ? S(1) / (S(1) + std::exp(-x))
                             : std::exp(x) / (S(1) + std::exp(x));
    }
    bool rg = nodes_[a.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            const Tensor<S>& y = t.nodes_[out.id].value;
            Tensor<S>& da = t.grad_buf(a.id);
            for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * y[i] * (S(1) - y[i]);
        };
    return out;
}

template <class S>
Var<S> Tape<S>::concat_cols(const std::vector<Var<S>>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    int n = nodes_[parts[0].id].value.rows();
    int total = 0;
    for (Var<S> p : parts) {
        const auto& tp = nodes_[p.id].value;
        if (tp.rows() != n)
            throw ShapeError("concat_cols: row mismatch " +
                             nodes_[parts[0].id].value.shape_string() + " vs " +
                             tp.shape_string());
        total += tp.cols();
    }
    Tensor<S> value = Tensor<S>::zeros(n, total);
    int off = 0;
    for (Var<S> p : parts) {
        const auto& tp = nodes_[p.id].value;
        for (int i = 0; i < n; ++i)
            std::memcpy(value.data() + static_cast<size_t>(i) * total + off,
                        tp.data() + static_cast<size_t>(i) * tp.cols(),
                        sizeof(S) * tp.cols());
        off += tp.cols();
    }
    bool rg = false;
    for (Var<S> p : parts) rg = rg || nodes_[p.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, parts, n, total](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            int off = 0;
            for (Var<S> p : parts) {
                int k = t.nodes_[p.id].value.cols();
                if (t.nodes_[p.id].requires_grad) {
                    Tensor<S>& dp = t.grad_buf(p.id);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < k; ++j)
                            dp.at(i, j) += g[static_cast<size_t>(i) * total + off + j];
                }
                off += k;
            }
        };
    return out;
}

template <class S>
Var<S> Tape<S>::concat_rows(const std::vector<Var<S>>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    int k = nodes_[parts[0].id].value.cols();
    int total = 0;
    for (Var<S> p : parts) {
        const auto& tp = nodes_[p.id].value;
        if (tp.cols() != k)
            throw ShapeError("concat_rows: column mismatch " +
                             nodes_[parts[0].id].value.shape_string() + " vs " +
                             tp.shape_string());
        total += tp.rows();
    }
    Tensor<S> value = Tensor<S>::zeros(total, k);
    size_t off = 0;
    for (Var<S> p : parts) {
        const auto& tp = nodes_[p.id].value;
        std::memcpy(value.data() + off, tp.data(), sizeof(S) * tp.size());
        off += tp.size();
    }
    bool rg = false;
    for (Var<S> p : parts) rg = rg || nodes_[p.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, parts](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            size_t off = 0;
            for (Var<S> p : parts) {
                size_t sz = t.nodes_[p.id].value.size();
                if (t.nodes_[p.id].requires_grad) {
                    Tensor<S>& dp = t.grad_buf(p.id);
                    for (size_t i = 0; i < sz; ++i) dp[i] += g[off + i];
                }
                off += sz;
            }
        };
    return out;
}

template <class S>
Var<S> Tape<S>::gather_rows(Var<S> a, std::vector<int> index) {
    const auto& ta = nodes_[a.id].value;
    int k = ta.cols();
    Tensor<S> value = Tensor<S>::zeros(static_cast<int>(index.size()), k);
    for (size_t i = 0; i < index.size(); ++i) {
        if (index[i] < 0 || index[i] >= ta.rows())
            throw ShapeError("gather_rows: index " + std::to_string(index[i]) +
                             " out of range for " + ta.shape_string());
        std::memcpy(value.data() + i * k, ta.data() + static_cast<size_t>(index[i]) * k,
                    sizeof(S) * k);
    }
    bool rg = nodes_[a.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a, index = std::move(index), k](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            Tensor<S>& da = t.grad_buf(a.id);
            for (size_t i = 0; i < index.size(); ++i)
                for (int j = 0; j < k; ++j) da.at(index[i], j) += g[i * k + j];
        };
    return out;
}

template <class S>
Var<S> Tape<S>::scatter_rows(Var<S> base, std::vector<int> index, Var<S> rows) {
    const auto& tb = nodes_[base.id].value;
    const auto& tr = nodes_[rows.id].value;
    if (tb.cols() != tr.cols() || static_cast<int>(index.size()) != tr.rows())
        throw ShapeError("scatter_rows: shape mismatch " + tb.shape_string() + " vs " +
                         tr.shape_string() + " with " + std::to_string(index.size()) +
                         " indices");
    Tensor<S> value = tb;
    value.requires_grad = false;
    int k = tb.cols();
    std::vector<uint8_t> replaced(tb.rows(), 0);
    for (size_t i = 0; i < index.size(); ++i) {
        int r = index[i];
        if (r < 0 || r >= tb.rows() || replaced[r])
            throw ShapeError("scatter_rows: bad or duplicate index " + std::to_string(r));
        replaced[r] = 1;
        std::memcpy(value.data() + static_cast<size_t>(r) * k, tr.data() + i * k,
                    sizeof(S) * k);
    }
    bool rg = any_grad({base, rows});
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, base, rows, index = std::move(index),
                                   replaced = std::move(replaced), k](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            if (t.nodes_[rows.id].requires_grad) {
                Tensor<S>& dr = t.grad_buf(rows.id);
                for (size_t i = 0; i < index.size(); ++i)
                    for (int j = 0; j < k; ++j) dr[i * k + j] += g.at(index[i], j);
            }
            if (t.nodes_[base.id].requires_grad) {
                Tensor<S>& db = t.grad_buf(base.id);
                for (int r = 0; r < static_cast<int>(replaced.size()); ++r) {
                    if (replaced[r]) continue;
                    for (int j = 0; j < k; ++j) db.at(r, j) += g.at(r, j);
                }
            }
        };
    return out;
}

template <class S>
Var<S> Tape<S>::segment_sum(Var<S> rows, std::vector<int> segments, int num_segments) {
    const auto& tr = nodes_[rows.id].value;
    if (static_cast<int>(segments.size()) != tr.rows())
        throw ShapeError("segment_sum: got " + std::to_string(segments.size()) +
                         " segment ids for " + tr.shape_string());
    int k = tr.cols();
    Tensor<S> value = Tensor<S>::zeros(num_segments, k);
    for (size_t i = 0; i < segments.size(); ++i) {
        int s = segments[i];
        if (s < 0 || s >= num_segments)
            throw ShapeError("segment_sum: segment id " + std::to_string(s) + " out of range");
        for (int j = 0; j < k; ++j) value.at(s, j) += tr[i * static_cast<size_t>(k) + j];
    }
    bool rg = nodes_[rows.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, rows, segments = std::move(segments), k](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            Tensor<S>& dr = t.grad_buf(rows.id);
            for (size_t i = 0; i < segments.size(); ++i)
                for (int j = 0; j < k; ++j)
                    dr[i * static_cast<size_t>(k) + j] += g.at(segments[i], j);
        };
    return out;
}

template <class S>
Var<S> Tape<S>::segment_max(Var<S> rows, std::vector<int> segments, int num_segments) {
    const auto& tr = nodes_[rows.id].value;
    if (static_cast<int>(segments.size()) != tr.rows())
        throw ShapeError("segment_max: got " + std::to_string(segments.size()) +
                         " segment ids for " + tr.shape_string());
    int k = tr.cols();
    Tensor<S> value = Tensor<S>::zeros(num_segments, k);
    // argmax row per (segment, column); first maximum wins; -1 = empty segment.
    std::vector<int> argmax(static_cast<size_t>(num_segments) * k, -1);
    for (size_t i = 0; i < segments.size(); ++i) {
        int s = segments[i];
        if (s < 0 || s >= num_segments)
            throw ShapeError("segment_max: segment id " + std::to_string(s) + " out of range");
        for (int j = 0; j < k; ++j) {
            size_t slot = static_cast<size_t>(s) * k + j;
            S v = tr[i * static_cast<size_t>(k) + j];
            if (argmax[slot] < 0 || v > value.at(s, j)) {
                value.at(s, j) = v;
                argmax[slot] = static_cast<int>(i);
            }
        }
    }
    bool rg = nodes_[rows.id].requires_grad;
    Var<S> out = push(std::move(value), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, rows, argmax = std::move(argmax), k](Tape& t) {
            const Tensor<S>& g = t.nodes_[out.id].grad;
            Tensor<S>& dr = t.grad_buf(rows.id);
            for (size_t slot = 0; slot < argmax.size(); ++slot) {
                int i = argmax[slot];
                if (i < 0) continue;
                int j = static_cast<int>(slot % k);
                dr[static_cast<size_t>(i) * k + j] += g[slot];
            }
        };
    return out;
}

template <class S>
Var<S> Tape<S>::row_sum(Var<S> a) {
    const auto& ta = nodes_[a.id].value;
    return segment_sum(a, std::vector<int>(ta.rows(), 0), 1);
}

template <class S>
Var<S> Tape<S>::row_max(Var<S> a) {
    const auto& ta = nodes_[a.id].value;
    return segment_max(a, std::vector<int>(ta.rows(), 0), 1);
}

template <class S>
Var<S> Tape<S>::sum_all(Var<S> a) {
    const auto& ta = nodes_[a.id].value;
    S acc = 0;
    for (size_t i = 0; i < ta.size(); ++i) acc += ta[i];
    bool rg = nodes_[a.id].requires_grad;
    Var<S> out = push(Tensor<S>::scalar(acc), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, a](Tape& t) {
            S g = t.nodes_[out.id].grad[0];
            Tensor<S>& da = t.grad_buf(a.id);
            for (size_t i = 0; i < da.size(); ++i) da[i] += g;
        };
    return out;
}

template <class S>
Var<S> Tape<S>::mean_all(Var<S> a) {
    const auto& ta = nodes_[a.id].value;
    if (ta.size() == 0) throw ShapeError("mean_all: empty tensor");
    return scale(sum_all(a), S(1) / static_cast<S>(ta.size()));
}

template <class S>
Var<S> Tape<S>::bce_with_logits(Var<S> logits, std::vector<S> labels) {
    const auto& tx = nodes_[logits.id].value;
    if (tx.size() != labels.size())
        throw ShapeError("bce_with_logits: " + std::to_string(labels.size()) +
                         " labels for logits " + tx.shape_string());
    for (S z : labels)
        if (z != S(0) && z != S(1))
            throw ConfigError("bce_with_logits: labels must be 0 or 1");
    size_t n = tx.size();
    S acc = 0;
    for (size_t i = 0; i < n; ++i) {
        S x = tx[i], z = labels[i];
        // max(x,0) - x*z + log(1 + exp(-|x|))
        acc += std::max(x, S(0)) - x * z + std::log1p(std::exp(-std::abs(x)));
    }
    S loss = acc / static_cast<S>(n);
    bool rg = nodes_[logits.id].requires_grad;
    Var<S> out = push(Tensor<S>::scalar(loss), rg, nullptr);
    if (rg)
        nodes_[out.id].backprop = [out, logits, labels = std::move(labels), n](Tape& t) {
            S g = t.nodes_[out.id].grad[0];
            const Tensor<S>& x = t.nodes_[logits.id].value;
            Tensor<S>& dx = t.grad_buf(logits.id);
            for (size_t i = 0; i < n; ++i) {
                S s = x[i] >= S(0) ? S(1) / (S(1) + std::exp(-x[i]))
                                   : std::exp(x[i]) / (S(1) + std::exp(x[i]));
                dx[i] += g * (s - labels[i]) / static_cast<S>(n);
            }
        };
    return out;
}

// --- initialization -------------------------------------------------------------

template <class S>
Tensor<S> xavier_init(const std::vector<int>& shape, uint64_t seed) {
    if (shape.size() != 2)
        throw ShapeError("xavier_init: shape must be 2-D, got rank " +
                         std::to_string(shape.size()));
    int fan_in = shape[0], fan_out = shape[1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor<S> t(shape);
    Rng rng(seed);
    for (size_t i = 0; i < t.size(); ++i) t[i] = static_cast<S>(rng.uniform_sym(bound));
    return t;
}

// --- Adam -----------------------------------------------------------------------

template <class S>
void AdamState<S>::step(ParamStore<S>& params, const std::map<std::string, Tensor<S>>& grads,
                        bool allow_missing) {
    for (const auto& [name, grad] : grads)
        if (!params.contains(name))
            throw ConfigError("adam: gradient for unknown parameter '" + name + "'");
    for (const auto& name : params.names()) {
        auto git = grads.find(name);
        if (git == grads.end()) {
            if (allow_missing) continue;
            throw ConfigError("adam: missing gradient for parameter '" + name + "'");
        }
        Tensor<S>& w = params.at(name);
        const Tensor<S>& g = git->second;
        if (!w.same_shape(g))
            throw ShapeError("adam: gradient shape " + g.shape_string() +
                             " does not match parameter " + w.shape_string());
        Tensor<S>& m = m_.try_emplace(name, Tensor<S>(w.shape())).first->second;
        Tensor<S>& v = v_.try_emplace(name, Tensor<S>(w.shape())).first->second;
        int64_t t = ++steps_[name];
        S b1 = static_cast<S>(config_.beta1), b2 = static_cast<S>(config_.beta2);
        S corr1 = S(1) - static_cast<S>(std::pow(config_.beta1, static_cast<double>(t)));
        S corr2 = S(1) - static_cast<S>(std::pow(config_.beta2, static_cast<double>(t)));
        S lr = static_cast<S>(config_.lr), eps = static_cast<S>(config_.eps);
        for (size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (S(1) - b1) * g[i];
            v[i] = b2 * v[i] + (S(1) - b2) * g[i] * g[i];
            S mhat = m[i] / corr1;
            S vhat = v[i] / corr2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

// --- gradcheck ------------------------------------------------------------------

GradcheckResult gradcheck(ParamStore<double>& params,
                          const std::function<Var<double>(Tape<double>&, ParamStore<double>&)>& f,
                          const GradcheckOptions& options) {
    auto eval = [&](bool with_grad, std::map<std::string, Tensor<double>>* grads) {
        Tape<double> tape;
        Var<double> loss = f(tape, params);
        double v = tape.value(loss)[0];
        if (!std::isfinite(v)) throw NumericError("gradcheck: non-finite loss");
        if (with_grad) {
            tape.backward(loss);
            *grads = tape.param_grads();
        }
        return v;
    };

    std::map<std::string, Tensor<double>> analytic;
    eval(true, &analytic);

    // Enumerate coordinates in deterministic store order; f has materialized
    // any lazily created parameters by now.
    std::vector<std::pair<std::string, size_t>> coords;
    for (const auto& name : params.names()) {
        size_t n = params.at(name).size();
        for (size_t i = 0; i < n; ++i) coords.emplace_back(name, i);
    }
    if (options.max_coords > 0 && coords.size() > static_cast<size_t>(options.max_coords)) {
        // Deterministic subsample: Fisher-Yates prefix.
        Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
        for (int i = 0; i < options.max_coords; ++i) {
            int j = rng.uniform_int(i, static_cast<int>(coords.size()) - 1);
            std::swap(coords[i], coords[j]);
        }
        coords.resize(options.max_coords);
    }

    GradcheckResult result;
    result.coords_checked = static_cast<int>(coords.size());
    for (const auto& [name, idx] : coords) {
        Tensor<double>& w = params.at(name);
        double keep = w[idx];
        w[idx] = keep + options.h;
        double up = eval(false, nullptr);
        w[idx] = keep - options.h;
        double down = eval(false, nullptr);
        w[idx] = keep;
        double numeric = (up - down) / (2 * options.h);
        double analytic_v = 0.0;
        auto it = analytic.find(name);
        if (it != analytic.end()) analytic_v = it->second[idx];
        if (!std::isfinite(numeric) || !std::isfinite(analytic_v))
            throw NumericError("gradcheck: non-finite derivative for '" + name + "'");
        double rel = std::abs(analytic_v - numeric) /
                     std::max({1.0, std::abs(analytic_v), std::abs(numeric)});
        result.max_rel_err = std::max(result.max_rel_err, rel);
    }
    return result;
}

// --- checkpoints ----------------------------------------------------------------

template <class S>
void save_checkpoint(const ParamStore<S>& params, const std::string& path_prefix) {
    nlohmann::json manifest;
    manifest["dtype"] = sizeof(S) == 4 ? "f32" : "f64";
    manifest["tensors"] = nlohmann::json::array();
    size_t offset = 0;
    for (const auto& name : params.names()) {
        const Tensor<S>& t = params.at(name);
        manifest["tensors"].push_back(nlohmann::json{{"name", name},
                                                     {"shape", t.shape()},
                                                     {"offset", offset},
                                                     {"count", t.size()}});
        offset += t.size();
    }
    std::ofstream mf(path_prefix + ".json");
    if (!mf) throw ConfigError("cannot write checkpoint manifest " + path_prefix + ".json");
    mf << manifest.dump(2) << "\n";
    std::ofstream bf(path_prefix + ".bin", std::ios::binary);
    if (!bf) throw ConfigError("cannot write checkpoint blob " + path_prefix + ".bin");
    for (const auto& name : params.names()) {
        const Tensor<S>& t = params.at(name);
        bf.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(sizeof(S) * t.size()));
    }
}

template <class S>
void load_checkpoint(ParamStore<S>& params, const std::string& path_prefix) {
    std::ifstream mf(path_prefix + ".json");
    if (!mf) throw ConfigError("cannot read checkpoint manifest " + path_prefix + ".json");
    nlohmann::json manifest = nlohmann::json::parse(mf);
    std::string dtype = manifest.at("dtype");
    if (dtype != (sizeof(S) == 4 ? "f32" : "f64"))
        throw ConfigError("checkpoint dtype " + dtype + " does not match this run");
    std::ifstream bf(path_prefix + ".bin", std::ios::binary);
    if (!bf) throw ConfigError("cannot read checkpoint blob " + path_prefix + ".bin");
    for (const auto& entry : manifest.at("tensors")) {
        std::string name = entry.at("name");
        std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
        size_t count = entry.at("count");
        Tensor<S> t(shape);
        if (t.size() != count)
            throw ConfigError("checkpoint entry '" + name + "' has inconsistent size");
        bf.seekg(static_cast<std::streamoff>(sizeof(S) * entry.at("offset").get<size_t>()));
        bf.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(sizeof(S) * count));
        if (!bf) throw ConfigError("checkpoint blob truncated at '" + name + "'");
        if (params.contains(name))
            params.at(name) = std::move(t);
        else
            params.create(name, std::move(t));
    }
}

// --- explicit instantiations -----------------------------------------------------

template class Tape<float>;
template class Tape<double>;
template class AdamState<float>;
template class AdamState<double>;
template Tensor<float> xavier_init<float>(const std::vector<int>&, uint64_t);
template Tensor<double> xavier_init<double>(const std::vector<int>&, uint64_t);
template void save_checkpoint<float>(const ParamStore<float>&, const std::string&);
template void save_checkpoint<double>(const ParamStore<double>&, const std::string&);
template void load_checkpoint<float>(ParamStore<float>&, const std::string&);
template void load_checkpoint<double>(ParamStore<double>&, const std::string&);

}  // namespace clausevec
