#include "clausevec/train.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "clausevec/patterns.hpp"
#include "clausevec/rng.hpp"

namespace clausevec {

int toy_label(const Clause& clause, const ToyTask& task) {
    switch (task.kind) {
        case ToyTaskKind::contains_predicate:
            for (const auto& lit : clause.literals)
                if (lit.predicate == task.predicate) return 1;
            return 0;
        case ToyTaskKind::has_negative_literal:
            for (const auto& lit : clause.literals)
                if (lit.is_negative()) return 1;
            return 0;
    }
    return 0;
}

std::string pick_balanced_predicate(const std::vector<Clause>& clauses) {
    std::map<std::string, int> positives;
    for (const auto& clause : clauses) {
        std::set<std::string> seen;
        for (const auto& lit : clause.literals) seen.insert(lit.predicate);
        for (const auto& p : seen) ++positives[p];
    }
    if (positives.empty()) throw ConfigError("pick_balanced_predicate: empty corpus");
    double half = clauses.size() / 2.0;
    std::string best;
    double best_gap = -1;
    for (const auto& [p, n] : positives) {
        double gap = std::abs(n - half);
        if (best_gap < 0 || gap < best_gap) {
            best_gap = gap;
            best = p;
        }
    }
    return best;
}

DatasetSplit split_dataset(int count, uint64_t seed, double train_ratio, double val_ratio) {
    if (train_ratio < 0 || val_ratio < 0 || train_ratio + val_ratio > 1.0)
        throw ConfigError("split_dataset: ratios must be non-negative and sum to <= 1");
    std::vector<int> order(count);
    for (int i = 0; i < count; ++i) order[i] = i;
    Rng rng(seed ^ 0xa02b5cd1f3e94d7cULL);
    for (int i = count - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(0, i)]);
    int n_train = static_cast<int>(count * train_ratio);
    int n_val = static_cast<int>(count * val_ratio);
    DatasetSplit split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    split.test.assign(order.begin() + n_train + n_val, order.end());
    return split;
}

std::string TrainReport::to_json() const {
    nlohmann::json j;
    j["epochs"] = nlohmann::json::array();
    for (const auto& e : epochs)
        j["epochs"].push_back(nlohmann::json{{"epoch", e.epoch},
                                             {"train_loss", e.train_loss},
                                             {"val_loss", e.val_loss},
                                             {"val_accuracy", e.val_accuracy}});
    j["best_epoch"] = best_epoch;
    j["test_accuracy"] = test_accuracy;
    j["final_train_loss"] = final_train_loss;
    j["positive_fraction"] = positive_fraction;
    j["split"] = nlohmann::json{
        {"train", train_count}, {"val", val_count}, {"test", test_count}};
    return j.dump(2);
}

template <class S>
ToyTrainer<S>::ToyTrainer(EncoderKind kind, EncoderConfig config, uint64_t param_seed)
    : kind_(kind), config_(config), param_seed_(param_seed) {
    if (encoder_is_gnn(kind)) encoder_.emplace(kind, config, param_seed);
    int head_in = kind == EncoderKind::chain_patterns ? 2 * config.d : config.d;
    ParamStore<S>& store = params();
    store.create("head/W", xavier_init<S>({head_in, 1}, param_seed ^ fnv1a("head/W")));
    store.create("head/b", Tensor<S>::zeros(1, 1));
}

template <class S>
ParamStore<S>& ToyTrainer<S>::params() {
    return encoder_ ? encoder_->params() : params_;
}

template <class S>
void ToyTrainer<S>::prepare(const std::vector<Clause>& corpus) {
    corpus_ = &corpus;
    graphs_.clear();
    fixed_.clear();
    if (encoder_) {
        graphs_.reserve(corpus.size());
        for (const auto& clause : corpus) graphs_.push_back(encoder_->build_graph(clause));
        return;
    }
    PatternConfig pcfg;
    pcfg.d = config_.d;
    fixed_.reserve(corpus.size());
    for (const auto& clause : corpus) {
        FeatureVector fv = kind_ == EncoderKind::term_walks
                               ? encode_term_walks(clause, pcfg)
                               : encode_chain_patterns(clause, pcfg);
        std::vector<S> row(fv.values.begin(), fv.values.end());
        fixed_.push_back(Tensor<S>::row(std::move(row)));
    }
}

template <class S>
Var<S> ToyTrainer<S>::embed_on_tape(Tape<S>& tape, int index) {
    if (encoder_) return encoder_->encode_on_tape(tape, graphs_[index]);
    return tape.lift(fixed_[index]);
}

template <class S>
double ToyTrainer<S>::predict_logit(const Clause& clause) {
    Tape<S> tape;
    Var<S> emb;
    if (encoder_) {
        FormulaGraph graph = encoder_->build_graph(clause);
        emb = encoder_->encode_on_tape(tape, graph);
    } else {
        PatternConfig pcfg;
        pcfg.d = config_.d;
        FeatureVector fv = kind_ == EncoderKind::term_walks
                               ? encode_term_walks(clause, pcfg)
                               : encode_chain_patterns(clause, pcfg);
        std::vector<S> row(fv.values.begin(), fv.values.end());
        emb = tape.lift(Tensor<S>::row(std::move(row)));
    }
    Var<S> logit = tape.add(tape.matmul(emb, tape.param(params(), "head/W")),
                            tape.param(params(), "head/b"));
    return static_cast<double>(tape.value(logit)[0]);
}

template <class S>
TrainReport ToyTrainer<S>::train_task(const std::vector<Clause>& corpus, const ToyTask& task,
                                      const TrainOptions& options) {
    std::vector<int> labels;
    labels.reserve(corpus.size());
    int positives = 0;
    for (const auto& clause : corpus) {
        labels.push_back(toy_label(clause, task));
        positives += labels.back();
    }
    double fraction = corpus.empty() ? 0.0 : static_cast<double>(positives) / corpus.size();
    if (fraction < 0.3 || fraction > 0.7)
        throw ConfigError("task labels are unbalanced (" + std::to_string(fraction) +
                          " positive); regenerate the corpus or pick another predicate");
    return train(corpus, labels, options);
}

template <class S>
TrainReport ToyTrainer<S>::train(const std::vector<Clause>& corpus,
                                 const std::vector<int>& labels,
                                 const TrainOptions& options) {
    if (labels.size() != corpus.size())
        throw ConfigError("train: label count does not match corpus size");
    prepare(corpus);

    TrainReport report;
    int positives = 0;
    for (int label : labels) positives += label;
    report.positive_fraction =
        corpus.empty() ? 0.0 : static_cast<double>(positives) / corpus.size();

    DatasetSplit split = split_dataset(static_cast<int>(corpus.size()), options.seed);
    report.train_count = static_cast<int>(split.train.size());
    report.val_count = static_cast<int>(split.val.size());
    report.test_count = static_cast<int>(split.test.size());

    auto step_loss = [&](int index, bool update, AdamState<S>& adam) {
        Tape<S> tape;
        Var<S> emb = embed_on_tape(tape, index);
        Var<S> logit = tape.add(tape.matmul(emb, tape.param(params(), "head/W")),
                                tape.param(params(), "head/b"));
        Var<S> loss = tape.bce_with_logits(logit, {static_cast<S>(labels[index])});
        double value = tape.value(loss)[0];
        if (!std::isfinite(value))
            throw NumericError("train: non-finite loss on clause '" + corpus[index].id + "'");
        if (update) {
            tape.backward(loss);
            auto grads = tape.param_grads();
            if (options.freeze_encoder) {
                for (auto it = grads.begin(); it != grads.end();)
                    it = it->first.rfind("head/", 0) == 0 ? std::next(it) : grads.erase(it);
            }
            adam_step(params(), grads, adam, /*allow_missing=*/true);
        }
        return value;
    };

    auto evaluate = [&](const std::vector<int>& indices, double& loss_out, double& acc_out) {
        if (indices.empty()) {
            loss_out = 0;
            acc_out = 0;
            return;
        }
        double loss = 0;
        int correct = 0;
        AdamState<S> unused;
        for (int index : indices) {
            loss += step_loss(index, false, unused);
            double logit = predict_logit(corpus[index]);
            correct += (logit > 0 ? 1 : 0) == labels[index];
        }
        loss_out = loss / indices.size();
        acc_out = static_cast<double>(correct) / indices.size();
    };

    AdamState<S> adam(options.adam);
    ParamStore<S> best_params = params();
    double best_acc = -1, best_loss = 0;
    Rng shuffle_rng(options.seed ^ 0x5bd1e995c2b2ae35ULL);

    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        std::vector<int> order = split.train;
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

        double total = 0;
        for (int index : order) total += step_loss(index, true, adam);

        EpochMetrics metrics;
        metrics.epoch = epoch;
        metrics.train_loss = order.empty() ? 0 : total / order.size();
        evaluate(split.val, metrics.val_loss, metrics.val_accuracy);
        report.epochs.push_back(metrics);

        // Validation-best selection: highest accuracy, ties to lower loss.
        if (metrics.val_accuracy > best_acc ||
            (metrics.val_accuracy == best_acc && metrics.val_loss < best_loss)) {
            best_acc = metrics.val_accuracy;
            best_loss = metrics.val_loss;
            best_params = params();
            report.best_epoch = epoch;
        }
        report.final_train_loss = metrics.train_loss;
    }

    if (options.epochs > 0) params() = best_params;
    double test_loss = 0;
    evaluate(split.test, test_loss, report.test_accuracy);
    return report;
}

template class ToyTrainer<float>;
template class ToyTrainer<double>;

}  // namespace clausevec
