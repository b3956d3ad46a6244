#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clausevec/autodiff.hpp"
#include "clausevec/fol.hpp"
#include "clausevec/gnn.hpp"

namespace clausevec {

// Supervised toy tasks with labels computable from a clause alone. They stand
// in for a prover-driven objective while exercising the same loss/optimizer
// stack as the encoders' original training setup.
enum class ToyTaskKind { contains_predicate, has_negative_literal };

struct ToyTask {
    ToyTaskKind kind = ToyTaskKind::contains_predicate;
    std::string predicate;  // for contains_predicate
};

int toy_label(const Clause& clause, const ToyTask& task);

// The predicate whose contains_predicate labeling is closest to balanced.
std::string pick_balanced_predicate(const std::vector<Clause>& clauses);

struct DatasetSplit {
    std::vector<int> train, val, test;
};

// Deterministic per seed; 50/15/35 by default, remainder held out as test.
DatasetSplit split_dataset(int count, uint64_t seed, double train_ratio = 0.50,
                           double val_ratio = 0.15);

struct TrainOptions {
    int epochs = 5;
    uint64_t seed = 1;
    AdamConfig adam;
    bool freeze_encoder = false;  // update only the classification head
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_accuracy = 0;
};

struct TrainReport {
    std::vector<EpochMetrics> epochs;
    int best_epoch = 0;  // 1-based; 0 = untrained parameters
    double test_accuracy = 0;
    double final_train_loss = 0;
    double positive_fraction = 0;
    int train_count = 0, val_count = 0, test_count = 0;

    std::string to_json() const;
};

// Trains encoder plus a d->1 linear head with binary cross-entropy and Adam,
// one clause per step. Reports per-epoch train/validation metrics and the
// held-out accuracy of the validation-best parameters, which are left in the
// encoder/head stores on return.
//
// The label vector must align with `corpus`. Pattern encoders have no
// trainable encoder parameters; only the head learns.
template <class S>
class ToyTrainer {
public:
    ToyTrainer(EncoderKind kind, EncoderConfig config, uint64_t param_seed);

    TrainReport train(const std::vector<Clause>& corpus, const std::vector<int>& labels,
                      const TrainOptions& options);

    // Convenience: labels from a task, with a 70/30 balance precondition.
    TrainReport train_task(const std::vector<Clause>& corpus, const ToyTask& task,
                           const TrainOptions& options);

    // The live parameter store: the encoder's for GNN kinds (the head shares
    // it), a head-only store for pattern kinds.
    ParamStore<S>& params();
    double predict_logit(const Clause& clause);

private:
    Var<S> embed_on_tape(Tape<S>& tape, int index);
    void prepare(const std::vector<Clause>& corpus);

    EncoderKind kind_;
    EncoderConfig config_;
    uint64_t param_seed_;
    std::optional<GnnEncoder<S>> encoder_;  // GNN kinds only
    ParamStore<S> params_;                  // head (and, for GNNs, encoder) parameters
    std::vector<FormulaGraph> graphs_;      // cached per-clause graphs (GNN)
    std::vector<Tensor<S>> fixed_;          // cached pattern vectors
    const std::vector<Clause>* corpus_ = nullptr;
};

}  // namespace clausevec
