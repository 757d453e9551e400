#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqlgrader/dataset.hpp"
#include "sqlgrader/model.hpp"

namespace sqlgrader {

// ------------------------------------------------------------------- losses

struct LossResult {
    double loss = 0.0;
    Tensor grad;  // w.r.t. the predictions
};

// Mean binary cross entropy over all elements; predictions clipped to
// [1e-7, 1-1e-7] before the log. Optional per-element weights.
LossResult bce_loss(const Tensor& pred, const Tensor& target,
                    const Tensor* weights = nullptr);

// Mean categorical cross entropy; rows of probs must sum to 1 within 1e-6.
LossResult cce_loss(const Tensor& probs, const Tensor& one_hot);

// Mean squared error; grad = 2 (pred - target) / B.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

// ------------------------------------------------------------------ rmsprop

struct OptimizerState {
    std::vector<Tensor> acc;  // mean-square gradient accumulators
    double rho = 0.9;
    double epsilon = 1e-8;
    double learning_rate = 0.001;
};

OptimizerState make_optimizer(const std::vector<Tensor*>& params);

// acc <- rho acc + (1-rho) g^2;  theta <- theta - lr g / (sqrt(acc) + eps)
void rmsprop_step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
                  OptimizerState& state);

// ----------------------------------------------------------------- regimes

enum class TrainMode { Joint, Iterative };

struct TrainConfig {
    TrainMode mode = TrainMode::Joint;
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    bool class_weighting = false;
    bool shuffle_each_epoch = true;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::string objective;  // "joint", "C", "R" or "G"
    double loss = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::uint32_t final_checksum = 0;  // CRC-32 of the final parameter payload
};

std::string history_to_jsonl(const TrainHistory& history);

// Joint regime: BCE over the 6-element sigmoid output per minibatch.
TrainHistory train_joint(GraderNet& net, const std::vector<LabeledExample>& examples,
                         const TrainConfig& config);

// Iterative regime: epoch 3t trains C (BCE), 3t+1 trains R (CCE),
// 3t+2 trains G (MSE); the trunk moves in every phase.
TrainHistory train_iterative(GraderNet& net, const std::vector<LabeledExample>& examples,
                             const TrainConfig& config);

TrainHistory train(GraderNet& net, const std::vector<LabeledExample>& examples,
                   const TrainConfig& config);

// --------------------------------------------------------- cross-validation

struct OutOfFoldPrediction {
    std::size_t index = 0;  // position in the record list
    std::size_t fold = 0;
    std::string submission_id;
    Prediction prediction;
};

struct CrossValResult {
    std::vector<OutOfFoldPrediction> predictions;  // one per record, by index
    std::vector<TrainHistory> fold_histories;
};

// Per fold: fresh vocabulary from the fold's training split, fresh build()
// with seed mix64(master_seed ^ fold), train, predict the validation split.
// jobs > 1 runs folds on a thread pool; results are scheduling-independent.
CrossValResult cross_validate(const std::vector<SubmissionRecord>& records,
                              const FoldPlan& plan, const TrainConfig& train_config,
                              const ModelConfig& model_config, std::size_t jobs = 1);

}  // namespace sqlgrader
