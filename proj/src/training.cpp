#include "sqlgrader/training.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace sqlgrader {

namespace {

constexpr double kClipLo = 1e-7;
constexpr double kClipHi = 1.0 - 1e-7;

double clip(double p) { return p < kClipLo ? kClipLo : (p > kClipHi ? kClipHi : p); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape) +
                         " vs " + shape_str(b.shape));
}

}  // namespace

LossResult bce_loss(const Tensor& pred, const Tensor& target, const Tensor* weights) {
    require_same_shape(pred, target, "bce_loss");
    if (weights) require_same_shape(pred, *weights, "bce_loss weights");
    const double n = static_cast<double>(pred.size());
    LossResult res;
    res.grad = Tensor(pred.shape);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = clip(pred.data[i]);
        const double t = target.data[i];
        const double w = weights ? weights->data[i] : 1.0;
        res.loss += -w * (t * std::log(p) + (1.0 - t) * std::log(1.0 - p)) / n;
        const bool clipped = pred.data[i] < kClipLo || pred.data[i] > kClipHi;
        res.grad.data[i] = clipped ? 0.0 : w * (-t / p + (1.0 - t) / (1.0 - p)) / n;
    }
    return res;
}

LossResult cce_loss(const Tensor& probs, const Tensor& one_hot) {
    require_same_shape(probs, one_hot, "cce_loss");
    const std::size_t B = probs.shape[0], m = probs.shape[1];
    for (std::size_t i = 0; i < B; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) sum += probs.data[i * m + j];
        if (std::abs(sum - 1.0) > 1e-6)
            throw ParameterError("cce_loss: row " + std::to_string(i) + " sums to " +
                                 std::to_string(sum) + ", not 1");
    }
    LossResult res;
    res.grad = Tensor(probs.shape);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = clip(probs.data[i]);
        const double t = one_hot.data[i];
        res.loss += -t * std::log(p) / static_cast<double>(B);
        const bool clipped = probs.data[i] < kClipLo || probs.data[i] > kClipHi;
        res.grad.data[i] = clipped ? 0.0 : -t / p / static_cast<double>(B);
    }
    return res;
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mse_loss");
    const double n = static_cast<double>(pred.size());
    LossResult res;
    res.grad = Tensor(pred.shape);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        res.loss += d * d / n;
        res.grad.data[i] = 2.0 * d / n;
    }
    return res;
}

// -------------------------------------------------------------------- rmsprop

OptimizerState make_optimizer(const std::vector<Tensor*>& params) {
    OptimizerState state;
    state.acc.reserve(params.size());
    for (const Tensor* p : params) state.acc.push_back(Tensor::zeros(p->shape));
    return state;
}

void rmsprop_step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
                  OptimizerState& state) {
    if (params.size() != grads.size() || params.size() != state.acc.size())
        throw ShapeError("rmsprop_step: parameter/gradient/state count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& theta = *params[k];
        const Tensor& g = *grads[k];
        Tensor& acc = state.acc[k];
        if (!theta.same_shape(g) || !theta.same_shape(acc))
            throw ShapeError("rmsprop_step: shape mismatch at parameter " + std::to_string(k));
        for (std::size_t i = 0; i < theta.size(); ++i) {
            acc.data[i] = state.rho * acc.data[i] + (1.0 - state.rho) * g.data[i] * g.data[i];
            theta.data[i] -=
                state.learning_rate * g.data[i] / (std::sqrt(acc.data[i]) + state.epsilon);
        }
    }
}

// -------------------------------------------------------------------- regimes

namespace {

std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> order,
                                                   std::size_t batch_size) {
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(start + batch_size, order.size());
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    // Batchnorm needs at least two rows; fold a trailing singleton into the
    // previous batch.
    if (batches.size() >= 2 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back()[0]);
        batches.pop_back();
    }
    return batches;
}

double max_abs(const Gradients& grads) {
    Gradients& g = const_cast<Gradients&>(grads);
    double mx = 0.0;
    for (const Tensor* t : gradient_slots(g))
        for (double v : t->data) mx = std::max(mx, std::abs(v));
    return mx;
}

void check_loss(double loss, std::size_t epoch, std::size_t batch, const Gradients& grads) {
    if (std::isfinite(loss)) return;
    std::ostringstream msg;
    msg << "non-finite loss at epoch " << epoch << ", batch " << batch
        << ", max |grad| = " << max_abs(grads);
    throw TrainError(msg.str());
}

struct Minibatch {
    std::vector<EncodedStatement> inputs;
    Tensor targets6;       // [B, 6]
    Tensor target_correct; // [B, 1]
    Tensor target_remark;  // [B, 4]
    Tensor target_grade;   // [B, 1]
    Tensor weights6;       // per-element class weights, empty if unweighted
};

Minibatch gather(const std::vector<LabeledExample>& examples,
                 const std::vector<std::size_t>& indices, const ClassWeights* weights) {
    const std::size_t B = indices.size();
    Minibatch mb;
    mb.inputs.reserve(B);
    mb.targets6 = Tensor({B, 6});
    mb.target_correct = Tensor({B, 1});
    mb.target_remark = Tensor({B, 4});
    mb.target_grade = Tensor({B, 1});
    if (weights) mb.weights6 = Tensor({B, 6});
    for (std::size_t i = 0; i < B; ++i) {
        const LabeledExample& ex = examples[indices[i]];
        mb.inputs.push_back(ex.x);
        mb.targets6(i, 0) = ex.y_correct;
        for (std::size_t j = 0; j < 4; ++j) mb.targets6(i, 1 + j) = ex.y_remark[j];
        mb.targets6(i, 5) = ex.y_grade;
        mb.target_correct(i, 0) = ex.y_correct;
        for (std::size_t j = 0; j < 4; ++j) mb.target_remark(i, j) = ex.y_remark[j];
        mb.target_grade(i, 0) = ex.y_grade;
        if (weights) {
            const double wc = weights->correct[ex.y_correct > 0.5 ? 1 : 0];
            std::size_t remark_class = 0;
            for (std::size_t j = 0; j < 4; ++j)
                if (ex.y_remark[j] > 0.5) remark_class = j;
            const double wr = weights->remark[remark_class];
            mb.weights6(i, 0) = wc;
            for (std::size_t j = 0; j < 4; ++j) mb.weights6(i, 1 + j) = wr;
            mb.weights6(i, 5) = 1.0;
        }
    }
    return mb;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

TrainHistory train_joint(GraderNet& net, const std::vector<LabeledExample>& examples,
                         const TrainConfig& config) {
    if (examples.empty()) throw ParameterError("train_joint: no examples");
    SeededRng rng(config.seed);
    auto params = trainable_params(net);
    OptimizerState opt = make_optimizer(params);
    std::optional<ClassWeights> weights;
    if (config.class_weighting) weights = class_weights(examples);

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    TrainHistory history;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = Clock::now();
        if (config.shuffle_each_epoch)
            for (std::size_t i = order.size() - 1; i > 0; --i)
                std::swap(order[i], order[rng.next_below(i + 1)]);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        const auto batches = make_batches(order, config.batch_size);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            Minibatch mb = gather(examples, batches[b], weights ? &*weights : nullptr);
            JointCache cache;
            Tensor out = forward_joint(net, mb.inputs, true, rng, &cache);
            LossResult loss = bce_loss(out, mb.targets6,
                                       weights ? &mb.weights6 : nullptr);
            Gradients grads = zero_gradients(net);
            backward_joint(net, cache, loss.grad, grads);
            check_loss(loss.loss, epoch, b, grads);
            auto grad_list = gradient_slots(grads);
            rmsprop_step(params, grad_list, opt);
            epoch_loss += loss.loss * static_cast<double>(batches[b].size());
            seen += batches[b].size();
        }
        history.epochs.push_back({epoch + 1, "joint", epoch_loss / static_cast<double>(seen),
                                  seconds_since(start)});
    }
    history.final_checksum = parameter_checksum(net);
    return history;
}

TrainHistory train_iterative(GraderNet& net, const std::vector<LabeledExample>& examples,
                             const TrainConfig& config) {
    if (examples.empty()) throw ParameterError("train_iterative: no examples");
    SeededRng rng(config.seed);
    auto params = trainable_params(net);
    OptimizerState opt = make_optimizer(params);
    std::optional<ClassWeights> weights;
    if (config.class_weighting) weights = class_weights(examples);

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    TrainHistory history;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = Clock::now();
        const char head = "crg"[epoch % 3];
        if (config.shuffle_each_epoch)
            for (std::size_t i = order.size() - 1; i > 0; --i)
                std::swap(order[i], order[rng.next_below(i + 1)]);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        const auto batches = make_batches(order, config.batch_size);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            Minibatch mb = gather(examples, batches[b], weights ? &*weights : nullptr);
            JointCache cache;
            Tensor out = forward_head(net, mb.inputs, head, true, rng, &cache);
            LossResult loss;
            if (head == 'c') {
                Tensor w({out.shape});
                if (weights)
                    for (std::size_t i = 0; i < out.shape[0]; ++i)
                        w(i, 0) = weights->correct[mb.target_correct(i, 0) > 0.5 ? 1 : 0];
                loss = bce_loss(out, mb.target_correct, weights ? &w : nullptr);
            } else if (head == 'r') {
                loss = cce_loss(out, mb.target_remark);
            } else {
                loss = mse_loss(out, mb.target_grade);
            }
            Gradients grads = zero_gradients(net);
            backward_head(net, cache, head, loss.grad, grads);
            check_loss(loss.loss, epoch, b, grads);
            auto grad_list = gradient_slots(grads);
            rmsprop_step(params, grad_list, opt);
            epoch_loss += loss.loss * static_cast<double>(batches[b].size());
            seen += batches[b].size();
        }
        history.epochs.push_back({epoch + 1,
                                  std::string(1, static_cast<char>(std::toupper(head))),
                                  epoch_loss / static_cast<double>(seen),
                                  seconds_since(start)});
    }
    history.final_checksum = parameter_checksum(net);
    return history;
}

TrainHistory train(GraderNet& net, const std::vector<LabeledExample>& examples,
                   const TrainConfig& config) {
    return config.mode == TrainMode::Joint ? train_joint(net, examples, config)
                                           : train_iterative(net, examples, config);
}

std::string history_to_jsonl(const TrainHistory& history) {
    std::string out;
    for (const auto& rec : history.epochs) {
        nlohmann::json line = {{"epoch", rec.epoch},
                               {"objective", rec.objective},
                               {"loss", rec.loss},
                               {"seconds", rec.seconds}};
        out += line.dump() + "\n";
    }
    return out;
}

// ------------------------------------------------------------ cross-validation

namespace {

void run_fold(const std::vector<SubmissionRecord>& records, const FoldPlan::Fold& fold,
              std::size_t fold_idx, const TrainConfig& train_config,
              const ModelConfig& model_config, CrossValResult& out) {
    // Vocabulary from the training split only; validation tokens unseen by it
    // map to UNK.
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(fold.train_indices.size());
    for (std::size_t idx : fold.train_indices)
        corpus.push_back(lex(records[idx].submitted_answer));
    Vocabulary vocab = build_vocab(corpus);

    std::vector<LabeledExample> train_examples;
    train_examples.reserve(fold.train_indices.size());
    for (std::size_t idx : fold.train_indices)
        train_examples.push_back(to_example(records[idx], vocab));

    const std::uint64_t fold_seed = mix64(train_config.seed ^ (fold_idx + 1));
    ModelConfig mc = model_config;
    mc.vocab_size = vocab.size();
    mc.seed = fold_seed;
    SeededRng build_rng(fold_seed);
    GraderNet net = build(mc, build_rng);

    TrainConfig tc = train_config;
    tc.seed = fold_seed;
    out.fold_histories[fold_idx] = train(net, train_examples, tc);

    for (std::size_t idx : fold.val_indices) {
        LabeledExample ex = to_example(records[idx], vocab);
        out.predictions[idx] =
            {idx, fold_idx, records[idx].submission_id, predict(net, ex.x)};
    }
}

}  // namespace

CrossValResult cross_validate(const std::vector<SubmissionRecord>& records,
                              const FoldPlan& plan, const TrainConfig& train_config,
                              const ModelConfig& model_config, std::size_t jobs) {
    CrossValResult result;
    result.predictions.resize(records.size());
    result.fold_histories.resize(plan.folds.size());

    const std::size_t n_folds = plan.folds.size();
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, n_folds));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_folds);

    auto worker = [&] {
        for (;;) {
            const std::size_t f = next.fetch_add(1);
            if (f >= n_folds) return;
            try {
                run_fold(records, plan.folds[f], f, train_config, model_config, result);
            } catch (...) {
                errors[f] = std::current_exception();
            }
        }
    };

    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (std::size_t f = 0; f < n_folds; ++f) {
        if (!errors[f]) continue;
        try {
            std::rethrow_exception(errors[f]);
        } catch (const std::exception& e) {
            throw TrainError("fold " + std::to_string(f) + ": " + e.what());
        }
    }
    return result;
}

}  // namespace sqlgrader
