#ifndef HERMITE_MODELS_HPP
#define HERMITE_MODELS_HPP

#include <string>
#include <vector>

#include "hermite/data.hpp"
#include "hermite/layers.hpp"
#include "hermite/optim.hpp"

namespace hermite::nn {

struct MlpSpec {
    std::vector<std::size_t> widths; // input, hidden..., output
    ActivationChoice act;
    bool normalize = false;
    bool residual = false;
    // Bounds each hermite stage with a softsign. Plain shallow stacks train
    // faster without it (the expansion stays in range there); residual blocks
    // always carry it, matching the deep-architecture wiring.
    bool stabilizer = false;

    std::string tag() const;
};

struct AutoencoderSpec {
    std::vector<std::size_t> encoder_widths; // input, ..., bottleneck; decoder mirrors
    ActivationChoice act;
    bool normalize = false;
    bool stabilizer = false;

    std::string tag() const;
};

/// Classifier (or regressor head) from a width list. Hidden wiring is
/// dense -> normalize -> activation, with a softsign stage after every
/// hermite expansion. Residual specs route hidden stages through
/// pre-activation blocks instead.
Model build_mlp(const MlpSpec& spec);

/// Mirrored-width autoencoder with the same hidden wiring.
Model build_autoencoder(const AutoencoderSpec& spec);

enum class Objective { classify, reconstruct };

struct TrainOptions {
    int epochs = 50;
    std::size_t batch = 64;
    opt::OptimizerConfig optimizer;
    std::uint64_t seed = 1;
    Objective objective = Objective::classify;
    bool measure_time = false; // seconds column stays 0 when off
    bool reinit_before_training = true;
    // stop after the first epoch whose training loss is at or below this
    // (0 disables; comparison-style experiments use it to avoid burning
    // epochs past an already-met target)
    double stop_below_train_loss = 0.0;
};

struct MetricRow {
    int epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double test_loss = 0.0;
    double test_acc = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    std::vector<MetricRow> rows;
    bool aborted = false;
    int abort_epoch = -1;
    std::string abort_reason;
};

/// Mini-batch training with a deterministic per-epoch shuffle; the log is a
/// pure function of (model init, data order, options.seed).
TrainResult train_supervised(Model& model, const data::Dataset& train, const data::Dataset& test,
                             const TrainOptions& options);

/// One-hot rows for a label vector.
Tensor one_hot(const std::vector<int>& labels, int num_classes);

/// Mean accuracy of argmax(logits) against labels; ties resolve to the
/// lowest class index.
double accuracy(const Tensor& logits, const std::vector<int>& labels);

/// Mean loss/accuracy of a model over a dataset in eval mode.
struct EvalResult {
    double loss = 0.0;
    double acc = 0.0;
};
EvalResult evaluate(Model& model, const data::Dataset& ds, Objective objective,
                    std::size_t batch = 256);

} // namespace hermite::nn

#endif
