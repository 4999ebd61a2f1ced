#include "hermite/models.hpp"

#include <chrono>
#include <cmath>

#include "hermite/common.hpp"

namespace hermite::nn {

namespace {

std::string act_tag(const ActivationChoice& act) {
    std::string s = to_string(act.kind);
    if (act.kind == ActKind::hermite) s += "(d=" + std::to_string(act.degree) + ")";
    return s;
}

std::string widths_tag(const std::vector<std::size_t>& widths) {
    std::string s = "[";
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(widths[i]);
    }
    return s + "]";
}

void append_hidden_stage(Model& model, std::size_t in, std::size_t out,
                         const ActivationChoice& act, bool normalize, bool stabilizer) {
    model.layers.push_back(std::make_unique<DenseLayer>(in, out));
    if (normalize) model.layers.push_back(std::make_unique<FeatureNormLayer>(out));
    if (act.kind == ActKind::hermite) {
        model.layers.push_back(std::make_unique<HermiteActLayer>(act.degree));
        if (stabilizer)
            model.layers.push_back(
                std::make_unique<ActivationLayer>(ActKind::softsign_only, false));
    } else {
        model.layers.push_back(std::make_unique<ActivationLayer>(act.kind, true));
    }
}

} // namespace

std::string MlpSpec::tag() const {
    return "mlp " + widths_tag(widths) + " " + act_tag(act) + (normalize ? " norm" : "") +
           (residual ? " residual" : "") + (stabilizer ? " stabilized" : "");
}

std::string AutoencoderSpec::tag() const {
    return "autoencoder " + widths_tag(encoder_widths) + " " + act_tag(act) +
           (normalize ? " norm" : "");
}

Model build_mlp(const MlpSpec& spec) {
    if (spec.widths.size() < 2)
        throw std::invalid_argument("mlp: need at least input and output widths");
    for (std::size_t w : spec.widths)
        if (w == 0) throw std::invalid_argument("mlp: zero layer width");
    if (spec.residual) {
        for (std::size_t i = 1; i + 2 < spec.widths.size(); ++i)
            if (spec.widths[i] != spec.widths[i + 1])
                throw std::invalid_argument(
                    "mlp: residual wiring needs equal consecutive hidden widths");
    }

    Model model;
    model.arch_tag = spec.tag();
    const std::size_t n_hidden = spec.widths.size() - 2;
    if (!spec.residual) {
        for (std::size_t i = 0; i < n_hidden; ++i)
            append_hidden_stage(model, spec.widths[i], spec.widths[i + 1], spec.act,
                                spec.normalize, spec.stabilizer);
    } else {
        if (n_hidden >= 1) {
            model.layers.push_back(
                std::make_unique<DenseLayer>(spec.widths[0], spec.widths[1]));
            for (std::size_t i = 1; i < n_hidden; ++i)
                model.layers.push_back(std::make_unique<PreactBlock>(
                    spec.widths[i], spec.act, spec.normalize, true, true));
        }
    }
    model.layers.push_back(std::make_unique<DenseLayer>(
        spec.widths[spec.widths.size() - 2], spec.widths.back()));
    model.reinit(0);
    return model;
}

Model build_autoencoder(const AutoencoderSpec& spec) {
    if (spec.encoder_widths.size() < 2)
        throw std::invalid_argument("autoencoder: need at least input and bottleneck widths");
    if (spec.encoder_widths.back() >= spec.encoder_widths.front())
        throw std::invalid_argument("autoencoder: bottleneck must be narrower than the input");

    Model model;
    model.arch_tag = spec.tag();
    const auto& w = spec.encoder_widths;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        append_hidden_stage(model, w[i], w[i + 1], spec.act, spec.normalize, spec.stabilizer);
    for (std::size_t i = w.size() - 1; i >= 2; --i)
        append_hidden_stage(model, w[i], w[i - 1], spec.act, spec.normalize, spec.stabilizer);
    model.layers.push_back(std::make_unique<DenseLayer>(w[1], w[0]));
    model.reinit(0);
    return model;
}

Tensor one_hot(const std::vector<int>& labels, int num_classes) {
    Tensor t({labels.size(), static_cast<std::size_t>(num_classes)});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw std::invalid_argument("one_hot: label out of range");
        t.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

double accuracy(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t n = logits.rows(), k = logits.cols();
    if (labels.size() != n) throw std::invalid_argument("accuracy: size mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        if (static_cast<int>(best) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

EvalResult evaluate(Model& model, const data::Dataset& ds, Objective objective,
                    std::size_t batch) {
    EvalResult res;
    const std::size_t n = ds.size();
    std::size_t done = 0;
    double loss_acc = 0.0, hit_acc = 0.0;
    while (done < n) {
        const std::size_t take = std::min(batch, n - done);
        std::vector<std::size_t> idx(take);
        for (std::size_t i = 0; i < take; ++i) idx[i] = done + i;
        data::Dataset part = data::subset(ds, idx);
        auto x = ad::leaf(part.features);
        auto out = model.forward(x, false);
        if (objective == Objective::classify) {
            auto targets = ad::leaf(one_hot(part.labels, ds.num_classes));
            auto loss = ad::softmax_cross_entropy(out, targets);
            loss_acc += loss->value.value() * static_cast<double>(take);
            hit_acc += accuracy(out->value, part.labels) * static_cast<double>(take);
        } else {
            auto loss = ad::mse_row_sum(out, x);
            loss_acc += loss->value.value() * static_cast<double>(take);
        }
        done += take;
    }
    res.loss = loss_acc / static_cast<double>(n);
    res.acc = hit_acc / static_cast<double>(n);
    return res;
}

TrainResult train_supervised(Model& model, const data::Dataset& train, const data::Dataset& test,
                             const TrainOptions& options) {
    train.validate();
    if (test.size() > 0) test.validate();
    if (options.batch == 0) throw std::invalid_argument("train: batch size must be positive");

    TrainResult result;
    if (options.reinit_before_training) model.reinit(options.seed);
    auto params = model.params();
    opt::Optimizer optimizer(options.optimizer);
    Rng order_rng = Rng(derive_seed(options.seed, 0x0bdeULL));

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        order_rng.shuffle(order);
        double loss_sum = 0.0, acc_sum = 0.0;
        try {
            for (std::size_t start = 0; start < n; start += options.batch) {
                const std::size_t take = std::min(options.batch, n - start);
                std::vector<std::size_t> idx(order.begin() + start, order.begin() + start + take);
                data::Dataset part = data::subset(train, idx);
                auto x = ad::leaf(part.features);
                auto out = model.forward(x, true);
                ad::Var loss;
                if (options.objective == Objective::classify) {
                    auto targets = ad::leaf(one_hot(part.labels, train.num_classes));
                    loss = ad::softmax_cross_entropy(out, targets);
                    acc_sum += accuracy(out->value, part.labels) * static_cast<double>(take);
                } else {
                    loss = ad::mse_row_sum(out, x);
                }
                loss_sum += loss->value.value() * static_cast<double>(take);
                ad::zero_grad(params);
                ad::backward(loss);
                optimizer.step(params);
            }
        } catch (const NumericError& err) {
            result.aborted = true;
            result.abort_epoch = epoch;
            result.abort_reason = err.what();
            return result;
        }

        MetricRow row;
        row.epoch = epoch;
        row.train_loss = loss_sum / static_cast<double>(n);
        row.train_acc = options.objective == Objective::classify
                            ? acc_sum / static_cast<double>(n)
                            : 0.0;
        if (test.size() > 0) {
            const EvalResult ev = evaluate(model, test, options.objective);
            row.test_loss = ev.loss;
            row.test_acc = ev.acc;
        }
        if (options.measure_time) {
            const auto t1 = std::chrono::steady_clock::now();
            row.seconds = std::chrono::duration<double>(t1 - t0).count();
        }
        result.rows.push_back(row);
        if (options.stop_below_train_loss > 0.0 &&
            row.train_loss <= options.stop_below_train_loss)
            break;
    }
    return result;
}

} // namespace hermite::nn
