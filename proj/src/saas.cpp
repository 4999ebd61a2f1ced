#include "hermite/saas.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hermite/common.hpp"
#include "hermite/kernels.hpp"
#include "hermite/rng.hpp"

namespace hermite::saas {

namespace {

constexpr std::uint64_t kPseudoInitTag = 0x70ULL;
constexpr std::uint64_t kOuterReinitTag = 0x0eULL;
constexpr std::uint64_t kShuffleTag = 0x5fULL;

Tensor gather_rows(const Tensor& mat, const std::vector<std::size_t>& idx) {
    Tensor out({idx.size(), mat.cols()});
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < mat.cols(); ++j) out.at(i, j) = mat.at(idx[i], j);
    return out;
}

Tensor harden_rows(const Tensor& rows) {
    Tensor out({rows.rows(), rows.cols()});
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < rows.cols(); ++j)
            if (rows.at(i, j) > rows.at(i, best)) best = j;
        out.at(i, best) = 1.0;
    }
    return out;
}

} // namespace

void SaasConfig::validate() const {
    if (inner_epochs <= 0 || outer_epochs < 0)
        throw std::invalid_argument("saas: inner epochs must be positive, outer non-negative");
    if (eta_w <= 0.0 || eta_p_primal <= 0.0 || eta_p_dual <= 0.0)
        throw std::invalid_argument("saas: learning rates must be positive");
    if (lambda_entropy < 0.0)
        throw std::invalid_argument("saas: entropy weight must be non-negative");
    if (batch == 0) throw std::invalid_argument("saas: batch size must be positive");
}

std::vector<double> SaasResult::accuracy_log() const {
    std::vector<double> log;
    log.reserve(rows.size());
    for (const auto& row : rows) log.push_back(row.pl_accuracy);
    return log;
}

double SaasResult::max_pl_accuracy() const {
    double best = 0.0;
    for (const auto& row : rows) best = std::max(best, row.pl_accuracy);
    return best;
}

void simplex_project_row(double* row, std::size_t k) {
    if (k == 0) return;
    std::vector<double> sorted(row, row + k);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumulative = 0.0;
    double tau = 0.0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < k; ++j) {
        cumulative += sorted[j];
        const double candidate = (1.0 - cumulative) / static_cast<double>(j + 1);
        if (sorted[j] + candidate > 0.0) {
            tau = candidate;
            support = j + 1;
        }
    }
    (void)support;
    for (std::size_t j = 0; j < k; ++j) row[j] = std::max(0.0, row[j] + tau);
}

void simplex_project_rows(Tensor& p) {
    const std::size_t rows = p.rows(), k = p.cols();
    for (std::size_t i = 0; i < rows; ++i) simplex_project_row(p.data() + i * k, k);
}

Tensor initialize_pseudo_labels(std::size_t n_unlabeled, int num_classes, std::uint64_t seed) {
    if (n_unlabeled == 0 || num_classes <= 0)
        throw std::invalid_argument("initialize_pseudo_labels: counts must be positive");
    Rng rng(seed);
    Tensor p({n_unlabeled, static_cast<std::size_t>(num_classes)});
    for (std::size_t i = 0; i < n_unlabeled; ++i)
        p.at(i, rng.uniform_int(static_cast<std::uint64_t>(num_classes))) = 1.0;
    return p;
}

ad::Var saas_loss(nn::Model& model, const Tensor& labeled_x, const Tensor& labeled_onehot,
                  const Tensor& unlabeled_x, const ad::Var& posterior_rows,
                  double lambda_entropy, bool training) {
    ad::Var total;
    if (labeled_x.numel() > 0 && labeled_x.rows() > 0) {
        auto x = ad::leaf(labeled_x);
        auto targets = ad::leaf(labeled_onehot);
        total = ad::softmax_cross_entropy(model.forward(x, training), targets);
    }
    if (unlabeled_x.numel() > 0 && unlabeled_x.rows() > 0) {
        if (!posterior_rows || posterior_rows->value.rows() != unlabeled_x.rows())
            throw std::invalid_argument("saas_loss: posterior rows do not match unlabeled batch");
        for (std::size_t i = 0; i < posterior_rows->value.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < posterior_rows->value.cols(); ++j) {
                const double v = posterior_rows->value.at(i, j);
                if (v < -1e-6)
                    throw std::invalid_argument("saas_loss: negative posterior entry");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-6)
                throw std::invalid_argument("saas_loss: posterior row " + std::to_string(i) +
                                            " off the simplex");
        }
        auto z = ad::leaf(unlabeled_x);
        auto ce_u = ad::softmax_cross_entropy(model.forward(z, training), posterior_rows);
        total = total ? ad::add(total, ce_u) : ce_u;
        if (lambda_entropy > 0.0) {
            auto reg = ad::scale(ad::entropy_mean_rows(posterior_rows), lambda_entropy);
            total = ad::add(total, reg);
        }
    }
    if (!total) throw std::invalid_argument("saas_loss: both batches empty");
    return total;
}

double pseudo_label_accuracy(const Tensor& posterior, const std::vector<int>& true_labels) {
    const std::size_t n = posterior.rows(), k = posterior.cols();
    if (true_labels.size() != n)
        throw std::invalid_argument("pseudo_label_accuracy: size mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (posterior.at(i, j) > posterior.at(i, best)) best = j;
        if (static_cast<int>(best) == true_labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

std::optional<int> epochs_to_accuracy(const std::vector<double>& accuracy_log, double threshold) {
    if (accuracy_log.empty()) throw std::invalid_argument("epochs_to_accuracy: empty log");
    for (std::size_t i = 0; i < accuracy_log.size(); ++i)
        if (accuracy_log[i] >= threshold) return static_cast<int>(i);
    return std::nullopt;
}

Cost cost_model(double epochs, double seconds_per_epoch, double dollars_per_hour) {
    if (epochs <= 0.0 || seconds_per_epoch <= 0.0 || dollars_per_hour <= 0.0)
        throw std::domain_error("cost_model: inputs must be positive");
    Cost c;
    c.hours = epochs * seconds_per_epoch / 3600.0;
    c.dollars = c.hours * dollars_per_hour;
    return c;
}

SaasResult saas_train(const data::Dataset& labeled, const data::Dataset& unlabeled,
                      const nn::MlpSpec& arch, const SaasConfig& config) {
    config.validate();
    labeled.validate();
    unlabeled.validate();
    if (labeled.num_classes != unlabeled.num_classes)
        throw std::invalid_argument("saas_train: class count mismatch");
    const std::size_t n_u = unlabeled.size();
    const std::size_t n_l = labeled.size();
    const int k = labeled.num_classes;

    SaasResult result;
    result.pseudo_labels =
        initialize_pseudo_labels(n_u, k, derive_seed(config.seed, kPseudoInitTag));
    Tensor& posterior = result.pseudo_labels;

    nn::Model model = nn::build_mlp(arch);
    auto params = model.params();
    opt::Optimizer optimizer({opt::Kind::sgd, config.eta_w});
    const Tensor labeled_onehot_all = nn::one_hot(labeled.labels, k);

    std::vector<std::size_t> unlabeled_order(n_u), labeled_order(n_l);
    for (std::size_t i = 0; i < n_u; ++i) unlabeled_order[i] = i;
    for (std::size_t i = 0; i < n_l; ++i) labeled_order[i] = i;

    for (int outer = 0; outer < config.outer_epochs; ++outer) {
        const auto t0 = std::chrono::steady_clock::now();
        model.reinit(derive_seed(config.seed, kOuterReinitTag + 0x100ULL * (outer + 1)));
        optimizer.reset();
        Tensor dual_grad({n_u, static_cast<std::size_t>(k)}); // delta P_u, zeroed per outer epoch
        Rng shuffle_rng(derive_seed(config.seed, kShuffleTag + 0x100ULL * (outer + 1)));

        double first_epoch_loss = 0.0, last_epoch_loss = 0.0;
        try {
            for (int inner = 0; inner < config.inner_epochs; ++inner) {
                shuffle_rng.shuffle(unlabeled_order);
                shuffle_rng.shuffle(labeled_order);
                std::size_t labeled_cursor = 0;
                double loss_sum = 0.0;
                std::size_t batch_count = 0;

                for (std::size_t start = 0; start < n_u; start += config.batch) {
                    const std::size_t take = std::min(config.batch, n_u - start);
                    std::vector<std::size_t> u_idx(unlabeled_order.begin() + start,
                                                   unlabeled_order.begin() + start + take);
                    // cycle the labeled set at the same batch width
                    std::vector<std::size_t> l_idx;
                    l_idx.reserve(std::min(take, n_l));
                    for (std::size_t i = 0; i < std::min(take, n_l); ++i) {
                        l_idx.push_back(labeled_order[labeled_cursor]);
                        labeled_cursor = (labeled_cursor + 1) % n_l;
                    }

                    Tensor xb = gather_rows(labeled.features, l_idx);
                    Tensor yb({l_idx.size(), static_cast<std::size_t>(k)});
                    for (std::size_t i = 0; i < l_idx.size(); ++i)
                        for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j)
                            yb.at(i, j) = labeled_onehot_all.at(l_idx[i], j);
                    Tensor zb = gather_rows(unlabeled.features, u_idx);
                    Tensor p_rows = gather_rows(posterior, u_idx);

                    ad::Var p_var;
                    ad::Var loss;
                    Tensor p_grad({take, static_cast<std::size_t>(k)});
                    if (!config.hard_targets) {
                        p_var = ad::leaf(p_rows, true);
                        loss = saas_loss(model, xb, yb, zb, p_var, config.lambda_entropy, true);
                        ad::zero_grad(params);
                        ad::backward(loss);
                        p_grad = p_var->grad;
                    } else {
                        // weight step sees hardened rows; the posterior
                        // gradient keeps the soft objective, which is linear
                        // in P, so it comes straight from the batch logits
                        auto z = ad::leaf(zb);
                        auto z_logits = model.forward(z, true);
                        auto hard_var = ad::leaf(harden_rows(p_rows));
                        auto ce_u = ad::softmax_cross_entropy(z_logits, hard_var);
                        auto x = ad::leaf(xb);
                        auto targets = ad::leaf(yb);
                        auto ce_l = ad::softmax_cross_entropy(model.forward(x, true), targets);
                        loss = ad::add(ce_l, ce_u);
                        ad::zero_grad(params);
                        ad::backward(loss);
                        Tensor logsm({take, static_cast<std::size_t>(k)});
                        kernels::log_softmax_rows(take, k, z_logits->value.data(),
                                                  logsm.data());
                        const double inv_b = 1.0 / static_cast<double>(take);
                        for (std::size_t i = 0; i < take * k; ++i) {
                            const double p = p_rows[i] > 1e-3 ? p_rows[i] : 1e-3;
                            p_grad[i] = inv_b * (-logsm[i] +
                                                 config.lambda_entropy * (-std::log(p) - 1.0));
                        }
                    }
                    optimizer.step(params);

                    // primal accumulation of the scaled posterior gradient
                    for (std::size_t i = 0; i < u_idx.size(); ++i)
                        for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j)
                            dual_grad.at(u_idx[i], j) +=
                                config.eta_p_primal * p_grad.at(i, j);

                    loss_sum += loss->value.value();
                    ++batch_count;
                }
                const double mean_loss = loss_sum / static_cast<double>(batch_count);
                if (inner == 0) first_epoch_loss = mean_loss;
                last_epoch_loss = mean_loss;
            }
        } catch (const NumericError& err) {
            result.aborted = true;
            result.abort_epoch = outer;
            result.abort_reason = err.what();
            return result;
        }

        // dual step on the posterior, kept feasible by Euclidean projection
        {
            double* p = posterior.data();
            const double* g = dual_grad.data();
            for (std::size_t i = 0; i < posterior.numel(); ++i)
                p[i] -= config.eta_p_dual * g[i];
            simplex_project_rows(posterior);
            for (std::size_t i = 0; i < posterior.rows(); ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < posterior.cols(); ++j) {
                    if (posterior.at(i, j) < 0.0)
                        throw NumericError("saas: posterior left the simplex (negative entry)");
                    sum += posterior.at(i, j);
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    throw NumericError("saas: posterior row sum drifted from 1");
            }
        }

        SaasEpochRow row;
        row.outer_epoch = outer;
        row.pl_accuracy = pseudo_label_accuracy(posterior, unlabeled.labels);
        row.mean_inner_loss_first = first_epoch_loss;
        row.mean_inner_loss_last = last_epoch_loss;
        if (config.measure_time) {
            const auto t1 = std::chrono::steady_clock::now();
            row.seconds = std::chrono::duration<double>(t1 - t0).count();
        }
        result.rows.push_back(row);
    }
    return result;
}

} // namespace hermite::saas
