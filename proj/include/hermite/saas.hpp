#ifndef HERMITE_SAAS_HPP
#define HERMITE_SAAS_HPP

#include <optional>
#include <string>
#include <vector>

#include "hermite/data.hpp"
#include "hermite/models.hpp"

// Two-loop pseudo-label training: the inner (primal) loop fits weights
// against frozen pseudo-labels and accumulates the pseudo-label gradient; the
// outer (dual) loop steps the pseudo-label posterior and reinitializes the
// network, using the achievable loss-descent speed as the supervisory signal.

namespace hermite::saas {

struct SaasConfig {
    int inner_epochs = 5;  // M_I
    int outer_epochs = 30; // M_O
    double eta_w = 0.1;
    double eta_p_primal = 1.0;
    double eta_p_dual = 1.0;
    double lambda_entropy = 0.1;
    std::size_t batch = 64;
    std::uint64_t seed = 1;
    bool hard_targets = false; // argmax-hardened rows in the weight loss
    bool measure_time = false;

    void validate() const;
};

struct SaasEpochRow {
    int outer_epoch = 0;
    double pl_accuracy = 0.0;
    double mean_inner_loss_first = 0.0;
    double mean_inner_loss_last = 0.0;
    double seconds = 0.0;
};

struct SaasResult {
    Tensor pseudo_labels; // final posterior P_u [N_u x K]
    std::vector<SaasEpochRow> rows;
    bool aborted = false;
    int abort_epoch = -1;
    std::string abort_reason;

    std::vector<double> accuracy_log() const;
    double max_pl_accuracy() const;
};

/// Euclidean projection onto the probability simplex, row-wise.
void simplex_project_row(double* row, std::size_t k);
void simplex_project_rows(Tensor& p);

/// Each row is a uniformly random one-hot vector.
Tensor initialize_pseudo_labels(std::size_t n_unlabeled, int num_classes, std::uint64_t seed);

/// Joint loss: CE over the labeled batch + soft-target CE over the unlabeled
/// batch + lambda * mean Shannon entropy of the posterior rows. Empty labeled
/// or unlabeled parts drop their terms. `posterior_rows` may be a
/// gradient-requiring leaf; its gradient is the dual-step direction.
ad::Var saas_loss(nn::Model& model, const Tensor& labeled_x, const Tensor& labeled_onehot,
                  const Tensor& unlabeled_x, const ad::Var& posterior_rows,
                  double lambda_entropy, bool training);

/// Fraction of rows whose argmax (ties to the lowest class index) matches the
/// held-out true label.
double pseudo_label_accuracy(const Tensor& posterior, const std::vector<int>& true_labels);

/// First outer epoch whose logged accuracy reaches the threshold.
std::optional<int> epochs_to_accuracy(const std::vector<double>& accuracy_log, double threshold);

struct Cost {
    double hours = 0.0;
    double dollars = 0.0;
};

/// hours = epochs * seconds_per_epoch / 3600; dollars = hours * rate.
Cost cost_model(double epochs, double seconds_per_epoch, double dollars_per_hour);

/// Run the full two-loop algorithm. `unlabeled` keeps its true labels for
/// accuracy evaluation only; they never reach the training loss.
SaasResult saas_train(const data::Dataset& labeled, const data::Dataset& unlabeled,
                      const nn::MlpSpec& arch, const SaasConfig& config);

} // namespace hermite::saas

#endif
