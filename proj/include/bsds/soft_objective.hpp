#pragma once

#include "bsds/rng.hpp"
#include "bsds/types.hpp"

#include <span>
#include <vector>

namespace bsds {

/// Feed-forward net with rectified-linear hidden layers and a logistic
/// output. weights[l] is (out x in) for layer l.
struct MlpModel {
  std::vector<std::int32_t> layer_sizes;  // e.g. {10, 128, 64, 1}
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Symmetric uniform fan-in initialization, U(-1/sqrt(in), 1/sqrt(in)).
MlpModel make_mlp(std::vector<std::int32_t> layer_sizes, Rng& rng);

std::int64_t parameter_count(const MlpModel& model);
Eigen::VectorXd flatten_parameters(const MlpModel& model);
void set_parameters(MlpModel& model, const Eigen::VectorXd& flat);

/// Scores for every row of X, in (0,1).
Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::MatrixXd& X);

struct SoftBsdsConfig {
  std::vector<double> alpha_schedule = {5.0, 15.0, 35.0};  // one per round
  std::vector<double> budget_fractions = {0.01, 0.02, 0.05, 0.10, 0.20, 0.50};
  BsdsParams params;
  double weight_decay = 1e-4;
  double step_size = 0.05;
  std::int32_t epochs_per_round = 300;
  std::vector<std::int32_t> hidden_sizes = {128, 64};
  bool augment = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Soft selection weights w_i = sigmoid(alpha * (s_i - tau)) with
/// tau = quantile(s, 1 - fraction). Pass the resolved fraction B/N so the
/// hard cut and the sharp-alpha limit select the same candidates.
Eigen::VectorXd soft_selection_weights(const Eigen::VectorXd& scores,
                                       double budget_fraction, double alpha);

/// Sigmoid-gated relaxation of BSDS at one budget:
///   sum(w*g)/sum(g) - lambda*sum(w*(1-g))/sum(w) - gamma*(1 - sum(w)/N)
/// with sum(w) floored at 1e-12. Labels must contain at least one hit.
double soft_bsds(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                 double budget_fraction, double alpha, const BsdsParams& params);

enum class TrainLoss {
  kSoftBsds,  // L = -(1/|B|) sum_b softBSDS_b + mu*||theta||^2
  kBce,       // L = mean binary cross-entropy + mu*||theta||^2
};

/// Loss of `model` on the batch. When `fixed_taus` is given the per-budget
/// thresholds are pinned to those values instead of recomputed from the
/// scores; the analytic gradient treats tau as a constant per step, so a
/// finite-difference probe of the same objective must pin them too.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& labels, TrainLoss kind, double alpha,
                const SoftBsdsConfig& cfg,
                const std::vector<double>* fixed_taus = nullptr);

struct LossGradient {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;

  Eigen::VectorXd flatten() const;
};

/// Exact reverse-mode gradient of mlp_loss with respect to every parameter
/// (stop-gradient through the quantile thresholds).
LossGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& labels, TrainLoss kind,
                               double alpha, const SoftBsdsConfig& cfg,
                               const std::vector<double>* fixed_taus = nullptr);

/// Full-batch gradient descent for one annealing round. Throws
/// training_error with round/epoch context if the loss goes non-finite.
MlpModel train_one_round(MlpModel model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& labels, TrainLoss kind,
                         double alpha, const SoftBsdsConfig& cfg,
                         std::int32_t round_index);

struct TrainResult {
  Eigen::VectorXd scores;               // cross-validated, one per candidate
  std::vector<MlpModel> fold_models;    // final-round model per fold
  std::int32_t rounds = 0;
  std::int32_t final_feature_width = 0;
};

/// Recursive multi-round trainer. Per fold: standardizes features with
/// training-row statistics, trains one round per alpha_schedule entry and,
/// when augmentation is on, appends the previous round's predicted score and
/// its per-budget soft selection weights as new feature columns (the model's
/// own predictions on held-out rows, never labels). Held-out scores come from
/// the final round.
///
/// alpha_schedule of length 1 gives the single-round variant; augment=false
/// keeps the feature width constant across rounds.
TrainResult train_recursive(const Eigen::MatrixXd& features,
                            std::span<const std::uint8_t> labels,
                            std::span<const std::vector<std::int32_t>> folds,
                            const SoftBsdsConfig& cfg,
                            TrainLoss kind = TrainLoss::kSoftBsds);

/// Same architecture, rounds and augmentation with binary cross-entropy.
TrainResult train_bce(const Eigen::MatrixXd& features,
                      std::span<const std::uint8_t> labels,
                      std::span<const std::vector<std::int32_t>> folds,
                      const SoftBsdsConfig& cfg);

}  // namespace bsds
