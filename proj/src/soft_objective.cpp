#include "bsds/soft_objective.hpp"

#include "bsds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bsds {

namespace {

constexpr double kWeightSumFloor = 1e-12;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

double tau_for_fraction(const Eigen::VectorXd& scores, double fraction) {
  std::vector<double> sorted(scores.data(), scores.data() + scores.size());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, 1.0 - fraction);
}

struct SoftTerms {
  double value = 0.0;
  double hit_sum = 0.0;     // sum w*g
  double miss_sum = 0.0;    // sum w*(1-g)
  double weight_sum = 0.0;  // sum w
  bool floored = false;
};

SoftTerms soft_terms(const Eigen::VectorXd& weights, const Eigen::VectorXd& labels,
                     double hit_total, const BsdsParams& params) {
  SoftTerms t;
  t.hit_sum = (weights.array() * labels.array()).sum();
  t.weight_sum = weights.sum();
  t.miss_sum = t.weight_sum - t.hit_sum;
  const double denom = std::max(t.weight_sum, kWeightSumFloor);
  t.floored = t.weight_sum < kWeightSumFloor;
  const double n = static_cast<double>(weights.size());
  t.value = t.hit_sum / hit_total - params.lambda * t.miss_sum / denom -
            params.gamma * (1.0 - t.weight_sum / n);
  return t;
}

}  // namespace

MlpModel make_mlp(std::vector<std::int32_t> layer_sizes, Rng& rng) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("mlp needs at least input and output layers");
  for (std::int32_t s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("mlp layer sizes must be positive");
  if (layer_sizes.back() != 1)
    throw std::invalid_argument("mlp output layer must have size 1");

  MlpModel model;
  model.layer_sizes = std::move(layer_sizes);
  const std::size_t layers = model.layer_sizes.size() - 1;
  model.weights.reserve(layers);
  model.biases.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::int32_t in = model.layer_sizes[l];
    const std::int32_t out = model.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Eigen::MatrixXd w(out, in);
    for (std::int32_t r = 0; r < out; ++r)
      for (std::int32_t c = 0; c < in; ++c)
        w(r, c) = bound * (2.0 * rng.next_double() - 1.0);
    Eigen::VectorXd b(out);
    for (std::int32_t r = 0; r < out; ++r)
      b[r] = bound * (2.0 * rng.next_double() - 1.0);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  return model;
}

std::int64_t parameter_count(const MlpModel& model) {
  std::int64_t n = 0;
  for (std::size_t l = 0; l < model.weights.size(); ++l)
    n += model.weights[l].size() + model.biases[l].size();
  return n;
}

Eigen::VectorXd flatten_parameters(const MlpModel& model) {
  Eigen::VectorXd flat(parameter_count(model));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const auto& w = model.weights[l];
    std::copy(w.data(), w.data() + w.size(), flat.data() + at);
    at += w.size();
    const auto& b = model.biases[l];
    std::copy(b.data(), b.data() + b.size(), flat.data() + at);
    at += b.size();
  }
  return flat;
}

void set_parameters(MlpModel& model, const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count(model))
    throw std::invalid_argument("parameter vector length mismatch");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    auto& w = model.weights[l];
    std::copy(flat.data() + at, flat.data() + at + w.size(), w.data());
    at += w.size();
    auto& b = model.biases[l];
    std::copy(flat.data() + at, flat.data() + at + b.size(), b.data());
    at += b.size();
  }
}

Eigen::VectorXd LossGradient::flatten() const {
  std::int64_t total = 0;
  for (std::size_t l = 0; l < weight_grads.size(); ++l)
    total += weight_grads[l].size() + bias_grads[l].size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weight_grads.size(); ++l) {
    const auto& w = weight_grads[l];
    std::copy(w.data(), w.data() + w.size(), flat.data() + at);
    at += w.size();
    const auto& b = bias_grads[l];
    std::copy(b.data(), b.data() + b.size(), flat.data() + at);
    at += b.size();
  }
  return flat;
}

namespace {

struct ForwardPass {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] = X
  Eigen::VectorXd logits;                    // pre-sigmoid outputs
  Eigen::VectorXd scores;                    // sigmoid(logits)
};

ForwardPass forward_pass(const MlpModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.layer_sizes.front())
    throw std::invalid_argument("feature width does not match mlp input layer");
  ForwardPass fp;
  fp.activations.reserve(model.weights.size());
  fp.activations.push_back(X);
  const std::size_t layers = model.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Eigen::MatrixXd z = fp.activations.back() * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    fp.activations.push_back(z.cwiseMax(0.0));
  }
  Eigen::MatrixXd z = fp.activations.back() * model.weights.back().transpose();
  z.rowwise() += model.biases.back().transpose();
  fp.logits = z.col(0);
  fp.scores = sigmoid(fp.logits);
  return fp;
}

}  // namespace

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::MatrixXd& X) {
  return forward_pass(model, X).scores;
}

void SoftBsdsConfig::validate() const {
  if (alpha_schedule.empty())
    throw std::invalid_argument("alpha schedule must be non-empty");
  double prev = 0.0;
  for (double a : alpha_schedule) {
    if (!(a > prev))
      throw std::invalid_argument("alpha schedule must be positive ascending");
    prev = a;
  }
  if (budget_fractions.empty())
    throw std::invalid_argument("budget fractions must be non-empty");
  for (double f : budget_fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw std::invalid_argument("budget fractions must lie in (0,1]");
  if (weight_decay < 0.0)
    throw std::invalid_argument("weight decay must be non-negative");
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (epochs_per_round <= 0)
    throw std::invalid_argument("epochs per round must be positive");
}

Eigen::VectorXd soft_selection_weights(const Eigen::VectorXd& scores,
                                       double budget_fraction, double alpha) {
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0))
    throw std::invalid_argument("budget fraction outside (0,1]");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const double tau = tau_for_fraction(scores, budget_fraction);
  Eigen::VectorXd w(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    w[i] = sigmoid(alpha * (scores[i] - tau));
  return w;
}

double soft_bsds(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                 double budget_fraction, double alpha, const BsdsParams& params) {
  if (labels.size() != scores.size())
    throw std::invalid_argument("labels not aligned to scores");
  const double hit_total = labels.sum();
  if (!(hit_total > 0.0))
    throw std::invalid_argument("soft_bsds requires at least one hit");
  const Eigen::VectorXd w = soft_selection_weights(scores, budget_fraction, alpha);
  return soft_terms(w, labels, hit_total, params).value;
}

namespace {

double parameter_norm_sq(const MlpModel& model) {
  double acc = 0.0;
  for (std::size_t l = 0; l < model.weights.size(); ++l)
    acc += model.weights[l].squaredNorm() + model.biases[l].squaredNorm();
  return acc;
}

// dLoss/dscore for the data term of the multi-budget soft-BSDS loss.
Eigen::VectorXd data_score_gradient(const Eigen::VectorXd& scores,
                                    const Eigen::VectorXd& labels, double alpha,
                                    const SoftBsdsConfig& cfg,
                                    const std::vector<double>* fixed_taus,
                                    double* loss_out) {
  const Eigen::Index n = scores.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);

  const double hit_total = labels.sum();
  if (!(hit_total > 0.0))
    throw std::invalid_argument("soft-BSDS loss requires at least one hit");

  const std::size_t budgets = cfg.budget_fractions.size();
  if (fixed_taus && fixed_taus->size() != budgets)
    throw std::invalid_argument("fixed tau list length mismatch");

  std::vector<double> sorted;
  if (!fixed_taus) {
    sorted.assign(scores.data(), scores.data() + n);
    std::sort(sorted.begin(), sorted.end());
  }

  double loss = 0.0;
  const double inv_budgets = 1.0 / static_cast<double>(budgets);
  const double nn = static_cast<double>(n);
  for (std::size_t b = 0; b < budgets; ++b) {
    const double tau = fixed_taus
                           ? (*fixed_taus)[b]
                           : quantile_sorted(sorted, 1.0 - cfg.budget_fractions[b]);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = sigmoid(alpha * (scores[i] - tau));
    const SoftTerms t = soft_terms(w, labels, hit_total, cfg.params);
    loss -= inv_budgets * t.value;

    const double denom = std::max(t.weight_sum, kWeightSumFloor);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = labels[i];
      // d(softBSDS)/dw_i, with the quantile held fixed.
      double d = g / hit_total + cfg.params.gamma / nn;
      if (t.floored) {
        d -= cfg.params.lambda * (1.0 - g) / denom;
      } else {
        d -= cfg.params.lambda *
             ((1.0 - g) * t.weight_sum - t.miss_sum) / (t.weight_sum * t.weight_sum);
      }
      const double dw = alpha * w[i] * (1.0 - w[i]);
      grad[i] -= inv_budgets * d * dw;
    }
  }
  *loss_out = loss;
  return grad;
}

}  // namespace

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& labels, TrainLoss kind, double alpha,
                const SoftBsdsConfig& cfg, const std::vector<double>* fixed_taus) {
  const ForwardPass fp = forward_pass(model, X);
  double data_loss = 0.0;
  if (kind == TrainLoss::kBce) {
    // mean softplus(-z) + (1-g)*z, the stable form of -[g log s + (1-g) log(1-s)]
    for (Eigen::Index i = 0; i < fp.logits.size(); ++i) {
      const double z = fp.logits[i];
      const double sp = (z > 0.0) ? std::log1p(std::exp(-z)) : (-z + std::log1p(std::exp(z)));
      data_loss += sp + (1.0 - labels[i]) * z;
    }
    data_loss /= static_cast<double>(fp.logits.size());
  } else {
    const double hit_total = labels.sum();
    if (!(hit_total > 0.0))
      throw std::invalid_argument("soft-BSDS loss requires at least one hit");
    std::vector<double> sorted(fp.scores.data(), fp.scores.data() + fp.scores.size());
    std::sort(sorted.begin(), sorted.end());
    const double inv_budgets = 1.0 / static_cast<double>(cfg.budget_fractions.size());
    for (std::size_t b = 0; b < cfg.budget_fractions.size(); ++b) {
      const double tau = fixed_taus
                             ? (*fixed_taus)[b]
                             : quantile_sorted(sorted, 1.0 - cfg.budget_fractions[b]);
      Eigen::VectorXd w(fp.scores.size());
      for (Eigen::Index i = 0; i < fp.scores.size(); ++i)
        w[i] = sigmoid(alpha * (fp.scores[i] - tau));
      data_loss -= inv_budgets * soft_terms(w, labels, hit_total, cfg.params).value;
    }
  }
  return data_loss + cfg.weight_decay * parameter_norm_sq(model);
}

LossGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& labels, TrainLoss kind,
                               double alpha, const SoftBsdsConfig& cfg,
                               const std::vector<double>* fixed_taus) {
  if (labels.size() != X.rows())
    throw std::invalid_argument("labels not aligned to feature rows");
  const ForwardPass fp = forward_pass(model, X);
  const Eigen::Index n = X.rows();

  Eigen::VectorXd logit_grad(n);
  double data_loss = 0.0;
  if (kind == TrainLoss::kBce) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = fp.logits[i];
      const double sp = (z > 0.0) ? std::log1p(std::exp(-z)) : (-z + std::log1p(std::exp(z)));
      data_loss += sp + (1.0 - labels[i]) * z;
      logit_grad[i] = (fp.scores[i] - labels[i]) / static_cast<double>(n);
    }
    data_loss /= static_cast<double>(n);
  } else {
    const Eigen::VectorXd score_grad =
        data_score_gradient(fp.scores, labels, alpha, cfg, fixed_taus, &data_loss);
    logit_grad = (score_grad.array() * fp.scores.array() *
                  (1.0 - fp.scores.array()))
                     .matrix();
  }

  LossGradient out;
  out.loss = data_loss + cfg.weight_decay * parameter_norm_sq(model);
  const std::size_t layers = model.weights.size();
  out.weight_grads.resize(layers);
  out.bias_grads.resize(layers);

  Eigen::MatrixXd delta = logit_grad;  // (n x 1)
  for (std::size_t l = layers; l-- > 0;) {
    out.weight_grads[l] = delta.transpose() * fp.activations[l] +
                          2.0 * cfg.weight_decay * model.weights[l];
    out.bias_grads[l] = delta.colwise().sum().transpose() +
                        2.0 * cfg.weight_decay * model.biases[l];
    if (l > 0) {
      Eigen::MatrixXd upstream = delta * model.weights[l];
      // ReLU mask from the stored activations.
      delta = ((fp.activations[l].array() > 0.0).cast<double>() * upstream.array())
                  .matrix();
    }
  }
  return out;
}

MlpModel train_one_round(MlpModel model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& labels, TrainLoss kind,
                         double alpha, const SoftBsdsConfig& cfg,
                         std::int32_t round_index) {
  for (std::int32_t epoch = 0; epoch < cfg.epochs_per_round; ++epoch) {
    LossGradient grad = mlp_loss_gradient(model, X, labels, kind, alpha, cfg);
    if (!std::isfinite(grad.loss)) {
      std::ostringstream msg;
      msg << "training diverged (non-finite loss) at round " << round_index
          << " epoch " << epoch;
      throw training_error(msg.str());
    }
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      model.weights[l] -= cfg.step_size * grad.weight_grads[l];
      model.biases[l] -= cfg.step_size * grad.bias_grads[l];
    }
  }
  return model;
}

namespace {

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& train) {
    Standardizer s;
    s.mean = train.colwise().mean().transpose();
    const Eigen::MatrixXd centered = train.rowwise() - s.mean.transpose();
    s.scale = centered.array()
                  .square()
                  .colwise()
                  .mean()
                  .sqrt()
                  .max(1e-12)
                  .transpose()
                  .matrix();
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = x.rowwise() - mean.transpose();
    for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) /= scale[c];
    return out;
  }
};

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m,
                          std::span<const std::int32_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

// Columns appended by one recursive round: previous score, then one soft
// selection weight column per budget fraction.
Eigen::MatrixXd augmentation_columns(const Eigen::VectorXd& scores,
                                     const SoftBsdsConfig& cfg, double alpha) {
  const Eigen::Index n = scores.size();
  Eigen::MatrixXd cols(n, 1 + static_cast<Eigen::Index>(cfg.budget_fractions.size()));
  cols.col(0) = scores;
  for (std::size_t b = 0; b < cfg.budget_fractions.size(); ++b)
    cols.col(1 + static_cast<Eigen::Index>(b)) =
        soft_selection_weights(scores, cfg.budget_fractions[b], alpha);
  return cols;
}

Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

TrainResult train_recursive(const Eigen::MatrixXd& features,
                            std::span<const std::uint8_t> labels,
                            std::span<const std::vector<std::int32_t>> folds,
                            const SoftBsdsConfig& cfg, TrainLoss kind) {
  cfg.validate();
  const Eigen::Index n = features.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("labels not aligned to feature rows");
  if (folds.empty()) throw std::invalid_argument("no cross-validation folds");

  std::vector<char> assigned(static_cast<std::size_t>(n), 0);
  for (const auto& fold : folds)
    for (std::int32_t i : fold) {
      if (i < 0 || i >= n) throw std::invalid_argument("fold index out of range");
      if (assigned[static_cast<std::size_t>(i)])
        throw std::invalid_argument("candidate assigned to two folds");
      assigned[static_cast<std::size_t>(i)] = 1;
    }
  for (char a : assigned)
    if (!a) throw std::invalid_argument("candidate missing from every fold");

  TrainResult result;
  result.rounds = static_cast<std::int32_t>(cfg.alpha_schedule.size());
  result.scores = Eigen::VectorXd::Zero(n);
  result.fold_models.reserve(folds.size());

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& test_idx = folds[f];
    std::vector<std::int32_t> train_idx;
    train_idx.reserve(static_cast<std::size_t>(n) - test_idx.size());
    {
      std::vector<char> in_test(static_cast<std::size_t>(n), 0);
      for (std::int32_t i : test_idx) in_test[static_cast<std::size_t>(i)] = 1;
      for (std::int32_t i = 0; i < n; ++i)
        if (!in_test[static_cast<std::size_t>(i)]) train_idx.push_back(i);
    }
    if (train_idx.empty())
      throw std::invalid_argument("fold leaves no training rows");

    Eigen::VectorXd g_train(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t r = 0; r < train_idx.size(); ++r)
      g_train[static_cast<Eigen::Index>(r)] =
          labels[static_cast<std::size_t>(train_idx[r])];
    const double hit_total = g_train.sum();
    if (hit_total == 0.0 || hit_total == static_cast<double>(g_train.size()))
      throw std::invalid_argument("degenerate fold: training labels all equal");

    const Standardizer base_std = Standardizer::fit(take_rows(features, train_idx));
    Eigen::MatrixXd x_train = base_std.apply(take_rows(features, train_idx));
    Eigen::MatrixXd x_test = base_std.apply(take_rows(features, test_idx));

    MlpModel model;
    Eigen::VectorXd test_scores;
    for (std::size_t round = 0; round < cfg.alpha_schedule.size(); ++round) {
      const double alpha = cfg.alpha_schedule[round];
      std::vector<std::int32_t> sizes;
      sizes.push_back(static_cast<std::int32_t>(x_train.cols()));
      sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
      sizes.push_back(1);
      Rng rng(derive_stream({cfg.seed, stream_purpose::trainer,
                             static_cast<std::uint64_t>(f),
                             static_cast<std::uint64_t>(round)}));
      model = make_mlp(std::move(sizes), rng);
      model = train_one_round(std::move(model), x_train, g_train, kind, alpha,
                              cfg, static_cast<std::int32_t>(round));

      const Eigen::VectorXd s_train = mlp_forward(model, x_train);
      test_scores = mlp_forward(model, x_test);

      if (cfg.augment && round + 1 < cfg.alpha_schedule.size()) {
        const Eigen::MatrixXd aug_train = augmentation_columns(s_train, cfg, alpha);
        const Eigen::MatrixXd aug_test = augmentation_columns(test_scores, cfg, alpha);
        const Standardizer aug_std = Standardizer::fit(aug_train);
        x_train = hstack(x_train, aug_std.apply(aug_train));
        x_test = hstack(x_test, aug_std.apply(aug_test));
      }
    }

    for (std::size_t r = 0; r < test_idx.size(); ++r)
      result.scores[test_idx[r]] = test_scores[static_cast<Eigen::Index>(r)];
    result.final_feature_width = static_cast<std::int32_t>(x_train.cols());
    result.fold_models.push_back(std::move(model));
  }
  return result;
}

TrainResult train_bce(const Eigen::MatrixXd& features,
                      std::span<const std::uint8_t> labels,
                      std::span<const std::vector<std::int32_t>> folds,
                      const SoftBsdsConfig& cfg) {
  return train_recursive(features, labels, folds, cfg, TrainLoss::kBce);
}

}  // namespace bsds
