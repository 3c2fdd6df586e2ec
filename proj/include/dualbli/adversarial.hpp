#pragma once

#include <string>

#include "dualbli/types.hpp"

namespace dualbli {

struct DiscriminatorConfig {
  Eigen::Index hidden_dim = 2048;
  double leaky_slope = 0.2;
  double input_dropout = 0.1;
  double hidden_dropout = 0.0;
  double smoothing = 0.2;
};

// Parameters of the three affine layers, laid out like the discriminator itself.
struct DiscriminatorParams {
  Matrix w1;  // d x h
  RowVector b1;
  Matrix w2;  // h x h
  RowVector b2;
  Vector w3;  // h
  double b3 = 0.0;

  static DiscriminatorParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim);
  bool all_finite() const;
  // this += scale * other
  void add_scaled(const DiscriminatorParams& other, double scale);
  double squared_norm() const;
};

// Two leaky-rectifier hidden layers and a logistic output giving the
// probability that a row is a genuine (unmapped) embedding of its language.
class Discriminator {
 public:
  Discriminator() = default;
  // All parameters zero.
  Discriminator(Eigen::Index input_dim, DiscriminatorConfig config);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  Discriminator(Eigen::Index input_dim, DiscriminatorConfig config, Rng& rng);

  const DiscriminatorConfig& config() const { return config_; }
  Eigen::Index input_dim() const { return params_.w1.rows(); }
  Eigen::Index hidden_dim() const { return params_.w1.cols(); }
  const DiscriminatorParams& params() const { return params_; }
  DiscriminatorParams& mutable_params() { return params_; }

  friend bool operator==(const Discriminator& a, const Discriminator& b);

 private:
  DiscriminatorConfig config_;
  DiscriminatorParams params_;
};

// Activations kept from a forward pass for the backward pass.
struct DiscForwardCache {
  Matrix input;       // after input dropout
  Matrix input_mask;  // empty when no dropout was applied
  Matrix z1, h1;      // pre-activation and post-dropout activation
  Matrix mask1;
  Matrix z2, h2;
  Matrix mask2;
  Vector logits;
  Vector probs;
};

// Dropout is applied only when rng is non-null (training mode).
DiscForwardCache disc_forward_cached(const Discriminator& disc, const Matrix& rows, Rng* rng);

struct DiscBackward {
  DiscriminatorParams grads;
  Matrix input_grad;
};
DiscBackward disc_backward(const Discriminator& disc, const DiscForwardCache& cache,
                           const Vector& logit_grads);

// Per-row P(real | row). Dropout only when train_mode is set.
Vector disc_forward(const Discriminator& disc, const Matrix& rows, bool train_mode, Rng& rng);

struct AdvBatchLoss {
  double disc_loss = 0.0;
  double gen_loss = 0.0;
  double disc_accuracy = 0.0;
  bool clamped = false;
};

inline constexpr double kDefaultProbClamp = 1e-12;

// disc_loss = -[mean over real of smoothed log-likelihood of label 1
//             + mean over mapped of smoothed log-likelihood of label 0]
// gen_loss  = -mean log P(real | mapped)
// Probabilities are clamped to [clamp, 1 - clamp] before the log.
AdvBatchLoss adv_losses(const Discriminator& disc, const Matrix& real_rows, const Matrix& mapped_rows,
                        double smoothing, double clamp = kDefaultProbClamp);

struct AdvGradients {
  DiscriminatorParams disc_grads;  // d disc_loss / d params
  Matrix mapped_grad;              // d gen_loss / d mapped_rows
  AdvBatchLoss loss;
};

// Exact gradients of adv_losses (evaluation mode, no dropout).
AdvGradients adv_backward(const Discriminator& disc, const Matrix& real_rows, const Matrix& mapped_rows,
                          double smoothing);

struct DiscStepResult {
  double loss = 0.0;
  double accuracy = 0.0;
  DiscriminatorParams grads;
};
// Discriminator loss and its parameter gradient; dropout active when rng is non-null.
DiscStepResult disc_loss_backward(const Discriminator& disc, const Matrix& real_rows,
                                  const Matrix& mapped_rows, double smoothing, Rng* rng);

struct GenStepResult {
  double loss = 0.0;
  Matrix mapped_grad;
};
// Generator loss -mean log P(real | mapped) and its gradient w.r.t. the mapped rows.
GenStepResult gen_loss_backward(const Discriminator& disc, const Matrix& mapped_rows, Rng* rng);

void save_discriminator(const Discriminator& disc, const std::string& path);
Discriminator load_discriminator(const std::string& path);

}  // namespace dualbli
