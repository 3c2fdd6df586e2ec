#include "dualbli/adversarial.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dualbli/text_matrix.hpp"

namespace dualbli {

DiscriminatorParams DiscriminatorParams::zeros(Eigen::Index input_dim, Eigen::Index hidden_dim) {
  DiscriminatorParams p;
  p.w1 = Matrix::Zero(input_dim, hidden_dim);
  p.b1 = RowVector::Zero(hidden_dim);
  p.w2 = Matrix::Zero(hidden_dim, hidden_dim);
  p.b2 = RowVector::Zero(hidden_dim);
  p.w3 = Vector::Zero(hidden_dim);
  p.b3 = 0.0;
  return p;
}

bool DiscriminatorParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() && w3.allFinite() &&
         std::isfinite(b3);
}

void DiscriminatorParams::add_scaled(const DiscriminatorParams& other, double scale) {
  w1 += scale * other.w1;
  b1 += scale * other.b1;
  w2 += scale * other.w2;
  b2 += scale * other.b2;
  w3 += scale * other.w3;
  b3 += scale * other.b3;
}

double DiscriminatorParams::squared_norm() const {
  return w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() + b2.squaredNorm() + w3.squaredNorm() +
         b3 * b3;
}

Discriminator::Discriminator(Eigen::Index input_dim, DiscriminatorConfig config) : config_(config) {
  if (input_dim <= 0 || config.hidden_dim <= 0) throw DataError("discriminator sizes must be positive");
  if (!(config.smoothing >= 0.0 && config.smoothing < 0.5)) throw DataError("smoothing must lie in [0, 0.5)");
  if (!(config.input_dropout >= 0.0 && config.input_dropout < 1.0) ||
      !(config.hidden_dropout >= 0.0 && config.hidden_dropout < 1.0)) {
    throw DataError("dropout rates must lie in [0, 1)");
  }
  params_ = DiscriminatorParams::zeros(input_dim, config.hidden_dim);
}

Discriminator::Discriminator(Eigen::Index input_dim, DiscriminatorConfig config, Rng& rng)
    : Discriminator(input_dim, config) {
  auto fill = [&rng](auto& m, Eigen::Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  };
  const Eigen::Index h = config.hidden_dim;
  fill(params_.w1, input_dim);
  fill(params_.b1, input_dim);
  fill(params_.w2, h);
  fill(params_.b2, h);
  fill(params_.w3, h);
  std::uniform_real_distribution<double> u(-1.0 / std::sqrt(static_cast<double>(h)),
                                           1.0 / std::sqrt(static_cast<double>(h)));
  params_.b3 = u(rng);
}

bool operator==(const Discriminator& a, const Discriminator& b) {
  const auto& p = a.params_;
  const auto& q = b.params_;
  return p.w1.rows() == q.w1.rows() && p.w1.cols() == q.w1.cols() && p.w1 == q.w1 && p.b1 == q.b1 &&
         p.w2 == q.w2 && p.b2 == q.b2 && p.w3 == q.w3 && p.b3 == q.b3;
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Inverted dropout mask: kept entries are scaled by 1 / (1 - rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) mask(i, j) = keep(rng) ? scale : 0.0;
  return mask;
}

Matrix leaky(const Matrix& z, double slope) {
  return z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Matrix leaky_grad(const Matrix& z, const Matrix& upstream, double slope) {
  return upstream.binaryExpr(z, [slope](double g, double v) { return v > 0.0 ? g : slope * g; });
}

void check_width(const Discriminator& disc, const Matrix& rows) {
  if (rows.cols() != disc.input_dim()) {
    throw DataError("discriminator expects rows of width " + std::to_string(disc.input_dim()) + ", got " +
                    std::to_string(rows.cols()));
  }
}

}  // namespace

DiscForwardCache disc_forward_cached(const Discriminator& disc, const Matrix& rows, Rng* rng) {
  check_width(disc, rows);
  const auto& cfg = disc.config();
  const auto& p = disc.params();
  DiscForwardCache c;
  const Eigen::Index n = rows.rows();
  const Eigen::Index h = disc.hidden_dim();

  if (rng && cfg.input_dropout > 0.0) {
    c.input_mask = dropout_mask(n, rows.cols(), cfg.input_dropout, *rng);
    c.input = rows.cwiseProduct(c.input_mask);
  } else {
    c.input = rows;
  }

  c.z1 = c.input * p.w1;
  c.z1.rowwise() += p.b1;
  c.h1 = leaky(c.z1, cfg.leaky_slope);
  if (rng && cfg.hidden_dropout > 0.0) {
    c.mask1 = dropout_mask(n, h, cfg.hidden_dropout, *rng);
    c.h1 = c.h1.cwiseProduct(c.mask1);
  }

  c.z2 = c.h1 * p.w2;
  c.z2.rowwise() += p.b2;
  c.h2 = leaky(c.z2, cfg.leaky_slope);
  if (rng && cfg.hidden_dropout > 0.0) {
    c.mask2 = dropout_mask(n, h, cfg.hidden_dropout, *rng);
    c.h2 = c.h2.cwiseProduct(c.mask2);
  }

  c.logits = c.h2 * p.w3;
  c.logits.array() += p.b3;
  c.probs = c.logits.unaryExpr([](double z) { return sigmoid(z); });
  return c;
}

DiscBackward disc_backward(const Discriminator& disc, const DiscForwardCache& c, const Vector& logit_grads) {
  const auto& p = disc.params();
  const double slope = disc.config().leaky_slope;
  DiscBackward out;
  auto& g = out.grads;

  g.w3 = c.h2.transpose() * logit_grads;
  g.b3 = logit_grads.sum();
  Matrix dh2 = logit_grads * p.w3.transpose();
  if (c.mask2.size()) dh2 = dh2.cwiseProduct(c.mask2);
  const Matrix dz2 = leaky_grad(c.z2, dh2, slope);

  g.w2 = c.h1.transpose() * dz2;
  g.b2 = dz2.colwise().sum();
  Matrix dh1 = dz2 * p.w2.transpose();
  if (c.mask1.size()) dh1 = dh1.cwiseProduct(c.mask1);
  const Matrix dz1 = leaky_grad(c.z1, dh1, slope);

  g.w1 = c.input.transpose() * dz1;
  g.b1 = dz1.colwise().sum();
  out.input_grad = dz1 * p.w1.transpose();
  if (c.input_mask.size()) out.input_grad = out.input_grad.cwiseProduct(c.input_mask);
  return out;
}

Vector disc_forward(const Discriminator& disc, const Matrix& rows, bool train_mode, Rng& rng) {
  return disc_forward_cached(disc, rows, train_mode ? &rng : nullptr).probs;
}

namespace {

struct LogProb {
  double value;
  bool clamped;
};

LogProb clamped_log(double p, double clamp) {
  if (p < clamp) return {std::log(clamp), true};
  return {std::log(p), false};
}

// Smoothed binary cross-entropy mean for one batch with target probability t.
double bce_mean(const Vector& probs, double target, double clamp, bool& clamped) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (target > 0.0) {
      const LogProb lp = clamped_log(probs(i), clamp);
      clamped = clamped || lp.clamped;
      total -= target * lp.value;
    }
    if (target < 1.0) {
      const LogProb lq = clamped_log(1.0 - probs(i), clamp);
      clamped = clamped || lq.clamped;
      total -= (1.0 - target) * lq.value;
    }
  }
  return total / static_cast<double>(probs.size());
}

double accuracy(const Vector& real_probs, const Vector& mapped_probs) {
  const auto correct = (real_probs.array() > 0.5).count() + (mapped_probs.array() <= 0.5).count();
  return static_cast<double>(correct) / static_cast<double>(real_probs.size() + mapped_probs.size());
}

void check_batches(const Matrix& real_rows, const Matrix& mapped_rows) {
  if (real_rows.rows() == 0 || mapped_rows.rows() == 0) throw DataError("adversarial batches must be nonempty");
}

}  // namespace

AdvBatchLoss adv_losses(const Discriminator& disc, const Matrix& real_rows, const Matrix& mapped_rows,
                        double smoothing, double clamp) {
  check_batches(real_rows, mapped_rows);
  const Vector pr = disc_forward_cached(disc, real_rows, nullptr).probs;
  const Vector pm = disc_forward_cached(disc, mapped_rows, nullptr).probs;
  AdvBatchLoss out;
  out.disc_loss = bce_mean(pr, 1.0 - smoothing, clamp, out.clamped) + bce_mean(pm, smoothing, clamp, out.clamped);
  out.gen_loss = bce_mean(pm, 1.0, clamp, out.clamped);
  out.disc_accuracy = accuracy(pr, pm);
  return out;
}

DiscStepResult disc_loss_backward(const Discriminator& disc, const Matrix& real_rows, const Matrix& mapped_rows,
                                  double smoothing, Rng* rng) {
  check_batches(real_rows, mapped_rows);
  const DiscForwardCache cr = disc_forward_cached(disc, real_rows, rng);
  const DiscForwardCache cm = disc_forward_cached(disc, mapped_rows, rng);
  DiscStepResult out;
  bool clamped = false;
  out.loss = bce_mean(cr.probs, 1.0 - smoothing, kDefaultProbClamp, clamped) +
             bce_mean(cm.probs, smoothing, kDefaultProbClamp, clamped);
  out.accuracy = accuracy(cr.probs, cm.probs);

  // d BCE / d logit = p - target, averaged within each batch.
  const Vector gr = (cr.probs.array() - (1.0 - smoothing)) / static_cast<double>(real_rows.rows());
  const Vector gm = (cm.probs.array() - smoothing) / static_cast<double>(mapped_rows.rows());
  out.grads = disc_backward(disc, cr, gr).grads;
  out.grads.add_scaled(disc_backward(disc, cm, gm).grads, 1.0);
  return out;
}

GenStepResult gen_loss_backward(const Discriminator& disc, const Matrix& mapped_rows, Rng* rng) {
  if (mapped_rows.rows() == 0) throw DataError("adversarial batches must be nonempty");
  const DiscForwardCache cm = disc_forward_cached(disc, mapped_rows, rng);
  GenStepResult out;
  bool clamped = false;
  out.loss = bce_mean(cm.probs, 1.0, kDefaultProbClamp, clamped);
  const Vector gm = (cm.probs.array() - 1.0) / static_cast<double>(mapped_rows.rows());
  out.mapped_grad = disc_backward(disc, cm, gm).input_grad;
  return out;
}

AdvGradients adv_backward(const Discriminator& disc, const Matrix& real_rows, const Matrix& mapped_rows,
                          double smoothing) {
  AdvGradients out;
  out.loss = adv_losses(disc, real_rows, mapped_rows, smoothing);
  out.disc_grads = disc_loss_backward(disc, real_rows, mapped_rows, smoothing, nullptr).grads;
  out.mapped_grad = gen_loss_backward(disc, mapped_rows, nullptr).mapped_grad;
  return out;
}

void save_discriminator(const Discriminator& disc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  const auto& cfg = disc.config();
  const auto& p = disc.params();
  out << "discriminator " << disc.input_dim() << ' ' << disc.hidden_dim() << ' '
      << format_number(cfg.leaky_slope, 9) << ' ' << format_number(cfg.input_dropout, 9) << ' '
      << format_number(cfg.hidden_dropout, 9) << ' ' << format_number(cfg.smoothing, 9) << '\n';
  write_matrix_section(out, "layer1.weight", p.w1);
  write_matrix_section(out, "layer1.bias", p.b1);
  write_matrix_section(out, "layer2.weight", p.w2);
  write_matrix_section(out, "layer2.bias", p.b2);
  write_matrix_section(out, "out.weight", p.w3);
  Matrix b3(1, 1);
  b3(0, 0) = p.b3;
  write_matrix_section(out, "out.bias", b3);
  out.flush();
  if (!out) throw DataError("write failed for " + path);
}

Discriminator load_discriminator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open discriminator file " + path);
  std::string line;
  std::getline(in, line);
  auto f = split_fields(line);
  double vals[6];
  if (f.size() != 7 || f[0] != "discriminator") throw DataError(path + ":1: bad discriminator header");
  for (int i = 0; i < 6; ++i) {
    if (!parse_number(f[i + 1], vals[i])) throw DataError(path + ":1: bad discriminator header");
  }
  DiscriminatorConfig cfg;
  cfg.hidden_dim = static_cast<Eigen::Index>(vals[1]);
  cfg.leaky_slope = vals[2];
  cfg.input_dropout = vals[3];
  cfg.hidden_dropout = vals[4];
  cfg.smoothing = vals[5];
  Discriminator disc(static_cast<Eigen::Index>(vals[0]), cfg);
  auto& p = disc.mutable_params();
  auto expect_shape = [&path](const Matrix& m, Eigen::Index r, Eigen::Index c, const char* name) {
    if (m.rows() != r || m.cols() != c) throw DataError(path + ": section " + name + " has wrong shape");
  };
  const Eigen::Index d = disc.input_dim(), h = disc.hidden_dim();
  Matrix m = read_matrix_section(in, "layer1.weight");
  expect_shape(m, d, h, "layer1.weight");
  p.w1 = m;
  m = read_matrix_section(in, "layer1.bias");
  expect_shape(m, 1, h, "layer1.bias");
  p.b1 = m.row(0);
  m = read_matrix_section(in, "layer2.weight");
  expect_shape(m, h, h, "layer2.weight");
  p.w2 = m;
  m = read_matrix_section(in, "layer2.bias");
  expect_shape(m, 1, h, "layer2.bias");
  p.b2 = m.row(0);
  m = read_matrix_section(in, "out.weight");
  expect_shape(m, h, 1, "out.weight");
  p.w3 = m.col(0);
  m = read_matrix_section(in, "out.bias");
  expect_shape(m, 1, 1, "out.bias");
  p.b3 = m(0, 0);
  return disc;
}

}  // namespace dualbli
