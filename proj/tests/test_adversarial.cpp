#include <doctest.h>

#include "dualbli/adversarial.hpp"
#include "oracles.hpp"

using namespace dualbli;

namespace {

DiscriminatorConfig small_config(Eigen::Index h, double smoothing = 0.2) {
  DiscriminatorConfig c;
  c.hidden_dim = h;
  c.smoothing = smoothing;
  return c;
}

// Independent forward pass written directly from the layer definitions.
double hand_forward(const DiscriminatorParams& p, const RowVector& x, double slope) {
  auto leaky = [slope](double v) { return v > 0 ? v : slope * v; };
  const Eigen::Index h = p.w1.cols();
  std::vector<double> a1(h), a2(h);
  for (Eigen::Index j = 0; j < h; ++j) {
    double s = p.b1(j);
    for (Eigen::Index i = 0; i < x.size(); ++i) s += x(i) * p.w1(i, j);
    a1[j] = leaky(s);
  }
  for (Eigen::Index j = 0; j < h; ++j) {
    double s = p.b2(j);
    for (Eigen::Index i = 0; i < h; ++i) s += a1[i] * p.w2(i, j);
    a2[j] = leaky(s);
  }
  double z = p.b3;
  for (Eigen::Index j = 0; j < h; ++j) z += a2[j] * p.w3(j);
  return 1.0 / (1.0 + std::exp(-z));
}

// Perturbs one parameter tensor through a view and checks the gradient.
template <class Get>
double param_error(Discriminator disc, const Matrix& analytic, Get get,
                   const std::function<double(const Discriminator&)>& loss) {
  const Matrix start = get(disc.mutable_params());
  auto f = [&](const Matrix& v) {
    Discriminator probe = disc;
    get(probe.mutable_params()) = v;
    return loss(probe);
  };
  return oracle::relative_error(analytic, oracle::numeric_gradient(f, start));
}

struct ParamViews {
  static Eigen::Map<Matrix> w1(DiscriminatorParams& p) { return {p.w1.data(), p.w1.rows(), p.w1.cols()}; }
  static Eigen::Map<Matrix> b1(DiscriminatorParams& p) { return {p.b1.data(), 1, p.b1.size()}; }
  static Eigen::Map<Matrix> w2(DiscriminatorParams& p) { return {p.w2.data(), p.w2.rows(), p.w2.cols()}; }
  static Eigen::Map<Matrix> b2(DiscriminatorParams& p) { return {p.b2.data(), 1, p.b2.size()}; }
  static Eigen::Map<Matrix> w3(DiscriminatorParams& p) { return {p.w3.data(), 1, p.w3.size()}; }
  static Eigen::Map<Matrix> b3(DiscriminatorParams& p) { return {&p.b3, 1, 1}; }
};

Matrix as_matrix(const RowVector& v) { return Eigen::Map<const Matrix>(v.data(), 1, v.size()); }
Matrix as_matrix(const Vector& v) { return Eigen::Map<const Matrix>(v.data(), 1, v.size()); }
Matrix as_matrix(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("zero discriminator predicts one half") {
  Discriminator disc(4, small_config(6));
  Rng rng(1);
  const Vector p = disc_forward(disc, oracle::gaussian(5, 4, rng), false, rng);
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p(i) == 0.5);
}

TEST_CASE("evaluation mode ignores the generator state") {
  Rng init(2);
  Discriminator disc(4, small_config(8), init);
  Rng a(10), b(99);
  const Matrix x = oracle::gaussian(6, 4, init);
  CHECK(disc_forward(disc, x, false, a) == disc_forward(disc, x, false, b));
}

TEST_CASE("forward pass matches a hand-rolled oracle") {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    Discriminator disc(5, small_config(7), rng);
    const Matrix x = oracle::gaussian(1, 5, rng);
    const Vector p = disc_forward(disc, x, false, rng);
    CHECK(std::abs(p(0) - hand_forward(disc.params(), x.row(0), 0.2)) < 1e-10);
  }
}

TEST_CASE("forward rejects the wrong width") {
  Discriminator disc(4, small_config(3));
  Rng rng(4);
  CHECK_THROWS_AS(disc_forward(disc, Matrix::Ones(2, 5), false, rng), DataError);
}

TEST_CASE("uniform predictions give the textbook losses") {
  Discriminator disc(3, small_config(4));
  Rng rng(5);
  const Matrix real = oracle::gaussian(4, 3, rng), mapped = oracle::gaussian(6, 3, rng);
  const AdvBatchLoss plain = adv_losses(disc, real, mapped, 0.0);
  CHECK(plain.disc_loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(plain.disc_loss == doctest::Approx(1.3863).epsilon(1e-4));
  CHECK(plain.gen_loss == doctest::Approx(0.6931).epsilon(1e-4));
  const AdvBatchLoss smoothed = adv_losses(disc, real, mapped, 0.2);
  CHECK(smoothed.disc_loss == doctest::Approx(plain.disc_loss).epsilon(1e-12));
  CHECK_FALSE(plain.clamped);
}

TEST_CASE("losses are invariant to row order") {
  Rng rng(6);
  Discriminator disc(4, small_config(5), rng);
  Matrix real = oracle::gaussian(5, 4, rng), mapped = oracle::gaussian(5, 4, rng);
  const AdvBatchLoss a = adv_losses(disc, real, mapped, 0.2);
  real.row(0).swap(real.row(3));
  mapped.row(1).swap(mapped.row(4));
  const AdvBatchLoss b = adv_losses(disc, real, mapped, 0.2);
  CHECK(a.disc_loss == doctest::Approx(b.disc_loss).epsilon(1e-14));
  CHECK(a.gen_loss == doctest::Approx(b.gen_loss).epsilon(1e-14));
  CHECK(a.disc_accuracy == b.disc_accuracy);
}

TEST_CASE("perfect discriminator saturates and clamps") {
  Discriminator disc(2, small_config(1));
  auto& p = disc.mutable_params();
  p.w1(0, 0) = 1.0;
  p.w2(0, 0) = 1.0;
  p.w3(0) = 1.0;
  Matrix real(1, 2), mapped(1, 2);
  real << 1000, 0;
  mapped << -1000, 0;
  const AdvBatchLoss tight = adv_losses(disc, real, mapped, 0.0, 1e-12);
  CHECK(tight.clamped);
  CHECK(tight.disc_loss < 1e-6);
  CHECK(tight.gen_loss == doctest::Approx(-std::log(1e-12)));
  CHECK(tight.disc_accuracy == 1.0);
  const AdvBatchLoss loose = adv_losses(disc, real, mapped, 0.0, 1e-6);
  CHECK(loose.gen_loss < tight.gen_loss);
}

TEST_CASE("zero discriminator gradient shape") {
  Discriminator disc(3, small_config(4));
  Rng rng(7);
  const Matrix real = oracle::gaussian(4, 3, rng), mapped = oracle::gaussian(4, 3, rng);
  const AdvGradients g = adv_backward(disc, real, mapped, 0.2);
  // Batch means of p - target with p = 0.5 and smoothed targets 0.8 and 0.2.
  CHECK(std::abs(g.disc_grads.b3 - ((0.5 - 0.8) + (0.5 - 0.2))) < 1e-15);
  CHECK(g.disc_grads.w1.norm() == 0.0);
  CHECK(g.disc_grads.w2.norm() == 0.0);
}

TEST_CASE("duplicating a batch leaves gradients unchanged") {
  Rng rng(8);
  Discriminator disc(4, small_config(6), rng);
  const Matrix real = oracle::gaussian(3, 4, rng), mapped = oracle::gaussian(3, 4, rng);
  Matrix real2(6, 4), mapped2(6, 4);
  real2 << real, real;
  mapped2 << mapped, mapped;
  const AdvGradients a = adv_backward(disc, real, mapped, 0.2);
  const AdvGradients b = adv_backward(disc, real2, mapped2, 0.2);
  CHECK((a.disc_grads.w1 - b.disc_grads.w1).norm() < 1e-14);
  CHECK((a.disc_grads.w2 - b.disc_grads.w2).norm() < 1e-14);
  CHECK(std::abs(a.disc_grads.b3 - b.disc_grads.b3) < 1e-14);
  CHECK((a.mapped_grad.topRows(3) - 2.0 * b.mapped_grad.topRows(3)).norm() < 1e-14);
}

TEST_CASE("adversarial gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    Rng rng(seed);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(seed % 7);
    const Eigen::Index h = 3 + static_cast<Eigen::Index>(seed % 14);
    Discriminator disc(d, small_config(h), rng);
    const Matrix real = oracle::gaussian(5, d, rng), mapped = oracle::gaussian(4, d, rng);
    const double s = 0.2;
    const AdvGradients g = adv_backward(disc, real, mapped, s);
    auto disc_loss = [&](const Discriminator& dd) { return adv_losses(dd, real, mapped, s).disc_loss; };
    CHECK(param_error(disc, g.disc_grads.w1, ParamViews::w1, disc_loss) < 1e-4);
    CHECK(param_error(disc, as_matrix(g.disc_grads.b1), ParamViews::b1, disc_loss) < 1e-4);
    CHECK(param_error(disc, g.disc_grads.w2, ParamViews::w2, disc_loss) < 1e-4);
    CHECK(param_error(disc, as_matrix(g.disc_grads.b2), ParamViews::b2, disc_loss) < 1e-4);
    CHECK(param_error(disc, as_matrix(g.disc_grads.w3), ParamViews::w3, disc_loss) < 1e-4);
    CHECK(param_error(disc, as_matrix(g.disc_grads.b3), ParamViews::b3, disc_loss) < 1e-4);
    auto gen = [&](const Matrix& m) { return adv_losses(disc, real, m, s).gen_loss; };
    CHECK(oracle::relative_error(g.mapped_grad, oracle::numeric_gradient(gen, mapped)) < 1e-4);
  }
}

TEST_CASE("training-mode gradients match central differences under fixed dropout masks") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    Rng rng(seed + 100);
    const Eigen::Index d = 3 + static_cast<Eigen::Index>(seed % 6);
    DiscriminatorConfig cfg = small_config(5 + static_cast<Eigen::Index>(seed % 12));
    cfg.hidden_dropout = 0.25;
    Discriminator disc(d, cfg, rng);
    const Matrix real = oracle::gaussian(4, d, rng), mapped = oracle::gaussian(4, d, rng);
    const Rng mask_rng(seed * 7919);

    Rng r0 = mask_rng;
    const DiscStepResult step = disc_loss_backward(disc, real, mapped, cfg.smoothing, &r0);
    auto loss = [&](const Discriminator& dd) {
      Rng r = mask_rng;
      return disc_loss_backward(dd, real, mapped, cfg.smoothing, &r).loss;
    };
    CHECK(param_error(disc, step.grads.w1, ParamViews::w1, loss) < 1e-4);
    CHECK(param_error(disc, step.grads.w2, ParamViews::w2, loss) < 1e-4);
    CHECK(param_error(disc, as_matrix(step.grads.w3), ParamViews::w3, loss) < 1e-4);

    Rng r1 = mask_rng;
    const GenStepResult gen = gen_loss_backward(disc, mapped, &r1);
    auto gen_loss = [&](const Matrix& m) {
      Rng r = mask_rng;
      return gen_loss_backward(disc, m, &r).loss;
    };
    CHECK(oracle::relative_error(gen.mapped_grad, oracle::numeric_gradient(gen_loss, mapped)) < 1e-4);
  }
}

TEST_CASE("generator gradient chains into the mapping weights") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    Rng rng(seed + 500);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(seed % 7);
    Discriminator disc(d, small_config(4 + static_cast<Eigen::Index>(seed % 13)), rng);
    const Matrix x = oracle::gaussian(6, d, rng);
    const Matrix w = oracle::gaussian(d, d, rng);
    const GenStepResult g = gen_loss_backward(disc, x * w, nullptr);
    const Matrix analytic = x.transpose() * g.mapped_grad;
    auto f = [&](const Matrix& ww) { return gen_loss_backward(disc, x * ww, nullptr).loss; };
    CHECK(oracle::relative_error(analytic, oracle::numeric_gradient(f, w)) < 1e-4);
  }
}

TEST_CASE("dropout is seeded and inverted") {
  Rng init(9);
  DiscriminatorConfig cfg = small_config(6);
  cfg.input_dropout = 0.5;
  Discriminator disc(4, cfg, init);
  const Matrix x = oracle::gaussian(3, 4, init);
  Rng a(1), b(1);
  CHECK(disc_forward(disc, x, true, a) == disc_forward(disc, x, true, b));
  Rng c(1);
  const DiscForwardCache cache = disc_forward_cached(disc, x, &c);
  REQUIRE(cache.input_mask.size() == x.size());
  for (Eigen::Index i = 0; i < cache.input_mask.size(); ++i) {
    const double m = cache.input_mask.data()[i];
    CHECK((m == 0.0 || m == 2.0));
  }
}

TEST_CASE("discriminator checkpoint round trip") {
  Rng rng(10);
  Discriminator disc(5, small_config(7), rng);
  const auto dir = oracle::scratch_dir("disc_io");
  save_discriminator(disc, (dir / "D.disc").string());
  const Discriminator back = load_discriminator((dir / "D.disc").string());
  CHECK(back.hidden_dim() == 7);
  CHECK((back.params().w2 - disc.params().w2).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(back.params().b3 - disc.params().b3) < 1e-8);
  CHECK(back.config().smoothing == disc.config().smoothing);
}
