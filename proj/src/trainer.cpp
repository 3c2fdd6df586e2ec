#include "dualbli/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dualbli/evaluation.hpp"
#include "dualbli/log.hpp"
#include "dualbli/text_matrix.hpp"

namespace dualbli {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw DataError(std::string("invalid training setting: ") + field);
  };
  require(epochs > 0, "epochs must be positive");
  require(iterations_per_epoch > 0, "iterations_per_epoch must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(disc_steps_per_gen_step > 0, "disc_steps_per_gen_step must be positive");
  require(lr_generator > 0.0, "lr_generator must be positive");
  require(lr_discriminator > 0.0, "lr_discriminator must be positive");
  require(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay must lie in (0, 1]");
  require(lr_shrink_on_plateau > 0.0 && lr_shrink_on_plateau <= 1.0, "lr_shrink_on_plateau must lie in (0, 1]");
  require(cycle_weight >= 0.0 && std::isfinite(cycle_weight), "cycle_weight must be nonnegative");
  require(orthogonalize_beta >= 0.0 && orthogonalize_beta <= 0.1, "orthogonalize_beta must lie in [0, 0.1]");
  require(most_frequent_for_disc > 0, "most_frequent_for_disc must be positive");
  require(discriminator.hidden_dim > 0, "disc_hidden_dim must be positive");
  require(selection.lambda >= 0.0 && selection.lambda <= 1.0, "selection_lambda must lie in [0, 1]");
  require(selection.eval_vocab > 0, "selection_eval_vocab must be positive");
}

// ---- cycle consistency -------------------------------------------------

namespace {

void check_cycle_shapes(const LinearMapping& first, const LinearMapping& second, const Matrix& rows) {
  if (rows.rows() == 0) throw DataError("cycle loss needs at least one row");
  if (first.dim() != second.dim() || rows.cols() != first.dim()) throw DataError("cycle loss shape mismatch");
}

}  // namespace

double cycle_loss(const LinearMapping& first, const LinearMapping& second, const Matrix& rows) {
  check_cycle_shapes(first, second, rows);
  const Matrix recon = rows * first.weights() * second.weights();
  double total = 0.0;
  std::size_t degenerate = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double nx = rows.row(i).norm();
    const double nr = recon.row(i).norm();
    if (nx == 0.0 || nr == 0.0) {
      ++degenerate;
      total += 2.0;
      continue;
    }
    total += 1.0 - rows.row(i).dot(recon.row(i)) / (nx * nr);
  }
  if (degenerate) warn("cycle loss: " + std::to_string(degenerate) + " zero-norm reconstruction(s) scored as 2");
  return total / static_cast<double>(rows.rows());
}

CycleGradients cycle_backward(const LinearMapping& first, const LinearMapping& second, const Matrix& rows) {
  check_cycle_shapes(first, second, rows);
  const Matrix mid = rows * first.weights();
  const Matrix recon = mid * second.weights();
  const double inv_n = 1.0 / static_cast<double>(rows.rows());

  CycleGradients out;
  Matrix d_recon = Matrix::Zero(recon.rows(), recon.cols());
  double total = 0.0;
  std::size_t degenerate = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double nx = rows.row(i).norm();
    const double nr = recon.row(i).norm();
    if (nx == 0.0 || nr == 0.0) {
      ++degenerate;
      total += 2.0;
      continue;
    }
    const double dot = rows.row(i).dot(recon.row(i));
    total += 1.0 - dot / (nx * nr);
    // d/dr [1 - x.r / (|x||r|)] = -x / (|x||r|) + (x.r) r / (|x||r|^3)
    d_recon.row(i) = inv_n * (-rows.row(i) / (nx * nr) + (dot / (nx * nr * nr * nr)) * recon.row(i));
  }
  if (degenerate) warn("cycle loss: " + std::to_string(degenerate) + " zero-norm reconstruction(s) scored as 2");
  out.loss = total * inv_n;
  out.grad_second = mid.transpose() * d_recon;
  out.grad_first = rows.transpose() * (d_recon * second.weights().transpose());
  return out;
}

// ---- training ----------------------------------------------------------

namespace {

enum Stream : std::uint64_t {
  kInitF = 10,
  kInitG = 11,
  kInitDx = 20,
  kInitDy = 21,
  kSampleX = 30,
  kSampleY = 31,
  kDropoutX = 40,
  kDropoutY = 41,
};

LinearMapping initial_map(const TrainConfig& config, Eigen::Index dim, std::uint64_t stream) {
  if (config.map_init == MapInit::identity) return LinearMapping::identity(dim);
  Rng rng = derive_rng(config.seed, stream);
  return LinearMapping(random_orthogonal(dim, rng));
}

Matrix gather_rows(const Matrix& all, const std::vector<Eigen::Index>& ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), all.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = all.row(ids[i]);
  return out;
}

std::vector<Eigen::Index> sample_ids(Rng& rng, std::size_t prefix, std::size_t count) {
  std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(prefix) - 1);
  std::vector<Eigen::Index> ids(count);
  for (auto& id : ids) id = pick(rng);
  return ids;
}

void sgd_step(Discriminator& disc, const DiscriminatorParams& grads, double lr) {
  disc.mutable_params().add_scaled(grads, -lr);
}

struct IterationStats {
  double disc_loss_x = 0, disc_loss_y = 0, disc_acc_x = 0, disc_acc_y = 0;
  double gen_f = 0, gen_g = 0, cycle_x = 0, cycle_y = 0, total = 0;
};

template <CycleTerms kCycle>
IterationStats train_iteration(TrainRun& run, const Matrix& src_rows, const Matrix& tgt_rows,
                               std::size_t prefix_x, std::size_t prefix_y) {
  const TrainConfig& cfg = run.config;
  const double smoothing = cfg.discriminator.smoothing;
  IterationStats st;

  // One batch per iteration serves the discriminator steps, the generator
  // step and the cycle terms.
  const Matrix xb = gather_rows(src_rows, sample_ids(run.sample_rng_x, prefix_x, cfg.batch_size));
  const Matrix yb = gather_rows(tgt_rows, sample_ids(run.sample_rng_y, prefix_y, cfg.batch_size));
  const Matrix fxd = xb * run.f_map.weights();
  const Matrix gyd = yb * run.g_map.weights();

  for (std::size_t s = 0; s < cfg.disc_steps_per_gen_step; ++s) {
    const DiscStepResult ry = disc_loss_backward(run.d_y, yb, fxd, smoothing, &run.dropout_rng_y);
    sgd_step(run.d_y, ry.grads, run.lr_discriminator);
    const DiscStepResult rx = disc_loss_backward(run.d_x, xb, gyd, smoothing, &run.dropout_rng_x);
    sgd_step(run.d_x, rx.grads, run.lr_discriminator);
    st.disc_loss_y = ry.loss;
    st.disc_acc_y = ry.accuracy;
    st.disc_loss_x = rx.loss;
    st.disc_acc_x = rx.accuracy;
  }
  if (!run.d_x.params().all_finite() || !run.d_y.params().all_finite()) {
    throw NumericalError("non-finite discriminator parameter at iteration " + std::to_string(run.iteration),
                         run.iteration);
  }

  // Discriminators are frozen for the generator step.
  const Matrix fx = xb * run.f_map.weights();
  const Matrix gy = yb * run.g_map.weights();
  const GenStepResult gen_f = gen_loss_backward(run.d_y, fx, &run.dropout_rng_y);
  const GenStepResult gen_g = gen_loss_backward(run.d_x, gy, &run.dropout_rng_x);
  Matrix grad_f = xb.transpose() * gen_f.mapped_grad;
  Matrix grad_g = yb.transpose() * gen_g.mapped_grad;
  st.gen_f = gen_f.loss;
  st.gen_g = gen_g.loss;
  st.total = gen_f.loss + gen_g.loss;

  if constexpr (kCycle == CycleTerms::included) {
    const double w = cfg.cycle_weight;
    const CycleGradients cx = cycle_backward(run.f_map, run.g_map, xb);
    const CycleGradients cy = cycle_backward(run.g_map, run.f_map, yb);
    // Each map sums the term from its own domain first, so exchanging the
    // languages reproduces the same floating-point operations.
    grad_f += w * (cx.grad_first + cy.grad_second);
    grad_g += w * (cy.grad_first + cx.grad_second);
    st.cycle_x = cx.loss;
    st.cycle_y = cy.loss;
    st.total = st.total + w * (cx.loss + cy.loss);
  }

  run.f_map.mutable_weights() -= run.lr_generator * grad_f;
  run.g_map.mutable_weights() -= run.lr_generator * grad_g;
  if (cfg.orthogonalize_beta > 0.0) {
    orthogonalize_in_place(run.f_map, cfg.orthogonalize_beta);
    orthogonalize_in_place(run.g_map, cfg.orthogonalize_beta);
  }
  if (!run.f_map.weights().allFinite() || !run.g_map.weights().allFinite()) {
    throw NumericalError("non-finite mapping weight at iteration " + std::to_string(run.iteration), run.iteration);
  }
  ++run.iteration;
  return st;
}

template <CycleTerms kCycle>
void train_epoch_impl(TrainRun& run, const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
  if (src.dim() != tgt.dim() || src.dim() != run.f_map.dim()) {
    throw DataError("source, target and mapping dimensions differ");
  }
  if (src.empty() || tgt.empty()) throw DataError("training needs nonempty vocabularies");
  const TrainConfig& cfg = run.config;
  const std::size_t prefix_x = std::min(cfg.most_frequent_for_disc, src.size());
  const std::size_t prefix_y = std::min(cfg.most_frequent_for_disc, tgt.size());

  EpochRecord rec;
  rec.epoch = run.history.size() + 1;
  rec.cycle_weight = kCycle == CycleTerms::included ? cfg.cycle_weight : 0.0;
  rec.lr_generator = run.lr_generator;
  rec.lr_discriminator = run.lr_discriminator;
  rec.iteration_totals.reserve(cfg.iterations_per_epoch);

  for (std::size_t it = 0; it < cfg.iterations_per_epoch; ++it) {
    const IterationStats st = train_iteration<kCycle>(run, src.vectors(), tgt.vectors(), prefix_x, prefix_y);
    rec.disc_loss_x += st.disc_loss_x;
    rec.disc_loss_y += st.disc_loss_y;
    rec.disc_accuracy_x += st.disc_acc_x;
    rec.disc_accuracy_y += st.disc_acc_y;
    rec.gen_loss_f += st.gen_f;
    rec.gen_loss_g += st.gen_g;
    rec.cycle_loss_x += st.cycle_x;
    rec.cycle_loss_y += st.cycle_y;
    rec.iteration_totals.push_back(st.total);
  }
  const double inv = 1.0 / static_cast<double>(cfg.iterations_per_epoch);
  for (double* v : {&rec.disc_loss_x, &rec.disc_loss_y, &rec.disc_accuracy_x, &rec.disc_accuracy_y, &rec.gen_loss_f,
                    &rec.gen_loss_g, &rec.cycle_loss_x, &rec.cycle_loss_y}) {
    *v *= inv;
  }
  rec.total = rec.gen_loss_f + rec.gen_loss_g + rec.cycle_weight * (rec.cycle_loss_x + rec.cycle_loss_y);
  rec.orthogonality_f = run.f_map.orthogonality_error();
  rec.orthogonality_g = run.g_map.orthogonality_error();

  rec.selection = criterion_sa(run.f_map, run.g_map, src, tgt, cfg.selection);
  if (!run.best || rec.selection.combined > run.best->score) {
    run.best = Checkpoint{{run.f_map, run.g_map}, rec.selection.combined, rec.epoch};
  } else {
    run.lr_generator *= cfg.lr_shrink_on_plateau;
    run.lr_discriminator *= cfg.lr_shrink_on_plateau;
  }
  run.lr_generator *= cfg.lr_decay;
  run.lr_discriminator *= cfg.lr_decay;

  info("epoch " + std::to_string(rec.epoch) + " disc_y=" + format_number(rec.disc_loss_y, 4) +
       " disc_x=" + format_number(rec.disc_loss_x, 4) + " gen_f=" + format_number(rec.gen_loss_f, 4) +
       " gen_g=" + format_number(rec.gen_loss_g, 4) + " cyc=" +
       format_number(rec.cycle_loss_x + rec.cycle_loss_y, 4) + " S_a=" + format_number(rec.selection.combined, 6));
  run.history.push_back(std::move(rec));
}

}  // namespace

TrainRun TrainRun::start(const TrainConfig& config, Eigen::Index dim) {
  config.validate();
  TrainRun run;
  run.config = config;
  run.f_map = initial_map(config, dim, kInitF);
  run.g_map = initial_map(config, dim, kInitG);
  Rng init_x = derive_rng(config.seed, kInitDx);
  Rng init_y = derive_rng(config.seed, kInitDy);
  run.d_x = Discriminator(dim, config.discriminator, init_x);
  run.d_y = Discriminator(dim, config.discriminator, init_y);
  run.sample_rng_x = derive_rng(config.seed, kSampleX);
  run.sample_rng_y = derive_rng(config.seed, kSampleY);
  run.dropout_rng_x = derive_rng(config.seed, kDropoutX);
  run.dropout_rng_y = derive_rng(config.seed, kDropoutY);
  run.lr_generator = config.lr_generator;
  run.lr_discriminator = config.lr_discriminator;
  return run;
}

TrainRun TrainRun::mirrored() const {
  TrainRun m = *this;
  std::swap(m.f_map, m.g_map);
  std::swap(m.d_x, m.d_y);
  std::swap(m.sample_rng_x, m.sample_rng_y);
  std::swap(m.dropout_rng_x, m.dropout_rng_y);
  if (m.best) std::swap(m.best->maps.f_map, m.best->maps.g_map);
  return m;
}

void train_epoch(TrainRun& run, const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
  train_epoch_impl<CycleTerms::included>(run, src, tgt);
}

void train_epoch_baseline(TrainRun& run, const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
  train_epoch_impl<CycleTerms::compiled_out>(run, src, tgt);
}

TrainRun train(const TrainConfig& config, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
               const EpochHook& on_epoch) {
  TrainConfig cfg = config;
  const std::size_t smallest = std::min(src.size(), tgt.size());
  if (cfg.selection.eval_vocab > smallest) {
    warn("selection eval_vocab " + std::to_string(cfg.selection.eval_vocab) + " clamped to " +
         std::to_string(smallest));
    cfg.selection.eval_vocab = smallest;
  }
  TrainRun run = TrainRun::start(cfg, src.dim());
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    train_epoch(run, src, tgt);
    if (on_epoch) on_epoch(run, run.history.back());
  }
  return run;
}

// ---- refinement --------------------------------------------------------

namespace {

// Procrustes on the mutual-neighbor dictionary of `map` from `from` to `to`.
std::optional<LinearMapping> refine_direction(const LinearMapping& map, const EmbeddingSpace& from,
                                              const EmbeddingSpace& to, std::size_t dict_size, std::size_t k,
                                              std::size_t& dict_out) {
  const CslsIndex index = build_mapped_index(map, from, to, k);
  const auto pairs = mutual_dictionary(index, dict_size);
  dict_out = pairs.size();
  if (pairs.empty()) return std::nullopt;
  std::vector<Eigen::Index> src_ids, tgt_ids;
  for (const auto& [i, j] : pairs) {
    src_ids.push_back(static_cast<Eigen::Index>(i));
    tgt_ids.push_back(static_cast<Eigen::Index>(j));
  }
  return procrustes_solve(gather_rows(from.vectors(), src_ids), gather_rows(to.vectors(), tgt_ids));
}

}  // namespace

RefineResult refine_procrustes(const LinearMapping& f_map, const LinearMapping& g_map, const EmbeddingSpace& src,
                               const EmbeddingSpace& tgt, std::size_t rounds, std::size_t dict_size, std::size_t k) {
  RefineResult out{{f_map, g_map}, 0, {}, {}};
  for (std::size_t r = 0; r < rounds; ++r) {
    std::size_t n_fwd = 0, n_bwd = 0;
    auto f_new = refine_direction(out.maps.f_map, src, tgt, dict_size, k, n_fwd);
    auto g_new = refine_direction(out.maps.g_map, tgt, src, dict_size, k, n_bwd);
    out.forward_dictionary_sizes.push_back(n_fwd);
    out.backward_dictionary_sizes.push_back(n_bwd);
    if (!f_new || !g_new) {
      warn("refinement round " + std::to_string(r + 1) + ": empty mutual-neighbor dictionary; stopping");
      break;
    }
    out.maps = {std::move(*f_new), std::move(*g_new)};
    ++out.rounds_completed;
  }
  return out;
}

// ---- checkpoints -------------------------------------------------------

void write_history(const std::vector<EpochRecord>& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "epoch,disc_loss_x,disc_loss_y,disc_accuracy_x,disc_accuracy_y,gen_loss_f,gen_loss_g,"
         "cycle_loss_x,cycle_loss_y,cycle_weight,total,s_forward,s_backward,s_a,lr_generator,"
         "lr_discriminator,orthogonality_f,orthogonality_g\n";
  for (const auto& r : history) {
    out << r.epoch;
    for (double v : {r.disc_loss_x, r.disc_loss_y, r.disc_accuracy_x, r.disc_accuracy_y, r.gen_loss_f, r.gen_loss_g,
                     r.cycle_loss_x, r.cycle_loss_y, r.cycle_weight, r.total, r.selection.forward,
                     r.selection.backward, r.selection.combined, r.lr_generator, r.lr_discriminator,
                     r.orthogonality_f, r.orthogonality_g}) {
      out << ',' << format_number(v, 12);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw DataError("write failed for " + path);
}

void write_checkpoint(const TrainRun& run, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);
  const MappingPair& selected = run.best ? run.best->maps : MappingPair{run.f_map, run.g_map};
  save_mapping(selected.f_map, (base / "F.map").string());
  save_mapping(selected.g_map, (base / "G.map").string());
  save_mapping(run.f_map, (base / "last_F.map").string());
  save_mapping(run.g_map, (base / "last_G.map").string());
  save_discriminator(run.d_x, (base / "D_x.disc").string());
  save_discriminator(run.d_y, (base / "D_y.disc").string());
  write_history(run.history, (base / "history.csv").string());
}

MappingPair load_mapping_pair(const std::string& dir) {
  const std::filesystem::path base(dir);
  return {load_mapping((base / "F.map").string()), load_mapping((base / "G.map").string())};
}

}  // namespace dualbli
