#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualbli/adversarial.hpp"
#include "dualbli/embeddings.hpp"
#include "dualbli/mapping.hpp"
#include "dualbli/selection.hpp"

namespace dualbli {

enum class MapInit { identity, random };

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t iterations_per_epoch = 100;
  std::size_t batch_size = 32;
  std::size_t disc_steps_per_gen_step = 5;
  double lr_generator = 0.1;
  double lr_discriminator = 0.1;
  double lr_decay = 0.98;
  double lr_shrink_on_plateau = 0.5;
  double cycle_weight = 1.0;
  double orthogonalize_beta = 0.01;
  std::size_t most_frequent_for_disc = 75000;
  std::uint64_t seed = 0;
  MapInit map_init = MapInit::identity;
  DiscriminatorConfig discriminator;
  SelectionConfig selection;

  // Throws DataError naming the first invalid field.
  void validate() const;
};

// ---- cycle consistency -------------------------------------------------

// Mean over rows of 1 - cos(x, x * first * second). A zero reconstruction
// contributes the maximal discrepancy 2 and a warning.
double cycle_loss(const LinearMapping& first, const LinearMapping& second, const Matrix& rows);

struct CycleGradients {
  double loss = 0.0;
  Matrix grad_first;
  Matrix grad_second;
};
CycleGradients cycle_backward(const LinearMapping& first, const LinearMapping& second, const Matrix& rows);

// ---- training state ----------------------------------------------------

struct EpochRecord {
  std::size_t epoch = 0;
  double disc_loss_x = 0.0;  // D_x: real source vs G(target)
  double disc_loss_y = 0.0;  // D_y: real target vs F(source)
  double disc_accuracy_x = 0.0;
  double disc_accuracy_y = 0.0;
  double gen_loss_f = 0.0;
  double gen_loss_g = 0.0;
  double cycle_loss_x = 0.0;
  double cycle_loss_y = 0.0;
  double cycle_weight = 0.0;
  // gen_loss_f + gen_loss_g + cycle_weight * (cycle_loss_x + cycle_loss_y)
  double total = 0.0;
  SelectionScore selection;
  double lr_generator = 0.0;
  double lr_discriminator = 0.0;
  double orthogonality_f = 0.0;
  double orthogonality_g = 0.0;
  std::vector<double> iteration_totals;
};

struct MappingPair {
  LinearMapping f_map;
  LinearMapping g_map;
};

struct Checkpoint {
  MappingPair maps;
  double score = 0.0;
  std::size_t epoch = 0;
};

struct TrainRun {
  TrainConfig config;
  LinearMapping f_map;  // source -> target
  LinearMapping g_map;  // target -> source
  Discriminator d_x;    // genuine source rows vs G(target rows)
  Discriminator d_y;    // genuine target rows vs F(source rows)
  Rng sample_rng_x, sample_rng_y;
  Rng dropout_rng_x, dropout_rng_y;
  double lr_generator = 0.0;
  double lr_discriminator = 0.0;
  std::int64_t iteration = 0;
  std::vector<EpochRecord> history;
  std::optional<Checkpoint> best;

  // Fresh run: maps and discriminators initialized from config.seed.
  static TrainRun start(const TrainConfig& config, Eigen::Index dim);

  // Same run with the roles of the two languages exchanged.
  TrainRun mirrored() const;
};

enum class CycleTerms { included, compiled_out };

// One epoch of joint training followed by model selection and the learning-rate
// schedule. Throws NumericalError if a parameter stops being finite.
void train_epoch(TrainRun& run, const EmbeddingSpace& src, const EmbeddingSpace& tgt);
// Reference path for the adversarial-only baseline: the cycle terms are not
// part of the generated code at all.
void train_epoch_baseline(TrainRun& run, const EmbeddingSpace& src, const EmbeddingSpace& tgt);

using EpochHook = std::function<void(const TrainRun&, const EpochRecord&)>;

// Runs config.epochs epochs; clamps the selection vocabulary once up front.
TrainRun train(const TrainConfig& config, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
               const EpochHook& on_epoch = {});

// ---- refinement --------------------------------------------------------

struct RefineResult {
  MappingPair maps;
  std::size_t rounds_completed = 0;
  std::vector<std::size_t> forward_dictionary_sizes;
  std::vector<std::size_t> backward_dictionary_sizes;
};

// Each round induces mutual CSLS nearest-neighbor dictionaries among the
// dict_size most frequent words with the current maps, then re-solves F and G
// by Procrustes on them. Stops early (with a warning) on an empty dictionary.
RefineResult refine_procrustes(const LinearMapping& f_map, const LinearMapping& g_map, const EmbeddingSpace& src,
                               const EmbeddingSpace& tgt, std::size_t rounds, std::size_t dict_size,
                               std::size_t k = kDefaultCslsK);

// ---- checkpoints -------------------------------------------------------

// Writes F.map / G.map (selected checkpoint), last_F.map / last_G.map,
// D_x.disc / D_y.disc and history.csv into dir.
void write_checkpoint(const TrainRun& run, const std::string& dir);
void write_history(const std::vector<EpochRecord>& history, const std::string& path);
MappingPair load_mapping_pair(const std::string& dir);

}  // namespace dualbli
