#pragma once

#include "xdr/alignment/adjacency.hpp"
#include "xdr/alignment/losses.hpp"
#include "xdr/core/config.hpp"
#include "xdr/core/rng.hpp"
#include "xdr/data/dataset.hpp"
#include "xdr/diffusion/backend.hpp"
#include "xdr/encoder/bank.hpp"
#include "xdr/encoder/encoder.hpp"
#include "xdr/encoder/feature_table.hpp"
#include "xdr/trainer/adam.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace xdr::trainer {

/// Everything needed to continue training from an epoch boundary.
struct TrainState {
  int epoch = 0;  // next epoch to run
  Phase phase = Phase::OD;
  encoder::Encoder encoder;
  std::optional<encoder::MomentumEncoder> momentum;
  std::vector<encoder::FeatureBank> banks;           // one per domain, domain order
  std::vector<encoder::FullFeatureTable> tables;     // empty until alignment starts
  std::vector<alignment::MutualAdjacency> in_adjacency;
  std::optional<alignment::MutualAdjacency> cross_adjacency;  // rows A, cols B
  AdamState adam;
  Rng rng;

  bool operator==(const TrainState& o) const;
};

enum class LossTerm { OD, Aug, InDomain, CrossDomain };
const char* loss_term_name(LossTerm term);

/// Whether a phase's objective contains the term.
bool term_allowed(Phase phase, LossTerm term);

/// Per-step view handed to callbacks before the optimizer step.
struct StepContext {
  int epoch = 0;
  int step = 0;
  Phase phase = Phase::OD;
  const TrainState* state = nullptr;  // parameters and banks as used by this step
  std::vector<std::vector<RecordId>> batch;      // per domain
  std::vector<Matrix> keys;                      // per domain; momentum features of the augmented views
  alignment::LossBreakdown parts;
};

struct EpochRow {
  int epoch = 0;
  Phase phase = Phase::OD;
  int steps = 0;
  alignment::LossBreakdown mean;  // per-step means; positive counts summed
  double wall_seconds = 0.0;
};

struct TrainCallbacks {
  /// Fired every time a loss evaluator runs.
  std::function<void(Phase, LossTerm)> on_loss_eval;
  std::function<void(const StepContext&)> on_step;
  std::function<void(const EpochRow&)> on_epoch;
};

struct TrainOptions {
  /// When set, a checkpoint is written here after every epoch (and before a
  /// backend failure propagates).
  std::optional<std::filesystem::path> checkpoint_path;
  bool progress = false;  // one stderr line per epoch
};

/// Epoch counts after removing disabled phases.
PhaseSchedule effective_schedule(const Config& config);

class Trainer {
 public:
  Trainer(Config config, const data::DatasetPartition& data, const diffusion::DenoiserBackend& backend,
          const diffusion::TokenTable& tokens, TrainCallbacks callbacks = {});

  const Config& config() const { return config_; }
  const PhaseSchedule& schedule() const { return schedule_; }

  TrainState initial_state() const;
  /// Runs state.epoch and advances it.
  EpochRow run_epoch(TrainState& state) const;
  /// Runs every remaining epoch.
  std::vector<EpochRow> run(TrainState& state, const TrainOptions& options = {}) const;

  /// Batch drawn for a domain at a step, from a permutation of its ids.
  std::vector<RecordId> batch_ids(const std::vector<RecordId>& perm, int step, int steps) const;
  int steps_per_epoch() const;
  /// Seeds of the stochastic parts of a step.
  std::uint64_t noise_seed(int epoch, int step) const;
  std::uint64_t augment_seed(int epoch, int step, DomainId domain, RecordId record) const;
  int clamped_k(std::size_t domain_size) const;

 private:
  void begin_alignment_epoch(TrainState& state, Phase phase) const;
  void note(Phase phase, LossTerm term) const;

  Config config_;
  PhaseSchedule schedule_;
  const data::DatasetPartition& data_;
  const diffusion::DenoiserBackend& backend_;
  const diffusion::TokenTable& tokens_;
  diffusion::NoiseSchedule noise_;
  TrainCallbacks callbacks_;
};

/// `epoch,phase,steps,l_od,l_aug,l_in_a,l_in_b,l_cross_ab,l_cross_ba,total,pos_in_a,pos_in_b,pos_cross_ab,pos_cross_ba`.
/// Wall time is logged separately so that seeded runs give identical files.
std::string metrics_csv_header();
std::string metrics_csv_row(const EpochRow& row);
std::string metrics_csv(const std::vector<EpochRow>& rows);
std::string timing_csv(const std::vector<EpochRow>& rows);

}  // namespace xdr::trainer
