#include "xdr/trainer/trainer.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/phase.hpp"
#include "xdr/data/augment.hpp"
#include "xdr/diffusion/od_loss.hpp"
#include "xdr/trainer/checkpoint.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

namespace xdr::trainer {
namespace {

constexpr std::uint64_t kTagShuffle = 0x5348;
constexpr std::uint64_t kTagNoise = 0x4e4f;
constexpr std::uint64_t kTagAugment = 0x4147;
constexpr std::uint64_t kTagInit = 0x494e;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

encoder::InputShape shape_of(const Image& img) { return {img.height, img.width, img.channels}; }

}  // namespace

bool TrainState::operator==(const TrainState& o) const {
  auto same_params = [](const encoder::Encoder& a, const encoder::Encoder& b) {
    return a.arch() == b.arch() && std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin(),
                                              b.parameters().end());
  };
  if (epoch != o.epoch || phase != o.phase || !same_params(encoder, o.encoder)) return false;
  if (momentum.has_value() != o.momentum.has_value()) return false;
  if (momentum && (momentum->m != o.momentum->m || !same_params(momentum->net, o.momentum->net))) return false;
  return banks == o.banks && tables == o.tables && in_adjacency == o.in_adjacency &&
         cross_adjacency == o.cross_adjacency && adam == o.adam && rng == o.rng;
}

const char* loss_term_name(LossTerm term) {
  switch (term) {
    case LossTerm::OD:
      return "l_od";
    case LossTerm::Aug:
      return "l_aug";
    case LossTerm::InDomain:
      return "l_in";
    case LossTerm::CrossDomain:
      return "l_cross";
  }
  return "?";
}

bool term_allowed(Phase phase, LossTerm term) {
  switch (phase) {
    case Phase::OD:
      return term == LossTerm::OD;
    case Phase::PA1:
      return term == LossTerm::Aug || term == LossTerm::InDomain;
    case Phase::PA2:
      return term == LossTerm::InDomain || term == LossTerm::CrossDomain;
  }
  return false;
}

PhaseSchedule effective_schedule(const Config& c) {
  if (!c.ablation.use_od && !c.ablation.use_pa1 && !c.ablation.use_pa2) {
    throw ValidationError("at least one of use_od, use_pa1, use_pa2 must be enabled");
  }
  PhaseSchedule s = c.schedule;
  if (!c.ablation.use_od) s.od_epochs = 0;
  if (!c.ablation.use_pa1) s.pa1_epochs = 0;
  if (!c.ablation.use_pa2) s.pa2_epochs = 0;
  validate_schedule(s);
  if (s.total() == 0) throw ValidationError("schedule has no epochs to run");
  return s;
}

Trainer::Trainer(Config config, const data::DatasetPartition& data, const diffusion::DenoiserBackend& backend,
                 const diffusion::TokenTable& tokens, TrainCallbacks callbacks)
    : config_(std::move(config)),
      schedule_(effective_schedule(config_)),
      data_(data),
      backend_(backend),
      tokens_(tokens),
      noise_(backend.schedule()),
      callbacks_(std::move(callbacks)) {
  data::validate_partition(data_);
  if (data_.domains.size() != 2) throw ValidationError("training needs exactly two domains");
  for (const auto& recs : data_.records) {
    if (recs.empty()) throw ValidationError("every domain needs at least one image");
  }
  if (config_.hyper.batch_size < 1) throw ValidationError("batch_size must be >= 1");
}

TrainState Trainer::initial_state() const {
  const auto& first = data_.records.front().front().image;
  const auto arch = encoder::arch_from_settings(config_.encoder, shape_of(first), backend_.token_dim());
  encoder::Encoder enc(arch, derive_seed(config_.seed, {kTagInit, config_.encoder.init_seed}));
  TrainState s{0,
               select_phase(0, schedule_),
               std::move(enc),
               std::nullopt,
               {},
               {},
               {},
               std::nullopt,
               {},
               Rng(derive_seed(config_.seed, {kTagShuffle}))};
  s.adam = make_adam(s.encoder.parameter_count(), config_.hyper.learning_rate);
  for (const auto& d : data_.domains) s.banks.emplace_back(d.id, config_.hyper.bank_capacity);
  return s;
}

int Trainer::steps_per_epoch() const {
  std::size_t n = 0;
  for (const auto& r : data_.records) n = std::max(n, r.size());
  const auto bs = static_cast<std::size_t>(config_.hyper.batch_size);
  return static_cast<int>((n + bs - 1) / bs);
}

std::vector<RecordId> Trainer::batch_ids(const std::vector<RecordId>& perm, int step, int steps) const {
  const int bs = config_.hyper.batch_size;
  const int n = static_cast<int>(perm.size());
  int longest = 0;
  for (const auto& r : data_.records) longest = std::max(longest, static_cast<int>(r.size()));
  const int count = std::min({bs, longest - step * bs, n});
  std::vector<RecordId> out;
  for (int i = 0; i < count; ++i) out.push_back(perm[static_cast<std::size_t>((step * bs + i) % n)]);
  return out;
}

std::uint64_t Trainer::noise_seed(int epoch, int step) const {
  return derive_seed(config_.seed, {kTagNoise, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(step)});
}

std::uint64_t Trainer::augment_seed(int epoch, int step, DomainId domain, RecordId record) const {
  return derive_seed(config_.seed, {kTagAugment, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(step),
                                    static_cast<std::uint64_t>(domain), static_cast<std::uint64_t>(record)});
}

int Trainer::clamped_k(std::size_t n) const {
  const int cap = static_cast<int>(n) - 1;
  if (cap < 1) throw ValidationError("a domain needs at least two images for neighbour mining");
  return std::min(config_.hyper.k, cap);
}

void Trainer::note(Phase phase, LossTerm term) const {
  if (callbacks_.on_loss_eval) callbacks_.on_loss_eval(phase, term);
}

void Trainer::begin_alignment_epoch(TrainState& s, Phase phase) const {
  if (!s.momentum) s.momentum = encoder::MomentumEncoder{s.encoder, config_.hyper.momentum_m};
  s.tables.clear();
  for (std::size_t d = 0; d < data_.domains.size(); ++d) {
    s.tables.push_back(encoder::refresh_feature_table(*s.momentum, data_.records[d], s.epoch));
  }
  for (std::size_t d = 0; d < data_.domains.size(); ++d) {
    if (!s.banks[d].empty()) continue;
    // An empty bank has no keys for the InfoNCE denominator; seed it from the table.
    std::vector<Embedding> seed;
    const auto& rows = s.tables[d].rows;
    const auto n = std::min<Eigen::Index>(rows.rows(), s.banks[d].capacity());
    for (Eigen::Index i = rows.rows() - n; i < rows.rows(); ++i) {
      seed.push_back({rows.row(i).transpose(), data_.domains[d].id, static_cast<RecordId>(i)});
    }
    s.banks[d].push(seed);
  }
  s.in_adjacency.clear();
  for (std::size_t d = 0; d < data_.domains.size(); ++d) {
    const auto n = data_.records[d].size();
    const int k = clamped_k(n);
    if (k != config_.hyper.k && s.epoch == schedule_.od_epochs) {
      std::cerr << "warning: k=" << config_.hyper.k << " exceeds domain '" << data_.domains[d].name << "' size " << n
                << "; using k=" << k << "\n";
    }
    s.in_adjacency.push_back(alignment::in_domain_adjacency(s.tables[d].rows, k, config_.exclude_self));
  }
  if (phase == Phase::PA2) {
    const int k = std::min(clamped_k(data_.records[0].size()), clamped_k(data_.records[1].size()));
    s.cross_adjacency = alignment::cross_domain_adjacency(s.tables[0].rows, s.tables[1].rows, k);
  } else {
    s.cross_adjacency.reset();
  }
}

EpochRow Trainer::run_epoch(TrainState& s) const {
  const auto started = std::chrono::steady_clock::now();
  const Phase phase = select_phase(s.epoch, schedule_);
  s.phase = phase;
  if (phase != Phase::OD) begin_alignment_epoch(s, phase);

  const std::size_t nd = data_.domains.size();
  std::vector<std::vector<RecordId>> perms(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    perms[d].resize(data_.records[d].size());
    std::iota(perms[d].begin(), perms[d].end(), 0);
    std::shuffle(perms[d].begin(), perms[d].end(), s.rng);
  }
  const auto specs = data_.spec_map();
  const auto policy = data::make_policy(config_.augment);
  const auto& hp = config_.hyper;
  const int steps = steps_per_epoch();

  EpochRow row;
  row.epoch = s.epoch;
  row.phase = phase;
  row.steps = steps;
  std::vector<double> grad(s.encoder.parameter_count());

  for (int step = 0; step < steps; ++step) {
    StepContext ctx;
    ctx.epoch = s.epoch;
    ctx.step = step;
    ctx.phase = phase;
    ctx.state = &s;
    for (std::size_t d = 0; d < nd; ++d) ctx.batch.push_back(batch_ids(perms[d], step, steps));
    std::fill(grad.begin(), grad.end(), 0.0);
    auto& parts = ctx.parts;

    if (phase == Phase::OD) {
      std::vector<const ImageRecord*> batch;
      for (std::size_t d = 0; d < nd; ++d) {
        for (RecordId id : ctx.batch[d]) batch.push_back(&data_.records[d][static_cast<std::size_t>(id)]);
      }
      Rng rng(noise_seed(s.epoch, step));
      note(phase, LossTerm::OD);
      auto loss = diffusion::disentanglement_loss(batch, s.encoder, specs, tokens_, backend_, noise_, rng);
      parts.l_od = loss.value;
      parts.total = loss.value;
      grad = std::move(loss.grad);
    } else {
      const auto& menc = *s.momentum;
      std::vector<Matrix> z(nd);
      std::vector<std::vector<encoder::Encoder::Tape>> tapes(nd);
      for (std::size_t d = 0; d < nd; ++d) {
        const auto& ids = ctx.batch[d];
        z[d].resize(static_cast<Eigen::Index>(ids.size()), s.encoder.token_dim());
        Matrix keys(static_cast<Eigen::Index>(ids.size()), s.encoder.token_dim());
        tapes[d].resize(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const auto& rec = data_.records[d][static_cast<std::size_t>(ids[i])];
          z[d].row(static_cast<Eigen::Index>(i)) = s.encoder.forward(rec.image, tapes[d][i]).transpose();
          const auto view = data::augment(rec.image, policy, augment_seed(s.epoch, step, rec.domain, rec.id));
          keys.row(static_cast<Eigen::Index>(i)) = menc.net.encode(view).transpose();
        }
        ctx.keys.push_back(std::move(keys));
      }

      std::vector<Matrix> gz(nd);
      for (std::size_t d = 0; d < nd; ++d) gz[d] = Matrix::Zero(z[d].rows(), z[d].cols());
      note(phase, LossTerm::InDomain);
      const auto in_a = alignment::loss_in_domain(z[0], ctx.batch[0], s.banks[0], s.in_adjacency[0], hp.tau, hp.eps_div);
      note(phase, LossTerm::InDomain);
      const auto in_b = alignment::loss_in_domain(z[1], ctx.batch[1], s.banks[1], s.in_adjacency[1], hp.tau, hp.eps_div);
      parts.l_in_a = in_a.value;
      parts.l_in_b = in_b.value;
      parts.pos_in_a = in_a.positives;
      parts.pos_in_b = in_b.positives;

      if (phase == Phase::PA1) {
        note(phase, LossTerm::Aug);
        const auto aug_a = alignment::loss_aug(z[0], ctx.keys[0], hp.tau);
        note(phase, LossTerm::Aug);
        const auto aug_b = alignment::loss_aug(z[1], ctx.keys[1], hp.tau);
        parts.l_aug = aug_a.value + aug_b.value;
        parts.total = alignment::compose_pa1(parts.l_aug, in_a.value, in_b.value, hp.beta);
        gz[0] = aug_a.grad + hp.beta * in_a.grad;
        gz[1] = aug_b.grad + hp.beta * in_b.grad;
      } else {
        const auto ba = alignment::transpose(*s.cross_adjacency);
        note(phase, LossTerm::CrossDomain);
        const auto cr_ab =
            alignment::loss_cross_domain(z[0], ctx.batch[0], s.banks[1], *s.cross_adjacency, hp.tau, hp.eps_div);
        note(phase, LossTerm::CrossDomain);
        const auto cr_ba = alignment::loss_cross_domain(z[1], ctx.batch[1], s.banks[0], ba, hp.tau, hp.eps_div);
        parts.l_cross_ab = cr_ab.value;
        parts.l_cross_ba = cr_ba.value;
        parts.pos_cross_ab = cr_ab.positives;
        parts.pos_cross_ba = cr_ba.positives;
        parts.total = alignment::compose_pa2(in_a.value, in_b.value, cr_ab.value, cr_ba.value, hp.lambda);
        gz[0] = in_a.grad + hp.lambda * cr_ab.grad;
        gz[1] = in_b.grad + hp.lambda * cr_ba.grad;
      }
      for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t i = 0; i < tapes[d].size(); ++i) {
          s.encoder.backward(tapes[d][i], gz[d].row(static_cast<Eigen::Index>(i)).transpose(), grad);
        }
      }
    }

    if (callbacks_.on_step) callbacks_.on_step(ctx);
    adam_step(s.adam, s.encoder.parameters(), grad);
    if (phase != Phase::OD) {
      encoder::momentum_update(s.encoder, *s.momentum, hp.momentum_m);
      for (std::size_t d = 0; d < nd; ++d) {
        std::vector<Embedding> push;
        for (std::size_t i = 0; i < ctx.batch[d].size(); ++i) {
          push.push_back({ctx.keys[d].row(static_cast<Eigen::Index>(i)).transpose(), data_.domains[d].id,
                          ctx.batch[d][i]});
        }
        s.banks[d].push(push);
      }
    }

    auto& m = row.mean;
    m.l_od += parts.l_od / steps;
    m.l_aug += parts.l_aug / steps;
    m.l_in_a += parts.l_in_a / steps;
    m.l_in_b += parts.l_in_b / steps;
    m.l_cross_ab += parts.l_cross_ab / steps;
    m.l_cross_ba += parts.l_cross_ba / steps;
    m.total += parts.total / steps;
    m.pos_in_a += parts.pos_in_a;
    m.pos_in_b += parts.pos_in_b;
    m.pos_cross_ab += parts.pos_cross_ab;
    m.pos_cross_ba += parts.pos_cross_ba;
  }
  ++s.epoch;
  if (s.epoch < schedule_.total()) s.phase = select_phase(s.epoch, schedule_);
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (callbacks_.on_epoch) callbacks_.on_epoch(row);
  return row;
}

std::vector<EpochRow> Trainer::run(TrainState& s, const TrainOptions& options) const {
  std::vector<EpochRow> rows;
  while (s.epoch < schedule_.total()) {
    try {
      rows.push_back(run_epoch(s));
    } catch (const BackendError&) {
      if (options.checkpoint_path) save_checkpoint(*options.checkpoint_path, s, config_);
      throw;
    }
    if (options.progress) {
      const auto& r = rows.back();
      std::cerr << "epoch " << r.epoch + 1 << "/" << schedule_.total() << " " << phase_name(r.phase)
                << " loss=" << num(r.mean.total) << "\n";
    }
    if (options.checkpoint_path) save_checkpoint(*options.checkpoint_path, s, config_);
  }
  return rows;
}

std::string metrics_csv_header() {
  return "epoch,phase,steps,l_od,l_aug,l_in_a,l_in_b,l_cross_ab,l_cross_ba,total,pos_in_a,pos_in_b,pos_cross_ab,"
         "pos_cross_ba\n";
}

std::string metrics_csv_row(const EpochRow& r) {
  const auto& m = r.mean;
  std::ostringstream out;
  out << r.epoch << ',' << phase_name(r.phase) << ',' << r.steps << ',' << num(m.l_od) << ',' << num(m.l_aug) << ','
      << num(m.l_in_a) << ',' << num(m.l_in_b) << ',' << num(m.l_cross_ab) << ',' << num(m.l_cross_ba) << ','
      << num(m.total) << ',' << m.pos_in_a << ',' << m.pos_in_b << ',' << m.pos_cross_ab << ',' << m.pos_cross_ba
      << '\n';
  return out.str();
}

std::string metrics_csv(const std::vector<EpochRow>& rows) {
  std::string out = metrics_csv_header();
  for (const auto& r : rows) out += metrics_csv_row(r);
  return out;
}

std::string timing_csv(const std::vector<EpochRow>& rows) {
  std::string out = "epoch,phase,wall_seconds\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch) + "," + phase_name(r.phase) + "," + num(r.wall_seconds) + "\n";
  }
  return out;
}

}  // namespace xdr::trainer
