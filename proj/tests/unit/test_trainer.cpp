#include "xdr/alignment/losses.hpp"
#include "xdr/core/errors.hpp"
#include "xdr/data/augment.hpp"
#include "xdr/trainer/checkpoint.hpp"
#include "xdr/trainer/setup.hpp"
#include "xdr/trainer/trainer.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <set>

using namespace xdr;
using namespace xdr::trainer;

namespace {

Config small_config(int od = 2, int pa1 = 2, int pa2 = 2) {
  auto c = parse_config(R"(
    dataset = toy
    diffusion_steps = 100
    noise_schedule = linear
    noise_beta_start = 0.01
    noise_beta_end = 0.2
    k = 3
    batch_size = 8
    bank_capacity = 20
    momentum = 0.9
    learning_rate = 0.01
    augment = toy
    eval_k = 1,5
    encoder.backbone = mlp
    encoder.hidden_dim = 8
    toy.classes = 3
    toy.samples_per_class = 4
    seed = 3
  )");
  c.schedule = {od, pa1, pa2};
  return c;
}

struct Fixture {
  Config config;
  Workspace ws;
  explicit Fixture(Config c) : config(std::move(c)), ws(prepare_workspace(config)) {}
  Trainer trainer(TrainCallbacks cb = {}) const { return Trainer(config, ws.data, *ws.backend, ws.tokens, cb); }
};

std::vector<double> params(const encoder::Encoder& e) { return {e.parameters().begin(), e.parameters().end()}; }

// Fails every predict_noise call after the first `budget`.
class FlakyBackend final : public diffusion::DenoiserBackend {
 public:
  FlakyBackend(const diffusion::DenoiserBackend& inner, int budget) : inner_(inner), budget_(budget) {}
  std::string name() const override { return "flaky"; }
  std::vector<int> latent_shape() const override { return inner_.latent_shape(); }
  int token_dim() const override { return inner_.token_dim(); }
  const diffusion::NoiseSchedule& schedule() const override { return inner_.schedule(); }
  Vector encode_to_latent(const Image& i) const override { return inner_.encode_to_latent(i); }
  Vector predict_noise(const Vector& x, const diffusion::PromptEmbedding& p, int t) const override {
    if (calls_++ >= budget_) throw BackendError("denoiser went away");
    return inner_.predict_noise(x, p, t);
  }
  Vector predict_noise_object_vjp(const Vector& x, const diffusion::PromptEmbedding& p, int t,
                                  const Vector& u) const override {
    return inner_.predict_noise_object_vjp(x, p, t, u);
  }
  std::vector<double> parameter_snapshot() const override { return inner_.parameter_snapshot(); }

 private:
  const diffusion::DenoiserBackend& inner_;
  int budget_;
  mutable std::atomic<int> calls_{0};
};

}  // namespace

TEST_CASE("OD-only run") {
  auto c = small_config(1, 0, 0);
  c.toy.n_classes = 2;
  c.toy.samples_per_class = 2;
  Fixture f(c);
  const auto before = f.ws.backend->parameter_snapshot();
  auto tr = f.trainer();
  auto s = tr.initial_state();
  const auto rows = tr.run(s);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].phase == Phase::OD);
  CHECK(rows[0].mean.l_od > 0.0);
  CHECK(std::isfinite(rows[0].mean.l_od));
  CHECK(rows[0].mean.total == rows[0].mean.l_od);
  CHECK_FALSE(s.momentum.has_value());
  CHECK(s.epoch == 1);
  CHECK(f.ws.backend->parameter_snapshot() == before);
}

TEST_CASE("phase-loss exclusivity") {
  Fixture f(small_config());
  std::vector<std::pair<Phase, LossTerm>> calls;
  bool momentum_in_od = false;
  TrainCallbacks cb;
  cb.on_loss_eval = [&](Phase p, LossTerm t) { calls.emplace_back(p, t); };
  cb.on_step = [&](const StepContext& ctx) {
    if (ctx.phase == Phase::OD && ctx.state->momentum) momentum_in_od = true;
  };
  auto tr = f.trainer(cb);
  auto s = tr.initial_state();
  tr.run(s);
  std::set<std::pair<Phase, LossTerm>> seen(calls.begin(), calls.end());
  for (const auto& [p, t] : seen) {
    CAPTURE(phase_name(p));
    CAPTURE(loss_term_name(t));
    CHECK(term_allowed(p, t));
  }
  CHECK(seen.count({Phase::OD, LossTerm::OD}));
  CHECK(seen.count({Phase::PA1, LossTerm::Aug}));
  CHECK(seen.count({Phase::PA1, LossTerm::InDomain}));
  CHECK(seen.count({Phase::PA2, LossTerm::InDomain}));
  CHECK(seen.count({Phase::PA2, LossTerm::CrossDomain}));
  CHECK_FALSE(momentum_in_od);
  CHECK_FALSE(term_allowed(Phase::PA1, LossTerm::CrossDomain));
  CHECK_FALSE(term_allowed(Phase::PA2, LossTerm::Aug));
  CHECK_FALSE(term_allowed(Phase::OD, LossTerm::InDomain));
}

TEST_CASE("alignment losses replay from independent parts") {
  for (auto sched : {PhaseSchedule{0, 1, 0}, PhaseSchedule{0, 0, 1}}) {
    Fixture f(small_config(sched.od_epochs, sched.pa1_epochs, sched.pa2_epochs));
    const auto policy = data::make_policy(f.config.augment);
    const auto& hp = f.config.hyper;
    int steps = 0;
    TrainCallbacks cb;
    Trainer* trp = nullptr;
    cb.on_step = [&](const StepContext& ctx) {
      const auto& s = *ctx.state;
      REQUIRE(s.momentum.has_value());
      std::vector<Matrix> z(2), keys(2);
      for (int d = 0; d < 2; ++d) {
        const auto& ids = ctx.batch[d];
        z[d].resize(static_cast<int>(ids.size()), s.encoder.token_dim());
        keys[d].resize(static_cast<int>(ids.size()), s.encoder.token_dim());
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const auto& rec = f.ws.data.records[d][ids[i]];
          z[d].row(i) = s.encoder.encode(rec.image).transpose();
          const auto view = data::augment(rec.image, policy, trp->augment_seed(ctx.epoch, ctx.step, d, rec.id));
          keys[d].row(i) = s.momentum->net.encode(view).transpose();
        }
        CHECK((keys[d] - ctx.keys[d]).norm() == 0.0);
      }
      const double in_a = alignment::loss_in_domain(z[0], ctx.batch[0], s.banks[0], s.in_adjacency[0], hp.tau, hp.eps_div).value;
      const double in_b = alignment::loss_in_domain(z[1], ctx.batch[1], s.banks[1], s.in_adjacency[1], hp.tau, hp.eps_div).value;
      double expect;
      if (ctx.phase == Phase::PA1) {
        const double aug = alignment::loss_aug(z[0], keys[0], hp.tau).value + alignment::loss_aug(z[1], keys[1], hp.tau).value;
        expect = alignment::compose_pa1(aug, in_a, in_b, hp.beta);
        CHECK(ctx.parts.l_aug == doctest::Approx(aug).epsilon(1e-12));
      } else {
        const auto& ab = *s.cross_adjacency;
        const double xab = alignment::loss_cross_domain(z[0], ctx.batch[0], s.banks[1], ab, hp.tau, hp.eps_div).value;
        const double xba =
            alignment::loss_cross_domain(z[1], ctx.batch[1], s.banks[0], alignment::transpose(ab), hp.tau, hp.eps_div).value;
        expect = alignment::compose_pa2(in_a, in_b, xab, xba, hp.lambda);
        CHECK(ctx.parts.l_cross_ab == doctest::Approx(xab).epsilon(1e-12));
      }
      CHECK(ctx.parts.total == doctest::Approx(expect).epsilon(1e-12));
      ++steps;
    };
    auto tr = f.trainer(cb);
    trp = &tr;
    auto s = tr.initial_state();
    tr.run(s);
    CHECK(steps == tr.steps_per_epoch());
  }
}

TEST_CASE("seeded runs are identical") {
  Fixture f(small_config());
  auto run = [&] {
    auto tr = f.trainer();
    auto s = tr.initial_state();
    return std::make_pair(metrics_csv(tr.run(s)), s);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first.rfind(metrics_csv_header(), 0) == 0);

  auto other = small_config();
  other.seed = 4;
  Fixture g(other);
  auto tr = g.trainer();
  auto s = tr.initial_state();
  CHECK(metrics_csv(tr.run(s)) != a.first);
}

TEST_CASE("learning rate 0 freezes parameters but not banks") {
  auto c = small_config(1, 1, 1);
  c.hyper.learning_rate = 0.0;
  Fixture f(c);
  auto tr = f.trainer();
  auto s = tr.initial_state();
  const auto p0 = params(s.encoder);
  tr.run_epoch(s);  // OD
  CHECK(params(s.encoder) == p0);
  tr.run_epoch(s);  // PA1
  CHECK(params(s.encoder) == p0);
  const auto banks_after_pa1 = s.banks;
  const auto tables_pa1 = s.tables;
  tr.run_epoch(s);  // PA2
  CHECK(params(s.encoder) == p0);
  CHECK_FALSE(s.banks == banks_after_pa1);
  CHECK(s.tables[0].epoch == 2);
  CHECK(tables_pa1[0].epoch == 1);
  CHECK(s.adam.step == 3 * tr.steps_per_epoch());
}

TEST_CASE("banks are retained across phases and bounded") {
  Fixture f(small_config(0, 1, 1));
  auto tr = f.trainer();
  auto s = tr.initial_state();
  tr.run_epoch(s);
  const auto cursor = s.banks[0].cursor();
  const auto size = s.banks[0].size();
  CHECK(size == f.config.hyper.bank_capacity);
  tr.run_epoch(s);
  CHECK(s.banks[0].size() == size);
  CHECK(s.banks[0].cursor() == (cursor + 12) % 20);
  REQUIRE(s.cross_adjacency.has_value());
  CHECK(s.in_adjacency[0].is_symmetric());
}

TEST_CASE("checkpoint round trip") {
  Fixture f(small_config(1, 1, 2));
  auto tr = f.trainer();
  auto s = tr.initial_state();
  tr.run_epoch(s);
  tr.run_epoch(s);
  const auto bytes = checkpoint_bytes(s, f.config);
  auto back = parse_checkpoint(bytes);
  CHECK(back.state == s);
  CHECK(back.config == f.config);
  CHECK(checkpoint_bytes(back.state, back.config) == bytes);
  const auto r1 = tr.run_epoch(s);
  const auto r2 = tr.run_epoch(back.state);
  CHECK(metrics_csv_row(r1) == metrics_csv_row(r2));
  CHECK(back.state == s);

  SUBCASE("file io") {
    const auto path = std::filesystem::temp_directory_path() / "xdr_test_ckpt" / "c.bin";
    save_checkpoint(path, s, f.config);
    CHECK(load_checkpoint(path).state == s);
    CHECK_THROWS_AS(load_checkpoint(path.string() + ".missing"), IoError);
  }
  SUBCASE("corruption") {
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    CHECK_THROWS_AS(parse_checkpoint(flipped), CorruptArtifact);
    CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 9)), CorruptArtifact);
    CHECK_THROWS_AS(parse_checkpoint("XDRCKPT\nxx"), CorruptArtifact);
    CHECK_THROWS_AS(parse_checkpoint(std::string(64, 'a')), CorruptArtifact);
  }
}

TEST_CASE("ablation wiring") {
  auto c = small_config(2, 1, 1);
  c.ablation = {true, false, false};
  CHECK(effective_schedule(c) == PhaseSchedule{2, 0, 0});
  c.ablation = {false, true, true};
  CHECK(effective_schedule(c) == PhaseSchedule{0, 1, 1});
  c.ablation = {false, false, false};
  CHECK_THROWS_AS(effective_schedule(c), ValidationError);

  // Without OD alignment starts from the raw encoder.
  c.ablation = {false, true, true};
  Fixture f(c);
  auto tr = f.trainer();
  auto s = tr.initial_state();
  const auto p0 = params(s.encoder);
  bool checked = false;
  TrainCallbacks cb;
  cb.on_step = [&](const StepContext& ctx) {
    if (ctx.epoch == 0 && ctx.step == 0) {
      CHECK(params(ctx.state->momentum->net) == p0);
      checked = true;
    }
  };
  auto tr2 = f.trainer(cb);
  auto s2 = tr2.initial_state();
  const auto rows = tr2.run(s2);
  CHECK(checked);
  CHECK(rows.size() == 2);
  CHECK(rows[0].phase == Phase::PA1);
}

TEST_CASE("labels are never read during training") {
  Fixture f(small_config(1, 1, 1));
  auto tr = f.trainer();
  auto s = tr.initial_state();
  const auto csv = metrics_csv(tr.run(s));
  for (const auto& recs : f.ws.data.records)
    for (const auto& r : recs) CHECK_FALSE(r.label.was_read());

  auto sentinel = f.ws.data;
  for (auto& recs : sentinel.records)
    for (auto& r : recs) r.label = EvalLabel(-12345);
  Trainer t2(f.config, sentinel, *f.ws.backend, f.ws.tokens);
  auto s2 = t2.initial_state();
  CHECK(metrics_csv(t2.run(s2)) == csv);
}

TEST_CASE("k larger than a domain is clamped") {
  auto c = small_config(0, 1, 1);
  c.hyper.k = 100;
  Fixture f(c);
  auto tr = f.trainer();
  CHECK(tr.clamped_k(12) == 11);
  auto s = tr.initial_state();
  CHECK_NOTHROW(tr.run(s));
  // k = n - 1 with exclude_self links every pair.
  CHECK(s.in_adjacency[0].nnz() == 12u * 11u);
}

TEST_CASE("backend failure flushes a checkpoint") {
  Fixture f(small_config(2, 0, 0));
  FlakyBackend flaky(*f.ws.backend, 30);
  Trainer tr(f.config, f.ws.data, flaky, f.ws.tokens);
  auto s = tr.initial_state();
  const auto path = std::filesystem::temp_directory_path() / "xdr_test_flaky" / "c.bin";
  std::filesystem::remove(path);
  TrainOptions opt;
  opt.checkpoint_path = path;
  CHECK_THROWS_AS(tr.run(s, opt), BackendError);
  REQUIRE(std::filesystem::exists(path));
  CHECK(load_checkpoint(path).state.epoch == 1);
}

TEST_CASE("trainer input checks") {
  auto c = small_config();
  Fixture f(c);
  auto one = f.ws.data;
  one.domains.pop_back();
  one.records.pop_back();
  CHECK_THROWS_AS(Trainer(c, one, *f.ws.backend, f.ws.tokens), ValidationError);
}
