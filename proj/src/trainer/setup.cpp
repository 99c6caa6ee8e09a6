#include "xdr/trainer/setup.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/rng.hpp"
#include "xdr/diffusion/toy_backend.hpp"

namespace xdr::trainer {

diffusion::NoiseSchedule schedule_from_config(const Config& c) {
  return diffusion::build_noise_schedule(c.hyper.diffusion_steps, diffusion::parse_beta_ramp(c.noise.kind),
                                         c.noise.beta_start, c.noise.beta_end);
}

Workspace prepare_workspace(const Config& c) {
  validate_config(c);
  if (c.backend != "toy") throw ValidationError("unsupported backend '" + c.backend + "'");
  const auto schedule = schedule_from_config(c);
  Workspace ws;
  if (c.dataset.kind == "toy") {
    auto world = data::generate_toy_world(c.toy, c.domains, schedule);
    ws.data = world.data;
    ws.backend = world.backend;
    ws.tokens = world.tokens;
    ws.world = std::move(world);
    return ws;
  }
  ws.data = data::load_tree_dataset(c, &ws.loads);
  diffusion::ToyBackendOptions opts;
  opts.object_dim = c.toy.object_dim;
  opts.style_dim = c.toy.style_dim;
  opts.latent_dim = c.toy.latent_dim;
  opts.image_height = c.dataset.image_size;
  opts.image_width = c.dataset.image_size;
  opts.image_channels = 3;
  opts.style_gain = c.toy.style_gain;
  opts.schedule = schedule;
  ws.backend = std::make_shared<diffusion::ToyLinearBackend>(opts, derive_seed(c.toy.seed, {2}));
  ws.tokens = diffusion::TokenTable::random(diffusion::prompt_vocabulary(c.domains), c.toy.object_dim,
                                            derive_seed(c.toy.seed, {1}));
  return ws;
}

}  // namespace xdr::trainer
