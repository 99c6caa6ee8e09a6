#include "xdr/data/toy_world.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/rng.hpp"

#include <algorithm>
#include <cmath>

namespace xdr::data {
namespace {

Vector unit(const Vector& v) { return v / v.norm(); }

}  // namespace

ToyWorld generate_toy_world(const ToyWorldSpec& spec, const std::vector<DomainSpec>& domains,
                            const diffusion::NoiseSchedule& schedule) {
  if (spec.n_classes < 1 || spec.samples_per_class < 1 || spec.object_dim < 1 || spec.style_dim < 1) {
    throw ValidationError("toy world counts and dims must be >= 1");
  }
  if (domains.size() < 2) throw ValidationError("toy world needs at least two domains");
  validate_domain_specs(domains);

  ToyWorld world;
  world.tokens = diffusion::TokenTable::random(diffusion::prompt_vocabulary(domains), spec.object_dim,
                                               derive_seed(spec.seed, {1}));

  diffusion::ToyBackendOptions opts;
  opts.object_dim = spec.object_dim;
  opts.style_dim = spec.style_dim;
  opts.latent_dim = spec.latent_dim;
  opts.image_height = spec.image_size;
  opts.image_width = spec.image_size;
  opts.image_channels = spec.channels;
  opts.style_gain = spec.style_gain;
  opts.schedule = schedule;
  const std::uint64_t backend_seed = derive_seed(spec.seed, {2});
  // First pass fixes A, B, G and R; the render radius is fitted to the
  // generated content afterwards so every pixel stays inside [0, 1].
  const diffusion::ToyLinearBackend probe(opts, backend_seed);

  Rng rng(derive_seed(spec.seed, {3}));
  for (int c = 0; c < spec.n_classes; ++c) world.class_prototypes.push_back(unit(standard_normal(rng, spec.object_dim)));
  std::vector<Vector> sample_objects;
  const double obj_sigma = spec.object_jitter / std::sqrt(static_cast<double>(spec.object_dim));
  for (int c = 0; c < spec.n_classes; ++c) {
    for (int j = 0; j < spec.samples_per_class; ++j) {
      sample_objects.push_back(unit(world.class_prototypes[c] + obj_sigma * standard_normal(rng, spec.object_dim)));
    }
  }

  const double style_sigma = spec.style_jitter / std::sqrt(static_cast<double>(spec.style_dim));
  double extent = 0.0;
  for (const auto& d : domains) {
    const Vector zero = Vector::Zero(spec.object_dim);
    const auto prompt = diffusion::assemble_prompt(d, zero, world.tokens);
    const Vector s_dom = probe.prompt_style(prompt);
    world.domain_styles.push_back(s_dom);
    std::vector<Vector> styles;
    for (std::size_t i = 0; i < sample_objects.size(); ++i) {
      styles.push_back(s_dom + style_sigma * standard_normal(rng, spec.style_dim));
      extent = std::max(extent, probe.render_extent(sample_objects[i], styles.back()));
    }
    world.styles.push_back(std::move(styles));
    world.objects.push_back(sample_objects);
  }
  opts.render_radius = extent * 1.05;
  auto backend = std::make_shared<diffusion::ToyLinearBackend>(opts, backend_seed);

  world.data.domains = domains;
  for (int c = 0; c < spec.n_classes; ++c) world.data.classes.push_back("class_" + std::to_string(c));
  for (std::size_t d = 0; d < domains.size(); ++d) {
    std::vector<ImageRecord> records;
    for (std::size_t i = 0; i < sample_objects.size(); ++i) {
      ImageRecord rec;
      rec.id = static_cast<RecordId>(i);
      rec.domain = domains[d].id;
      rec.image = backend->render(world.objects[d][i], world.styles[d][i]);
      rec.label = EvalLabel(static_cast<int>(i) / spec.samples_per_class);
      rec.source = "toy:" + domains[d].name + ":" + std::to_string(i);
      records.push_back(std::move(rec));
    }
    world.data.records.push_back(std::move(records));
  }
  world.backend = std::move(backend);
  validate_partition(world.data);
  return world;
}

}  // namespace xdr::data
