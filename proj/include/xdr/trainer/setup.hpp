#pragma once

#include "xdr/core/config.hpp"
#include "xdr/data/dataset.hpp"
#include "xdr/data/toy_world.hpp"
#include "xdr/diffusion/backend.hpp"
#include "xdr/diffusion/prompt.hpp"

#include <memory>
#include <optional>

namespace xdr::trainer {

/// Dataset, frozen backend and token table resolved from a config.
struct Workspace {
  data::DatasetPartition data;
  std::shared_ptr<const diffusion::DenoiserBackend> backend;
  diffusion::TokenTable tokens;
  std::optional<data::ToyWorld> world;  // set for the toy dataset
  std::vector<data::DomainLoad> loads;  // image trees only
};

diffusion::NoiseSchedule schedule_from_config(const Config& config);

/// Toy datasets come with their matched backend. Image trees get a linear
/// backend sized to the configured resolution.
Workspace prepare_workspace(const Config& config);

}  // namespace xdr::trainer
