#pragma once

#include "xdr/core/config.hpp"
#include "xdr/data/dataset.hpp"
#include "xdr/diffusion/prompt.hpp"
#include "xdr/diffusion/toy_backend.hpp"

#include <memory>
#include <vector>

namespace xdr::data {

/// A seeded two-domain world where every image is a linear render of a
/// class-conditional object vector and a per-domain style vector.
struct ToyWorld {
  DatasetPartition data;
  /// objects[d][record]: ground-truth object vector (unit norm). Sample j of
  /// class c carries the same vector in every domain.
  std::vector<std::vector<Vector>> objects;
  /// styles[d][record]: per-image style vector.
  std::vector<std::vector<Vector>> styles;
  std::vector<Vector> class_prototypes;
  /// Style carried by each domain's prompt.
  std::vector<Vector> domain_styles;
  diffusion::TokenTable tokens;
  std::shared_ptr<const diffusion::ToyLinearBackend> backend;
};

/// Builds the world for the given domains (2 expected) under a noise schedule.
ToyWorld generate_toy_world(const ToyWorldSpec& spec, const std::vector<DomainSpec>& domains,
                            const diffusion::NoiseSchedule& schedule);

}  // namespace xdr::data
