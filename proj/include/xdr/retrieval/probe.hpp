#pragma once

#include "xdr/core/types.hpp"

#include <span>

namespace xdr::retrieval {

/// Held-out accuracy of a ridge-regression linear classifier predicting a
/// binary domain tag from feature rows. Even rows fit, odd rows score.
double domain_probe_accuracy(const Matrix& features, std::span<const int> domain_tags, double ridge = 1e-3);

/// Stacks two feature tables with tags 0 and 1, interleaving rows so both
/// halves of the split see both domains.
double domain_probe_accuracy(const Matrix& a, const Matrix& b, double ridge = 1e-3);

}  // namespace xdr::retrieval
