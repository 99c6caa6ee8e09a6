#pragma once

#include "xdr/alignment/adjacency.hpp"
#include "xdr/core/types.hpp"
#include "xdr/encoder/bank.hpp"

#include <span>

namespace xdr::alignment {

struct LossValue {
  double value = 0.0;
  Matrix grad;        // d(value)/d(z), same shape as z
  int positives = 0;  // positive pairs that contributed
};

/// Instance InfoNCE between z_i and its augmented-view key z_hat_i, with the
/// other keys of the batch as negatives, averaged over the batch.
LossValue loss_aug(const Matrix& z, const Matrix& z_hat, double tau);

/// Neighbour InfoNCE against a feature bank:
///
///   L = -(1/n) sum_i [ sum_{j in P(i)} l_ij ] / (|P(i)| + eps_div)
///   l_ij = z_i . k_j / tau - log sum_q exp(z_i . k_q / tau)
///
/// P(i) is the adjacency row of batch record rows[i]; column j is a record id of
/// the bank's domain and k_j its newest bank entry. Columns whose record is not
/// resident in the bank are skipped. q ranges over every bank entry.
LossValue loss_in_domain(const Matrix& z, std::span<const RecordId> rows, const encoder::FeatureBank& bank,
                         const MutualAdjacency& adjacency, double tau, double eps_div);

/// Same form, with rows from domain A and the bank and adjacency columns from
/// domain B.
LossValue loss_cross_domain(const Matrix& z_src, std::span<const RecordId> rows, const encoder::FeatureBank& bank_dst,
                            const MutualAdjacency& adjacency, double tau, double eps_div);

/// l_aug + beta * (l_in_a + l_in_b)
double compose_pa1(double l_aug, double l_in_a, double l_in_b, double beta);
/// (l_in_a + l_in_b) + lambda * (l_cross_ab + l_cross_ba)
double compose_pa2(double l_in_a, double l_in_b, double l_cross_ab, double l_cross_ba, double lambda);

struct LossBreakdown {
  double l_od = 0.0;
  double l_aug = 0.0;
  double l_in_a = 0.0;
  double l_in_b = 0.0;
  double l_cross_ab = 0.0;
  double l_cross_ba = 0.0;
  double total = 0.0;
  int pos_in_a = 0;
  int pos_in_b = 0;
  int pos_cross_ab = 0;
  int pos_cross_ba = 0;
};

}  // namespace xdr::alignment
