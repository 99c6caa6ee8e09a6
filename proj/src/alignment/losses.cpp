#include "xdr/alignment/losses.hpp"

#include "xdr/core/errors.hpp"

#include <cmath>

namespace xdr::alignment {
namespace {

void check_tau(double tau) {
  if (!(tau > 0)) throw ValidationError("tau must be > 0");
}

// Softmax of z . keys / tau; returns log-sum-exp and fills probs.
double log_softmax_row(const Vector& logits, Vector& probs) {
  const double m = logits.maxCoeff();
  probs = (logits.array() - m).exp();
  const double sum = probs.sum();
  probs /= sum;
  return m + std::log(sum);
}

LossValue neighbour_infonce(const Matrix& z, std::span<const RecordId> rows, const encoder::FeatureBank& bank,
                            const MutualAdjacency& adjacency, double tau, double eps_div) {
  check_tau(tau);
  if (bank.empty()) throw ValidationError("feature bank is empty");
  if (static_cast<Eigen::Index>(rows.size()) != z.rows()) {
    throw ValidationError("row ids and embeddings have different lengths");
  }
  if (z.rows() == 0) throw ValidationError("loss needs a non-empty batch");
  if (z.cols() != bank.dim()) throw ValidationError("embedding and bank dimensions differ");
  const Matrix keys = bank.keys();
  const auto positions = bank.latest_positions();
  const double n = static_cast<double>(z.rows());
  LossValue out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  Vector probs;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    std::vector<int> pos;
    for (int col : adjacency.row(rows[static_cast<std::size_t>(i)])) {
      if (auto it = positions.find(col); it != positions.end()) pos.push_back(it->second);
    }
    if (pos.empty()) continue;
    const Vector zi = z.row(i).transpose();
    const Vector logits = keys * zi / tau;
    const double lse = log_softmax_row(logits, probs);
    const Vector mean_key = keys.transpose() * probs;
    double sum_l = 0.0;
    Vector sum_k = Vector::Zero(z.cols());
    for (int p : pos) {
      sum_l += logits[p] - lse;
      sum_k += keys.row(p).transpose();
    }
    const double m = static_cast<double>(pos.size());
    const double w = 1.0 / (m + eps_div);
    out.value -= sum_l * w / n;
    out.grad.row(i) = (-(w / n) / tau) * (sum_k - m * mean_key).transpose();
    out.positives += static_cast<int>(pos.size());
  }
  return out;
}

}  // namespace

LossValue loss_aug(const Matrix& z, const Matrix& z_hat, double tau) {
  check_tau(tau);
  if (z.rows() != z_hat.rows() || z.cols() != z_hat.cols()) throw ValidationError("views have different shapes");
  if (z.rows() == 0) throw ValidationError("loss needs a non-empty batch");
  const double n = static_cast<double>(z.rows());
  LossValue out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  Vector probs;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Vector zi = z.row(i).transpose();
    const Vector logits = z_hat * zi / tau;
    const double lse = log_softmax_row(logits, probs);
    out.value += (lse - logits[i]) / n;
    const Vector mean_key = z_hat.transpose() * probs;
    out.grad.row(i) = ((-1.0 / (n * tau)) * (z_hat.row(i).transpose() - mean_key)).transpose();
    out.positives += 1;
  }
  return out;
}

LossValue loss_in_domain(const Matrix& z, std::span<const RecordId> rows, const encoder::FeatureBank& bank,
                         const MutualAdjacency& adjacency, double tau, double eps_div) {
  if (adjacency.mode() != AdjacencyMode::InDomain) throw ValidationError("in-domain loss needs an in-domain adjacency");
  return neighbour_infonce(z, rows, bank, adjacency, tau, eps_div);
}

LossValue loss_cross_domain(const Matrix& z_src, std::span<const RecordId> rows, const encoder::FeatureBank& bank_dst,
                            const MutualAdjacency& adjacency, double tau, double eps_div) {
  if (adjacency.mode() != AdjacencyMode::CrossDomain) {
    throw ValidationError("cross-domain loss needs a cross-domain adjacency");
  }
  return neighbour_infonce(z_src, rows, bank_dst, adjacency, tau, eps_div);
}

double compose_pa1(double l_aug, double l_in_a, double l_in_b, double beta) { return l_aug + beta * (l_in_a + l_in_b); }

double compose_pa2(double l_in_a, double l_in_b, double l_cross_ab, double l_cross_ba, double lambda) {
  return (l_in_a + l_in_b) + lambda * (l_cross_ab + l_cross_ba);
}

}  // namespace xdr::alignment
