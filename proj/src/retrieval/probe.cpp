#include "xdr/retrieval/probe.hpp"

#include "xdr/core/errors.hpp"

namespace xdr::retrieval {

double domain_probe_accuracy(const Matrix& features, std::span<const int> tags, double ridge) {
  const auto n = features.rows();
  if (n < 4 || static_cast<Eigen::Index>(tags.size()) != n) throw ValidationError("probe needs >= 4 tagged rows");
  const auto d = features.cols();
  Eigen::MatrixXd x_fit, x_eval;
  Eigen::VectorXd y_fit, y_eval;
  const Eigen::Index n_fit = (n + 1) / 2, n_eval = n / 2;
  x_fit.resize(n_fit, d + 1);
  x_eval.resize(n_eval, d + 1);
  y_fit.resize(n_fit);
  y_eval.resize(n_eval);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = tags[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    auto& x = i % 2 == 0 ? x_fit : x_eval;
    auto& yy = i % 2 == 0 ? y_fit : y_eval;
    x.row(i / 2).head(d) = features.row(i);
    x(i / 2, d) = 1.0;
    yy[i / 2] = y;
  }
  Eigen::MatrixXd gram = x_fit.transpose() * x_fit;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd w = gram.ldlt().solve(x_fit.transpose() * y_fit);
  const Eigen::VectorXd pred = x_eval * w;
  int correct = 0;
  for (Eigen::Index i = 0; i < n_eval; ++i) correct += (pred[i] >= 0) == (y_eval[i] > 0);
  return static_cast<double>(correct) / n_eval;
}

double domain_probe_accuracy(const Matrix& a, const Matrix& b, double ridge) {
  if (a.cols() != b.cols()) throw ValidationError("probe tables have different widths");
  Matrix stacked(a.rows() + b.rows(), a.cols());
  std::vector<int> tags;
  Eigen::Index ia = 0, ib = 0, r = 0;
  // Interleave in pairs so that fit/eval rows each alternate domains.
  while (ia < a.rows() || ib < b.rows()) {
    for (int rep = 0; rep < 2 && ia < a.rows(); ++rep) {
      stacked.row(r++) = a.row(ia++);
      tags.push_back(0);
    }
    for (int rep = 0; rep < 2 && ib < b.rows(); ++rep) {
      stacked.row(r++) = b.row(ib++);
      tags.push_back(1);
    }
  }
  return domain_probe_accuracy(stacked, tags, ridge);
}

}  // namespace xdr::retrieval
