#include "oracles.hpp"

#include "xdr/alignment/adjacency.hpp"
#include "xdr/alignment/losses.hpp"
#include "xdr/alignment/topk.hpp"
#include "xdr/core/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace xdr;
using namespace xdr::alignment;
using encoder::FeatureBank;

namespace {

Matrix circle(std::initializer_list<double> degrees) {
  Matrix m(static_cast<int>(degrees.size()), 2);
  int i = 0;
  for (double d : degrees) {
    const double r = d * M_PI / 180.0;
    m(i, 0) = std::cos(r);
    m(i, 1) = std::sin(r);
    ++i;
  }
  return m;
}

FeatureBank make_bank(DomainId domain, int entries, int n_records, int dim, std::mt19937_64& rng) {
  FeatureBank bank(domain, 64);
  const Matrix keys = oracle::random_unit_rows(entries, dim, rng);
  std::uniform_int_distribution<int> rec(0, n_records - 1);
  std::vector<Embedding> push;
  for (int i = 0; i < entries; ++i) push.push_back({keys.row(i).transpose(), domain, rec(rng)});
  bank.push(push);
  return bank;
}

std::vector<std::vector<int>> dense(const MutualAdjacency& a) {
  std::vector<std::vector<int>> m(a.rows(), std::vector<int>(a.cols(), 0));
  for (const auto& [i, j] : a.pairs()) m[i][j] = 1;
  return m;
}

MutualAdjacency random_adjacency(int rows, int cols, AdjacencyMode mode, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution on(p);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < rows; ++i) {
    for (int j = mode == AdjacencyMode::InDomain ? i : 0; j < cols; ++j) {
      if (!on(rng)) continue;
      pairs.emplace_back(i, j);
      if (mode == AdjacencyMode::InDomain) pairs.emplace_back(j, i);
    }
  }
  return MutualAdjacency(rows, cols, mode, pairs);
}

}  // namespace

TEST_CASE("top-k") {
  SUBCASE("one key") {
    const auto r = cosine_topk(circle({0}), circle({45}), 3, false);
    REQUIRE(r[0].size() == 1);
    CHECK(r[0][0].index == 0);
  }
  SUBCASE("points on the circle") {
    const auto t = circle({0, 10, 90, 180});
    const auto r = cosine_topk(t, t, 2, true);
    REQUIRE(r[0].size() == 2);
    CHECK(r[0][0].index == 1);
    CHECK(r[0][0].score == doctest::Approx(0.98480775));
    CHECK(r[0][1].index == 2);
    CHECK(r[0][1].score == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("ties go to the lower index") {
    const auto keys = circle({30, -30, 30});
    const auto r = cosine_topk(circle({0}), keys, 2, false);
    CHECK(r[0][0].index == 0);
    CHECK(r[0][1].index == 1);
  }
  SUBCASE("matches an exhaustive sort") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix t = oracle::random_unit_rows(20, 4, rng);
      for (int k : {1, 3, 7, 19, 25}) {
        for (bool self : {false, true}) {
          const auto r = cosine_topk(t, t, k, self);
          for (int i = 0; i < 20; ++i) {
            const auto ref = oracle::topk(t, i, t, k, self);
            REQUIRE(r[i].size() == ref.size());
            for (std::size_t p = 0; p < ref.size(); ++p) CHECK(r[i][p].index == ref[p]);
            for (std::size_t p = 1; p < r[i].size(); ++p) CHECK(r[i][p].score <= r[i][p - 1].score);
          }
        }
      }
    }
  }
  CHECK_THROWS_AS(cosine_topk(circle({0}), circle({0}), 0, false), ValidationError);
}

TEST_CASE("mutual adjacency") {
  SUBCASE("two mutual nearest neighbours") {
    const auto a = in_domain_adjacency(circle({0, 5}), 1, true);
    CHECK(a.pairs() == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
  }
  SUBCASE("one-sided neighbours drop out") {
    // 0 -> 1, 1 -> 2, 2 -> 1
    const auto a = in_domain_adjacency(circle({0, 20, 25}), 1, true);
    CHECK_FALSE(a.contains(0, 1));
    CHECK(a.contains(1, 2));
    CHECK(a.contains(2, 1));
  }
  SUBCASE("in-domain graphs are symmetric and match brute force") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix t = oracle::random_unit_rows(50, 5, rng);
      const int k = 1 + trial % 12;
      const auto a = in_domain_adjacency(t, k, true);
      CHECK(a.is_symmetric());
      CHECK(dense(a) == oracle::mutual_topk(t, t, k, true));
    }
  }
  SUBCASE("cross-domain graph matches brute force") {
    std::mt19937_64 rng(3);
    const Matrix a = oracle::random_unit_rows(15, 4, rng), b = oracle::random_unit_rows(12, 4, rng);
    for (int k : {1, 3, 6}) {
      const auto m = cross_domain_adjacency(a, b, k);
      CHECK(m.rows() == 15);
      CHECK(m.cols() == 12);
      CHECK(dense(m) == oracle::mutual_topk(a, b, k, false));
      CHECK(dense(transpose(m)) == oracle::mutual_topk(b, a, k, false));
    }
  }
  SUBCASE("raising k keeps every pair") {
    std::mt19937_64 rng(4);
    const Matrix t = oracle::random_unit_rows(30, 3, rng);
    for (int k = 1; k < 29; ++k) {
      const auto lo = in_domain_adjacency(t, k, true), hi = in_domain_adjacency(t, k + 1, true);
      for (const auto& [i, j] : lo.pairs()) CHECK(hi.contains(i, j));
    }
  }
  SUBCASE("text round trip") {
    std::mt19937_64 rng(5);
    const auto m = cross_domain_adjacency(oracle::random_unit_rows(9, 3, rng), oracle::random_unit_rows(7, 3, rng), 3);
    CHECK(MutualAdjacency::from_text(m.to_text()) == m);
    CHECK(m.to_text().rfind("# shape 9 7 cross_domain\n", 0) == 0);
  }
  SUBCASE("checks") {
    CHECK_THROWS_AS(MutualAdjacency(2, 2, AdjacencyMode::InDomain, {{0, 2}}), ValidationError);
    CHECK_THROWS_AS(MutualAdjacency(2, 3, AdjacencyMode::InDomain, {}), ValidationError);
    std::vector<NeighborList> fwd{{{5, 1.0}}}, bwd{{{0, 1.0}}};
    CHECK_THROWS_AS(mutual_adjacency(fwd, bwd, AdjacencyMode::CrossDomain), ValidationError);
  }
}

TEST_CASE("L_aug") {
  SUBCASE("batch of one") {
    const Matrix z = circle({17});
    CHECK(loss_aug(z, z, 0.2).value == 0.0);
  }
  SUBCASE("two orthogonal pairs") {
    const Matrix z = circle({0, 90});
    CHECK(loss_aug(z, z, 0.2).value == doctest::Approx(std::log1p(std::exp(-5.0))).epsilon(1e-12));
    CHECK(loss_aug(z, z, 0.2).value == doctest::Approx(0.0067153).epsilon(1e-4));
  }
  SUBCASE("brute force, permutation and stability") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + trial % 8;
      const Matrix z = oracle::random_unit_rows(n, 5, rng), zh = oracle::random_unit_rows(n, 5, rng);
      const auto v = loss_aug(z, zh, 0.2).value;
      CHECK(std::abs(v - oracle::loss_aug(z, zh, 0.2)) < 1e-9);
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix zp(n, 5), zhp(n, 5);
      for (int i = 0; i < n; ++i) {
        zp.row(i) = z.row(perm[i]);
        zhp.row(i) = zh.row(perm[i]);
      }
      CHECK(std::abs(loss_aug(zp, zhp, 0.2).value - v) < 1e-9);
      CHECK(std::isfinite(loss_aug(z, zh, 0.01).value));
    }
  }
  CHECK_THROWS_AS(loss_aug(circle({0}), circle({0}), 0.0), ValidationError);
  CHECK_THROWS_AS(loss_aug(circle({0}), circle({0, 1}), 0.2), ValidationError);
}

TEST_CASE("neighbour losses") {
  std::mt19937_64 rng(7);
  SUBCASE("no positives") {
    auto bank = make_bank(0, 10, 6, 4, rng);
    const Matrix z = oracle::random_unit_rows(6, 4, rng);
    const std::vector<RecordId> rows{0, 1, 2, 3, 4, 5};
    const MutualAdjacency none(6, 6, AdjacencyMode::InDomain, {});
    CHECK(std::abs(loss_in_domain(z, rows, bank, none, 0.2, 1e-8).value) < 1e-12);
    const MutualAdjacency none_cross(6, 6, AdjacencyMode::CrossDomain, {});
    CHECK(std::abs(loss_cross_domain(z, rows, bank, none_cross, 0.2, 1e-8).value) < 1e-12);
  }
  SUBCASE("single positive that is the only bank entry") {
    FeatureBank bank(0, 4);
    bank.push({Embedding{circle({40}).row(0).transpose(), 0, 1}});
    const MutualAdjacency adj(2, 2, AdjacencyMode::InDomain, {{0, 1}, {1, 0}});
    const std::vector<RecordId> rows{0};
    CHECK(std::abs(loss_in_domain(circle({10}), rows, bank, adj, 0.2, 1e-8).value) < 1e-12);
  }
  SUBCASE("random instances match the triple loop") {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + trial % 8, n_rec = 10, entries = 1 + trial % 16;
      auto bank = make_bank(1, entries, n_rec, 4, rng);
      const Matrix z = oracle::random_unit_rows(n, 4, rng);
      std::vector<RecordId> rows(n);
      std::uniform_int_distribution<int> r(0, n_rec - 1);
      for (auto& x : rows) x = r(rng);
      const auto in = random_adjacency(n_rec, n_rec, AdjacencyMode::InDomain, 0.3, rng);
      const auto cross = random_adjacency(n_rec, n_rec, AdjacencyMode::CrossDomain, 0.3, rng);
      const auto ob = oracle::copy_bank(bank);
      CHECK(std::abs(loss_in_domain(z, rows, bank, in, 0.2, 1e-8).value -
                     oracle::loss_neighbour(z, rows, ob, dense(in), 0.2, 1e-8)) < 1e-9);
      CHECK(std::abs(loss_cross_domain(z, rows, bank, cross, 0.2, 1e-8).value -
                     oracle::loss_neighbour(z, rows, ob, dense(cross), 0.2, 1e-8)) < 1e-9);
    }
  }
  SUBCASE("identical tables: cross equals in-domain") {
    const Matrix t = oracle::random_unit_rows(8, 4, rng);
    FeatureBank a(0, 16), b(1, 16);
    std::vector<Embedding> ea, eb;
    for (int i = 0; i < 8; ++i) {
      ea.push_back({t.row(i).transpose(), 0, i});
      eb.push_back({t.row(i).transpose(), 1, i});
    }
    a.push(ea);
    b.push(eb);
    const auto in = in_domain_adjacency(t, 1, false);
    const auto cross = cross_domain_adjacency(t, t, 1);
    CHECK(in.nnz() == 8);
    const Matrix z = oracle::random_unit_rows(5, 4, rng);
    const std::vector<RecordId> rows{0, 2, 4, 6, 7};
    CHECK(loss_cross_domain(z, rows, b, cross, 0.2, 1e-8).value == loss_in_domain(z, rows, a, in, 0.2, 1e-8).value);
  }
  SUBCASE("errors") {
    FeatureBank empty(0, 4);
    const MutualAdjacency in(2, 2, AdjacencyMode::InDomain, {});
    const MutualAdjacency cross(2, 2, AdjacencyMode::CrossDomain, {});
    const std::vector<RecordId> rows{0};
    CHECK_THROWS_AS(loss_in_domain(circle({0}), rows, empty, in, 0.2, 1e-8), ValidationError);
    auto bank = make_bank(0, 3, 2, 2, rng);
    CHECK_THROWS_AS(loss_in_domain(circle({0}), rows, bank, in, -1.0, 1e-8), ValidationError);
    CHECK_THROWS_AS(loss_in_domain(circle({0}), rows, bank, cross, 0.2, 1e-8), ValidationError);
    CHECK_THROWS_AS(loss_cross_domain(circle({0}), rows, bank, in, 0.2, 1e-8), ValidationError);
  }
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 6;
    const Matrix z = oracle::random_unit_rows(n, 4, rng), zh = oracle::random_unit_rows(n, 4, rng);
    const auto aug = loss_aug(z, zh, 0.2);
    auto f_aug = [&](const std::vector<double>& v) { return loss_aug(oracle::unflatten(v, n, 4), zh, 0.2).value; };
    CHECK(oracle::rel_error(oracle::flatten(aug.grad), oracle::central_diff(f_aug, oracle::flatten(z), 1e-6)) < 1e-4);

    auto bank = make_bank(0, 12, 8, 4, rng);
    std::vector<RecordId> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = i;
    for (auto mode : {AdjacencyMode::InDomain, AdjacencyMode::CrossDomain}) {
      const auto adj = random_adjacency(8, 8, mode, 0.5, rng);
      auto eval = [&](const Matrix& zz) {
        return mode == AdjacencyMode::InDomain ? loss_in_domain(zz, rows, bank, adj, 0.2, 1e-8)
                                               : loss_cross_domain(zz, rows, bank, adj, 0.2, 1e-8);
      };
      const auto l = eval(z);
      auto f = [&](const std::vector<double>& v) { return eval(oracle::unflatten(v, n, 4)).value; };
      const auto fd = oracle::central_diff(f, oracle::flatten(z), 1e-6);
      double scale = 0.0;
      for (double g : fd) scale = std::max(scale, std::abs(g));
      if (scale == 0.0) {
        CHECK(l.grad.norm() == 0.0);
      } else {
        CHECK(oracle::rel_error(oracle::flatten(l.grad), fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("stage compositions") {
  CHECK(compose_pa1(0.7, 0.2, 0.3, 0.0) == 0.7);
  CHECK(compose_pa1(1.0, 0.5, 0.5, 0.5) == 1.5);
  CHECK(compose_pa1(0.3, 0.25, 0.5, 1.0) - compose_pa1(0.3, 0.25, 0.5, 0.0) == doctest::Approx(0.75));
  CHECK(compose_pa2(0.2, 0.3, 9.0, 9.0, 0.0) == doctest::Approx(0.5));
  CHECK(compose_pa2(1, 1, 1, 1, 1) == 4.0);
  CHECK(compose_pa2(0.2, 0.3, 0.1, 0.1, 5.0) == doctest::Approx(1.5));
}
