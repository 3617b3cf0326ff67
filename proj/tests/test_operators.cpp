#include "decoupler/operators.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace decoupler;
using testutil::random_density;
using testutil::random_hermitian;
using testutil::random_matrix;
using testutil::random_psd;

namespace {

MultipartiteOperator op(std::vector<SystemLabel> systems, Matrix m) {
  return MultipartiteOperator(std::move(systems), std::move(m));
}

}  // namespace

TEST_CASE("tensor_product basics") {
  auto i2 = MultipartiteOperator::identity({{"A", 2}});
  auto i3 = MultipartiteOperator::identity({{"B", 3}});
  auto prod = tensor_product(i2, i3);
  CHECK(prod.dim() == 6);
  CHECK((prod.matrix() - Matrix::Identity(6, 6)).norm() == doctest::Approx(0.0));

  auto pi_a = op({{"A", 2}}, Matrix::Identity(2, 2) / 2.0);
  auto pi_b = op({{"B", 2}}, Matrix::Identity(2, 2) / 2.0);
  auto pp = tensor_product(pi_a, pi_b);
  CHECK((pp.matrix() - Matrix::Identity(4, 4) / 4.0).norm() < 1e-15);
  CHECK(pp.systems().size() == 2);

  Matrix sx(2, 2);
  sx << 0, 1, 1, 0;
  auto xx = tensor_product(op({{"A", 2}}, sx), op({{"B", 2}}, sx));
  Vector v00 = Vector::Zero(4);
  v00(0) = 1.0;
  Vector out = xx.matrix() * v00;
  CHECK(std::abs(out(3) - 1.0) < 1e-15);
  CHECK(out.head(3).norm() < 1e-15);

  CHECK_THROWS_AS(tensor_product(i2, op({{"A", 3}}, Matrix::Identity(3, 3))),
                  std::invalid_argument);
}

TEST_CASE("partial_trace") {
  auto x = op({{"A", 2}}, random_hermitian(2, 11));
  auto y = op({{"B", 3}}, random_hermitian(3, 12));
  auto xy = tensor_product(x, y);
  auto keep_y = partial_trace(xy, {"B"});
  CHECK((keep_y.matrix() - x.trace() * y.matrix()).norm() < 1e-12);

  auto phi = max_entangled({"A", 2}, {"B", 2});
  auto marg = partial_trace(phi.to_operator(), {"A"});
  CHECK((marg.matrix() - Matrix::Identity(2, 2) / 2.0).norm() < 1e-12);

  Matrix m = Matrix::Zero(4, 4);
  m(1, 1) = 0.5;  // |01><01|
  m(2, 2) = 0.5;  // |10><10|
  auto mixed = op({{"A", 2}, {"B", 2}}, m);
  auto b = partial_trace(mixed, {"B"});
  CHECK((b.matrix() - Matrix::Identity(2, 2) / 2.0).norm() < 1e-12);

  // Tr[partial_trace(X otimes Y)] = Tr X Tr Y
  auto t = partial_trace(xy, {"A"});
  CHECK(std::abs(t.trace() - x.trace() * y.trace()) < 1e-10);

  CHECK_THROWS_AS(partial_trace(xy, {"C"}), std::invalid_argument);
}

TEST_CASE("permute_systems") {
  auto rho = random_density({{"A", 2}, {"B", 3}}, 7);
  auto same = permute_systems(rho, {"A", "B"});
  CHECK((same.matrix() - rho.matrix()).norm() < 1e-15);
  auto twice = permute_systems(permute_systems(rho, {"B", "A"}), {"A", "B"});
  CHECK((twice.matrix() - rho.matrix()).norm() < 1e-15);

  Matrix m01 = Matrix::Zero(4, 4);
  m01(1, 1) = 1.0;  // |01><01|
  auto swapped = permute_systems(op({{"A", 2}, {"B", 2}}, m01), {"B", "A"});
  CHECK(std::abs(swapped.matrix()(2, 2) - 1.0) < 1e-15);

  // Spectrum unchanged
  auto perm = permute_systems(rho, {"B", "A"});
  Eigen::SelfAdjointEigenSolver<Matrix> e1(rho.matrix()), e2(perm.matrix());
  CHECK((e1.eigenvalues() - e2.eigenvalues()).norm() < 1e-12);

  CHECK_THROWS_AS(permute_systems(rho, {"A", "A"}), std::invalid_argument);
}

TEST_CASE("swap_operator and the swap trick") {
  auto f2 = swap_operator({"A", 2});
  CHECK(std::abs(f2.trace() - 2.0) < 1e-15);
  CHECK((f2.matrix() * f2.matrix() - Matrix::Identity(4, 4)).norm() < 1e-15);
  CHECK(f2.is_hermitian());

  for (int d = 2; d <= 4; ++d) {
    Matrix f = swap_operator({"A", d}).matrix();
    Matrix m = random_matrix(d, d, 100 + d);
    Matrix n = random_matrix(d, d, 200 + d);
    Complex lhs = (Eigen::kroneckerProduct(m, n) * f).trace();
    Complex rhs = (m * n).trace();
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }

  Vector v = random_matrix(3, 1, 5).col(0);
  Vector w = random_matrix(3, 1, 6).col(0);
  Matrix f3 = swap_operator({"A", 3}).matrix();
  Vector vw = Eigen::kroneckerProduct(v, w);
  Vector wv = Eigen::kroneckerProduct(w, v);
  CHECK((f3 * vw - wv).norm() < 1e-12);
}

TEST_CASE("max_entangled") {
  auto phi = max_entangled({"A", 2}, {"A'", 2});
  Vector expect = Vector::Zero(4);
  expect(0) = expect(3) = 1.0 / std::sqrt(2.0);
  CHECK((phi.amplitudes() - expect).norm() < 1e-15);

  auto marg = partial_trace(phi.to_operator(), {"A"});
  CHECK((2.0 * marg.matrix() - Matrix::Identity(2, 2)).norm() < 1e-12);

  // (M x I) Phi = (I x M^T) Phi
  auto phi3 = max_entangled({"A", 3}, {"A'", 3});
  Matrix m = random_matrix(3, 3, 9);
  Matrix id3 = Matrix::Identity(3, 3);
  Vector lhs = Eigen::kroneckerProduct(m, id3) * phi3.amplitudes();
  Vector rhs = Eigen::kroneckerProduct(id3, m.transpose().eval()) * phi3.amplitudes();
  CHECK((lhs - rhs).norm() < 1e-12);

  CHECK_THROWS_AS(max_entangled({"A", 2}, {"A'", 3}), std::invalid_argument);
}

TEST_CASE("pseudo_inverse") {
  Matrix d40 = Matrix::Zero(2, 2);
  d40(0, 0) = 4.0;
  auto r = pseudo_inverse(op({{"A", 2}}, d40), -0.5);
  CHECK(std::abs(r.matrix()(0, 0).real() - 0.5) < 1e-12);
  CHECK(std::abs(r.matrix()(1, 1)) < 1e-12);

  auto id = MultipartiteOperator::identity({{"A", 3}});
  CHECK((pseudo_inverse(id, -1.0).matrix() - Matrix::Identity(3, 3)).norm() < 1e-12);

  Matrix diag = Matrix::Zero(3, 3);
  diag(0, 0) = 0.5;
  diag(1, 1) = 1.0 / 3.0;
  diag(2, 2) = 1.0 / 6.0;
  auto q = pseudo_inverse(op({{"A", 3}}, diag), -0.25);
  CHECK(std::abs(q.matrix()(0, 0).real() - std::pow(2.0, 0.25)) < 1e-12);
  CHECK(std::abs(q.matrix()(1, 1).real() - std::pow(3.0, 0.25)) < 1e-12);
  CHECK(std::abs(q.matrix()(2, 2).real() - std::pow(6.0, 0.25)) < 1e-12);

  // sigma sigma^{-1} sigma = sigma on rank-deficient inputs
  for (int t = 0; t < 5; ++t) {
    auto s = op({{"A", 4}}, random_psd(4, 300 + t, 2));
    Matrix inv = pseudo_inverse(s, -1.0).matrix();
    CHECK((s.matrix() * inv * s.matrix() - s.matrix()).norm() < 1e-9);
  }

  Matrix neg = -Matrix::Identity(2, 2);
  CHECK_THROWS_AS(pseudo_inverse(op({{"A", 2}}, neg), -1.0), std::invalid_argument);
}

TEST_CASE("delta_truncate") {
  auto rho = random_density({{"A", 3}}, 21);
  auto same = delta_truncate(rho, 0.0);
  CHECK((same.matrix() - rho.matrix()).norm() < 1e-12);

  Matrix d = Matrix::Zero(4, 4);
  d(0, 0) = 0.5;
  d(1, 1) = 0.3;
  d(2, 2) = 0.15;
  d(3, 3) = 0.05;
  auto t1 = delta_truncate(op({{"A", 4}}, d), 0.1);
  CHECK(std::abs(t1.trace().real() - 0.95) < 1e-12);
  CHECK(std::abs(t1.matrix()(3, 3)) < 1e-12);
  CHECK(std::abs(t1.matrix()(2, 2).real() - 0.15) < 1e-12);

  auto t2 = delta_truncate(op({{"A", 4}}, d), 0.25);
  CHECK(std::abs(t2.trace().real() - 0.8) < 1e-12);
  CHECK(std::abs(t2.matrix()(2, 2)) < 1e-12);

  CHECK_THROWS_AS(delta_truncate(rho, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(delta_truncate(rho, -0.1), std::invalid_argument);

  // 0 <= result <= rho in PSD order
  for (int t = 0; t < 10; ++t) {
    auto r = random_density({{"A", 5}}, 400 + t);
    auto cut = delta_truncate(r, 0.2);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.matrix() - cut.matrix());
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK(r.trace().real() - cut.trace().real() <= 0.2 + 1e-12);
  }
}

TEST_CASE("schatten norms") {
  auto i4 = MultipartiteOperator::identity({{"A", 4}});
  CHECK(schatten_norm(i4, 1) == doctest::Approx(4.0));
  CHECK(schatten_norm(i4, 2) == doctest::Approx(2.0));

  auto rho = random_density({{"A", 3}, {"B", 2}}, 31);
  CHECK(schatten_norm(rho, 1) == doctest::Approx(1.0));

  CHECK(schatten_norm(swap_operator({"A", 2}), 2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(schatten_norm(rho, 3), std::invalid_argument);
}

TEST_CASE("purify") {
  auto psi = testutil::random_pure({{"A", 3}}, 41);
  auto pure_in = psi.to_operator();
  auto lifted = purify(pure_in, {"P", 2});
  auto back = partial_trace(lifted.to_operator(), {"A"});
  CHECK((back.matrix() - pure_in.matrix()).norm() < 1e-10);

  auto pi2 = op({{"A", 2}}, Matrix::Identity(2, 2) / 2.0);
  auto phi = purify(pi2, {"P", 2});
  CHECK((partial_trace(phi.to_operator(), {"A"}).matrix() - pi2.matrix()).norm() < 1e-10);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.9;
  d(1, 1) = 0.1;
  auto p = purify(op({{"A", 2}}, d), {"P", 2});
  CHECK(std::abs(std::abs(p.amplitudes()(0)) - std::sqrt(0.9)) < 1e-12);
  CHECK(std::abs(std::abs(p.amplitudes()(3)) - std::sqrt(0.1)) < 1e-12);

  CHECK_THROWS_AS(purify(pi2, {"P", 1}), std::invalid_argument);
}

TEST_CASE("norm-ratio bound for conditional marginals") {
  int count = 0;
  for (int da : {2, 3})
    for (int db : {2, 3})
      for (int t = 0; t < 30; ++t) {
        auto rho = op({{"A", da}, {"B", db}},
                      random_psd(da * db, 1000 + 100 * da + 10 * db + t));
        const double joint = (rho.matrix() * rho.matrix()).trace().real();
        Matrix b = partial_trace(rho, {"B"}).matrix();
        const double marg = (b * b).trace().real();
        const double ratio = joint / marg;
        CHECK(ratio >= 1.0 / da - 1e-10);
        CHECK(ratio <= da + 1e-10);
        ++count;
      }
  CHECK(count >= 100);
}

TEST_CASE("weighted Cauchy-Schwarz for the trace norm") {
  for (int t = 0; t < 100; ++t) {
    const long n = 2 + (t % 3);
    Matrix sigma = random_psd(n, 2000 + t);  // full rank, support matches
    Matrix m = random_hermitian(n, 3000 + t);
    auto sig = op({{"A", int(n)}}, sigma);
    Matrix q = pseudo_inverse(sig, -0.25).matrix();
    const double rhs =
        std::sqrt(sigma.trace().real() * ((q * m * q) * (q * m * q)).trace().real());
    const double lhs = trace_norm_hermitian(m);
    CHECK(lhs <= rhs + 1e-9);
  }
}
