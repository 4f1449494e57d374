#include <doctest.h>

#include <cmath>
#include <vector>

#include "infoop/error.hpp"
#include "infoop/info_operator.hpp"
#include "infoop/random.hpp"

using namespace infoop;

namespace {

double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

Matrix random_spd(Rng& rng, Index n) {
  const Matrix a = rng.normal_matrix(n, n);
  return a * a.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

double max_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("assemble_info identity and hand cases") {
  ObservationBlock id(Matrix::Identity(2, 2), NoiseCovariance::isotropic(2, 1.0));
  CHECK(rel_diff(assemble_info(id).dense(), Matrix::Identity(2, 2)) == 0.0);

  Vector jd(2);
  jd << 1.0, 2.0;
  Vector rd(2);
  rd << 1.0, 4.0;
  ObservationBlock b(jd.asDiagonal().toDenseMatrix(), NoiseCovariance::diagonal(rd));
  CHECK((assemble_info(b).dense() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  Matrix row(1, 2);
  row << 1.0, 1.0;
  const Matrix info = assemble_info(ObservationBlock(row, NoiseCovariance::isotropic(1, 1.0))).dense();
  Matrix expected(2, 2);
  expected << 1, 1, 1, 1;
  CHECK(rel_diff(info, expected) == 0.0);
  CHECK(numerical_rank(info) == 1);
}

TEST_CASE("empty block gives zero operator") {
  ObservationBlock empty(Matrix(0, 4), NoiseCovariance::diagonal(Vector(0)));
  const InfoOperator op = assemble_info(empty);
  CHECK(op.dim() == 4);
  CHECK(op.dense().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise covariance errors") {
  Vector bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS(NoiseCovariance::diagonal(bad), CovarianceError);
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(NoiseCovariance::dense(indefinite), CovarianceError);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.0, 1;
  CHECK_THROWS_AS(NoiseCovariance::dense(asym), CovarianceError);
  CHECK_THROWS_AS(ObservationBlock(Matrix::Ones(3, 2), NoiseCovariance::isotropic(2, 1.0)),
                  DimensionError);
}

TEST_CASE("dense correlated noise matches explicit inverse") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix j = rng.normal_matrix(6, 4);
    const Matrix r = random_spd(rng, 6);
    const Matrix expected = j.transpose() * r.inverse() * j;
    const Matrix got = assemble_info(ObservationBlock(j, NoiseCovariance::dense(r))).dense();
    CHECK(rel_diff(got, expected) < 1e-11);
  }
}

TEST_CASE("add_blocks") {
  Rng rng(1);
  const Matrix a = random_spd(rng, 3);
  const InfoOperator ops_zero[] = {InfoOperator::zero(3), InfoOperator::from_dense(a)};
  CHECK(rel_diff(add_blocks(ops_zero).dense(), a) == 0.0);

  Matrix r1(1, 3), r2(1, 3);
  r1 << 1, 0, 0;
  r2 << 0, 1, 0;
  const InfoOperator rank1[] = {
      assemble_info(ObservationBlock(r1, NoiseCovariance::isotropic(1, 1.0))),
      assemble_info(ObservationBlock(r2, NoiseCovariance::isotropic(1, 1.0)))};
  CHECK(numerical_rank(add_blocks(rank1).dense()) == 2);

  const InfoOperator mismatch[] = {InfoOperator::zero(3), InfoOperator::zero(4)};
  CHECK_THROWS_AS(add_blocks(mismatch), DimensionError);
}

TEST_CASE("add_blocks PSD ordering and mixed representations") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const ObservationBlock b1(rng.normal_matrix(3, 5), NoiseCovariance::isotropic(3, 0.5));
    const ObservationBlock b2(rng.normal_matrix(4, 5), NoiseCovariance::isotropic(4, 2.0));
    const InfoOperator dense[] = {assemble_info(b1), assemble_info(b2)};
    const Matrix sum = add_blocks(dense).dense();
    CHECK(min_eig(sum - dense[0].dense()) >= -1e-10 * max_eig(sum));
    CHECK(min_eig(sum - dense[1].dense()) >= -1e-10 * max_eig(sum));

    const InfoOperator mixed[] = {assemble_info(b1), assemble_action(b2)};
    const InfoOperator composed = add_blocks(mixed);
    CHECK_FALSE(composed.is_dense());
    const Vector v = rng.normal_vector(5);
    CHECK((composed.apply(v) - sum * v).norm() <= 1e-12 * (sum * v).norm());
  }
}

TEST_CASE("assemble_joint") {
  Rng rng(3);
  const ObservationBlock b1(rng.normal_matrix(2, 3), NoiseCovariance::isotropic(2, 0.3));
  const ObservationBlock b2(rng.normal_matrix(3, 3), NoiseCovariance::isotropic(3, 1.7));
  Matrix joint = Matrix::Zero(5, 5);
  joint.topLeftCorner(2, 2) = 0.3 * Matrix::Identity(2, 2);
  joint.bottomRightCorner(3, 3) = 1.7 * Matrix::Identity(3, 3);
  const ObservationBlock blocks[] = {b1, b2};
  const InfoOperator sums[] = {assemble_info(b1), assemble_info(b2)};
  CHECK(rel_diff(assemble_joint(blocks, joint).dense(), add_blocks(sums).dense()) < 1e-12);

  // two identical scalar rows with correlation rho_c
  Matrix row(1, 2);
  row << 1.0, -0.5;
  const ObservationBlock single(row, NoiseCovariance::isotropic(1, 1.0));
  const Matrix row_info = assemble_info(single).dense();
  const ObservationBlock pair[] = {single, single};
  for (double rho_c : {0.0, 0.9}) {
    Matrix cov(2, 2);
    cov << 1.0, rho_c, rho_c, 1.0;
    const Matrix got = assemble_joint(pair, cov).dense();
    CHECK(rel_diff(got, 2.0 / (1.0 + rho_c) * row_info) < 1e-12);
  }

  Matrix not_spd(2, 2);
  not_spd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(assemble_joint(pair, not_spd), CovarianceError);
}

TEST_CASE("apply and the Gramian identity") {
  Rng rng(4);
  ObservationBlock ident(Matrix::Identity(4, 4), NoiseCovariance::isotropic(4, 1.0));
  const Vector v = rng.normal_vector(4);
  CHECK((apply(assemble_info(ident), v) - v).norm() == 0.0);

  Matrix row(1, 2);
  row << 1.0, 2.0;
  Vector perp(2);
  perp << 2.0, -1.0;
  CHECK(apply(assemble_info(ObservationBlock(row, NoiseCovariance::isotropic(1, 1.0))), perp)
            .norm() == 0.0);

  for (int trial = 0; trial < 200; ++trial) {
    const Index ny = 1 + static_cast<Index>(rng.uniform() * 8);
    const Index n = 1 + static_cast<Index>(rng.uniform() * 6);
    Vector var(ny);
    for (Index i = 0; i < ny; ++i) var(i) = 0.1 + rng.uniform();
    const ObservationBlock b(rng.normal_matrix(ny, n), NoiseCovariance::diagonal(var));
    const Vector x = rng.normal_vector(n);
    const Vector jx = b.jacobian() * x;
    const double direct = jx.cwiseQuotient(var).dot(jx);
    CHECK(std::abs(quadratic_form(assemble_info(b), x) - direct) <= 1e-10 * direct);
    CHECK(std::abs(weighted_output_energy(b, x) - direct) <= 1e-10 * direct);
    const Vector dense_apply = assemble_info(b).dense() * x;
    CHECK((assemble_action(b).apply(x) - dense_apply).norm() <= 1e-12 * dense_apply.norm() + 1e-300);
  }

  const ObservationBlock iso(Matrix::Identity(3, 3), NoiseCovariance::isotropic(3, 0.25));
  const Vector w = rng.normal_vector(3);
  CHECK(quadratic_form(assemble_info(iso), w) == doctest::Approx(w.squaredNorm() / 0.25));
  CHECK(quadratic_form(assemble_info(iso), Vector::Zero(3)) == 0.0);
  CHECK_THROWS_AS(apply(assemble_info(iso), Vector::Zero(2)), DimensionError);
}

TEST_CASE("bilinear form is symmetric") {
  Rng rng(5);
  const ObservationBlock b(rng.normal_matrix(5, 4), NoiseCovariance::isotropic(5, 2.0));
  const InfoOperator op = assemble_info(b);
  const Vector u = rng.normal_vector(4), v = rng.normal_vector(4);
  CHECK(bilinear_form(op, u, v) == doctest::Approx(bilinear_form(op, v, u)).epsilon(1e-12));
  CHECK(bilinear_form(op, u, u) == doctest::Approx(quadratic_form(op, u)).epsilon(1e-12));
}

TEST_CASE("transform congruence") {
  Rng rng(6);
  const ObservationBlock b(rng.normal_matrix(5, 4), NoiseCovariance::isotropic(5, 1.0));
  const InfoOperator op = assemble_info(b);
  CHECK(rel_diff(transform(op, Matrix::Identity(4, 4)).dense(), op.dense()) < 1e-15);
  CHECK(rel_diff(transform(op, 2.0 * Matrix::Identity(4, 4)).dense(), 4.0 * op.dense()) < 1e-15);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix t1 = rng.normal_matrix(4, 3);
    const Matrix t2 = rng.normal_matrix(3, 5);
    const Matrix nested = transform(transform(op, t1), t2).dense();
    const Matrix direct = transform(op, t1 * t2).dense();
    CHECK(rel_diff(nested, direct) < 1e-12);
    CHECK(min_eig(direct) >= -1e-10 * max_eig(direct));
  }
  CHECK_THROWS_AS(transform(op, Matrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("covariance inflation") {
  Rng rng(8);
  const ObservationBlock b(rng.normal_matrix(4, 3), NoiseCovariance::isotropic(4, 1.0));
  const Matrix base = assemble_info(b).dense();
  CHECK(rel_diff(assemble_info(inflate_covariance(b, Matrix::Zero(4, 4))).dense(), base) < 1e-15);
  CHECK(rel_diff(assemble_info(inflate_covariance(b, Matrix::Identity(4, 4))).dense(), 0.5 * base) <
        1e-14);

  // rank-1 inflation: loss is confined to the pullback of the inflated direction
  const Vector dir = rng.normal_vector(4).normalized();
  const Matrix c = 3.0 * dir * dir.transpose();
  const Matrix loss = base - assemble_info(inflate_covariance(b, c)).dense();
  // Sherman-Morrison: (I + c d d^T)^-1 = I - c/(1+c) d d^T
  const Vector pull = b.jacobian().transpose() * dir;
  CHECK(rel_diff(loss, 3.0 / 4.0 * pull * pull.transpose()) < 1e-12);
  CHECK(numerical_rank(loss, 1e-9) == 1);
  CHECK_THROWS_AS(inflate_covariance(b, Matrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("schur complement") {
  Rng rng(9);
  JointInfoBlocks decoupled;
  decoupled.mm = random_spd(rng, 2);
  decoupled.mn = Matrix::Zero(2, 1);
  decoupled.nm = Matrix::Zero(1, 2);
  decoupled.nn = Matrix::Constant(1, 1, 3.0);
  CHECK(rel_diff(schur_complement(decoupled).dense(), decoupled.mm) < 1e-15);

  Matrix jm(3, 1);
  jm << 1.0, 2.0, -1.0;
  const JointInfoBlocks confounded =
      JointInfoBlocks::from_jacobians(jm, jm, NoiseCovariance::isotropic(3, 1.0));
  CHECK(std::abs(schur_complement(confounded).dense()(0, 0)) < 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const Matrix joint = random_spd(rng, 3);
    const JointInfoBlocks blocks = JointInfoBlocks::partition(joint, 2);
    const Matrix marginal_cov = joint.inverse().topLeftCorner(2, 2);
    CHECK(rel_diff(schur_complement(blocks).dense(), marginal_cov.inverse()) < 1e-10);
  }

  // singular nuisance block handled by the generalized inverse
  Matrix jn(3, 2);
  jn << 1, 1, 2, 2, 0, 0;
  Matrix jm2(3, 2);
  jm2 << 1, 0, 0, 1, 1, 1;
  const JointInfoBlocks singular =
      JointInfoBlocks::from_jacobians(jm2, jn, NoiseCovariance::isotropic(3, 1.0));
  const Matrix eff = schur_complement(singular).dense();
  CHECK(min_eig(singular.mm - eff) >= -1e-10 * max_eig(singular.mm));
  Vector nvec(3);
  nvec << 1, 2, 0;
  const Matrix jm_proj = jm2 - nvec * (nvec.transpose() * jm2) / nvec.squaredNorm();
  CHECK(rel_diff(eff, jm_proj.transpose() * jm_proj) < 1e-10);
}

TEST_CASE("ellipsoid axes") {
  Vector d(2);
  d << 4.0, 1.0;
  const auto axes = ellipsoid_axes(InfoOperator::from_dense(d.asDiagonal().toDenseMatrix()));
  REQUIRE(axes.size() == 2);
  CHECK(axes[0].length == doctest::Approx(0.5));
  CHECK(axes[1].length == doctest::Approx(1.0));

  Matrix rank1(2, 2);
  rank1 << 1, 1, 1, 1;
  const auto deficient = ellipsoid_axes(InfoOperator::from_dense(rank1));
  CHECK(deficient[0].bounded);
  CHECK_FALSE(deficient[1].bounded);
  CHECK(std::isinf(deficient[1].length));

  Rng rng(10);
  const Matrix spd = random_spd(rng, 3);
  Eigen::SelfAdjointEigenSolver<Matrix> es(spd);
  const auto axes3 = ellipsoid_axes(InfoOperator::from_dense(spd));
  for (Index i = 0; i < 3; ++i) {
    const double lam = es.eigenvalues()(2 - i);
    CHECK(axes3[static_cast<std::size_t>(i)].length == doctest::Approx(1.0 / std::sqrt(lam)));
  }
}

TEST_CASE("rank bound on random blocks") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Index ny = 1 + static_cast<Index>(rng.uniform() * 10);
    const Index n = 1 + static_cast<Index>(rng.uniform() * 10);
    const ObservationBlock b(rng.normal_matrix(ny, n), NoiseCovariance::isotropic(ny, 1.0));
    const Matrix info = assemble_info(b).dense();
    CHECK(numerical_rank(info) <= std::min(ny, n));
    CHECK(is_symmetric_psd(info));
    CHECK((info - info.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * info.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("from_dense rejects asymmetric input") {
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  CHECK_THROWS_AS(InfoOperator::from_dense(asym), DimensionError);
  const InfoOperator act = InfoOperator::from_action(2, [](const Vector& v) { return v; });
  CHECK_THROWS(act.dense());
  CHECK(rel_diff(act.to_dense(), Matrix::Identity(2, 2)) == 0.0);
}
