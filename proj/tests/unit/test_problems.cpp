#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "../support/oracles.hpp"
#include "fixtures.hpp"
#include "precgd/certify.hpp"
#include "precgd/errors.hpp"
#include "precgd/factored.hpp"
#include "precgd/problems.hpp"
#include "precgd/serialization.hpp"

using namespace precgd;
using oracle::inner;
using oracle::relErr;

TEST_CASE("ground truth has exactly the requested spectrum") {
  for (double kappa : {1.0, 5.0}) {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      const auto s = spectrumForKappa(2, kappa);
      const GroundTruth gt = generateGroundTruth(30, s, seed);
      CHECK(gt.n() == 30);
      CHECK(gt.rank() == 2);
      CHECK(std::abs(gt.kappa() - kappa) <= 1e-12 * kappa);
      CHECK(gt.trace() == doctest::Approx(1.0 + 1.0 / kappa).epsilon(1e-14));
      Eigen::SelfAdjointEigenSolver<Matrix> es(gt.target());
      const Vector ev = es.eigenvalues().reverse();
      CHECK(std::abs(ev(0) - 1.0) < 1e-10);
      CHECK(std::abs(ev(1) - 1.0 / kappa) < 1e-10);
      for (Index i = 2; i < 30; ++i) CHECK(std::abs(ev(i)) < 1e-10);
      Eigen::JacobiSVD<Matrix> svd(gt.target());
      CHECK(svd.singularValues()(2) <= 1e-10 * svd.singularValues()(0));
    }
  }
}

TEST_CASE("experiment spectra") {
  CHECK(spectrumForKappa(2, 1.0) == std::vector<double>{1.0, 1.0});
  CHECK(spectrumForKappa(2, 5.0) == std::vector<double>{1.0, 0.2});
}

TEST_CASE("ground truth is deterministic per seed and validates its spectrum") {
  const std::vector<double> s{2.0, 0.5};
  CHECK(generateGroundTruth(12, s, 7).factor == generateGroundTruth(12, s, 7).factor);
  CHECK(generateGroundTruth(12, s, 7).factor != generateGroundTruth(12, s, 8).factor);
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(generateGroundTruth(12, bad, 0), ParameterError);
  const std::vector<double> neg{1.0, -1.0};
  CHECK_THROWS_AS(generateGroundTruth(12, neg, 0), ParameterError);
  const std::vector<double> unsorted{0.5, 1.0};
  CHECK_THROWS_AS(generateGroundTruth(12, unsorted, 0), ParameterError);
  const std::vector<double> tooMany(5, 1.0);
  CHECK_THROWS_AS(generateGroundTruth(4, tooMany, 0), ParameterError);
}

TEST_CASE("sensing operator and adjoint are mutually adjoint") {
  const SensingOperator op = SensingOperator::sample(7, 40, 3);
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const Matrix M = rng.gaussianMatrix(7, 7);
    const Vector y = rng.gaussianMatrix(40, 1);
    CHECK(relErr(op.apply(M).dot(y), inner(M, op.adjoint(y))) < 1e-12);
  }
  const GroundTruth gt = fixture::truth(7, 2, 1.0, 3);
  for (bool normalize : {false, true}) {
    const MatrixSensingCost model(gt, op, normalize);
    for (int i = 0; i < 10; ++i) {
      const Matrix M = oracle::randomSymmetric(7, rng);
      const Vector y = rng.gaussianMatrix(40, 1);
      CHECK(relErr(model.measure(M).dot(y), inner(M, model.measureAdjoint(y))) < 1e-12);
    }
  }
}

TEST_CASE("sensing value equals the direct sum over measurement matrices") {
  const SensingOperator op = SensingOperator::sample(6, 30, 4);
  const GroundTruth gt = fixture::truth(6, 2, 5.0, 4);
  Rng rng(7);
  for (bool normalize : {false, true}) {
    const MatrixSensingCost model(gt, op, normalize);
    const double scale = normalize ? 1.0 / std::sqrt(30.0) : 1.0;
    const Matrix X = rng.gaussianMatrix(6, 3);
    const Matrix M = X * X.transpose();
    CHECK(relErr(model.value(M), oracle::sensingValueDirect(op, M, gt.target(), scale)) < 1e-12);
    CHECK(relErr(cost(model, X), model.value(M)) < 1e-12);
  }
}

TEST_CASE("sensing defaults and constant Hessian") {
  auto s = fixture::sensing(10, 2, 3, 2);
  const auto* model = dynamic_cast<const MatrixSensingCost*>(s.model.get());
  REQUIRE(model);
  CHECK(model->measurements() == 90);
  CHECK(defaultMeasurements(100, 4) == 1200);
  CHECK(model->value(s.truth.target()) == 0.0);
  CHECK(model->gradient(s.truth.target()).norm() < 1e-10);
  Rng rng(1);
  const Matrix E = oracle::randomSymmetric(10, rng);
  CHECK(model->hessian(oracle::randomSymmetric(10, rng), E) == model->hessian(oracle::randomSymmetric(10, rng), E));
  CHECK(model->lipschitz().gradientEstimated);
}

TEST_CASE("sensing L1 estimate is close to the dense spectral norm") {
  auto s = fixture::sensing(6, 2, 2, 5);
  const auto& model = *s.model;
  // Assemble A*A on an orthonormal basis of symmetric matrices.
  std::vector<Matrix> basis;
  for (Index i = 0; i < 6; ++i)
    for (Index j = i; j < 6; ++j) {
      Matrix B = Matrix::Zero(6, 6);
      if (i == j)
        B(i, i) = 1.0;
      else
        B(i, j) = B(j, i) = 1.0 / std::sqrt(2.0);
      basis.push_back(B);
    }
  const Index p = static_cast<Index>(basis.size());
  Matrix H(p, p);
  for (Index a = 0; a < p; ++a) {
    const Matrix HB = model.hessian(Matrix::Zero(6, 6), basis[a]);
    for (Index b = 0; b < p; ++b) H(b, a) = inner(basis[b], HB);
  }
  const double exact = oracle::symmetricEigenvalues(H).maxCoeff();
  CHECK(model.lipschitz().gradient <= exact * (1 + 1e-10));
  CHECK(model.lipschitz().gradient >= 0.9 * exact);
}

TEST_CASE("gradients are symmetric and Hessians self-adjoint and PSD for every model") {
  Rng rng(9);
  for (const auto& inst : fixture::all(11)) {
    CAPTURE(inst.model->name());
    for (int i = 0; i < 20; ++i) {
      const Matrix X = rng.gaussianMatrix(8, 3);
      const Matrix M = X * X.transpose();
      const Matrix G = inst.model->gradient(M);
      CHECK((G - G.transpose()).norm() <= 1e-8 * std::max(1.0, G.norm()));
      const Matrix E = oracle::randomSymmetric(8, rng), F = oracle::randomSymmetric(8, rng);
      const double a = inner(inst.model->hessian(M, E), F), b = inner(E, inst.model->hessian(M, F));
      CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
      CHECK(inner(inst.model->hessian(M, E), E) >= -1e-8 * E.squaredNorm());
    }
  }
}

TEST_CASE("one-bit model closed forms") {
  auto b = fixture::oneBit(6, 2, 3);
  const auto& model = *b.model;
  CHECK(model.gradient(b.truth.target()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(relErr(model.value(Matrix::Zero(6, 6)), 36.0 * std::log(2.0)) < 1e-14);
  CHECK(model.lipschitz().gradient == 0.25);
  CHECK_FALSE(model.lipschitz().gradientEstimated);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Matrix M = 3.0 * oracle::randomSymmetric(6, rng);
    const Matrix E = oracle::randomSymmetric(6, rng);
    const double q = inner(E, model.hessian(M, E));
    CHECK(q > 0.0);
    CHECK(q <= 0.25 * E.squaredNorm());
  }
}

TEST_CASE("softplus and sigmoid are overflow-safe") {
  CHECK(softplus(1000.0) == 1000.0);
  CHECK(softplus(-1000.0) == 0.0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(sigmoid(-1000.0) == 0.0);
  CHECK(sigmoid(1000.0) == 1.0);
  CHECK(std::isfinite(softplus(1e308)));
}

TEST_CASE("one-bit suboptimality agrees with value differences and stays accurate near the optimum") {
  auto b = fixture::oneBit(6, 2, 4);
  const auto& model = *b.model;
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const Matrix X = b.truth.paddedFactor(3) + 0.5 * rng.gaussianMatrix(6, 3);
    const double direct = model.valueAt(X) - *model.optimalValue();
    CHECK(relErr(model.suboptimalityAt(X), direct) < 1e-9);
  }
  // Tiny perturbation: compare with the quadratic model of the Bregman divergence.
  const Matrix D = 1e-7 * rng.gaussianMatrix(6, 3);
  const Matrix X = b.truth.paddedFactor(3) + D;
  const Matrix E = X * X.transpose() - b.truth.target();
  const double quad = 0.5 * inner(E, model.hessian(b.truth.target(), E));
  CHECK(relErr(model.suboptimalityAt(X), quad) < 1e-5);
  CHECK(model.suboptimalityAt(b.truth.factor) == 0.0);
}

TEST_CASE("phase retrieval closed forms") {
  auto p = fixture::phase(7, 2, 3, 6);
  const auto* model = dynamic_cast<const PhaseRetrievalCost*>(p.model.get());
  REQUIRE(model);
  CHECK(model->measurements() == 63);
  CHECK(model->value(p.truth.target()) < 1e-20);
  CHECK(model->gradient(p.truth.target()).norm() < 1e-10);
  Rng rng(1);
  const Matrix E = oracle::randomSymmetric(7, rng);
  CHECK(model->hessian(Matrix::Zero(7, 7), E) == model->hessian(oracle::randomSymmetric(7, rng), E));
  double sum = 0.0;
  for (Index i = 0; i < 63; ++i) {
    const Vector a = model->vectors().row(i).transpose();
    const double q = a.dot(E * a);
    sum += 2.0 * q * q;
  }
  CHECK(relErr(inner(E, model->hessian(Matrix::Zero(7, 7), E)), sum) < 1e-12);
  const Matrix X = rng.gaussianMatrix(7, 3);
  double direct = 0.0;
  const Matrix M = X * X.transpose();
  for (Index i = 0; i < 63; ++i) {
    const Vector a = model->vectors().row(i).transpose();
    const double d = a.dot(M * a) - a.dot(p.truth.target() * a);
    direct += d * d;
  }
  CHECK(relErr(cost(*model, X), direct) < 1e-12);
}

TEST_CASE("matrix sensing is restricted strongly convex at m = 3nr") {
  auto s = fixture::sensing(12, 2, 3, 13);
  const auto est = oracle::estimateRsc(*s.model, Matrix::Zero(12, 12), 6, 100, 1);
  CHECK(est.mu > 0.0);
  CHECK(est.l >= est.mu);
}

TEST_CASE("initialisation near the truth") {
  const GroundTruth gt = fixture::truth(10, 2, 1.0, 0);
  CHECK(initNearTruth(gt, 2, 0.0, 5) == gt.factor);
  const Matrix Z4 = initNearTruth(gt, 4, 0.0, 5);
  CHECK(Z4.rightCols(2).norm() == 0.0);
  auto s = fixture::sensing(10, 2, 2, 0);
  CHECK(cost(*s.model, initNearTruth(s.truth, 2, 0.0, 1)) == 0.0);
  const Matrix X = initNearTruth(gt, 4, 1e-2, 5);
  CHECK(X == initNearTruth(gt, 4, 1e-2, 5));
  CHECK((X - Z4).norm() == doctest::Approx(1e-2 * std::sqrt(40.0)).epsilon(0.5));
  CHECK_THROWS_AS(initNearTruth(gt, 1, 1e-2, 0), ParameterError);
  CHECK_THROWS_AS(initNearTruth(gt, 3, -1.0, 0), ParameterError);
}

TEST_CASE("random initialisation") {
  CHECK(randomInit(8, 3, 0.5, 4) == randomInit(8, 3, 0.5, 4));
  const Matrix a = randomInit(8, 3, 0.5, 4), b = randomInit(8, 3, 1.0, 4);
  CHECK(relErr(b, Matrix(2.0 * a)) < 1e-15);
  CHECK_THROWS_AS(randomInit(8, 3, 0.0, 0), ParameterError);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) mean += randomInit(100, 4, 0.3, seed).squaredNorm();
  mean /= 100.0;
  CHECK(std::abs(mean - 0.09 * 400) <= 0.1 * 0.09 * 400);
}

TEST_CASE("ground truth and sensing operator serialization round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "precgd-serial-test";
  fs::create_directories(dir);
  const GroundTruth gt = generateGroundTruth(9, std::vector<double>{1.0, 0.2}, 42);
  writeGroundTruth(dir / "gt.bin", gt);
  const GroundTruth back = readGroundTruth(dir / "gt.bin");
  CHECK(back.factor == gt.factor);
  CHECK(back.spectrum == gt.spectrum);
  CHECK(back.seed == 42);
  CHECK(fs::file_size(dir / "gt.bin") == 8 + 32 + 8 * (2 + 18));

  const SensingOperator op = SensingOperator::sample(5, 11, 9);
  writeSensingOperator(dir / "op.bin", op);
  const SensingOperator opBack = readSensingOperator(dir / "op.bin");
  CHECK(opBack.rows == op.rows);
  CHECK(opBack.n == 5);
  CHECK(opBack.seed == 9);

  CHECK_THROWS_AS(readGroundTruth(dir / "op.bin"), IoError);
  CHECK_THROWS_AS(readGroundTruth(dir / "missing.bin"), IoError);
  {
    std::ofstream trunc(dir / "trunc.bin", std::ios::binary);
    trunc.write("PGDTRUTH", 8);
  }
  CHECK_THROWS_AS(readGroundTruth(dir / "trunc.bin"), IoError);
  fs::remove_all(dir);
}
