#include <gtest/gtest.h>

#include <random>

#include "spoofres/error.hpp"
#include "spoofres/lti.hpp"

using namespace spoofres;

namespace {

Eigen::MatrixXd sample_a() {
  Eigen::MatrixXd a(2, 2);
  a << 0.98, 0.02, -0.04, 1.04;
  return a;
}

Eigen::MatrixXd sample_psi() {
  Eigen::MatrixXd psi(2, 2);
  psi << 0.1, 1, 0.2, 1;
  return psi;
}

LtiSystem sample_system() { return {sample_a(), Eigen::Vector2d(2, 5)}; }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Diagonalize, SampleSystemWithGivenPsi) {
  const auto d = diagonalize(sample_system(), sample_psi());
  EXPECT_NEAR(d.eigenvalues[0], 1.02, 1e-12);
  EXPECT_NEAR(d.eigenvalues[1], 1.0, 1e-12);
  const Eigen::MatrixXd a_bar = d.psi_inv * sample_a() * d.psi;
  EXPECT_LT((a_bar - d.a_bar()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(d.unstable_modes, (std::vector<ModeIndex>{0, 1}));
}

TEST(Diagonalize, IdentityIsNotSimple) {
  EXPECT_EQ(code_of([] { diagonalize({Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d::Zero()}); }),
            ErrorCode::NonSimpleSpectrum);
}

TEST(Diagonalize, DiagonalWithoutPsi) {
  Eigen::MatrixXd a = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  const auto d = diagonalize({a, Eigen::Vector2d(1, 1)});
  EXPECT_NEAR(d.eigenvalues[0], 0.5, 1e-12);
  EXPECT_NEAR(d.eigenvalues[1], 2.0, 1e-12);
  EXPECT_EQ(d.unstable_modes, (std::vector<ModeIndex>{1}));
  // Columns of psi may be scaled but must stay aligned with the axes.
  EXPECT_NEAR(std::abs(d.psi(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d.psi(1, 0)), 0.0, 1e-12);
}

TEST(Diagonalize, RotationIsComplex) {
  Eigen::MatrixXd a(2, 2);
  a << 0, -1, 1, 0;
  EXPECT_EQ(code_of([&] { diagonalize({a, Eigen::Vector2d::Zero()}); }), ErrorCode::ComplexSpectrum);
}

TEST(Diagonalize, SingularPsiRejected) {
  Eigen::MatrixXd psi(2, 2);
  psi << 1, 2, 2, 4;
  EXPECT_EQ(code_of([&] { diagonalize(sample_system(), psi); }), ErrorCode::SingularPsi);
}

TEST(Diagonalize, PsiThatDoesNotDiagonalize) {
  EXPECT_EQ(code_of([&] { diagonalize(sample_system(), Eigen::MatrixXd::Identity(2, 2)); }),
            ErrorCode::PsiNotDiagonalizing);
}

TEST(Diagonalize, UnstableIsStrict) {
  Eigen::MatrixXd a = Eigen::Vector3d(-1.0, 0.999, 1.0).asDiagonal();
  const auto d = diagonalize({a, Eigen::Vector3d::Zero()});
  EXPECT_EQ(d.unstable_modes.size(), 2u);
}

TEST(TransformInitial, SampleValues) {
  const auto sys = sample_system();
  const auto d = diagonalize(sys, sample_psi());
  const Eigen::VectorXd z0 = transform_initial(sys, d);
  EXPECT_NEAR(z0[0], 30.0, 1e-10);
  EXPECT_NEAR(z0[1], -1.0, 1e-10);
  EXPECT_NEAR((d.z0 - z0).norm(), 0.0, 1e-14);
}

TEST(TransformInitial, ZeroAndIdentity) {
  auto sys = sample_system();
  sys.x0 = Eigen::Vector2d::Zero();
  EXPECT_EQ(transform_initial(sys, diagonalize(sys, sample_psi())).norm(), 0.0);
  Eigen::MatrixXd a = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  LtiSystem plain{a, Eigen::Vector2d(1, 0)};
  const auto d = diagonalize(plain, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(transform_initial(plain, d), Eigen::VectorXd(Eigen::Vector2d(1, 0)));
}

TEST(TransformInitial, RoundTripRandom) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 8;
    Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) psi(i, j) += 0.3 * u(rng);
    }
    if (std::abs(psi.determinant()) < 0.1) continue;
    Eigen::VectorXd lam(n);
    for (int j = 0; j < n; ++j) lam[j] = -1.5 + 3.0 * (j + 0.5) / n;
    const Eigen::MatrixXd a = psi * lam.asDiagonal() * psi.inverse();
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = 10 * u(rng);
    const auto d = diagonalize({a, x}, psi);
    EXPECT_LT((d.psi * d.z0 - x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(DetectableModes, SampleObservations) {
  const auto d = diagonalize(sample_system(), sample_psi());
  Eigen::MatrixXd c1(1, 2);
  c1 << -10, 10;
  const auto s1 = detectable_modes(make_observation(0, c1, d));
  EXPECT_EQ(s1.detectable, (std::vector<ModeIndex>{0}));
  EXPECT_EQ(s1.undetectable, (std::vector<ModeIndex>{1}));
  Eigen::MatrixXd c2(1, 2);
  c2 << 2, -1;
  const auto s2 = detectable_modes(make_observation(4, c2, d));
  EXPECT_EQ(s2.detectable, (std::vector<ModeIndex>{1}));
  const auto s3 = detectable_modes(make_observation(8, Eigen::MatrixXd::Zero(1, 2), d));
  EXPECT_TRUE(s3.detectable.empty());
  EXPECT_EQ(s3.undetectable.size(), 2u);
}

TEST(DetectableModes, FullRankSeesEverything) {
  Eigen::MatrixXd a = Eigen::Vector3d(0.5, 1.2, 2.0).asDiagonal();
  const auto d = diagonalize({a, Eigen::Vector3d::Zero()}, Eigen::MatrixXd::Identity(3, 3));
  const auto s = detectable_modes(make_observation(0, Eigen::MatrixXd::Identity(3, 3), d));
  EXPECT_EQ(s.detectable, (std::vector<ModeIndex>{0, 1, 2}));
}

TEST(DetectableModes, RowScalingInvariant) {
  const auto d = diagonalize(sample_system(), sample_psi());
  Eigen::MatrixXd c(2, 2);
  c << -10, 10, 0.3, 0.7;
  const auto base = detectable_modes(make_observation(0, c, d));
  for (double s : {1e-8, 1e-3, 7.0, 1e6}) {
    Eigen::MatrixXd scaled = c;
    scaled.row(0) *= s;
    scaled.row(1) *= -s;
    const auto got = detectable_modes(make_observation(0, scaled, d));
    EXPECT_EQ(got.detectable, base.detectable) << s;
  }
}

TEST(SourceSets, SampleGroups) {
  const auto d = diagonalize(sample_system(), sample_psi());
  std::map<NodeId, ModeSplit> splits;
  Eigen::MatrixXd c1(1, 2), c2(1, 2);
  c1 << -10, 10;
  c2 << 2, -1;
  for (NodeId i = 0; i < 13; ++i) {
    const Eigen::MatrixXd c = i < 4 ? c1 : (i < 8 ? c2 : Eigen::MatrixXd::Zero(1, 2));
    splits[i] = detectable_modes(make_observation(i, c, d));
  }
  const auto s = source_sets(splits, d.unstable_modes);
  EXPECT_EQ(s.at(0), (NodeSet{0, 1, 2, 3}));
  EXPECT_EQ(s.at(1), (NodeSet{4, 5, 6, 7}));
}

TEST(SourceSets, EmptyAndSingle) {
  const auto d = diagonalize(sample_system(), sample_psi());
  std::map<NodeId, ModeSplit> blind;
  for (NodeId i = 0; i < 3; ++i) blind[i] = detectable_modes(make_observation(i, Eigen::MatrixXd::Zero(1, 2), d));
  const auto empty = source_sets(blind, {0, 1});
  EXPECT_TRUE(empty.at(0).empty());
  EXPECT_TRUE(empty.at(1).empty());
  blind[1] = detectable_modes(make_observation(1, d.psi_inv, d));
  const auto single = source_sets(blind, {0, 1});
  EXPECT_EQ(single.at(0), NodeSet{1});
  EXPECT_EQ(single.at(1), NodeSet{1});
}

TEST(StepTruth, SampleAndTrivial) {
  const auto d = diagonalize(sample_system(), sample_psi());
  const Eigen::VectorXd z1 = step_truth(Eigen::Vector2d(30, -1), d);
  EXPECT_NEAR(z1[0], 30.6, 1e-12);
  EXPECT_NEAR(z1[1], -1.0, 1e-12);
  EXPECT_EQ(step_truth(Eigen::Vector2d::Zero(), d).norm(), 0.0);
  Eigen::VectorXd z = Eigen::Vector2d(0, 4.5);
  for (int k = 0; k < 100; ++k) z = step_truth(z, d);
  EXPECT_NEAR(z[1], 4.5, 1e-9);
}

TEST(StepTruth, AgreesWithPlant) {
  const auto sys = sample_system();
  const auto d = diagonalize(sys, sample_psi());
  Eigen::VectorXd z = d.z0;
  Eigen::VectorXd x = sys.x0;
  for (int k = 0; k < 200; ++k) {
    z = step_truth(z, d);
    x = sys.a * x;
    EXPECT_LT((x - d.psi * z).cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff()), 1e-9);
  }
}
