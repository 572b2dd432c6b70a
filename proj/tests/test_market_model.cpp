#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "test_support.hpp"

namespace ifport {
namespace {

using testing::reference_model;

TEST(MarketModel, LoadsReferenceInstance) {
  const auto m = reference_model();
  ASSERT_EQ(m.size(), 7);
  EXPECT_EQ(m.labels()[1], "StC2");
  EXPECT_EQ(m.mean_returns()[1], 0.0462);
  EXPECT_EQ(m.mean_returns()[4], 0.01536);
  EXPECT_EQ(m.covariance()(0, 0), 0.0119);
  EXPECT_EQ(m.covariance()(0, 5), -0.0008);
  EXPECT_EQ(m.covariance()(6, 6), 0.0130);
  EXPECT_EQ(m.risk_free_rate(), 0.005);
  EXPECT_FALSE(m.repaired());
}

TEST(MarketModel, VarianceAtVertexIsDiagonalEntry) {
  const auto m = reference_model();
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const Vector e = PortfolioWeights::vertex(m.size(), k).vector();
    EXPECT_EQ(e.dot(m.covariance() * e), m.covariance()(k, k));
  }
}

TEST(MarketModel, AsymmetricCovarianceIsRejected) {
  const std::string text =
      "[assets]\nA,B\n[mean_returns]\n0.01,0.02\n[covariance]\n0.01,0.002\n0.003,0.02\n"
      "[risk_free_rate]\n0\n";
  try {
    parse_model(text);
    FAIL() << "expected InvariantViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvariantViolation);
    EXPECT_NE(std::string(e.what()).find("symmetry"), std::string::npos);
  }
}

TEST(MarketModel, IndefiniteCovarianceIsRejectedNearPsdRepaired) {
  Matrix far(2, 2);
  far << 0.01, 0.02, 0.02, 0.01;  // eigenvalues 0.03, -0.01
  try {
    MarketModel::create({}, Vector::Constant(2, 0.01), far, 0.0);
    FAIL() << "expected InvariantViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvariantViolation);
    EXPECT_NE(std::string(e.what()).find("psd"), std::string::npos);
  }

  Matrix near(2, 2);
  near << 0.01, 0.01 + 1e-9, 0.01 + 1e-9, 0.01;  // smallest eigenvalue -1e-9
  const auto m = MarketModel::create({}, Vector::Constant(2, 0.01), near, 0.0);
  EXPECT_TRUE(m.repaired());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.covariance());
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * eig.eigenvalues().maxCoeff());
}

TEST(MarketModel, DiagonalMustBePositive) {
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 0.01;
  EXPECT_THROW(MarketModel::create({}, Vector::Constant(2, 0.01), q, 0.0), Error);
}

TEST(MarketModel, ParseErrors) {
  auto kind_of = [](const std::string& text) {
    try {
      parse_model(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ConfigError;  // sentinel: no error
  };
  EXPECT_EQ(kind_of("[assets]\nA,B\n"), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("[assets]\nA,B\n[mean_returns]\n0.01,zz\n[covariance]\n1,0\n0,1\n[risk_free_rate]\n0\n"),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of("[assets]\nA,B\n[mean_returns]\n0.01,0.02\n[covariance]\n1,0\n0\n[risk_free_rate]\n0\n"),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of("[bogus]\n1\n"), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("[assets]\nA\n[mean_returns]\n0.01\n[covariance]\n1\n[risk_free_rate]\n0\n"),
            ErrorKind::InvariantViolation);
}

TEST(MarketModel, ScientificNotationAndComments) {
  const auto m = parse_model(
      "# header\n[assets]\nX, Y  # trailing\n[mean_returns]\n1e-2, +2.5E-2\n[covariance]\n"
      "4e-3, 1e-3\n1e-3, 9e-3\n\n[risk_free_rate]\n-1e-3\n");
  EXPECT_EQ(m.labels()[1], "Y");
  EXPECT_EQ(m.mean_returns()[1], 0.025);
  EXPECT_EQ(m.risk_free_rate(), -0.001);
}

// Decimal inputs with up to 10 significant digits survive save/load bit-exactly.
TEST(MarketModel, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long long> mantissa(-9'999'999'999LL, 9'999'999'999LL);
  std::uniform_int_distribution<int> exponent(-14, -1);
  auto decimal = [&] { return std::to_string(mantissa(rng)) + "e" + std::to_string(exponent(rng)); };

  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    std::string text = "[assets]\n";
    for (int k = 0; k < n; ++k) text += (k ? "," : "") + std::string("S") + std::to_string(k);
    text += "\n[mean_returns]\n";
    for (int k = 0; k < n; ++k) text += (k ? "," : "") + decimal();
    // Diagonally dominant so the matrix is a valid covariance.
    std::vector<std::vector<std::string>> q(n, std::vector<std::string>(n));
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) q[i][k] = q[k][i] = std::to_string(mantissa(rng) % 1000) + "e-7";
      q[i][i] = std::to_string(1'000'000'000LL + std::abs(mantissa(rng)) % 1'000'000'000LL) + "e-11";
    }
    text += "\n[covariance]\n";
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) text += (k ? "," : "") + q[i][k];
      text += "\n";
    }
    text += "[risk_free_rate]\n" + decimal() + "\n";

    const auto a = parse_model(text);
    const auto b = parse_model(format_model(a));
    ASSERT_EQ(a.labels(), b.labels());
    for (int k = 0; k < n; ++k) ASSERT_EQ(a.mean_returns()[k], b.mean_returns()[k]);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) ASSERT_EQ(a.covariance()(i, k), b.covariance()(i, k));
    }
    ASSERT_EQ(a.risk_free_rate(), b.risk_free_rate());
  }
}

TEST(EstimateModel, ConstantColumnIsDegenerate) {
  ReturnSeries s{{"A", "B"}, Matrix(2, 2)};
  s.observations << 0.01, 0.02, 0.03, 0.02;
  try {
    estimate_model(s, 0.0);
    FAIL() << "expected DegenerateAsset";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateAsset);
    EXPECT_NE(std::string(e.what()).find("B"), std::string::npos);
  }

  ReturnSeries flat{{"A", "B"}, Matrix::Constant(4, 2, 0.01)};
  EXPECT_THROW(estimate_model(flat, 0.0), Error);
}

TEST(EstimateModel, SampleMomentsByHand) {
  // Columns (0.01, 0.03, 0.05) and (0.02, 0.00, 0.04): means 0.03, 0.02;
  // deviations (-.02, 0, .02) and (0, -.02, .02); divisor T-1 = 2.
  ReturnSeries s{{"A", "B"}, Matrix(3, 2)};
  s.observations << 0.01, 0.02, 0.03, 0.00, 0.05, 0.04;
  const auto m = estimate_model(s, 0.001);
  EXPECT_NEAR(m.mean_returns()[0], 0.03, 1e-15);
  EXPECT_NEAR(m.mean_returns()[1], 0.02, 1e-15);
  EXPECT_NEAR(m.covariance()(0, 0), 0.0004, 1e-15);
  EXPECT_NEAR(m.covariance()(1, 1), 0.0004, 1e-15);
  EXPECT_NEAR(m.covariance()(0, 1), 0.0002, 1e-15);
  EXPECT_EQ(m.covariance()(0, 1), m.covariance()(1, 0));
  EXPECT_EQ(m.risk_free_rate(), 0.001);
}

TEST(EstimateModel, ErrorPaths) {
  ReturnSeries one{{"A", "B"}, Matrix::Constant(1, 2, 0.01)};
  try {
    estimate_model(one, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySeries);
  }
  ReturnSeries bad{{"A", "B"}, Matrix(2, 2)};
  bad.observations << 0.01, std::nan(""), 0.02, 0.03;
  try {
    estimate_model(bad, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteInput);
  }
  ReturnSeries mislabeled{{"A"}, Matrix::Constant(3, 2, 0.01)};
  try {
    estimate_model(mislabeled, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(EstimateModel, PermutationEquivariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.01, 0.05);
  const int T = 40, n = 5;
  ReturnSeries s{{"a", "b", "c", "d", "e"}, Matrix(T, n)};
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < n; ++k) s.observations(t, k) = noise(rng);
  }
  const auto base = estimate_model(s, 0.0);
  EXPECT_EQ(base.size(), n);
  EXPECT_TRUE(base.covariance().isApprox(base.covariance().transpose(), 0.0));

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    ReturnSeries p{{}, Matrix(T, n)};
    for (int k = 0; k < n; ++k) {
      p.labels.push_back(s.labels[perm[k]]);
      p.observations.col(k) = s.observations.col(perm[k]);
    }
    const auto m = estimate_model(p, 0.0);
    for (int i = 0; i < n; ++i) {
      ASSERT_EQ(m.mean_returns()[i], base.mean_returns()[perm[i]]);
      for (int k = 0; k < n; ++k) ASSERT_EQ(m.covariance()(i, k), base.covariance()(perm[i], perm[k]));
    }
  }
}

TEST(ReturnsCsv, ParsesHeaderAndRows) {
  const auto s = parse_returns_csv("A,B,C\n0.01,0.02,0.03\n0.02,-0.01,0.00\n\n");
  ASSERT_EQ(s.labels.size(), 3u);
  EXPECT_EQ(s.labels[2], "C");
  ASSERT_EQ(s.observations.rows(), 2);
  EXPECT_EQ(s.observations(1, 1), -0.01);
  EXPECT_THROW(parse_returns_csv("A,B\n0.01\n"), Error);
}

}  // namespace
}  // namespace ifport
