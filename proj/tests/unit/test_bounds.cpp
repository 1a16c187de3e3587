// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adagpr/bounds.hpp"
#include "adagpr/dataset.hpp"
#include "adagpr/error.hpp"
#include "adagpr/spectrum.hpp"
#include "helpers.hpp"

using namespace adagpr;

namespace {

Spectrum two_node() {
  const Edge e{0, 1};
  return compute_spectrum(normalize_adjacency(Graph(2, std::span<const Edge>(&e, 1))), SpectrumMode::kDense);
}

BoundInput golden_input() {
  BoundInput in;
  in.spectrum = two_node();
  in.coefficients = {{1.0}};
  in.layers = 1;
  in.alpha = 0.5;
  in.weight_bounds = {1.0, 1.0};
  in.train_size = 1;
  in.test_size = 1;
  in.feature_norm = 1.0;
  in.output_bound = 1.0;
  return in;
}

BoundInput random_input(std::mt19937_64& gen, const Spectrum& spectrum, std::size_t layers,
                        std::size_t order) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  BoundInput in;
  in.spectrum = spectrum;
  in.layers = layers;
  in.alpha = 0.2;
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<double> row(order);
    double total = 0.0;
    for (double& v : row) total += (v = u(gen));
    for (double& v : row) v /= total;
    in.coefficients.push_back(row);
  }
  for (std::size_t l = 0; l <= layers; ++l) in.weight_bounds.push_back(u(gen));
  in.train_size = 20;
  in.test_size = 40;
  in.feature_norm = u(gen);
  return in;
}

Spectrum sbm_spectrum(double p_in, double p_out, std::uint64_t seed) {
  SbmOptions o;
  o.n_per_block = 20;
  o.num_blocks = 3;
  o.p_in = p_in;
  o.p_out = p_out;
  o.seed = seed;
  return compute_spectrum(normalize_adjacency(generate_sbm(o).graph), SpectrumMode::kDense);
}

}  // namespace

TEST(SpectralSum, TwoNodeExamples) {
  const Spectrum s = two_node();
  EXPECT_EQ(spectral_sum(s, std::vector<double>{1.0}), 2.0);
  EXPECT_NEAR(spectral_sum(s, std::vector<double>{0.0, 1.0}), 1.0, 1e-15);
  EXPECT_NEAR(spectral_sum(s, std::vector<double>{0.5, 0.5}), 1.5, 1e-15);
}

TEST(SpectralSum, EmptySpectrumIsInputError) {
  try {
    spectral_sum(Spectrum{}, std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(SpectralSum, TruncatedKeepsFullDimensionForConstantTerm) {
  Spectrum s;
  s.eigenvalues = {1.0, -0.5};
  s.dimension = 10;
  s.truncation_count = 2;
  s.method = SpectrumMethod::kLanczosTruncated;
  EXPECT_NEAR(spectral_sum(s, std::vector<double>{0.5, 0.5}), 0.5 * 10 + 0.5 * 1.5, 1e-15);
}

// Moving mass from k to k+1 cannot increase the sum when every |λ| <= 1.
TEST(SpectralSum, ShiftingMassUpwardNeverIncreases) {
  std::mt19937_64 gen(21);
  const Spectrum s = sbm_spectrum(0.3, 0.05, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t order = 2 + trial % 5;
    std::vector<double> mu(order);
    double total = 0.0;
    for (double& v : mu) total += (v = u(gen));
    for (double& v : mu) v /= total;
    const std::size_t k = static_cast<std::size_t>(gen() % (order - 1));
    std::vector<double> moved = mu;
    const double mass = mu[k] * u(gen);
    moved[k] -= mass;
    moved[k + 1] += mass;
    EXPECT_LE(spectral_sum(s, moved), spectral_sum(s, mu) + 1e-12);
  }
}

// Denser graphs at fixed N have smaller Σ|λ| on average.
TEST(SpectralSum, DenserGraphsHaveSmallerSpectrum) {
  double sparse = 0.0, dense = 0.0;
  const std::vector<double> e1 = {0.0, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    sparse += spectral_sum(sbm_spectrum(0.1, 0.02, seed), e1);
    dense += spectral_sum(sbm_spectrum(0.5, 0.1, seed), e1);
  }
  EXPECT_LT(dense / 20.0, sparse / 20.0);
}

TEST(Bounds, GoldenSingleLayer) {
  // s = 2, Q = 2, p0 = 1/sqrt(2), D = sqrt(2):
  // first = 0.5 * 0.5 * 2 * 2 / sqrt(2), second = 0.25 * 2 * 2 * 2 * sqrt(2).
  const BoundReport r = evaluate_theorem1(golden_input());
  EXPECT_NEAR(r.first_sum, 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.second_sum, 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.complexity_index, 5.0 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(r.q, 2.0);
  EXPECT_EQ(r.spectral_sums, (std::vector<double>{2.0, 2.0}));
}

TEST(Bounds, FirstOrderCoefficientsMatchGcniiExactly) {
  std::mt19937_64 gen(4);
  const Spectrum s = sbm_spectrum(0.2, 0.05, 1);
  for (std::size_t layers = 1; layers <= 6; ++layers) {
    BoundInput in = random_input(gen, s, layers, 3);
    for (auto& row : in.coefficients) row = {0.0, 1.0, 0.0};
    const BoundReport a = evaluate_theorem1(in);
    const BoundReport b = evaluate_corollary1(in);
    EXPECT_EQ(a.complexity_index, b.complexity_index);
    EXPECT_EQ(a.first_terms, b.first_terms);
    EXPECT_EQ(a.second_terms, b.second_terms);
    EXPECT_EQ(a.gcnii_index, b.complexity_index);
  }
}

TEST(Bounds, AlphaNearOneSuppressesIndex) {
  std::mt19937_64 gen(5);
  BoundInput in = random_input(gen, sbm_spectrum(0.2, 0.05, 2), 4, 3);
  in.alpha = 0.5;
  const double half = evaluate_theorem1(in).complexity_index;
  in.alpha = 1.0 - 1e-9;
  const BoundReport near_one = evaluate_theorem1(in);
  EXPECT_LT(near_one.complexity_index, 1e-6 * half);
  for (std::size_t l = 1; l < near_one.first_terms.size(); ++l)
    EXPECT_LT(near_one.first_terms[l], near_one.first_terms[l - 1]);
}

TEST(Bounds, TermsAreFiniteAndNonNegative) {
  std::mt19937_64 gen(6);
  const Spectrum s = sbm_spectrum(0.2, 0.05, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const BoundReport r = evaluate_theorem1(random_input(gen, s, 1 + trial % 8, 2 + trial % 4));
    for (double v : r.first_terms) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
    for (double v : r.second_terms) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
    EXPECT_GE(r.tail_sampling, 0.0);
    EXPECT_GE(r.tail_confidence, 0.0);
    EXPECT_NEAR(r.complexity_index, r.q * (r.first_sum + r.second_sum), 1e-12 * r.complexity_index);
  }
}

TEST(Bounds, TailTerms) {
  BoundInput in = golden_input();
  in.train_size = 4;
  in.test_size = 9;
  in.delta = 0.1;
  const BoundReport r = evaluate_theorem1(in);
  const double q = 1.0 / 4 + 1.0 / 9;
  EXPECT_NEAR(r.q, q, 1e-15);
  EXPECT_NEAR(r.tail_sampling, q * 2.0, 1e-15);
  EXPECT_NEAR(r.p0_factor, std::sqrt(72.0 / 169.0), 1e-15);
  EXPECT_GE(r.tail_confidence, 0.0);
  EXPECT_TRUE(std::isfinite(r.s));
}

TEST(Bounds, InvalidInputs) {
  auto expect_input_error = [](const BoundInput& in) {
    try {
      evaluate_theorem1(in);
      ADD_FAILURE() << "accepted invalid input";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInput);
    }
  };
  BoundInput in = golden_input();
  in.layers = 2;
  expect_input_error(in);
  in = golden_input();
  in.alpha = 1.0;
  expect_input_error(in);
  in = golden_input();
  in.weight_bounds = {1.0, 0.0};
  expect_input_error(in);
  in = golden_input();
  in.train_size = 0;
  expect_input_error(in);
  in = golden_input();
  in.coefficients = {{0.7, 0.7}};
  expect_input_error(in);
}

TEST(Profile, Examples) {
  const std::vector<double> p = oversmoothing_profile(two_node(), 4);
  ASSERT_EQ(p.size(), 5u);
  EXPECT_EQ(p[0], 2.0);
  for (std::size_t k = 1; k < p.size(); ++k) EXPECT_NEAR(p[k], 1.0, 1e-12);
}

TEST(Profile, SbmIsNonIncreasing) {
  const std::vector<double> p = oversmoothing_profile(sbm_spectrum(0.15, 0.02, 7), 10);
  EXPECT_EQ(p[0], 60.0);
  for (std::size_t k = 1; k < p.size(); ++k) EXPECT_LE(p[k], p[k - 1]);
  EXPECT_LT(p[8], p[1]);
}

TEST(Profile, RejectsTruncatedSpectrum) {
  Spectrum s;
  s.eigenvalues = {1.0};
  s.dimension = 4;
  s.truncation_count = 1;
  EXPECT_THROW(oversmoothing_profile(s, 3), Error);
}
