#include "htmsp/sp_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "htmsp/config.hpp"
#include "htmsp/rng.hpp"
#include "htmsp/topology.hpp"
#include "support/oracles.hpp"

using namespace htmsp;

namespace {

NeighborhoodMap fully_connected(int n) {
  NeighborhoodMap map{{1, n}, {}};
  map.neighbors.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) map.neighbors[static_cast<std::size_t>(i)].push_back(static_cast<std::uint32_t>(j));
    }
  }
  return map;
}

NeighborhoodMap isolated(int n) {
  NeighborhoodMap map{{1, n}, {}};
  map.neighbors.resize(static_cast<std::size_t>(n));
  return map;
}

Sdr make_sdr(std::vector<std::uint8_t> bits) {
  return Sdr{{1, static_cast<int>(bits.size())}, std::move(bits)};
}

}  // namespace

TEST(Rng, KeyedDrawsAreDeterministicAndStreamSeparated) {
  const double a = rng::uniform(42, rng::Stream::kPotentialPool, 3, 7);
  const double b = rng::uniform(42, rng::Stream::kPotentialPool, 3, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, rng::uniform(42, rng::Stream::kPermanence, 3, 7));
  EXPECT_NE(a, rng::uniform(43, rng::Stream::kPotentialPool, 3, 7));
  EXPECT_GE(a, 0.0);
  EXPECT_LT(a, 1.0);
}

TEST(Rng, DrawCounterTalliesPerStream) {
  rng::reset_draw_counts();
  rng::uniform(1, rng::Stream::kPotentialPool, 0, 0);
  rng::uniform(1, rng::Stream::kPermanence, 0, 0);
  rng::uniform(1, rng::Stream::kPermanence, 0, 1);
  rng::bounded(1, rng::Stream::kShuffle, 0, 0, 10);
  EXPECT_EQ(rng::draw_count(rng::Stream::kPotentialPool), 1u);
  EXPECT_EQ(rng::draw_count(rng::Stream::kPermanence), 2u);
  EXPECT_EQ(rng::draw_count(rng::Stream::kShuffle), 1u);
  EXPECT_EQ(rng::draw_count(), 4u);
  rng::reset_draw_counts();
  EXPECT_EQ(rng::draw_count(), 0u);
}

TEST(Rng, BoundedStaysInRange) {
  for (std::uint64_t k = 0; k < 200; ++k) {
    EXPECT_LT(rng::bounded(9, rng::Stream::kShuffle, k, 0, 7), 7u);
  }
}

TEST(SpConfig, DefaultsValidate) {
  EXPECT_NO_THROW(SpConfig{}.validate());
}

TEST(SpConfig, RejectsOutOfRangeValues) {
  SpConfig c;
  c.rho = 0.0;  // every column would be disconnected
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.gamma = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.theta_c = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.s = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.phi = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.avg_window = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.perm_delta = 1.25;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.theta_s = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SpConfig{};
  c.eta = -0.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SpConfig, ErrorNamesTheKey) {
  SpConfig c;
  c.rho = -0.5;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rho"), std::string::npos);
  }
}

TEST(Topology, IdentityScalingMapsCentersOntoThemselves) {
  const auto t = make_topology({4, 4}, {4, 4});
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      EXPECT_EQ(t.centers[static_cast<std::size_t>(r * 4 + c)], (GridPoint{r, c}));
    }
  }
}

TEST(Topology, CentersStayInsideInputGrid) {
  const auto t = make_topology({7, 5}, {3, 9});
  for (const auto& p : t.centers) {
    EXPECT_GE(p.row, 0);
    EXPECT_LT(p.row, 7);
    EXPECT_GE(p.col, 0);
    EXPECT_LT(p.col, 5);
  }
}

TEST(Topology, RejectsNonPositiveDims) {
  EXPECT_THROW(make_topology({0, 4}, {2, 2}), ConfigError);
  EXPECT_THROW(make_topology({4, 4}, {2, 0}), ConfigError);
}

TEST(Topology, HypercubeClipsAtEdges) {
  const auto corner = hypercube_bounds({0, 0}, 3, {4, 4});
  EXPECT_EQ(corner.row_lo, 0);
  EXPECT_EQ(corner.row_hi, 1);
  EXPECT_EQ(corner.col_lo, 0);
  EXPECT_EQ(corner.col_hi, 1);
  const auto middle = hypercube_bounds({2, 2}, 3, {5, 5});
  EXPECT_EQ(middle.row_lo, 1);
  EXPECT_EQ(middle.row_hi, 3);
}

TEST(BuildPotentialPool, FullRhoSelectsWholeClippedHypercube) {
  const auto topology = make_topology({6, 6}, {3, 3});
  SpConfig config;
  config.gamma = 3;
  config.rho = 1.0;
  const auto pool = build_potential_pool(topology, config);
  for (int i = 0; i < topology.num_columns(); ++i) {
    const auto bounds = hypercube_bounds(topology.centers[static_cast<std::size_t>(i)], 3, {6, 6});
    const auto expected = static_cast<std::size_t>((bounds.row_hi - bounds.row_lo + 1) *
                                                   (bounds.col_hi - bounds.col_lo + 1));
    EXPECT_EQ(pool.columns[static_cast<std::size_t>(i)].size(), expected) << "column " << i;
  }
}

TEST(BuildPotentialPool, ZeroRhoIsRejectedAtValidation) {
  const auto topology = make_topology({4, 4}, {2, 2});
  SpConfig config;
  config.rho = 0.0;
  EXPECT_THROW(build_potential_pool(topology, config), ConfigError);
}

TEST(BuildPotentialPool, MatchesEnumerationOracle) {
  const auto topology = make_topology({4, 4}, {2, 2});
  SpConfig config;
  config.gamma = 3;
  config.rho = 0.5;
  config.seed = 1;
  const auto pool = build_potential_pool(topology, config);
  const auto expected = oracle::potential_pool(topology, 3, 0.5, 1);
  ASSERT_EQ(pool.columns.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(pool.columns[i], expected[i]) << "column " << i;
  }
}

TEST(BuildPotentialPool, DeterministicAcrossRuns) {
  const auto topology = make_topology({8, 8}, {4, 4});
  SpConfig config;
  config.gamma = 5;
  config.rho = 0.4;
  config.seed = 99;
  EXPECT_EQ(build_potential_pool(topology, config), build_potential_pool(topology, config));
}

TEST(BuildPotentialPool, EmptyHypercubeNamesTheColumn) {
  Topology bad{{4, 4}, {1, 1}, {GridPoint{10, 10}}};  // hand-built degenerate center
  SpConfig config;
  config.gamma = 3;
  try {
    build_potential_pool(bad, config);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("column 0"), std::string::npos);
  }
}

TEST(InitPermanenceRandom, EmptyPoolColumnHasNoEntries) {
  PotentialPool pool{2, 4, {{0, 1}, {}}};
  const auto perm = init_permanence_random(pool, SpConfig{});
  EXPECT_EQ(perm.rows[0].size(), 2u);
  EXPECT_TRUE(perm.rows[1].empty());
}

TEST(InitPermanenceRandom, SameSeedGivesIdenticalMatrices) {
  const auto topology = make_topology({8, 8}, {4, 4});
  SpConfig config;
  config.gamma = 5;
  config.rho = 0.7;
  const auto pool = build_potential_pool(topology, config);
  EXPECT_EQ(init_permanence_random(pool, config), init_permanence_random(pool, config));
}

TEST(InitPermanenceRandom, SampledMeanMatchesUniformDistribution) {
  const auto topology = make_topology({100, 100}, {10, 10});
  SpConfig config;
  config.gamma = 11;
  config.rho = 1.0;
  config.seed = 7;
  const auto pool = build_potential_pool(topology, config);
  const auto perm = init_permanence_random(pool, config);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& row : perm.rows) {
    for (const auto& [j, value] : row) {
      EXPECT_GE(value, 0.0);
      EXPECT_LT(value, 1.0);
      sum += value;
      ++count;
    }
  }
  ASSERT_GE(count, 10000u);
  const double mean = sum / static_cast<double>(count);
  EXPECT_GE(mean, 0.48);
  EXPECT_LE(mean, 0.52);
}

TEST(ConnectSynapses, ZeroThresholdConnectsEveryPotentialSynapse) {
  PermanenceMatrix perm{1, 4, {{{0, 0.0}, {2, 0.4}, {3, 0.9}}}};
  const auto conn = connect_synapses(perm, 0.0);
  EXPECT_EQ(conn.rows[0], (std::vector<std::uint32_t>{0, 2, 3}));
}

TEST(ConnectSynapses, BoundaryIsInclusive) {
  PermanenceMatrix perm{1, 1, {{{0, 0.5}}}};
  const auto conn = connect_synapses(perm, 0.5);
  EXPECT_TRUE(conn.connected(0, 0));
}

TEST(ConnectSynapses, ElementwiseComparison) {
  PermanenceMatrix perm{1, 2, {{{0, 0.3}, {1, 0.9}}}};
  const auto conn = connect_synapses(perm, 0.5);
  EXPECT_EQ(conn.rows[0], (std::vector<std::uint32_t>{1}));
}

TEST(RuleBasedInit, ConstantInputYieldsAllZeroConnections) {
  PotentialPool pool{2, 4, {{0, 1, 2, 3}, {1, 2}}};
  const auto conn = init_connections_rule_based(pool, {0.6, 0.6, 0.6, 0.6});
  EXPECT_TRUE(conn.rows[0].empty());
  EXPECT_TRUE(conn.rows[1].empty());
}

TEST(RuleBasedInit, StrictMeanComparison) {
  PotentialPool pool{1, 3, {{0, 1, 2}}};
  const auto conn = init_connections_rule_based(pool, {1.0, 2.0, 9.0});
  EXPECT_EQ(conn.rows[0], (std::vector<std::uint32_t>{2}));  // mean 4, only 9 exceeds it
}

TEST(RuleBasedInit, TwoInputPool) {
  PotentialPool pool{1, 2, {{0, 1}}};
  const auto conn = init_connections_rule_based(pool, {3.0, 5.0});
  EXPECT_EQ(conn.rows[0], (std::vector<std::uint32_t>{1}));  // mean 4
}

TEST(RuleBasedInit, EmptyPoolCountsWarningAndStaysZero) {
  PotentialPool pool{2, 2, {{}, {0, 1}}};
  std::size_t empty_count = 0;
  const auto conn = init_connections_rule_based(pool, {0.1, 0.9}, &empty_count);
  EXPECT_EQ(empty_count, 1u);
  EXPECT_TRUE(conn.rows[0].empty());
  EXPECT_EQ(conn.rows[1], (std::vector<std::uint32_t>{1}));
}

TEST(RuleBasedInit, ConsumesNoRandomness) {
  PotentialPool pool{1, 4, {{0, 1, 2, 3}}};
  rng::reset_draw_counts();
  init_connections_rule_based(pool, {0.1, 0.3, 0.8, 0.2});
  EXPECT_EQ(rng::draw_count(), 0u);
}

TEST(ComputeNeighborhoods, SmallRadiusIsolatesEveryColumn) {
  const auto topology = make_topology({4, 4}, {4, 4});
  const auto nbr = compute_neighborhoods(topology, 0.5);
  for (const auto& row : nbr.neighbors) EXPECT_TRUE(row.empty());
}

TEST(ComputeNeighborhoods, RowOfThreeWithRadiusOneAndAHalf) {
  const auto topology = make_topology({1, 3}, {1, 3});
  const auto nbr = compute_neighborhoods(topology, 1.5);
  EXPECT_EQ(nbr.neighbors[0], (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(nbr.neighbors[1], (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(nbr.neighbors[2], (std::vector<std::uint32_t>{1}));
}

TEST(ComputeNeighborhoods, RadiusBeyondDiagonalConnectsEverything) {
  const auto topology = make_topology({3, 3}, {3, 3});
  const auto nbr = compute_neighborhoods(topology, 10.0);
  for (std::size_t i = 0; i < nbr.neighbors.size(); ++i) {
    EXPECT_EQ(nbr.neighbors[i].size(), 8u);
    for (std::uint32_t j : nbr.neighbors[i]) EXPECT_NE(j, static_cast<std::uint32_t>(i));
  }
}

TEST(ComputeNeighborhoods, RejectsNonPositivePhi) {
  const auto topology = make_topology({2, 2}, {2, 2});
  EXPECT_THROW(compute_neighborhoods(topology, 0.0), std::invalid_argument);
  EXPECT_THROW(compute_neighborhoods(topology, -1.0), std::invalid_argument);
}

TEST(ComputeNeighborhoods, SymmetricOnRandomGrids) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 1 + static_cast<int>(gen() % 4);
    const int cols = 1 + static_cast<int>(gen() % 4);
    const double phi = 0.5 + static_cast<double>(gen() % 40) / 10.0;
    const auto nbr = compute_neighborhoods(make_topology({8, 8}, {rows, cols}), phi);
    for (std::size_t i = 0; i < nbr.neighbors.size(); ++i) {
      for (std::uint32_t j : nbr.neighbors[i]) {
        const auto& back = nbr.neighbors[j];
        EXPECT_TRUE(std::binary_search(back.begin(), back.end(), static_cast<std::uint32_t>(i)));
      }
    }
  }
}

TEST(DerivePhi, HandComputedSpanProduct) {
  const auto topology = make_topology({1, 4}, {1, 2});
  ConnectionMatrix conn{2, 4, {{0, 1}, {2, 3}}};
  // spans: rows 1, cols 2 -> 1.5 each; columns per input: 0.5 * (1 + 0.5)
  EXPECT_DOUBLE_EQ(derive_phi(topology, conn), 1.5 * 0.75);
}

TEST(ComputeOverlap, IdentityCase) {
  ConnectionMatrix conn{2, 2, {{0}, {1}}};
  const auto o = compute_overlap(conn, {1.0, 1.0}, BoostState::neutral(2));
  EXPECT_EQ(o, (OverlapVector{1.0, 1.0}));
}

TEST(ComputeOverlap, ZeroInputGivesZeroOverlap) {
  ConnectionMatrix conn{2, 3, {{0, 1}, {1, 2}}};
  const auto o = compute_overlap(conn, {0.0, 0.0, 0.0}, BoostState::neutral(2));
  EXPECT_EQ(o, (OverlapVector{0.0, 0.0}));
}

TEST(ComputeOverlap, BoostedSummation) {
  ConnectionMatrix conn{2, 3, {{0, 1}, {1, 2}}};
  BoostState boost = BoostState::neutral(2);
  boost.beta = {2.0, 1.0};
  const auto o = compute_overlap(conn, {1.0, 0.0, 1.0}, boost);
  EXPECT_EQ(o, (OverlapVector{2.0, 1.0}));
}

TEST(ComputeOverlap, RejectsDimensionMismatch) {
  ConnectionMatrix conn{1, 3, {{0}}};
  EXPECT_THROW(compute_overlap(conn, {1.0, 0.0}, BoostState::neutral(1)), std::invalid_argument);
  EXPECT_THROW(compute_overlap(conn, {1.0, 0.0, 1.0}, BoostState::neutral(2)),
               std::invalid_argument);
}

TEST(ComputeOverlap, LinearOverDisjointInputs) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_cols = 1 + static_cast<int>(gen() % 6);
    const int n_inputs = 2 + static_cast<int>(gen() % 12);
    ConnectionMatrix conn{n_cols, n_inputs, {}};
    conn.rows.resize(static_cast<std::size_t>(n_cols));
    for (auto& row : conn.rows) {
      for (int j = 0; j < n_inputs; ++j) {
        if (gen() % 2) row.push_back(static_cast<std::uint32_t>(j));
      }
    }
    std::vector<double> z1(static_cast<std::size_t>(n_inputs), 0.0);
    std::vector<double> z2(static_cast<std::size_t>(n_inputs), 0.0);
    std::vector<double> both(static_cast<std::size_t>(n_inputs), 0.0);
    for (int j = 0; j < n_inputs; ++j) {
      switch (gen() % 3) {
        case 0: z1[static_cast<std::size_t>(j)] = both[static_cast<std::size_t>(j)] = 1.0; break;
        case 1: z2[static_cast<std::size_t>(j)] = both[static_cast<std::size_t>(j)] = 1.0; break;
        default: break;
      }
    }
    BoostState boost = BoostState::neutral(n_cols);
    for (auto& b : boost.beta) b = 0.25 * static_cast<double>(1 + gen() % 8);
    const auto sum = compute_overlap(conn, both, boost);
    const auto o1 = compute_overlap(conn, z1, boost);
    const auto o2 = compute_overlap(conn, z2, boost);
    for (int i = 0; i < n_cols; ++i) {
      EXPECT_DOUBLE_EQ(sum[static_cast<std::size_t>(i)],
                       o1[static_cast<std::size_t>(i)] + o2[static_cast<std::size_t>(i)]);
    }
  }
}

TEST(InhibitPercentile, EqualOverlapsActivateEverything) {
  const auto nbr = fully_connected(5);
  const auto sdr = inhibit_percentile(OverlapVector(5, 3.0), nbr, 0.3, 0.0);
  for (auto bit : sdr.active) EXPECT_EQ(bit, 1);
}

TEST(InhibitPercentile, StimulusThresholdAboveMaxSilencesEverything) {
  const auto nbr = fully_connected(4);
  const auto sdr = inhibit_percentile({1.0, 2.0, 3.0, 4.0}, nbr, 0.5, 4.5);
  for (auto bit : sdr.active) EXPECT_EQ(bit, 0);
}

TEST(InhibitPercentile, TopQuarterOfFourColumns) {
  const auto nbr = fully_connected(4);
  const auto sdr = inhibit_percentile({1.0, 2.0, 3.0, 4.0}, nbr, 0.25, 0.0);
  EXPECT_EQ(sdr.active, (std::vector<std::uint8_t>{0, 0, 0, 1}));
}

TEST(InhibitPercentile, EmptyNeighborhoodFallsBackToStimulusThreshold) {
  const auto nbr = isolated(3);
  const auto sdr = inhibit_percentile({0.0, 1.0, 2.0}, nbr, 0.1, 1.5);
  EXPECT_EQ(sdr.active, (std::vector<std::uint8_t>{0, 0, 1}));
}

TEST(InhibitMean, EqualOverlapsAllActive) {
  const auto nbr = fully_connected(4);
  const auto sdr = inhibit_mean(OverlapVector(4, 2.5), nbr);
  for (auto bit : sdr.active) EXPECT_EQ(bit, 1);
}

TEST(InhibitMean, HandComputedNeighborhoodMeans) {
  const auto nbr = fully_connected(3);
  const auto sdr = inhibit_mean({1.0, 2.0, 3.0}, nbr);
  EXPECT_EQ(sdr.active, (std::vector<std::uint8_t>{0, 1, 1}));  // means 2.5, 2, 1.5
}

TEST(InhibitMean, AllZeroOverlapsActivateEverythingUnderInclusiveRule) {
  const auto nbr = fully_connected(6);
  const auto sdr = inhibit_mean(OverlapVector(6, 0.0), nbr);
  for (auto bit : sdr.active) EXPECT_EQ(bit, 1);
}

TEST(InhibitMean, EmptyNeighborhoodRequiresPositiveOverlap) {
  const auto nbr = isolated(2);
  const auto sdr = inhibit_mean({0.0, 0.25}, nbr);
  EXPECT_EQ(sdr.active, (std::vector<std::uint8_t>{0, 1}));
}

TEST(InhibitMean, InvariantUnderPositiveScaling) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> value(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 10);
    const auto topology = make_topology({4, 4}, {1, n});
    const auto nbr = compute_neighborhoods(topology, 1.0 + static_cast<double>(gen() % 30) / 10.0);
    OverlapVector o(static_cast<std::size_t>(n));
    for (auto& v : o) v = value(gen);
    OverlapVector scaled = o;
    const double c = 0.5 + static_cast<double>(gen() % 50) / 10.0;
    for (auto& v : scaled) v *= c;
    EXPECT_EQ(inhibit_mean(o, nbr).active, inhibit_mean(scaled, nbr).active);
  }
}

TEST(InhibitPercentile, MatchesBruteForceOracleOnRandomInstances) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> value(0.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 16);
    const auto topology = make_topology({8, 8}, {1, n});
    const double phi = 0.5 + static_cast<double>(gen() % 40) / 10.0;
    const auto nbr = compute_neighborhoods(topology, phi);
    OverlapVector o(static_cast<std::size_t>(n));
    for (auto& v : o) v = gen() % 4 ? value(gen) : 0.0;
    const double s = 0.05 + 0.95 * static_cast<double>(gen() % 100) / 100.0;
    const double theta_s = (gen() % 2) ? 0.0 : value(gen);
    const auto got = inhibit_percentile(o, nbr, s, theta_s);
    const auto want = oracle::inhibit_percentile(o, nbr.neighbors, s, theta_s);
    EXPECT_EQ(got.active, want) << "trial " << trial;
  }
}

TEST(UpdateTimeAverage, WindowOfOneCopiesActivity) {
  const auto out = update_time_average({0.3, 0.9}, make_sdr({1, 0}), 1);
  EXPECT_EQ(out, (std::vector<double>{1.0, 0.0}));
}

TEST(UpdateTimeAverage, DirectSubstitution) {
  const auto out = update_time_average({0.5}, make_sdr({1}), 2);
  EXPECT_DOUBLE_EQ(out[0], 0.75);
}

TEST(UpdateTimeAverage, ConvergesToConstantActivity) {
  const int window = 5;
  std::vector<double> abar{0.0};
  const auto alpha = make_sdr({1});
  for (int step = 0; step < 100 * window; ++step) abar = update_time_average(abar, alpha, window);
  EXPECT_NEAR(abar[0], 1.0, 1e-6);
}

TEST(UpdateTimeAverage, RejectsWindowBelowOne) {
  EXPECT_THROW(update_time_average({0.5}, make_sdr({1}), 0), std::invalid_argument);
}

TEST(UpdateTimeAverage, PreservesUnitRange) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 12);
    std::vector<double> abar(static_cast<std::size_t>(n));
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
    for (auto& v : abar) v = unit(gen);
    for (auto& b : bits) b = static_cast<std::uint8_t>(gen() % 2);
    const int window = 1 + static_cast<int>(gen() % 20);
    const auto out = update_time_average(abar, make_sdr(bits), window);
    for (double v : out) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(RecentActivity, ConstantFieldIsFixedPoint) {
  const auto nbr = fully_connected(4);
  const auto out = recent_activity(std::vector<double>(4, 0.7), nbr);
  for (double v : out) EXPECT_DOUBLE_EQ(v, 0.7);
}

TEST(RecentActivity, MutualNeighborsSwapValues) {
  const auto nbr = fully_connected(2);
  const auto out = recent_activity({0.0, 1.0}, nbr);
  EXPECT_EQ(out, (std::vector<double>{1.0, 0.0}));
}

TEST(RecentActivity, SingleNeighborCopiesItsValue) {
  NeighborhoodMap nbr{{1, 3}, {{1}, {2}, {0}}};
  const auto out = recent_activity({0.1, 0.5, 0.9}, nbr);
  EXPECT_EQ(out, (std::vector<double>{0.5, 0.9, 0.1}));
}

TEST(UpdateBoost, UniformActivityGivesUnitBoost) {
  const auto beta = update_boost({0.4, 0.4}, {0.4, 0.4}, 2.0);
  EXPECT_EQ(beta, (std::vector<double>{1.0, 1.0}));
}

TEST(UpdateBoost, ZeroEtaGivesUnitBoost) {
  const auto beta = update_boost({0.9, 0.1}, {0.3, 0.8}, 0.0);
  EXPECT_EQ(beta, (std::vector<double>{1.0, 1.0}));
}

TEST(UpdateBoost, DirectEvaluation) {
  const auto beta = update_boost({0.75}, {0.25}, 1.0);
  EXPECT_NEAR(beta[0], std::exp(-0.5), 1e-6);
}

TEST(HebbianUpdate, NoActiveColumnsLeavesPermanencesUntouched) {
  PotentialPool pool{1, 2, {{0, 1}}};
  PermanenceMatrix perm{1, 2, {{{0, 0.4}, {1, 0.6}}}};
  const auto out = hebbian_update(perm, make_sdr({0}), {1.0, 0.0}, pool, 0.1);
  EXPECT_EQ(out, perm);
}

TEST(HebbianUpdate, ClampsAtUpperBound) {
  PotentialPool pool{1, 1, {{0}}};
  PermanenceMatrix perm{1, 1, {{{0, 0.9}}}};
  const auto out = hebbian_update(perm, make_sdr({1}), {1.0}, pool, 0.2);
  EXPECT_DOUBLE_EQ(out.rows[0][0].second, 1.0);
}

TEST(HebbianUpdate, DecrementsInactiveInputs) {
  PotentialPool pool{1, 1, {{0}}};
  PermanenceMatrix perm{1, 1, {{{0, 0.5}}}};
  const auto out = hebbian_update(perm, make_sdr({1}), {0.0}, pool, 0.1);
  EXPECT_DOUBLE_EQ(out.rows[0][0].second, 0.4);
}

TEST(HebbianUpdate, StaysClampedOverRandomSequences) {
  std::mt19937_64 gen(41);
  const auto topology = make_topology({6, 6}, {3, 3});
  SpConfig config;
  config.gamma = 3;
  config.rho = 0.8;
  const auto pool = build_potential_pool(topology, config);
  auto perm = init_permanence_random(pool, config);
  for (int step = 0; step < 50; ++step) {
    std::vector<double> input(static_cast<std::size_t>(topology.num_inputs()));
    for (auto& v : input) v = static_cast<double>(gen() % 2);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(topology.num_columns()));
    for (auto& b : bits) b = static_cast<std::uint8_t>(gen() % 2);
    perm = hebbian_update(std::move(perm), Sdr{topology.column_dims, bits}, input, pool, 0.3);
    for (const auto& row : perm.rows) {
      for (const auto& [j, value] : row) {
        EXPECT_GE(value, 0.0);
        EXPECT_LE(value, 1.0);
      }
    }
  }
}

TEST(BinaryClosure, InhibitionAndConnectionOutputsAreStrictlyBinary) {
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 8);
    const auto topology = make_topology({n, n}, {n, n});
    SpConfig config;
    config.gamma = 3;
    config.rho = 0.9;
    config.seed = gen();
    const auto pool = build_potential_pool(topology, config);
    const auto perm = init_permanence_random(pool, config);
    const auto conn = connect_synapses(perm, unit(gen));
    std::vector<double> input(static_cast<std::size_t>(topology.num_inputs()));
    for (auto& v : input) v = unit(gen);
    const auto rule = init_connections_rule_based(pool, input);
    const auto nbr = compute_neighborhoods(topology, 1.5);
    const auto o = compute_overlap(conn, input, BoostState::neutral(topology.num_columns()));
    for (const auto& sdr : {inhibit_percentile(o, nbr, 0.3, 0.0), inhibit_mean(o, nbr)}) {
      for (auto bit : sdr.active) EXPECT_TRUE(bit == 0 || bit == 1);
    }
    for (const auto& row : rule.rows) {
      for (std::uint32_t j : row) EXPECT_LT(j, static_cast<std::uint32_t>(topology.num_inputs()));
    }
  }
}
