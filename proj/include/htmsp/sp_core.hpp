#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "htmsp/config.hpp"
#include "htmsp/rng.hpp"
#include "htmsp/topology.hpp"

// The four SP phases as pure operations over explicit state: initialization
// (random-weight and rule-based), overlap, inhibition (percentile and mean
// variants), and learning (Hebbian update plus boosting). Every operation is
// deterministic given its inputs; randomness only enters through the
// counter-based generator keyed by (seed, stream, column, input).
namespace htmsp {

// Per-column sorted lists of potential input indices PI(i).
struct PotentialPool {
  int num_columns = 0;
  int num_inputs = 0;
  std::vector<std::vector<std::uint32_t>> columns;

  bool operator==(const PotentialPool&) const = default;
};

// Sparse permanence values; entries exist only for pool members, absent
// entries mean permanence 0.
struct PermanenceMatrix {
  int num_columns = 0;
  int num_inputs = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;  // sorted by input index

  bool operator==(const PermanenceMatrix&) const = default;
};

// Sparse binary connections; only the 1-entries are stored.
struct ConnectionMatrix {
  int num_columns = 0;
  int num_inputs = 0;
  std::vector<std::vector<std::uint32_t>> rows;  // sorted input indices with B = 1

  bool connected(int column, std::uint32_t input) const {
    const auto& row = rows[static_cast<std::size_t>(column)];
    return std::binary_search(row.begin(), row.end(), input);
  }

  bool operator==(const ConnectionMatrix&) const = default;
};

// Per-column neighbor lists N(i); i is never its own neighbor.
struct NeighborhoodMap {
  GridDims column_dims;
  std::vector<std::vector<std::uint32_t>> neighbors;

  int num_columns() const { return static_cast<int>(neighbors.size()); }
};

using OverlapVector = std::vector<double>;

// Binary activation over the mini-column grid.
struct Sdr {
  GridDims dims;
  std::vector<std::uint8_t> active;

  bool operator==(const Sdr&) const = default;
};

// Boosting factors and time-averaged activities.
struct BoostState {
  std::vector<double> beta;
  std::vector<double> abar;

  // beta = 1 is the fixed point of the boost update at uniform activity.
  static BoostState neutral(int num_columns) {
    return BoostState{std::vector<double>(static_cast<std::size_t>(num_columns), 1.0),
                      std::vector<double>(static_cast<std::size_t>(num_columns), 0.0)};
  }
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace detail

// PI(i) = { j in the gamma-hypercube around the column's center with
// z_ij < rho }, z_ij drawn from the keyed uniform generator. Iteration order
// never affects the result.
inline PotentialPool build_potential_pool(const Topology& topology, const SpConfig& config) {
  config.validate();
  detail::require(static_cast<int>(topology.centers.size()) == topology.num_columns(),
                  "build_potential_pool: centers do not match column dims");

  PotentialPool pool{topology.num_columns(), topology.num_inputs(), {}};
  pool.columns.resize(static_cast<std::size_t>(pool.num_columns));
  for (int i = 0; i < pool.num_columns; ++i) {
    const auto bounds =
        hypercube_bounds(topology.centers[static_cast<std::size_t>(i)], config.gamma,
                         topology.input_dims);
    if (bounds.empty())
      throw std::invalid_argument("build_potential_pool: hypercube empty after clipping for column " +
                                  std::to_string(i));
    auto& members = pool.columns[static_cast<std::size_t>(i)];
    for (int r = bounds.row_lo; r <= bounds.row_hi; ++r) {
      for (int c = bounds.col_lo; c <= bounds.col_hi; ++c) {
        const auto j = static_cast<std::uint32_t>(r * topology.input_dims.cols + c);
        if (rng::uniform(config.seed, rng::Stream::kPotentialPool, static_cast<std::uint64_t>(i),
                         j) < config.rho) {
          members.push_back(j);
        }
      }
    }
  }
  return pool;
}

// S_ij ~ U(0,1) for pool members, keyed by (seed, column, input).
inline PermanenceMatrix init_permanence_random(const PotentialPool& pool, const SpConfig& config) {
  PermanenceMatrix perm{pool.num_columns, pool.num_inputs, {}};
  perm.rows.resize(static_cast<std::size_t>(pool.num_columns));
  for (int i = 0; i < pool.num_columns; ++i) {
    auto& row = perm.rows[static_cast<std::size_t>(i)];
    row.reserve(pool.columns[static_cast<std::size_t>(i)].size());
    for (std::uint32_t j : pool.columns[static_cast<std::size_t>(i)]) {
      row.emplace_back(j, rng::uniform(config.seed, rng::Stream::kPermanence,
                                       static_cast<std::uint64_t>(i), j));
    }
  }
  return perm;
}

// B_ij = 1 iff S_ij >= theta_c; the boundary is inclusive.
inline ConnectionMatrix connect_synapses(const PermanenceMatrix& perm, double theta_c) {
  ConnectionMatrix conn{perm.num_columns, perm.num_inputs, {}};
  conn.rows.resize(perm.rows.size());
  for (std::size_t i = 0; i < perm.rows.size(); ++i) {
    for (const auto& [j, value] : perm.rows[i]) {
      if (value >= theta_c) conn.rows[i].push_back(j);
    }
  }
  return conn;
}

// Deterministic rule-based connections: B_ij = 1 iff the input value strictly
// exceeds the mean of the input values over the column's pool. Consumes no
// randomness. Columns with an empty pool produce an all-zero row and are
// tallied in *empty_pool_count when provided.
inline ConnectionMatrix init_connections_rule_based(const PotentialPool& pool,
                                                    const std::vector<double>& input,
                                                    std::size_t* empty_pool_count = nullptr) {
  detail::require(static_cast<int>(input.size()) == pool.num_inputs,
                  "init_connections_rule_based: input size does not match pool");
  ConnectionMatrix conn{pool.num_columns, pool.num_inputs, {}};
  conn.rows.resize(static_cast<std::size_t>(pool.num_columns));
  for (int i = 0; i < pool.num_columns; ++i) {
    const auto& members = pool.columns[static_cast<std::size_t>(i)];
    if (members.empty()) {
      if (empty_pool_count) ++*empty_pool_count;
      continue;
    }
    double sum = 0.0;
    for (std::uint32_t j : members) sum += input[j];
    const double mean = sum / static_cast<double>(members.size());
    for (std::uint32_t j : members) {
      if (input[j] > mean) conn.rows[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return conn;
}

// N(i) = { j != i : ||y_i - y_j|| < phi } in column-grid coordinates; the
// inequality is strict. Symmetric by construction.
inline NeighborhoodMap compute_neighborhoods(const Topology& topology, double phi) {
  if (!(phi > 0.0))
    throw std::invalid_argument("compute_neighborhoods: phi must be > 0, got " +
                                std::to_string(phi));
  const int n = topology.num_columns();
  const int cols = topology.column_dims.cols;
  NeighborhoodMap map{topology.column_dims, {}};
  map.neighbors.resize(static_cast<std::size_t>(n));
  const double phi_sq = phi * phi;
  for (int i = 0; i < n; ++i) {
    const int ri = i / cols, ci = i % cols;
    for (int j = i + 1; j < n; ++j) {
      const int rj = j / cols, cj = j % cols;
      const double dr = ri - rj, dc = ci - cj;
      if (dr * dr + dc * dc < phi_sq) {
        map.neighbors[static_cast<std::size_t>(i)].push_back(static_cast<std::uint32_t>(j));
        map.neighbors[static_cast<std::size_t>(j)].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  for (auto& row : map.neighbors) std::sort(row.begin(), row.end());
  return map;
}

// Inhibition radius derivation: average connected input span of the columns
// multiplied by the number of mini-columns per input.
inline double derive_phi(const Topology& topology, const ConnectionMatrix& conn) {
  detail::require(conn.num_columns == topology.num_columns(),
                  "derive_phi: connection matrix does not match topology");
  const int input_cols = topology.input_dims.cols;
  double span_sum = 0.0;
  for (const auto& row : conn.rows) {
    if (row.empty()) continue;  // span 0 still counts toward the average
    int row_lo = topology.input_dims.rows, row_hi = -1;
    int col_lo = input_cols, col_hi = -1;
    for (std::uint32_t j : row) {
      const int r = static_cast<int>(j) / input_cols;
      const int c = static_cast<int>(j) % input_cols;
      row_lo = std::min(row_lo, r);
      row_hi = std::max(row_hi, r);
      col_lo = std::min(col_lo, c);
      col_hi = std::max(col_hi, c);
    }
    span_sum += 0.5 * ((row_hi - row_lo + 1) + (col_hi - col_lo + 1));
  }
  const double avg_span = span_sum / static_cast<double>(conn.num_columns);
  const double columns_per_input =
      0.5 * (static_cast<double>(topology.column_dims.rows) / topology.input_dims.rows +
             static_cast<double>(topology.column_dims.cols) / topology.input_dims.cols);
  return avg_span * columns_per_input;
}

// o_i = beta_i * sum_j B_ij * Z_j.
inline OverlapVector compute_overlap(const ConnectionMatrix& conn, const std::vector<double>& input,
                                     const BoostState& boost) {
  detail::require(static_cast<int>(input.size()) == conn.num_inputs,
                  "compute_overlap: input size does not match connections");
  detail::require(static_cast<int>(boost.beta.size()) == conn.num_columns,
                  "compute_overlap: boost size does not match connections");
  OverlapVector overlap(static_cast<std::size_t>(conn.num_columns), 0.0);
  for (std::size_t i = 0; i < conn.rows.size(); ++i) {
    double sum = 0.0;
    for (std::uint32_t j : conn.rows[i]) sum += input[j];
    overlap[i] = boost.beta[i] * sum;
  }
  return overlap;
}

namespace detail {

// Nearest-rank percentile: the element at rank ceil(q * n) of the ascending
// sort, clamped to rank 1 so the q -> 0 limit returns the minimum.
inline std::size_t percentile_rank(double q, std::size_t n) {
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  return std::clamp<std::size_t>(rank, 1, n);
}

}  // namespace detail

// alpha_i = 1 iff o_i >= prctile(NO(i), 1 - s) and o_i >= theta_s, where
// NO(i) are the overlaps of the column's neighbors. An empty neighborhood
// satisfies the percentile conjunct, leaving theta_s as the only gate.
inline Sdr inhibit_percentile(const OverlapVector& overlap, const NeighborhoodMap& nbr, double s,
                              double theta_s) {
  detail::require(overlap.size() == nbr.neighbors.size(),
                  "inhibit_percentile: overlap size does not match neighborhoods");
  Sdr out{nbr.column_dims, std::vector<std::uint8_t>(overlap.size(), 0)};
  std::vector<double> scratch;
  for (std::size_t i = 0; i < overlap.size(); ++i) {
    const auto& neighbors = nbr.neighbors[i];
    bool pct_ok = true;
    if (!neighbors.empty()) {
      scratch.clear();
      for (std::uint32_t j : neighbors) scratch.push_back(overlap[j]);
      const std::size_t rank = detail::percentile_rank(1.0 - s, scratch.size());
      auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(rank - 1);
      std::nth_element(scratch.begin(), nth, scratch.end());
      pct_ok = overlap[i] >= *nth;
    }
    out.active[i] = (pct_ok && overlap[i] >= theta_s) ? 1 : 0;
  }
  return out;
}

// alpha_i = 1 iff o_i >= mean of the neighbors' overlaps (inclusive). With an
// empty neighborhood the column activates iff its overlap is positive.
inline Sdr inhibit_mean(const OverlapVector& overlap, const NeighborhoodMap& nbr) {
  detail::require(overlap.size() == nbr.neighbors.size(),
                  "inhibit_mean: overlap size does not match neighborhoods");
  Sdr out{nbr.column_dims, std::vector<std::uint8_t>(overlap.size(), 0)};
  for (std::size_t i = 0; i < overlap.size(); ++i) {
    const auto& neighbors = nbr.neighbors[i];
    if (neighbors.empty()) {
      out.active[i] = overlap[i] > 0.0 ? 1 : 0;
      continue;
    }
    double sum = 0.0;
    for (std::uint32_t j : neighbors) sum += overlap[j];
    out.active[i] = overlap[i] >= sum / static_cast<double>(neighbors.size()) ? 1 : 0;
  }
  return out;
}

// abar_i(t) = ((T - 1) * abar_i(t-1) + alpha_i(t)) / T.
inline std::vector<double> update_time_average(const std::vector<double>& abar_prev,
                                               const Sdr& alpha, int avg_window) {
  if (avg_window < 1)
    throw std::invalid_argument("update_time_average: T must be >= 1, got " +
                                std::to_string(avg_window));
  detail::require(abar_prev.size() == alpha.active.size(),
                  "update_time_average: size mismatch");
  std::vector<double> out(abar_prev.size());
  const double window = avg_window;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = ((window - 1.0) * abar_prev[i] + static_cast<double>(alpha.active[i])) / window;
  }
  return out;
}

// <abar_i> = mean of the neighbors' time-averaged activities. A column with
// no neighbors keeps its own value, the limit as the neighborhood vanishes.
inline std::vector<double> recent_activity(const std::vector<double>& abar,
                                           const NeighborhoodMap& nbr) {
  detail::require(abar.size() == nbr.neighbors.size(), "recent_activity: size mismatch");
  std::vector<double> out(abar.size());
  for (std::size_t i = 0; i < abar.size(); ++i) {
    const auto& neighbors = nbr.neighbors[i];
    if (neighbors.empty()) {
      out[i] = abar[i];
      continue;
    }
    double sum = 0.0;
    for (std::uint32_t j : neighbors) sum += abar[j];
    out[i] = sum / static_cast<double>(neighbors.size());
  }
  return out;
}

// beta_i = exp(-eta * (abar_i - <abar_i>)); always positive.
inline std::vector<double> update_boost(const std::vector<double>& abar,
                                        const std::vector<double>& recent, double eta) {
  detail::require(abar.size() == recent.size(), "update_boost: size mismatch");
  if (!(eta >= 0.0))
    throw std::invalid_argument("update_boost: eta must be >= 0, got " + std::to_string(eta));
  std::vector<double> beta(abar.size());
  for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = std::exp(-eta * (abar[i] - recent[i]));
  return beta;
}

// Hebbian update on the active columns: pool synapses aligned with an active
// input gain perm_delta, the rest lose it; results are clamped to [0, 1].
// Inactive columns are untouched.
inline PermanenceMatrix hebbian_update(PermanenceMatrix perm, const Sdr& alpha,
                                       const std::vector<double>& input,
                                       const PotentialPool& pool, double perm_delta) {
  detail::require(static_cast<int>(alpha.active.size()) == perm.num_columns,
                  "hebbian_update: activation size does not match permanences");
  detail::require(static_cast<int>(input.size()) == perm.num_inputs,
                  "hebbian_update: input size does not match permanences");
  detail::require(pool.num_columns == perm.num_columns,
                  "hebbian_update: pool does not match permanences");
  for (std::size_t i = 0; i < alpha.active.size(); ++i) {
    if (!alpha.active[i]) continue;
    const auto& members = pool.columns[i];
    auto& row = perm.rows[i];
    std::vector<std::pair<std::uint32_t, double>> updated;
    updated.reserve(members.size());
    auto it = row.begin();
    for (std::uint32_t j : members) {
      while (it != row.end() && it->first < j) ++it;  // entries outside the pool are dropped
      double value = (it != row.end() && it->first == j) ? it->second : 0.0;
      value += input[j] != 0.0 ? perm_delta : -perm_delta;
      updated.emplace_back(j, std::clamp(value, 0.0, 1.0));
    }
    row = std::move(updated);
  }
  return perm;
}

}  // namespace htmsp
