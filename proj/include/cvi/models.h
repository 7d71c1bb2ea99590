#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cvi/core.h"

namespace cvi {

/// Four-node road network with edges (1,2), (1,3), (2,3), (2,4), (3,4) and
/// linear edge delays slope * flow + constant. `demand` vehicles per unit time
/// travel from node 1 to node 4.
struct BraessSpec {
  double demand = 6.0;
  Point slopes = (Point(5) << 10, 1, 1, 1, 10).finished();
  Point constants = (Point(5) << 0, 50, 10, 50, 0).finished();
};

namespace braess {
inline constexpr Index kEdge12 = 0;
inline constexpr Index kEdge13 = 1;
inline constexpr Index kEdge23 = 2;
inline constexpr Index kEdge24 = 3;
inline constexpr Index kEdge34 = 4;
}  // namespace braess

/// Node-edge incidence matrix of the Braess network (4 x 5).
Matrix BraessIncidence();

Problem BuildBraess(const BraessSpec& spec = {});

/// Delays of paths 1-2-4, 1-2-3-4 and 1-3-4: the sums of edge delays F_e(x)
/// along each path.
std::array<double, 3> PathDelays(const Problem& problem, const Point& x);

/// Multi-tier network economy with m service providers, n network providers
/// and o demand markets. Each of the Q (quantity), q (quality) and pi (price)
/// blocks has m*n*o entries in lexicographic (i, j, k) order, and the decision
/// vector is (Q, q, pi).
///
/// Cost families (t indexes a triple, s another):
///   production   f_i(Q)   = sum_t prod_quad[t] Q_t^2 + prod_lin[t] Q_t
///   demand price rho_t    = demand_const[t] + sum_s demand_Q(t,s) Q_s
///                                            + sum_s demand_q(t,s) q_s
///   transport    c_t      = 0.5 transport_weight[t] (q_t - transport_target[t])^2
///   opportunity  oc_t(pi) = opportunity_weight[t] pi_t^2
/// giving the negative utility gradients
///   F1_t = 2 prod_quad[t] Q_t + prod_lin[t] + pi_t - rho_t
///          - sum_{s with the same provider i} demand_Q(s, t) Q_s
///   F2_t = transport_weight[t] (q_t - transport_target[t])
///   F3_t = -Q_t + 2 opportunity_weight[t] pi_t
struct EconomySpec {
  Index m = 0;
  Index n = 0;
  Index o = 0;
  Point prod_quad, prod_lin;
  Point demand_const;
  Matrix demand_Q, demand_q;
  Point transport_weight, transport_target;
  Point opportunity_weight;
  /// Additive noise stddev for the three blocks; zero means deterministic.
  std::array<double, 3> noise_stddev{0.0, 0.0, 0.0};
  std::uint64_t noise_seed = 0;

  Index triples() const { return m * n * o; }
  /// Flat position of (i, j, k) within one block (0-based indices).
  Index Triple(Index i, Index j, Index k) const { return (i * n + j) * o + k; }
};

/// The two-provider, one-network, one-market-triple instance with the
/// quadratic costs of the worked example.
EconomySpec PaperEconomySpec();

/// Partitioned (F1, F2, F3) affine mapping over the nonnegative orthant,
/// split as a product of three orthants so the incremental method can sample
/// blocks. Blocks with nonzero noise are wrapped as stochastic.
Problem BuildEconomy(const EconomySpec& spec);

/// F(x) = Mx + q over the nonnegative orthant.
Problem BuildLcp(const Matrix& M, const Point& q);

/// Bilinear saddle f(u, v) = u^T A v over a box: F(u, v) = (A v, -A^T u).
Problem BuildSaddle(const Matrix& A, const Point& lower, const Point& upper);

}  // namespace cvi
