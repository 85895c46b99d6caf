/*
 * Copyright 2026 The dpfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef DPFL_ACCOUNTANT_H_
#define DPFL_ACCOUNTANT_H_

// Renyi-DP accounting for the sampled Gaussian mechanism.
//
// One round releases the average of clipped client updates plus Gaussian
// noise, with each client participating with rate q. Its RDP at order a is
//
//   eps_1(a) = 1/(a-1) * ln E_{z ~ mu0} [ (1 - q + q * mu1(z)/mu0(z))^a ]
//
// with mu0 = N(0, sigma^2) and mu1 = N(1, sigma^2). RDP composes additively
// over rounds; (eps, delta)-DP follows from the conversion
//
//   eps = eps_T(a) + log(1 - 1/a) - (log a + log delta) / (a - 1)
//
// minimized over the order grid.

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

namespace dpfl {

// One-round RDP at integer order `order` >= 2 via the binomial expansion
//   E[(1-q+q L)^a] = sum_k C(a,k) (1-q)^(a-k) q^k exp(k(k-1)/(2 sigma^2)),
// summed in log space.
double RdpSampledGaussianBinomial(double q, double sigma, int order);

struct QuadratureOptions {
  double rel_tolerance = 1e-9;  // error estimate relative to the integral
  unsigned max_depth = 15;
};

// One-round RDP at real order > 1 by adaptive Gauss-Kronrod quadrature of
// the defining integral. Throws QuadratureError when the error estimate does
// not reach the tolerance.
double RdpSampledGaussianQuadrature(double q, double sigma, double order,
                                    const QuadratureOptions& options = {});

// Dispatches to the binomial path for integer orders and quadrature
// otherwise. Returns +inf for sigma == 0.
double RdpSampledGaussian(double q, double sigma, double order);

// Default Renyi order grid: 1.25, 1.5, 1.75, 2, 2.5, 3..16, 20, 24, ..., 64.
std::vector<double> DefaultOrders();

struct EpsilonResult {
  double epsilon = 0.0;
  double order = 0.0;
};

// Accumulated RDP per order for a sequence of rounds.
class PrivacyLedger {
 public:
  explicit PrivacyLedger(std::vector<double> orders = DefaultOrders());

  // Composes `rounds` rounds of the sampled Gaussian mechanism.
  PrivacyLedger Compose(std::size_t rounds, double q, double sigma) const;

  // Same with a precomputed one-round RDP curve aligned with orders().
  PrivacyLedger Compose(std::size_t rounds,
                        std::span<const double> per_round_rdp) const;

  // Smallest epsilon over the grid at the given delta. Throws
  // InvalidArgument for an empty grid or delta outside (0, 1).
  EpsilonResult Epsilon(double delta) const;

  const std::vector<double>& orders() const { return orders_; }
  const std::vector<double>& rdp() const { return rdp_; }
  std::size_t rounds() const { return rounds_; }

 private:
  std::vector<double> orders_;
  std::vector<double> rdp_;
  std::size_t rounds_ = 0;
};

// One-round RDP for every order in `orders`.
std::vector<double> RdpCurve(double q, double sigma,
                             std::span<const double> orders);

// The RDP-to-(eps, delta) conversion term for a single order.
double RdpToDpOffset(double order, double delta);

struct BudgetRow {
  std::size_t rounds;
  double q;
  double sigma;
  double delta;
  double epsilon;
  double order;
};

// epsilon(T) for every T in `rounds`.
std::vector<BudgetRow> BudgetTable(double q, double sigma, double delta,
                                   std::span<const std::size_t> rounds);

// Comma-separated rows "T,q,sigma,delta,epsilon,alpha" with a header line.
void WriteBudgetCsv(std::ostream& out, std::span<const BudgetRow> rows);

}  // namespace dpfl

#endif  // DPFL_ACCOUNTANT_H_
