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
#include "dpfl/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dpfl/errors.h"
#include "dpfl/io.h"

namespace dpfl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integrand evaluation points used to locate the peak before normalizing.
constexpr int kPeakScanPoints = 4096;
// The interval is cut into this many panels, each integrated adaptively.
constexpr int kPanels = 64;
constexpr double kPanelRelativeTolerance = 1e-11;

void CheckMechanismArgs(double q, double sigma, double order) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw InvalidArgument("sampling ratio q must lie in (0, 1]");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("noise multiplier sigma must be finite and > 0");
  }
  if (!(order > 1.0) || !std::isfinite(order)) {
    throw InvalidArgument("Renyi order must be finite and > 1");
  }
}

double LogSumExp(std::span<const double> terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == -kInf) return -kInf;
  double sum = 0.0;
  for (const double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

// log(1 - q + q * e^x) without overflow for large x or cancellation for
// small q.
double LogMixture(double q, double x) {
  if (q == 1.0) return x;
  if (x > 0.0) return x + std::log(q + (1.0 - q) * std::exp(-x));
  return std::log1p(q * std::expm1(x));
}

bool IsInteger(double x) { return std::floor(x) == x; }

}  // namespace

double RdpSampledGaussianBinomial(double q, double sigma, int order) {
  CheckMechanismArgs(q, sigma, order);
  if (order < 2) throw InvalidArgument("binomial path needs integer order >= 2");
  const double a = order;
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(order) + 1);
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double lgamma_a1 = std::lgamma(a + 1.0);
  for (int k = 0; k <= order; ++k) {
    const double kd = k;
    // (1-q)^(a-k) vanishes identically at q = 1 except for k = a.
    if (q == 1.0 && k < order) continue;
    double term = lgamma_a1 - std::lgamma(kd + 1.0) - std::lgamma(a - kd + 1.0);
    if (k < order) term += (a - kd) * log_1mq;
    term += kd * log_q + kd * (kd - 1.0) * inv_two_var;
    terms.push_back(term);
  }
  // The sum is at least 1 exactly; clamp rounding below it.
  return std::max(0.0, LogSumExp(terms) / (a - 1.0));
}

double RdpSampledGaussianQuadrature(double q, double sigma, double order,
                                    const QuadratureOptions& options) {
  CheckMechanismArgs(q, sigma, order);
  const double var = sigma * sigma;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * var);
  auto log_integrand = [&](double z) {
    const double log_ratio = (2.0 * z - 1.0) / (2.0 * var);  // log mu1/mu0
    return log_norm - z * z / (2.0 * var) + order * LogMixture(q, log_ratio);
  };

  // The dominant mass sits between the mu0 mode at 0 and the mu1-weighted
  // mode at z = order; pad both sides by many standard deviations.
  const double pad = 12.0 * sigma + 12.0;
  const double lo = -pad;
  const double hi = order + pad;

  double peak = -kInf;
  for (int i = 0; i <= kPeakScanPoints; ++i) {
    const double z = lo + (hi - lo) * i / kPeakScanPoints;
    peak = std::max(peak, log_integrand(z));
  }

  auto normalized = [&](double z) { return std::exp(log_integrand(z) - peak); };
  double total = 0.0;
  double total_error = 0.0;
  const double width = (hi - lo) / kPanels;
  for (int p = 0; p < kPanels; ++p) {
    const double a = lo + p * width;
    const double b = (p + 1 == kPanels) ? hi : a + width;
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            normalized, a, b, options.max_depth, kPanelRelativeTolerance,
            &error);
    total += value;
    total_error += error;
  }
  if (!(total > 0.0) || !(total_error <= options.rel_tolerance * total)) {
    throw QuadratureError("sampled Gaussian RDP quadrature did not converge: "
                          "error estimate " + FormatDouble(total_error) +
                          " at order " + FormatDouble(order));
  }
  return std::max(0.0, (std::log(total) + peak) / (order - 1.0));
}

double RdpSampledGaussian(double q, double sigma, double order) {
  if (sigma == 0.0) {
    CheckMechanismArgs(q, 1.0, order);
    return kInf;
  }
  if (IsInteger(order) && order >= 2.0 && order <= 1e6) {
    return RdpSampledGaussianBinomial(q, sigma, static_cast<int>(order));
  }
  return RdpSampledGaussianQuadrature(q, sigma, order);
}

std::vector<double> DefaultOrders() {
  std::vector<double> orders = {1.25, 1.5, 1.75, 2.0, 2.5};
  for (int a = 3; a <= 16; ++a) orders.push_back(a);
  for (int a = 20; a <= 64; a += 4) orders.push_back(a);
  return orders;
}

std::vector<double> RdpCurve(double q, double sigma,
                             std::span<const double> orders) {
  std::vector<double> curve;
  curve.reserve(orders.size());
  for (const double order : orders) {
    curve.push_back(RdpSampledGaussian(q, sigma, order));
  }
  return curve;
}

double RdpToDpOffset(double order, double delta) {
  return std::log1p(-1.0 / order) -
         (std::log(order) + std::log(delta)) / (order - 1.0);
}

PrivacyLedger::PrivacyLedger(std::vector<double> orders)
    : orders_(std::move(orders)), rdp_(orders_.size(), 0.0) {
  for (const double order : orders_) {
    if (!(order > 1.0) || !std::isfinite(order)) {
      throw InvalidArgument("Renyi orders must be finite and > 1");
    }
  }
}

PrivacyLedger PrivacyLedger::Compose(std::size_t rounds, double q,
                                     double sigma) const {
  if (rounds == 0) return *this;
  return Compose(rounds, RdpCurve(q, sigma, orders_));
}

PrivacyLedger PrivacyLedger::Compose(
    std::size_t rounds, std::span<const double> per_round_rdp) const {
  if (per_round_rdp.size() != orders_.size()) {
    throw DimensionMismatch("RDP curve length differs from order grid");
  }
  PrivacyLedger next = *this;
  if (rounds == 0) return next;
  next.rounds_ += rounds;
  const double t = static_cast<double>(rounds);
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    next.rdp_[i] += t * per_round_rdp[i];
  }
  return next;
}

EpsilonResult PrivacyLedger::Epsilon(double delta) const {
  if (orders_.empty()) throw InvalidArgument("empty Renyi order grid");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  EpsilonResult best{kInf, orders_.front()};
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const double eps = rdp_[i] + RdpToDpOffset(orders_[i], delta);
    if (eps < best.epsilon) best = {eps, orders_[i]};
  }
  return best;
}

std::vector<BudgetRow> BudgetTable(double q, double sigma, double delta,
                                   std::span<const std::size_t> rounds) {
  const PrivacyLedger empty;
  const std::vector<double> curve = RdpCurve(q, sigma, empty.orders());
  std::vector<BudgetRow> rows;
  rows.reserve(rounds.size());
  for (const std::size_t t : rounds) {
    const EpsilonResult eps = empty.Compose(t, curve).Epsilon(delta);
    rows.push_back({t, q, sigma, delta, eps.epsilon, eps.order});
  }
  return rows;
}

void WriteBudgetCsv(std::ostream& out, std::span<const BudgetRow> rows) {
  out << "T,q,sigma,delta,epsilon,alpha\n";
  for (const BudgetRow& row : rows) {
    out << row.rounds << ',' << FormatDouble(row.q) << ','
        << FormatDouble(row.sigma) << ',' << FormatDouble(row.delta) << ','
        << FormatDouble(row.epsilon) << ',' << FormatDouble(row.order) << '\n';
  }
}

}  // namespace dpfl
