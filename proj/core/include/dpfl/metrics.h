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
#ifndef DPFL_METRICS_H_
#define DPFL_METRICS_H_

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

namespace dpfl {

struct NormHistogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;  // edges.size() - 1 bins
  std::size_t round = 0;

  std::size_t total() const;
};

// Histogram of update norms. Values below the first edge land in the first
// bin and values at or above the last edge in the last bin. Throws
// InvalidArgument for fewer than two edges or non-increasing edges.
NormHistogram UpdateNormHistogram(std::span<const double> norms,
                                  std::span<const double> edges,
                                  std::size_t round = 0);

// `bins` uniform bins over [0, 2C].
std::vector<double> DefaultHistogramEdges(double clip_bound,
                                          std::size_t bins = 32);

// Mean clip factor and mean absolute deviation from that mean, over the
// participating clients, summed in the order given.
struct ClipFactorStats {
  double mean = 0.0;       // alpha_bar
  double deviation = 0.0;  // alpha_tilde
};
ClipFactorStats ComputeClipFactorStats(std::span<const double> factors);

double Mean(std::span<const double> values);

// Fraction of values strictly below `threshold`.
double FractionBelow(std::span<const double> values, double threshold);

// "bin_lo,bin_hi,count" rows.
void WriteHistogramCsv(std::ostream& out, const NormHistogram& histogram);

}  // namespace dpfl

#endif  // DPFL_METRICS_H_
