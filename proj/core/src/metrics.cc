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
#include "dpfl/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpfl/errors.h"
#include "dpfl/io.h"

namespace dpfl {

std::size_t NormHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

NormHistogram UpdateNormHistogram(std::span<const double> norms,
                                  std::span<const double> edges,
                                  std::size_t round) {
  if (edges.size() < 2) throw InvalidArgument("histogram needs >= 2 edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw InvalidArgument("histogram edges must be strictly increasing");
    }
  }
  NormHistogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  h.round = round;
  const std::size_t bins = h.counts.size();
  for (const double v : norms) {
    // upper_bound gives the first edge > v; bin i covers [edges[i], edges[i+1]).
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    const auto pos = static_cast<std::size_t>(std::distance(edges.begin(), it));
    const std::size_t bin = pos == 0 ? 0 : std::min(pos - 1, bins - 1);
    ++h.counts[bin];
  }
  return h;
}

std::vector<double> DefaultHistogramEdges(double clip_bound,
                                          std::size_t bins) {
  if (!(clip_bound > 0.0)) throw InvalidArgument("clip bound must be > 0");
  if (bins == 0) throw InvalidArgument("histogram needs >= 1 bin");
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = 2.0 * clip_bound * static_cast<double>(i) /
               static_cast<double>(bins);
  }
  return edges;
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

ClipFactorStats ComputeClipFactorStats(std::span<const double> factors) {
  ClipFactorStats stats;
  if (factors.empty()) return stats;
  stats.mean = Mean(factors);
  double deviation = 0.0;
  for (const double f : factors) deviation += std::abs(f - stats.mean);
  stats.deviation = deviation / static_cast<double>(factors.size());
  return stats;
}

double FractionBelow(std::span<const double> values, double threshold) {
  if (values.empty()) return 0.0;
  const auto below = std::count_if(values.begin(), values.end(),
                                   [&](double v) { return v < threshold; });
  return static_cast<double>(below) / static_cast<double>(values.size());
}

void WriteHistogramCsv(std::ostream& out, const NormHistogram& histogram) {
  out << "# update-norm histogram, round " << histogram.round << '\n';
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    out << FormatDouble(histogram.edges[i]) << ','
        << FormatDouble(histogram.edges[i + 1]) << ',' << histogram.counts[i]
        << '\n';
  }
}

}  // namespace dpfl
