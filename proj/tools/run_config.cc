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
#include "run_config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "dpfl/errors.h"
#include "dpfl/io.h"

namespace dpfl::tools {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double ParseReal(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw OutOfRange(key, "expected a finite number, got '" + value + "'");
  }
  return out;
}

std::uint64_t ParseUnsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw OutOfRange(key, "expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

std::size_t ParseCount(const std::string& key, const std::string& value,
                       std::size_t min) {
  const std::uint64_t v = ParseUnsigned(key, value);
  if (v < min) {
    throw OutOfRange(key, "must be >= " + std::to_string(min) + ", got " + value);
  }
  return static_cast<std::size_t>(v);
}

// Checks lo < v (or lo <= v) and v < hi (or v <= hi).
double ParseBounded(const std::string& key, const std::string& value,
                    double lo, bool lo_closed, double hi, bool hi_closed) {
  const double v = ParseReal(key, value);
  const bool lo_ok = lo_closed ? v >= lo : v > lo;
  const bool hi_ok = hi_closed ? v <= hi : v < hi;
  if (!lo_ok || !hi_ok) {
    std::ostringstream range;
    range << (lo_closed ? '[' : '(') << FormatDouble(lo) << ", "
          << (std::isinf(hi) ? "inf" : FormatDouble(hi)) << (hi_closed ? ']' : ')');
    throw OutOfRange(key, "value " + value + " outside " + range.str());
  }
  return v;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> ParseWidths(const std::string& key,
                                     const std::string& value) {
  std::vector<std::size_t> widths;
  if (value.empty() || value == "none") return widths;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    widths.push_back(ParseCount(key, Trim(item), 1));
  }
  return widths;
}

std::string JoinWidths(const std::vector<std::size_t>& widths) {
  if (widths.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(widths[i]);
  }
  return out;
}

struct ParseState {
  RunConfig config;
  bool delta_set = false;
};

struct KeySpec {
  const char* name;
  std::function<void(ParseState&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeySpec>& Keys() {
  static const std::vector<KeySpec> keys = {
      {"method",
       [](ParseState& s, const std::string& v) {
         try {
           s.config.federation.method = ParseMethod(v);
         } catch (const InvalidArgument& e) {
           throw OutOfRange("method", e.what());
         }
       },
       [](const RunConfig& c) {
         return std::string(MethodName(c.federation.method));
       }},
      {"rounds",
       [](ParseState& s, const std::string& v) {
         s.config.federation.rounds = ParseCount("rounds", v, 1);
       },
       [](const RunConfig& c) { return std::to_string(c.federation.rounds); }},
      {"clients",
       [](ParseState& s, const std::string& v) {
         s.config.federation.privacy.total_clients = ParseCount("clients", v, 1);
       },
       [](const RunConfig& c) {
         return std::to_string(c.federation.privacy.total_clients);
       }},
      {"q",
       [](ParseState& s, const std::string& v) {
         s.config.federation.privacy.sampling_ratio =
             ParseBounded("q", v, 0.0, false, 1.0, true);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.federation.privacy.sampling_ratio);
       }},
      {"local_epochs",
       [](ParseState& s, const std::string& v) {
         s.config.federation.local_epochs = ParseCount("local_epochs", v, 1);
       },
       [](const RunConfig& c) {
         return std::to_string(c.federation.local_epochs);
       }},
      {"batch_size",
       [](ParseState& s, const std::string& v) {
         s.config.federation.batch_size = ParseCount("batch_size", v, 1);
       },
       [](const RunConfig& c) { return std::to_string(c.federation.batch_size); }},
      {"sparsity",
       [](ParseState& s, const std::string& v) {
         s.config.federation.sparsity =
             ParseBounded("sparsity", v, 0.0, false, 1.0, true);
       },
       [](const RunConfig& c) { return FormatDouble(c.federation.sparsity); }},
      {"hidden",
       [](ParseState& s, const std::string& v) {
         s.config.federation.hidden_widths = ParseWidths("hidden", v);
       },
       [](const RunConfig& c) { return JoinWidths(c.federation.hidden_widths); }},
      {"clip",
       [](ParseState& s, const std::string& v) {
         s.config.federation.privacy.clip_bound =
             ParseBounded("clip", v, 0.0, false, kInf, false);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.federation.privacy.clip_bound);
       }},
      {"sigma",
       [](ParseState& s, const std::string& v) {
         s.config.federation.privacy.noise_multiplier =
             ParseBounded("sigma", v, 0.0, true, kInf, false);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.federation.privacy.noise_multiplier);
       }},
      {"delta",
       [](ParseState& s, const std::string& v) {
         s.config.federation.privacy.delta =
             ParseBounded("delta", v, 0.0, false, 1.0, false);
         s.delta_set = true;
       },
       [](const RunConfig& c) { return FormatDouble(c.federation.privacy.delta); }},
      {"lr",
       [](ParseState& s, const std::string& v) {
         s.config.federation.optimizer.learning_rate =
             ParseBounded("lr", v, 0.0, true, kInf, false);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.federation.optimizer.learning_rate);
       }},
      {"lr_decay",
       [](ParseState& s, const std::string& v) {
         s.config.federation.optimizer.decay =
             ParseBounded("lr_decay", v, 0.0, true, kInf, false);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.federation.optimizer.decay);
       }},
      {"momentum",
       [](ParseState& s, const std::string& v) {
         s.config.federation.optimizer.momentum =
             ParseBounded("momentum", v, 0.0, true, 1.0, false);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.federation.optimizer.momentum);
       }},
      {"rho",
       [](ParseState& s, const std::string& v) {
         s.config.federation.optimizer.rho =
             ParseBounded("rho", v, 0.0, true, kInf, false);
       },
       [](const RunConfig& c) { return FormatDouble(c.federation.optimizer.rho); }},
      {"seed",
       [](ParseState& s, const std::string& v) {
         s.config.federation.seed = ParseUnsigned("seed", v);
       },
       [](const RunConfig& c) { return std::to_string(c.federation.seed); }},
      {"hist_bins",
       [](ParseState& s, const std::string& v) {
         s.config.federation.histogram_bins = ParseCount("hist_bins", v, 1);
       },
       [](const RunConfig& c) {
         return std::to_string(c.federation.histogram_bins);
       }},
      {"dataset",
       [](ParseState& s, const std::string& v) {
         if (v.empty()) throw OutOfRange("dataset", "must not be empty");
         s.config.data.dataset = v;
       },
       [](const RunConfig& c) { return c.data.dataset; }},
      {"test_dataset",
       [](ParseState& s, const std::string& v) { s.config.data.test_dataset = v; },
       [](const RunConfig& c) { return c.data.test_dataset; }},
      {"synthetic_classes",
       [](ParseState& s, const std::string& v) {
         s.config.data.synthetic_classes = ParseCount("synthetic_classes", v, 2);
       },
       [](const RunConfig& c) { return std::to_string(c.data.synthetic_classes); }},
      {"synthetic_dim",
       [](ParseState& s, const std::string& v) {
         s.config.data.synthetic_dim = ParseCount("synthetic_dim", v, 1);
       },
       [](const RunConfig& c) { return std::to_string(c.data.synthetic_dim); }},
      {"synthetic_n",
       [](ParseState& s, const std::string& v) {
         s.config.data.synthetic_n = ParseCount("synthetic_n", v, 2);
       },
       [](const RunConfig& c) { return std::to_string(c.data.synthetic_n); }},
      {"synthetic_separation",
       [](ParseState& s, const std::string& v) {
         s.config.data.synthetic_separation =
             ParseBounded("synthetic_separation", v, 0.0, true, kInf, false);
       },
       [](const RunConfig& c) { return FormatDouble(c.data.synthetic_separation); }},
      {"test_fraction",
       [](ParseState& s, const std::string& v) {
         s.config.data.test_fraction =
             ParseBounded("test_fraction", v, 0.0, false, 1.0, false);
       },
       [](const RunConfig& c) { return FormatDouble(c.data.test_fraction); }},
      {"partition",
       [](ParseState& s, const std::string& v) {
         if (v != "iid" && v != "dirichlet") {
           throw OutOfRange("partition", "expected 'iid' or 'dirichlet', got '" +
                                             v + "'");
         }
         s.config.data.partition = v;
       },
       [](const RunConfig& c) { return c.data.partition; }},
      {"dirichlet_alpha",
       [](ParseState& s, const std::string& v) {
         s.config.data.dirichlet_alpha =
             ParseBounded("dirichlet_alpha", v, 0.0, false, kInf, false);
       },
       [](const RunConfig& c) { return FormatDouble(c.data.dirichlet_alpha); }},
  };
  return keys;
}

void Apply(ParseState& state, const std::string& key, const std::string& value) {
  for (const KeySpec& spec : Keys()) {
    if (key == spec.name) {
      spec.set(state, value);
      return;
    }
  }
  throw UnknownKey(key, "unknown configuration key");
}

void ApplyLine(ParseState& state, const std::string& raw, std::size_t line_no) {
  std::string line = raw;
  if (const auto hash = line.find('#'); hash != std::string::npos) {
    line.resize(hash);
  }
  line = Trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("line " + std::to_string(line_no),
                      "expected key = value, got '" + line + "'");
  }
  Apply(state, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
}

RunConfig Finish(ParseState& state) {
  RunConfig& config = state.config;
  FederationConfig& fed = config.federation;
  if (!IsSparsified(fed.method) && fed.sparsity != 1.0) {
    throw ConflictingOptions(
        "sparsity", "method " + std::string(MethodName(fed.method)) +
                        " does not sparsify; sparsity must be 1 (got " +
                        FormatDouble(fed.sparsity) + ")");
  }
  PrivacySpec& privacy = fed.privacy;
  if (!state.delta_set) {
    privacy.delta = 1.0 / static_cast<double>(privacy.total_clients);
    if (!(privacy.delta < 1.0)) {
      throw OutOfRange("delta", "default delta = 1/clients needs clients >= 2");
    }
  }
  const double m = std::round(privacy.sampling_ratio *
                              static_cast<double>(privacy.total_clients));
  if (m < 1.0) {
    throw OutOfRange("q", "q * clients rounds to zero sampled clients");
  }
  privacy.sampled_clients = static_cast<std::size_t>(m);
  if (config.data.dataset == "synthetic" &&
      config.data.synthetic_n < config.data.synthetic_classes) {
    throw OutOfRange("synthetic_n", "must be >= synthetic_classes");
  }
  try {
    fed.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("config", e.what());
  }
  return config;
}

}  // namespace

RunConfig DefaultRunConfig() {
  ParseState state;
  return Finish(state);
}

RunConfig ParseConfigText(const std::string& text,
                          const std::vector<std::string>& overrides) {
  ParseState state;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) ApplyLine(state, line, ++line_no);
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(item, "override must be key=value");
    }
    Apply(state, Trim(item.substr(0, eq)), Trim(item.substr(eq + 1)));
  }
  return Finish(state);
}

RunConfig ParseConfig(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides) {
  std::string text;
  if (!path.empty()) {
    if (!std::filesystem::exists(path)) {
      throw ConfigError("config", "file not found: " + path.string());
    }
    text = ReadFile(path);
  }
  return ParseConfigText(text, overrides);
}

std::vector<std::pair<std::string, std::string>> ResolvedKeyValues(
    const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const KeySpec& spec : Keys()) out.emplace_back(spec.name, spec.get(config));
  return out;
}

std::string ToConfigText(const RunConfig& config) {
  std::string out;
  for (const auto& [key, value] : ResolvedKeyValues(config)) {
    out += key + " = " + value + "\n";
  }
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> out;
  for (const KeySpec& spec : Keys()) out.emplace_back(spec.name);
  return out;
}

LoadedData LoadData(const RunConfig& config) {
  const DataConfig& data = config.data;
  const std::uint64_t seed = config.federation.seed;
  LoadedData out;
  Dataset full;
  if (data.dataset == "synthetic") {
    full = GenerateSynthetic(data.synthetic_classes, data.synthetic_dim,
                             data.synthetic_n, data.synthetic_separation, seed);
  } else {
    full = LoadDataset(data.dataset);
  }
  if (data.test_dataset.empty()) {
    TrainTestSplit split = SplitTrainTest(full, data.test_fraction, seed);
    out.train = std::move(split.train);
    out.test = std::move(split.test);
  } else {
    out.train = std::move(full);
    out.test = LoadDataset(data.test_dataset);
  }
  const std::size_t clients = config.federation.privacy.total_clients;
  out.partition = data.partition == "iid"
                      ? PartitionIid(out.train, clients, seed)
                      : PartitionDirichlet(out.train, clients,
                                           data.dirichlet_alpha, seed);
  return out;
}

}  // namespace dpfl::tools
