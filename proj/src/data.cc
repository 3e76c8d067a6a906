// Copyright 2026 The dpclip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "dpclip/data.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

namespace dpclip {
namespace {

constexpr uint64_t kBatchStream = 0xba7c4;
constexpr uint64_t kGeneratorStream = 0x9e4e;

bool ParseDouble(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

[[noreturn]] void Malformed(int64_t line_no, const std::string& why) {
  throw InputError("libsvm line " + std::to_string(line_no) + ": " + why);
}

void AppendNumber(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

Dataset ParseLibsvm(std::istream& in) {
  Dataset data;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    auto next_token = [&rest]() -> std::string_view {
      const size_t b = rest.find_first_not_of(" \t\r");
      if (b == std::string_view::npos) {
        rest = {};
        return {};
      }
      rest.remove_prefix(b);
      const size_t e = rest.find_first_of(" \t\r");
      std::string_view tok = rest.substr(0, e);
      rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
      return tok;
    };
    std::string_view tok = next_token();
    if (tok.empty()) continue;

    SparseExample ex;
    if (!ParseDouble(tok, ex.label)) {
      Malformed(line_no, "bad label '" + std::string(tok) + "'");
    }
    while (!(tok = next_token()).empty()) {
      const size_t colon = tok.find(':');
      if (colon == std::string_view::npos) {
        Malformed(line_no, "expected idx:val, got '" + std::string(tok) + "'");
      }
      int64_t idx = 0;
      const std::string_view idx_tok = tok.substr(0, colon);
      const auto [ptr, ec] =
          std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size() ||
          idx < 1 || idx > std::numeric_limits<int32_t>::max()) {
        Malformed(line_no, "bad index '" + std::string(idx_tok) + "'");
      }
      double val = 0.0;
      if (!ParseDouble(tok.substr(colon + 1), val)) {
        Malformed(line_no, "bad value in '" + std::string(tok) + "'");
      }
      const auto zero_based = static_cast<int32_t>(idx - 1);
      if (!ex.indices.empty() && zero_based <= ex.indices.back()) {
        Malformed(line_no, "indices must be strictly increasing");
      }
      ex.indices.push_back(zero_based);
      ex.values.push_back(val);
    }
    data.dim = std::max(data.dim, ex.RequiredDim());
    data.examples.push_back(std::move(ex));
  }
  return data;
}

Dataset ParseLibsvm(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseLibsvm(in);
}

Dataset LoadLibsvmFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  Dataset data = ParseLibsvm(in);
  if (data.empty()) throw InputError("dataset file has no examples: " + path);
  return data;
}

std::string SerializeLibsvm(const Dataset& data) {
  std::string out;
  for (const auto& ex : data.examples) {
    AppendNumber(out, ex.label);
    for (size_t i = 0; i < ex.indices.size(); ++i) {
      out += ' ';
      out += std::to_string(static_cast<int64_t>(ex.indices[i]) + 1);
      out += ':';
      AppendNumber(out, ex.values[i]);
    }
    out += '\n';
  }
  return out;
}

Dataset TakeFirst(const Dataset& data, int64_t count) {
  if (count >= data.size()) return data;
  Dataset out;
  out.examples.assign(data.examples.begin(), data.examples.begin() + count);
  for (const auto& ex : out.examples) out.dim = std::max(out.dim, ex.RequiredDim());
  // Keep the feature space of the full file so train and test agree.
  out.dim = data.dim;
  return out;
}

bool HeavyTailSpec::HasFiniteVariance() const {
  switch (distribution) {
    case HeavyTailDistribution::kPareto:
    case HeavyTailDistribution::kStudentT:
      return shape > 2.0;
    case HeavyTailDistribution::kLogNormal:
      return true;
  }
  return false;
}

void HeavyTailSpec::Validate() const {
  if (!(shape > 0) || !(scale > 0) || !(noise_scale >= 0) || dim < 1) {
    throw InputError("HeavyTailSpec: shape, scale and dim must be positive");
  }
  if (!HasFiniteVariance() && !allow_infinite_variance) {
    throw ConfigError("HeavyTailSpec: shape " + std::to_string(shape) +
                      " has infinite variance; pass the override to allow it");
  }
}

HeavyTailSampler::HeavyTailSampler(HeavyTailDistribution distribution,
                                   double shape)
    : distribution_(distribution), shape_(shape) {
  switch (distribution) {
    case HeavyTailDistribution::kPareto: {
      // Unit-scale Pareto on [1, inf).
      const double a = shape;
      if (a > 1.0) {
        center_ = a / (a - 1.0);
      } else {
        center_ = std::pow(2.0, 1.0 / a);  // median
      }
      if (a > 2.0) inv_sd_ = (a - 1.0) * std::sqrt((a - 2.0) / a);
      break;
    }
    case HeavyTailDistribution::kStudentT:
      if (shape > 2.0) inv_sd_ = std::sqrt((shape - 2.0) / shape);
      break;
    case HeavyTailDistribution::kLogNormal: {
      const double s2 = shape * shape;
      center_ = std::exp(0.5 * s2);
      inv_sd_ = 1.0 / std::sqrt(std::expm1(s2) * std::exp(s2));
      break;
    }
  }
}

double HeavyTailSampler::Raw(std::mt19937_64& rng) const {
  switch (distribution_) {
    case HeavyTailDistribution::kPareto: {
      // 1 - U lies in (0, 1], so the power is finite.
      const double u = 1.0 - std::generate_canonical<double, 64>(rng);
      return std::pow(u, -1.0 / shape_);
    }
    case HeavyTailDistribution::kStudentT:
      return std::student_t_distribution<double>(shape_)(rng);
    case HeavyTailDistribution::kLogNormal:
      return std::lognormal_distribution<double>(0.0, shape_)(rng);
  }
  return 0.0;
}

double HeavyTailSampler::operator()(std::mt19937_64& rng) const {
  return (Raw(rng) - center_) * inv_sd_;
}

Dataset GenerateHeavyTailed(const HeavyTailSpec& spec, int64_t n,
                            const LossKind& loss, const Vector& x_true) {
  spec.Validate();
  if (n < 1) throw InputError("GenerateHeavyTailed: n must be positive");
  if (x_true.size() != spec.dim) {
    throw InputError("GenerateHeavyTailed: planted vector has wrong dimension");
  }
  const bool logistic = loss.kind() == LossKind::Kind::kLogistic;
  if (!logistic && loss.kind() != LossKind::Kind::kRidge) {
    throw InputError("GenerateHeavyTailed: only ridge and logistic labels");
  }
  const HeavyTailSampler draw(spec.distribution, spec.shape);
  std::mt19937_64 rng(DeriveSeed(spec.seed, kGeneratorStream, 0));

  Dataset data;
  data.dim = spec.dim;
  data.examples.resize(static_cast<size_t>(n));
  for (auto& ex : data.examples) {
    ex.indices.resize(spec.dim);
    ex.values.resize(spec.dim);
    for (int32_t j = 0; j < spec.dim; ++j) {
      ex.indices[j] = j;
      ex.values[j] = spec.scale * draw(rng);
    }
    const double signal = ex.Dot(x_true) + spec.noise_scale * draw(rng);
    ex.label = logistic ? (signal >= 0 ? 1.0 : -1.0) : signal;
  }
  return data;
}

double RidgeNoiseVarianceAtTruth(const HeavyTailSpec& spec) {
  return 4.0 * spec.noise_scale * spec.noise_scale * spec.dim * spec.scale *
         spec.scale;
}

std::vector<int64_t> DrawBatch(const Dataset& data, const SamplerSpec& sampler,
                               int64_t batch_size, int64_t iteration) {
  const int64_t n = data.size();
  if (n < 1) throw InputError("DrawBatch: empty dataset");
  if (batch_size < 1) throw InputError("DrawBatch: batch size must be positive");
  std::mt19937_64 rng(
      DeriveSeed(sampler.seed, kBatchStream, static_cast<uint64_t>(iteration)));
  std::vector<int64_t> batch;
  if (sampler.mode == SamplingMode::kWithReplacement) {
    std::uniform_int_distribution<int64_t> pick(0, n - 1);
    batch.resize(static_cast<size_t>(batch_size));
    for (auto& i : batch) i = pick(rng);
    return batch;
  }
  if (batch_size > n) {
    throw ConfigError("poisson sampling rate " + std::to_string(batch_size) +
                      "/" + std::to_string(n) + " exceeds 1");
  }
  if (batch_size == n) {
    batch.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) batch[i] = i;
    return batch;
  }
  // Geometric gaps between inclusions give independent Bernoulli(q) draws.
  const double q = static_cast<double>(batch_size) / static_cast<double>(n);
  std::geometric_distribution<int64_t> gap(q);
  batch.reserve(static_cast<size_t>(batch_size + 4 * std::sqrt(batch_size) + 4));
  for (int64_t i = gap(rng); i < n; i += 1 + gap(rng)) batch.push_back(i);
  return batch;
}

}  // namespace dpclip
