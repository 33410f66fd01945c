// Copyright (c) 2026 The etts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "etts/gaussian.hpp"

#include "etts/error.hpp"

namespace etts {

torch::Tensor diag_normal_log_density(const torch::Tensor& x, const torch::Tensor& mean, const torch::Tensor& std) {
  ETTS_CHECK(x.sizes() == mean.sizes() && x.sizes() == std.sizes(), "log density: shape mismatch");
  ETTS_CHECK(std.numel() == 0 || std.min().item<double>() > 0.0, "log density: standard deviations must be > 0");
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  auto z = (x - mean) / std;
  return (-0.5 * z * z - torch::log(std) - kHalfLog2Pi).sum(1);
}

torch::Tensor diag_normal_log_density(const torch::Tensor& x, const GaussianStats& stats) {
  ETTS_CHECK(x.sizes() == stats.mean.sizes() && x.sizes() == stats.log_std.sizes(), "log density: shape mismatch");
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  auto z = (x - stats.mean) * torch::exp(-stats.log_std);
  return (-0.5 * z * z - stats.log_std - kHalfLog2Pi).sum(1);
}

torch::Tensor sample_diag_normal(const GaussianStats& stats, double noise_scale, torch::Generator& generator) {
  ETTS_CHECK(noise_scale >= 0.0, "sample: noise_scale must be >= 0");
  if (noise_scale == 0.0) return stats.mean;
  auto eps = torch::randn(stats.mean.sizes(), generator, stats.mean.options().requires_grad(false));
  return stats.mean + noise_scale * stats.std() * eps;
}

torch::Generator make_generator(std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  return gen;
}

}  // namespace etts
