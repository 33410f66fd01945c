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

#pragma once

#include <torch/torch.h>

#include <cstdint>

namespace etts {

/// Diagonal normal parameters over a latent sequence, [B, d_latent, frames].
struct GaussianStats {
  torch::Tensor mean;
  torch::Tensor log_std;

  torch::Tensor std() const { return torch::exp(log_std); }
};

/// Prior side: N(mu_theta(c), sigma_theta(c)).
struct PriorStats : GaussianStats {};
/// Posterior side: N(mu_phi(x), sigma_phi(x)).
struct PosteriorStats : GaussianStats {};

/// Sum over channels of log N(x; mean, std), returned per frame: [B, frames].
/// Throws if any std is not strictly positive.
torch::Tensor diag_normal_log_density(const torch::Tensor& x, const torch::Tensor& mean, const torch::Tensor& std);

/// Same, parameterised by log standard deviations (always valid).
torch::Tensor diag_normal_log_density(const torch::Tensor& x, const GaussianStats& stats);

/// mean + noise_scale * std * eps with eps ~ N(0, 1) drawn from `generator`.
torch::Tensor sample_diag_normal(const GaussianStats& stats, double noise_scale, torch::Generator& generator);

/// CPU generator seeded deterministically.
torch::Generator make_generator(std::uint64_t seed);

}  // namespace etts
