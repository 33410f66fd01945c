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

// Top-level entries of a checkpoint archive.
namespace etts::checkpoint_keys {
inline constexpr const char* kSynthesizer = "synthesizer";
inline constexpr const char* kPosterior = "posterior";
inline constexpr const char* kDiscriminators = "discriminators";
inline constexpr const char* kGeneratorOptimizer = "optimizer_g";
inline constexpr const char* kDiscriminatorOptimizer = "optimizer_d";
inline constexpr const char* kStep = "step";
inline constexpr const char* kConfigHash = "config_hash";
inline constexpr const char* kConfigText = "config_text";
}  // namespace etts::checkpoint_keys
