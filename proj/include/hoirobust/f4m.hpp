// Copyright 2026 The hoirobust Authors. All Rights Reserved.
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

// Token fusion with a frozen foundation model, at toy scale.
//
// A frozen vision encoder contributes two things:
//   * global tokens, projected and appended to the decoder's instance queries
//     as image queries for self-attention, then discarded;
//   * regional tokens, reshaped to a map, aligned with the backbone map and
//     appended to the encoder's token sequence after spatial dropout.
//
// MockVfm is a seeded linear stand-in for the encoder.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoirobust/tensor.hpp"

namespace hoirobust::f4m {

using Rng = std::mt19937_64;

struct F4MConfig {
  int query_type = 4;
  int grid_rows = 2;
  int grid_cols = 2;
  double pi_f = 0.5;
  std::size_t d_model = 32;
  std::size_t num_vfms = 1;
  bool training = false;
  std::uint64_t seed = 7;
  /// Side of the square regional token grid.
  std::size_t patch_grid = 24;
  std::size_t vfm_dim = 16;

  /// Throws ConfigError on an out-of-range field.
  void validate() const;
  [[nodiscard]] std::size_t cells() const noexcept {
    return static_cast<std::size_t>(grid_rows) * static_cast<std::size_t>(grid_cols);
  }
};

/// Parses "RxC".
void parse_grid(const std::string& s, F4MConfig& cfg);

struct VfmOutput {
  Tensor global_tokens;    // [G, D_v]
  Tensor regional_tokens;  // [H_p, W_p, D_v]
  /// Attention weights that produced global_tokens, [G, H_p*W_p]. Empty for
  /// externally supplied tokens.
  Tensor global_attention;

  [[nodiscard]] std::size_t dim() const { return global_tokens.dim(1); }
};

/// Throws ShapeError when the token tensors disagree.
void validate(const VfmOutput& out);

/// Boolean mask, row-major [rows, cols].
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  AttentionMask() = default;
  AttentionMask(std::size_t r, std::size_t c, bool value) : rows(r), cols(c), allowed(r * c, value ? 1 : 0) {}
  [[nodiscard]] bool at(std::size_t i, std::size_t j) const { return allowed[i * cols + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) { allowed[i * cols + j] = v ? 1 : 0; }
};

struct AttentionResult {
  Tensor output;   // [Q, D_value]
  Tensor weights;  // [Q, K]
};

/// softmax(q k^T / sqrt(d)) v with masked logits at -inf. Masked weights are
/// exactly 0. Throws InvariantError on a fully masked row.
[[nodiscard]] AttentionResult masked_attention(const Tensor& queries, const Tensor& keys, const Tensor& values,
                                               const std::optional<AttentionMask>& mask = std::nullopt);

/// Per-grid-cell block mask over an h x w token grid, prefixed by one
/// all-true row for the whole-image token. Throws ConfigError when the grid
/// does not divide the token grid.
[[nodiscard]] AttentionMask cell_mask(std::size_t h, std::size_t w, int rows, int cols);

class MockVfm {
 public:
  MockVfm(std::uint64_t seed, std::size_t channels, std::size_t dim, std::size_t patch_grid);

  /// Input [H, W, C]. Emits 1 + rows*cols global tokens when global_cells
  /// is set, else 1.
  [[nodiscard]] VfmOutput forward(const Tensor& image, std::optional<std::pair<int, int>> global_cells) const;

  [[nodiscard]] std::size_t call_count() const noexcept { return calls_.load(); }
  void reset_count() const noexcept { calls_.store(0); }
  [[nodiscard]] const Tensor& weight() const noexcept { return weight_; }
  [[nodiscard]] const Tensor& bias() const noexcept { return bias_; }

 private:
  std::size_t channels_;
  std::size_t dim_;
  std::size_t patch_grid_;
  Tensor weight_;  // [C, D_v]
  Tensor bias_;    // [1, D_v]
  mutable std::atomic<std::size_t> calls_{0};
};

/// Runs MockVfm for cfg: Type 4 asks for per-cell global tokens.
[[nodiscard]] VfmOutput mock_vfm_forward(const MockVfm& vfm, const Tensor& image, const F4MConfig& cfg);

using VfmForward = std::function<VfmOutput(const Tensor&)>;

/// Image queries [Q_img, D_v] for cfg.query_type. Type 2 crops `image` into
/// the grid and calls `forward` once per cell.
[[nodiscard]] Tensor image_queries(const VfmOutput& vfm, const F4MConfig& cfg, const Tensor* image = nullptr,
                                   const VfmForward& forward = {});

/// Complete per-image path: one forward, plus the Type 2 sub-image passes.
[[nodiscard]] Tensor encode_image_queries(const Tensor& image, const F4MConfig& cfg, const VfmForward& forward);

/// Sub-image (rows x cols grid, cell r, c) of an [H, W, C] tensor.
[[nodiscard]] Tensor crop_cell(const Tensor& image, int rows, int cols, int r, int c);

struct Projection {
  Tensor weight;  // [D_in, D_out]
  Tensor bias;    // [1, D_out]

  [[nodiscard]] Tensor apply(const Tensor& x) const;
  [[nodiscard]] std::size_t in_dim() const { return weight.dim(0); }
  [[nodiscard]] std::size_t out_dim() const { return weight.dim(1); }
};

[[nodiscard]] Projection make_projection(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim);

struct SelfAttention {
  Tensor wq;
  Tensor wk;
  Tensor wv;
};

[[nodiscard]] SelfAttention make_self_attention(std::uint64_t seed, std::size_t d);
[[nodiscard]] SelfAttention identity_self_attention(std::size_t d);

struct ImageQuerySource {
  const Tensor* queries;  // [Q_img, D_v]
  const Projection* projection;
};

/// Self-attention over [instance; proj(image_q_1); ...; proj(image_q_n)],
/// truncated to the instance rows. Weights are over all Q + sum(Q_img) keys.
[[nodiscard]] AttentionResult decoder_self_attention_with_image_queries(const Tensor& instance_q,
                                                                        std::span<const ImageQuerySource> sources,
                                                                        const SelfAttention& attn);

[[nodiscard]] Tensor decoder_self_attention_with_image_queries(const Tensor& instance_q, const Tensor& image_q,
                                                               const Projection& proj, const SelfAttention& attn);

enum class ProjectionSharing { kShared, kPerLayer };

/// Stack of residual self-attention layers fed with the same image queries.
class GlobalTokenDecoder {
 public:
  GlobalTokenDecoder(std::uint64_t seed, std::size_t layers, std::size_t d_model, std::vector<std::size_t> vfm_dims,
                     ProjectionSharing sharing);

  [[nodiscard]] Tensor forward(const Tensor& instance_q, std::span<const Tensor> image_q) const;
  [[nodiscard]] const Projection& projection(std::size_t layer, std::size_t vfm) const;
  [[nodiscard]] std::size_t layers() const noexcept { return attn_.size(); }
  [[nodiscard]] ProjectionSharing sharing() const noexcept { return sharing_; }

 private:
  ProjectionSharing sharing_;
  std::vector<SelfAttention> attn_;
  std::vector<std::vector<Projection>> proj_;  // [1 or layers][vfm]
};

/// Nearest resample of [H_p, W_p, D_v] to [H_b, W_b, D_v], then channel
/// projection to [H_b, W_b, d_model].
[[nodiscard]] Tensor align_regional_map(const Tensor& map, std::size_t hb, std::size_t wb, const Projection& proj);

/// Flattened backbone tokens followed by each aligned map's tokens:
/// [H_b*W_b*(1+n), d_model].
[[nodiscard]] Tensor regional_fuse(const Tensor& backbone, std::span<const Tensor> aligned_maps);

struct DropoutResult {
  Tensor tokens;
  std::size_t kept = 0;
  double scale = 1.0;
  /// Draw rounds; more than 1 when every token was dropped.
  int rounds = 0;
};

/// Training: each of the N rows is zeroed with probability pi_f and the
/// survivors are scaled by N / N_kept. Eval: identity without touching rng.
[[nodiscard]] DropoutResult regional_dropout(const Tensor& tokens, double pi_f, bool training, Rng& rng);
[[nodiscard]] Tensor regional_dropout(const Tensor& tokens, double pi_f, bool training, std::uint64_t seed);

struct InvariantCheck {
  std::string name;
  bool passed = false;
  nlohmann::json measured;
};

struct F4MCheckReport {
  F4MConfig config;
  std::vector<InvariantCheck> checks;
  std::optional<std::string> config_error;
  bool external_tokens = false;

  [[nodiscard]] bool passed() const;
};

/// Runs every invariant on seeded synthetic inputs. A bad configuration is
/// reported in config_error instead of thrown.
[[nodiscard]] F4MCheckReport f4m_check(const F4MConfig& cfg, const std::optional<VfmOutput>& external = std::nullopt);

[[nodiscard]] nlohmann::json to_json(const F4MCheckReport& report);
[[nodiscard]] nlohmann::json to_json(const F4MConfig& cfg);

/// {"global": [[...], ...], "regional": [[[...]]]}. A flat regional list of
/// N rows is accepted when N is a perfect square.
[[nodiscard]] VfmOutput parse_vfm_tokens(const nlohmann::json& doc);

}  // namespace hoirobust::f4m
