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

#include "hoirobust/f4m.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hoirobust::f4m {
namespace {

Tensor random_normal(Rng& rng, std::vector<std::size_t> shape, double stddev) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Tensor flatten_tokens(const Tensor& map) {
  if (map.rank() != 3) throw ShapeError("expected a [H, W, D] map, got " + map.shape_string());
  return map.reshaped({map.dim(0) * map.dim(1), map.dim(2)});
}

void require_divisible(std::size_t h, std::size_t w, int rows, int cols) {
  if (rows < 1 || cols < 1 || h % static_cast<std::size_t>(rows) != 0 || w % static_cast<std::size_t>(cols) != 0) {
    throw ConfigError("grid " + std::to_string(rows) + "x" + std::to_string(cols) + " does not divide the " +
                      std::to_string(h) + "x" + std::to_string(w) + " token grid");
  }
}

double max_row_sum_error(const Tensor& weights) {
  double worst = 0.0;
  for (std::size_t i = 0; i < weights.dim(0); ++i) {
    const auto r = weights.row(i);
    worst = std::max(worst, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
  }
  return worst;
}

}  // namespace

void F4MConfig::validate() const {
  if (query_type < 1 || query_type > 4) throw ConfigError("query_type must be 1..4");
  if (grid_rows < 1 || grid_cols < 1) throw ConfigError("grid must be at least 1x1");
  if (!(pi_f >= 0.0 && pi_f <= 1.0)) throw ConfigError("pi_f must lie in [0, 1]");
  if (d_model < 1) throw ConfigError("d_model must be positive");
  if (num_vfms < 1) throw ConfigError("num_vfms must be positive");
  if (patch_grid < 1) throw ConfigError("patch_grid must be positive");
  if (vfm_dim < 1) throw ConfigError("vfm_dim must be positive");
}

void parse_grid(const std::string& s, F4MConfig& cfg) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("grid must look like RxC, got '" + s + "'");
  try {
    std::size_t used_r = 0;
    std::size_t used_c = 0;
    const int r = std::stoi(s.substr(0, x), &used_r);
    const int c = std::stoi(s.substr(x + 1), &used_c);
    if (used_r != x || used_c != s.size() - x - 1) throw std::invalid_argument(s);
    cfg.grid_rows = r;
    cfg.grid_cols = c;
  } catch (const std::logic_error&) {
    throw ConfigError("grid must look like RxC, got '" + s + "'");
  }
}

void validate(const VfmOutput& out) {
  if (out.global_tokens.rank() != 2 || out.global_tokens.dim(0) < 1) {
    throw ShapeError("global tokens must be [G, D] with G >= 1, got " + out.global_tokens.shape_string());
  }
  if (out.regional_tokens.rank() != 3 || out.regional_tokens.dim(0) * out.regional_tokens.dim(1) < 1) {
    throw ShapeError("regional tokens must be [H, W, D], got " + out.regional_tokens.shape_string());
  }
  if (out.regional_tokens.dim(2) != out.global_tokens.dim(1)) {
    throw ShapeError("global and regional token widths differ");
  }
}

AttentionResult masked_attention(const Tensor& queries, const Tensor& keys, const Tensor& values,
                                 const std::optional<AttentionMask>& mask) {
  if (queries.rank() != 2 || keys.rank() != 2 || values.rank() != 2) throw ShapeError("attention expects rank-2 inputs");
  if (queries.dim(1) != keys.dim(1)) throw ShapeError("query and key widths differ");
  if (keys.dim(0) != values.dim(0)) throw ShapeError("key and value counts differ");
  const std::size_t nq = queries.dim(0);
  const std::size_t nk = keys.dim(0);
  if (mask && (mask->rows != nq || mask->cols != nk)) throw ShapeError("mask shape does not match [Q, K]");

  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(queries.dim(1), 1)));
  const Tensor logits = matmul(queries, transpose(keys));
  Tensor weights({nq, nk});
  for (std::size_t i = 0; i < nq; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nk; ++j) {
      if (!mask || mask->at(i, j)) peak = std::max(peak, logits.at(i, j) * scale);
    }
    if (!std::isfinite(peak)) throw InvariantError("attention row " + std::to_string(i) + " is fully masked");
    double total = 0.0;
    for (std::size_t j = 0; j < nk; ++j) {
      if (mask && !mask->at(i, j)) continue;
      const double e = std::exp(logits.at(i, j) * scale - peak);
      weights.at(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < nk; ++j) weights.at(i, j) /= total;
  }
  return {matmul(weights, values), std::move(weights)};
}

AttentionMask cell_mask(std::size_t h, std::size_t w, int rows, int cols) {
  require_divisible(h, w, rows, cols);
  const std::size_t ch = h / static_cast<std::size_t>(rows);
  const std::size_t cw = w / static_cast<std::size_t>(cols);
  const std::size_t cells = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  AttentionMask mask(1 + cells, h * w, false);
  for (std::size_t j = 0; j < h * w; ++j) {
    const std::size_t i = j / w;
    const std::size_t k = j % w;
    mask.set(0, j, true);
    mask.set(1 + (i / ch) * static_cast<std::size_t>(cols) + k / cw, j, true);
  }
  return mask;
}

MockVfm::MockVfm(std::uint64_t seed, std::size_t channels, std::size_t dim, std::size_t patch_grid)
    : channels_(channels), dim_(dim), patch_grid_(patch_grid) {
  if (channels < 1 || dim < 1 || patch_grid < 1) throw ConfigError("mock VFM dimensions must be positive");
  Rng rng(seed);
  weight_ = random_normal(rng, {channels, dim}, 1.0 / std::sqrt(static_cast<double>(channels)));
  bias_ = random_normal(rng, {1, dim}, 0.1);
}

VfmOutput MockVfm::forward(const Tensor& image, std::optional<std::pair<int, int>> global_cells) const {
  if (image.rank() != 3 || image.dim(2) != channels_ || image.dim(0) < 1 || image.dim(1) < 1) {
    throw ShapeError("mock VFM expects [H, W, " + std::to_string(channels_) + "], got " + image.shape_string());
  }
  const std::size_t h = image.dim(0);
  const std::size_t w = image.dim(1);
  const std::size_t p = patch_grid_;
  std::optional<AttentionMask> mask;
  if (global_cells) mask = cell_mask(p, p, global_cells->first, global_cells->second);
  ++calls_;

  // Adaptive average pooling: bin i covers [floor(i*H/P), ceil((i+1)*H/P)).
  Tensor pooled({p * p, channels_});
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t y0 = i * h / p;
    const std::size_t y1 = ((i + 1) * h + p - 1) / p;
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t x0 = j * w / p;
      const std::size_t x1 = ((j + 1) * w + p - 1) / p;
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      for (std::size_t c = 0; c < channels_; ++c) {
        double sum = 0.0;
        for (std::size_t y = y0; y < y1; ++y)
          for (std::size_t x = x0; x < x1; ++x) sum += image.at(y, x, c);
        pooled.at(i * p + j, c) = sum / n;
      }
    }
  }
  Tensor tokens = matmul(pooled, weight_);
  for (std::size_t t = 0; t < p * p; ++t)
    for (std::size_t d = 0; d < dim_; ++d) tokens.at(t, d) += bias_.at(0, d);

  const std::size_t g = mask ? mask->rows : 1;
  AttentionResult global = masked_attention(Tensor({g, dim_}), tokens, tokens, mask);
  VfmOutput out;
  out.global_tokens = std::move(global.output);
  out.regional_tokens = tokens.reshaped({p, p, dim_});
  out.global_attention = std::move(global.weights);
  return out;
}

VfmOutput mock_vfm_forward(const MockVfm& vfm, const Tensor& image, const F4MConfig& cfg) {
  cfg.validate();
  std::optional<std::pair<int, int>> cells;
  if (cfg.query_type == 4) cells = std::make_pair(cfg.grid_rows, cfg.grid_cols);
  return vfm.forward(image, cells);
}

Tensor crop_cell(const Tensor& image, int rows, int cols, int r, int c) {
  if (image.rank() != 3) throw ShapeError("crop expects [H, W, C], got " + image.shape_string());
  const std::size_t h = image.dim(0);
  const std::size_t w = image.dim(1);
  const auto ur = static_cast<std::size_t>(rows);
  const auto uc = static_cast<std::size_t>(cols);
  if (h < ur || w < uc) throw ConfigError("image is smaller than the sub-image grid");
  const std::size_t y0 = static_cast<std::size_t>(r) * h / ur;
  const std::size_t y1 = static_cast<std::size_t>(r + 1) * h / ur;
  const std::size_t x0 = static_cast<std::size_t>(c) * w / uc;
  const std::size_t x1 = static_cast<std::size_t>(c + 1) * w / uc;
  const std::size_t ch = image.dim(2);
  Tensor out({y1 - y0, x1 - x0, ch});
  for (std::size_t y = y0; y < y1; ++y)
    for (std::size_t x = x0; x < x1; ++x)
      for (std::size_t k = 0; k < ch; ++k) out.at(y - y0, x - x0, k) = image.at(y, x, k);
  return out;
}

Tensor image_queries(const VfmOutput& vfm, const F4MConfig& cfg, const Tensor* image, const VfmForward& forward) {
  cfg.validate();
  validate(vfm);
  const std::size_t d = vfm.dim();
  switch (cfg.query_type) {
    case 1:
      return slice_rows(vfm.global_tokens, 0, 1);
    case 2: {
      if (image == nullptr || !forward) throw ConfigError("query type 2 needs the input and a forward callable");
      std::vector<Tensor> parts{slice_rows(vfm.global_tokens, 0, 1)};
      for (int r = 0; r < cfg.grid_rows; ++r)
        for (int c = 0; c < cfg.grid_cols; ++c) {
          const VfmOutput sub = forward(crop_cell(*image, cfg.grid_rows, cfg.grid_cols, r, c));
          validate(sub);
          if (sub.dim() != d) throw ShapeError("sub-image tokens changed width");
          parts.push_back(slice_rows(sub.global_tokens, 0, 1));
        }
      return concat_rows(parts);
    }
    case 3: {
      const Tensor& reg = vfm.regional_tokens;
      const std::size_t h = reg.dim(0);
      const std::size_t w = reg.dim(1);
      require_divisible(h, w, cfg.grid_rows, cfg.grid_cols);
      const std::size_t ch = h / static_cast<std::size_t>(cfg.grid_rows);
      const std::size_t cw = w / static_cast<std::size_t>(cfg.grid_cols);
      Tensor out({1 + cfg.cells(), d});
      for (std::size_t k = 0; k < d; ++k) out.at(0, k) = vfm.global_tokens.at(0, k);
      const double n = static_cast<double>(ch * cw);
      for (std::size_t r = 0; r < static_cast<std::size_t>(cfg.grid_rows); ++r)
        for (std::size_t c = 0; c < static_cast<std::size_t>(cfg.grid_cols); ++c) {
          const std::size_t q = 1 + r * static_cast<std::size_t>(cfg.grid_cols) + c;
          for (std::size_t k = 0; k < d; ++k) {
            double sum = 0.0;
            for (std::size_t i = r * ch; i < (r + 1) * ch; ++i)
              for (std::size_t j = c * cw; j < (c + 1) * cw; ++j) sum += reg.at(i, j, k);
            out.at(q, k) = sum / n;
          }
        }
      return out;
    }
    default: {
      require_divisible(vfm.regional_tokens.dim(0), vfm.regional_tokens.dim(1), cfg.grid_rows, cfg.grid_cols);
      if (vfm.global_tokens.dim(0) != 1 + cfg.cells()) {
        throw InvariantError("query type 4 needs " + std::to_string(1 + cfg.cells()) + " global tokens, got " +
                             std::to_string(vfm.global_tokens.dim(0)));
      }
      return vfm.global_tokens;
    }
  }
}

Tensor encode_image_queries(const Tensor& image, const F4MConfig& cfg, const VfmForward& forward) {
  if (!forward) throw ConfigError("missing VFM forward callable");
  const VfmOutput out = forward(image);
  return image_queries(out, cfg, &image, forward);
}

Tensor Projection::apply(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != in_dim()) {
    throw ShapeError("projection expects [n, " + std::to_string(in_dim()) + "], got " + x.shape_string());
  }
  Tensor out = matmul(x, weight);
  for (std::size_t i = 0; i < out.dim(0); ++i)
    for (std::size_t j = 0; j < out.dim(1); ++j) out.at(i, j) += bias.at(0, j);
  return out;
}

Projection make_projection(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim) {
  Rng rng(seed);
  Projection p;
  p.weight = random_normal(rng, {in_dim, out_dim}, 1.0 / std::sqrt(static_cast<double>(in_dim)));
  p.bias = Tensor({1, out_dim});
  return p;
}

SelfAttention make_self_attention(std::uint64_t seed, std::size_t d) {
  Rng rng(seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  SelfAttention a;
  a.wq = random_normal(rng, {d, d}, s);
  a.wk = random_normal(rng, {d, d}, s);
  a.wv = random_normal(rng, {d, d}, s);
  return a;
}

SelfAttention identity_self_attention(std::size_t d) {
  Tensor eye({d, d});
  for (std::size_t i = 0; i < d; ++i) eye.at(i, i) = 1.0;
  return {eye, eye, eye};
}

AttentionResult decoder_self_attention_with_image_queries(const Tensor& instance_q,
                                                          std::span<const ImageQuerySource> sources,
                                                          const SelfAttention& attn) {
  if (instance_q.rank() != 2) throw ShapeError("instance queries must be [Q, d_model]");
  const std::size_t q = instance_q.dim(0);
  const std::size_t d = instance_q.dim(1);
  if (attn.wq.shape() != std::vector<std::size_t>{d, d} || attn.wk.shape() != attn.wq.shape() ||
      attn.wv.shape() != attn.wq.shape()) {
    throw ShapeError("attention weights must be [d_model, d_model]");
  }
  std::vector<Tensor> parts{instance_q};
  for (const auto& src : sources) {
    if (src.queries == nullptr || src.projection == nullptr) throw ShapeError("image query source is incomplete");
    if (src.projection->out_dim() != d) throw ShapeError("projection does not map to d_model");
    parts.push_back(src.projection->apply(*src.queries));
  }
  const Tensor x = concat_rows(parts);
  AttentionResult full = masked_attention(matmul(x, attn.wq), matmul(x, attn.wk), matmul(x, attn.wv));
  full.output = slice_rows(full.output, 0, q);
  return full;
}

Tensor decoder_self_attention_with_image_queries(const Tensor& instance_q, const Tensor& image_q,
                                                 const Projection& proj, const SelfAttention& attn) {
  const ImageQuerySource src{&image_q, &proj};
  return decoder_self_attention_with_image_queries(instance_q, std::span<const ImageQuerySource>(&src, 1), attn)
      .output;
}

GlobalTokenDecoder::GlobalTokenDecoder(std::uint64_t seed, std::size_t layers, std::size_t d_model,
                                       std::vector<std::size_t> vfm_dims, ProjectionSharing sharing)
    : sharing_(sharing) {
  if (layers < 1) throw ConfigError("decoder needs at least one layer");
  Rng rng(seed);
  for (std::size_t l = 0; l < layers; ++l) attn_.push_back(make_self_attention(rng(), d_model));
  const std::size_t sets = sharing == ProjectionSharing::kShared ? 1 : layers;
  for (std::size_t s = 0; s < sets; ++s) {
    std::vector<Projection> per_vfm;
    for (const std::size_t dv : vfm_dims) per_vfm.push_back(make_projection(rng(), dv, d_model));
    proj_.push_back(std::move(per_vfm));
  }
}

const Projection& GlobalTokenDecoder::projection(std::size_t layer, std::size_t vfm) const {
  return proj_.at(sharing_ == ProjectionSharing::kShared ? 0 : layer).at(vfm);
}

Tensor GlobalTokenDecoder::forward(const Tensor& instance_q, std::span<const Tensor> image_q) const {
  if (image_q.size() != proj_.front().size()) throw ShapeError("image query count does not match configured VFMs");
  Tensor x = instance_q;
  for (std::size_t l = 0; l < attn_.size(); ++l) {
    std::vector<ImageQuerySource> sources;
    for (std::size_t v = 0; v < image_q.size(); ++v) sources.push_back({&image_q[v], &projection(l, v)});
    x = add(x, decoder_self_attention_with_image_queries(x, sources, attn_[l]).output);
  }
  return x;
}

Tensor align_regional_map(const Tensor& map, std::size_t hb, std::size_t wb, const Projection& proj) {
  if (map.rank() != 3) throw ShapeError("regional map must be [H, W, D], got " + map.shape_string());
  const std::size_t hp = map.dim(0);
  const std::size_t wp = map.dim(1);
  const std::size_t d = map.dim(2);
  Tensor resampled({hb * wb, d});
  for (std::size_t i = 0; i < hb; ++i) {
    const std::size_t si = i * hp / hb;
    for (std::size_t j = 0; j < wb; ++j) {
      const std::size_t sj = j * wp / wb;
      for (std::size_t k = 0; k < d; ++k) resampled.at(i * wb + j, k) = map.at(si, sj, k);
    }
  }
  return proj.apply(resampled).reshaped({hb, wb, proj.out_dim()});
}

Tensor regional_fuse(const Tensor& backbone, std::span<const Tensor> aligned_maps) {
  std::vector<Tensor> parts{flatten_tokens(backbone)};
  for (const auto& m : aligned_maps) {
    if (m.shape() != backbone.shape()) {
      throw ShapeError("aligned map " + m.shape_string() + " does not match backbone " + backbone.shape_string());
    }
    parts.push_back(flatten_tokens(m));
  }
  return concat_rows(parts);
}

DropoutResult regional_dropout(const Tensor& tokens, double pi_f, bool training, Rng& rng) {
  if (tokens.rank() != 2 || tokens.dim(0) < 1) throw ShapeError("dropout expects [N, D] with N >= 1");
  const std::size_t n = tokens.dim(0);
  if (!training) return {tokens, n, 1.0, 0};
  if (!(pi_f >= 0.0 && pi_f < 1.0)) throw ConfigError("training dropout needs pi_f in [0, 1)");

  std::bernoulli_distribution drop(pi_f);
  std::vector<bool> keep(n);
  std::size_t kept = 0;
  int rounds = 0;
  while (kept == 0) {
    ++rounds;
    for (std::size_t i = 0; i < n; ++i) {
      keep[i] = !drop(rng);
      kept += keep[i] ? 1 : 0;
    }
  }
  const double scale = static_cast<double>(n) / static_cast<double>(kept);
  Tensor out(tokens.shape());
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    for (std::size_t k = 0; k < tokens.dim(1); ++k) out.at(i, k) = tokens.at(i, k) * scale;
  }
  return {std::move(out), kept, scale, rounds};
}

Tensor regional_dropout(const Tensor& tokens, double pi_f, bool training, std::uint64_t seed) {
  Rng rng(seed);
  return regional_dropout(tokens, pi_f, training, rng).tokens;
}

bool F4MCheckReport::passed() const {
  return !config_error && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {

Tensor synthetic_image(std::size_t side, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t({side, side, 3});
  for (double& v : t.data()) v = u(rng);
  return t;
}

struct KernelRun {
  Tensor queries;
  Tensor decoded;
  Tensor fused;
  Tensor dropped;
};

KernelRun run_kernel(const VfmOutput& vfm, const F4MConfig& cfg, const Tensor* image, const VfmForward& forward,
                     bool training) {
  KernelRun run;
  run.queries = image_queries(vfm, cfg, image, forward);
  const std::size_t dv = vfm.dim();
  Rng wrng(cfg.seed ^ 0xD1B54A32D192ED03ULL);
  const Tensor instance = random_normal(wrng, {4, cfg.d_model}, 1.0);
  std::vector<std::size_t> dims(cfg.num_vfms, dv);
  const GlobalTokenDecoder decoder(cfg.seed, 2, cfg.d_model, dims, ProjectionSharing::kShared);
  const std::vector<Tensor> per_vfm(cfg.num_vfms, run.queries);
  run.decoded = decoder.forward(instance, per_vfm);

  const Tensor backbone = random_normal(wrng, {6, 6, cfg.d_model}, 1.0);
  std::vector<Tensor> aligned;
  for (std::size_t v = 0; v < cfg.num_vfms; ++v) {
    Tensor tokens = flatten_tokens(vfm.regional_tokens);
    Rng drng(cfg.seed + v);
    tokens = regional_dropout(tokens, cfg.pi_f, training, drng).tokens;
    const Tensor map = tokens.reshaped(vfm.regional_tokens.shape());
    aligned.push_back(align_regional_map(map, 6, 6, make_projection(cfg.seed + 100 + v, dv, cfg.d_model)));
  }
  run.fused = regional_fuse(backbone, aligned);
  Rng drng(cfg.seed);
  run.dropped = regional_dropout(flatten_tokens(vfm.regional_tokens), cfg.pi_f, training, drng).tokens;
  return run;
}

bool bit_equal(const VfmOutput& a, const VfmOutput& b) {
  return a.global_tokens == b.global_tokens && a.regional_tokens == b.regional_tokens &&
         a.global_attention == b.global_attention;
}

}  // namespace

F4MCheckReport f4m_check(const F4MConfig& cfg, const std::optional<VfmOutput>& external) {
  F4MCheckReport report;
  report.config = cfg;
  report.external_tokens = external.has_value();
  auto add_check = [&](std::string name, bool ok, nlohmann::json measured) {
    report.checks.push_back({std::move(name), ok, std::move(measured)});
  };

  try {
    cfg.validate();
    if (cfg.query_type >= 3) {
      const std::size_t h = external ? external->regional_tokens.dim(0) : cfg.patch_grid;
      const std::size_t w = external ? external->regional_tokens.dim(1) : cfg.patch_grid;
      require_divisible(h, w, cfg.grid_rows, cfg.grid_cols);
    }
    if (cfg.query_type == 2 && external) throw ConfigError("query type 2 needs the mock VFM for sub-image passes");
    if (external) validate(*external);
  } catch (const std::exception& e) {
    report.config_error = e.what();
    return report;
  }

  const std::size_t side = cfg.patch_grid * 2;
  const Tensor image = synthetic_image(side, cfg.seed);
  const MockVfm vfm(cfg.seed, 3, cfg.vfm_dim, cfg.patch_grid);
  const VfmForward forward = [&](const Tensor& t) { return mock_vfm_forward(vfm, t, cfg); };
  const VfmForward plain = [&](const Tensor& t) { return vfm.forward(t, std::nullopt); };
  const std::size_t expected_q = cfg.query_type == 1 ? 1 : 1 + cfg.cells();

  try {
    const VfmOutput base = external ? *external : forward(image);
    const VfmOutput snapshot = base;
    const Tensor weight_before = vfm.weight();

    if (!external) {
      const VfmOutput again = forward(image);
      add_check("vfm_determinism", bit_equal(base, again), bit_equal(base, again));

      std::size_t differing = 0;
      for (std::uint64_t t = 0; t < 10; ++t) {
        const MockVfm a(cfg.seed + 2 * t + 1, 3, cfg.vfm_dim, cfg.patch_grid);
        const MockVfm b(cfg.seed + 2 * t + 2, 3, cfg.vfm_dim, cfg.patch_grid);
        if (!bit_equal(a.forward(image, std::nullopt), b.forward(image, std::nullopt))) ++differing;
      }
      add_check("vfm_seed_sensitivity", differing == 10, {{"differing_trials", differing}, {"trials", 10}});
    }

    // Inference count for the configured type.
    vfm.reset_count();
    const Tensor queries = external ? image_queries(base, cfg) : encode_image_queries(image, cfg, forward);
    const std::size_t calls = vfm.call_count();
    add_check("image_query_count", queries.dim(0) == expected_q,
              {{"q_img", queries.dim(0)}, {"expected", expected_q}});
    if (!external) {
      const std::size_t expected_calls = cfg.query_type == 2 ? 1 + cfg.cells() : 1;
      add_check("inference_count", calls == expected_calls, {{"calls", calls}, {"expected", expected_calls}});
    }

    // Attention rows and masked locality.
    double row_err = 0.0;
    double masked_max = 0.0;
    bool locality_checked = false;
    if (!base.global_attention.empty()) row_err = max_row_sum_error(base.global_attention);
    if (cfg.query_type == 4 && !base.global_attention.empty()) {
      const AttentionMask m = cell_mask(base.regional_tokens.dim(0), base.regional_tokens.dim(1), cfg.grid_rows,
                                        cfg.grid_cols);
      for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
          if (!m.at(i, j)) masked_max = std::max(masked_max, std::abs(base.global_attention.at(i, j)));
      locality_checked = true;
    }
    {
      Rng rng(cfg.seed + 17);
      const Tensor q = random_normal(rng, {6, 8}, 1.0);
      const Tensor k = random_normal(rng, {10, 8}, 1.0);
      const Tensor v = random_normal(rng, {10, 5}, 1.0);
      AttentionMask m(6, 10, false);
      std::bernoulli_distribution coin(0.5);
      for (std::size_t i = 0; i < 6; ++i) {
        m.set(i, i, true);
        for (std::size_t j = 0; j < 10; ++j)
          if (coin(rng)) m.set(i, j, true);
      }
      const AttentionResult r = masked_attention(q, k, v, m);
      row_err = std::max(row_err, max_row_sum_error(r.weights));
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 10; ++j)
          if (!m.at(i, j)) masked_max = std::max(masked_max, std::abs(r.weights.at(i, j)));
    }
    add_check("attention_rows_sum_to_one", row_err <= 1e-9, {{"max_abs_error", row_err}});
    add_check("masked_locality", masked_max == 0.0,
              {{"max_masked_weight", masked_max}, {"type4_cells_checked", locality_checked}});

    // Type-3 group means against brute force.
    if (base.regional_tokens.dim(0) % static_cast<std::size_t>(cfg.grid_rows) == 0 &&
        base.regional_tokens.dim(1) % static_cast<std::size_t>(cfg.grid_cols) == 0) {
      F4MConfig t3 = cfg;
      t3.query_type = 3;
      const Tensor got = image_queries(base, t3);
      const std::size_t h = base.regional_tokens.dim(0);
      const std::size_t w = base.regional_tokens.dim(1);
      const std::size_t ch = h / static_cast<std::size_t>(cfg.grid_rows);
      const std::size_t cw = w / static_cast<std::size_t>(cfg.grid_cols);
      double worst = 0.0;
      for (std::size_t k = 0; k < base.dim(); ++k) {
        std::vector<double> sums(cfg.cells(), 0.0);
        for (std::size_t i = 0; i < h; ++i)
          for (std::size_t j = 0; j < w; ++j)
            sums[(i / ch) * static_cast<std::size_t>(cfg.grid_cols) + j / cw] += base.regional_tokens.at(i, j, k);
        for (std::size_t c = 0; c < cfg.cells(); ++c)
          worst = std::max(worst, std::abs(got.at(1 + c, k) - sums[c] / static_cast<double>(ch * cw)));
      }
      add_check("type3_oracle", worst <= 1e-12, {{"max_abs_error", worst}});
    }

    // Types 2 and 4 agree on the query count.
    if (!external && cfg.patch_grid % static_cast<std::size_t>(cfg.grid_rows) == 0 &&
        cfg.patch_grid % static_cast<std::size_t>(cfg.grid_cols) == 0) {
      F4MConfig t2 = cfg;
      t2.query_type = 2;
      F4MConfig t4 = cfg;
      t4.query_type = 4;
      const Tensor q2 = encode_image_queries(image, t2, [&](const Tensor& t) { return mock_vfm_forward(vfm, t, t2); });
      const Tensor q4 = encode_image_queries(image, t4, [&](const Tensor& t) { return mock_vfm_forward(vfm, t, t4); });
      add_check("type2_type4_query_count", q2.dim(0) == 1 + cfg.cells() && q4.dim(0) == 1 + cfg.cells(),
                {{"type2", q2.dim(0)}, {"type4", q4.dim(0)}, {"expected", 1 + cfg.cells()}});
    }

    // Discard contract across Q_img and VFM counts.
    {
      Rng rng(cfg.seed + 29);
      const std::size_t q = 3;
      const Tensor instance = random_normal(rng, {q, cfg.d_model}, 1.0);
      const SelfAttention attn = make_self_attention(cfg.seed + 31, cfg.d_model);
      bool shapes_ok = true;
      nlohmann::json shapes = nlohmann::json::array();
      for (const std::size_t qimg : {std::size_t{0}, std::size_t{1}, std::size_t{5}}) {
        for (const std::size_t nv : {std::size_t{1}, std::size_t{2}}) {
          std::vector<Tensor> iq;
          std::vector<Projection> projs;
          for (std::size_t v = 0; v < nv; ++v) {
            iq.push_back(random_normal(rng, {qimg, base.dim()}, 1.0));
            projs.push_back(make_projection(cfg.seed + 37 + v, base.dim(), cfg.d_model));
          }
          std::vector<ImageQuerySource> src;
          for (std::size_t v = 0; v < nv; ++v) src.push_back({&iq[v], &projs[v]});
          const AttentionResult r = decoder_self_attention_with_image_queries(instance, src, attn);
          const bool ok = r.output.shape() == std::vector<std::size_t>{q, cfg.d_model} &&
                          r.weights.dim(0) == q + nv * qimg && max_row_sum_error(r.weights) <= 1e-9;
          shapes_ok = shapes_ok && ok;
          shapes.push_back({{"q_img", qimg}, {"num_vfms", nv}, {"rows", r.output.dim(0)}, {"cols", r.output.dim(1)}});
        }
      }
      add_check("decoder_discard_shape", shapes_ok, shapes);

      const Tensor none({0, base.dim()});
      const Projection proj = make_projection(cfg.seed + 41, base.dim(), cfg.d_model);
      const Tensor with_empty = decoder_self_attention_with_image_queries(instance, none, proj, attn);
      const Tensor plain_out =
          masked_attention(matmul(instance, attn.wq), matmul(instance, attn.wk), matmul(instance, attn.wv)).output;
      add_check("decoder_empty_image_queries", with_empty == plain_out, with_empty == plain_out);
    }

    // Regional fusion token count.
    {
      Rng rng(cfg.seed + 43);
      const Tensor backbone = random_normal(rng, {4, 5, cfg.d_model}, 1.0);
      std::vector<Tensor> maps;
      for (std::size_t v = 0; v < cfg.num_vfms; ++v) {
        maps.push_back(align_regional_map(base.regional_tokens, 4, 5,
                                          make_projection(cfg.seed + 47 + v, base.dim(), cfg.d_model)));
      }
      const Tensor fused = regional_fuse(backbone, maps);
      const std::size_t expected = 20 * (1 + cfg.num_vfms);
      const bool prefix = std::equal(backbone.data().begin(), backbone.data().end(), fused.data().begin());
      add_check("regional_fuse_length", fused.dim(0) == expected && prefix,
                {{"tokens", fused.dim(0)}, {"expected", expected}, {"backbone_first", prefix}});
    }

    // Dropout.
    {
      const Tensor tokens = flatten_tokens(base.regional_tokens);
      Rng rng(cfg.seed + 53);
      const DropoutResult eval = regional_dropout(tokens, cfg.pi_f, false, rng);
      add_check("dropout_eval_identity", eval.tokens == tokens && rng == Rng(cfg.seed + 53),
                eval.tokens == tokens);

      const double p = std::min(cfg.pi_f, 0.99);
      const DropoutResult train = regional_dropout(tokens, p, true, rng);
      const double expected_scale = static_cast<double>(tokens.dim(0)) / static_cast<double>(train.kept);
      bool survivors_ok = train.scale == expected_scale;
      // Rows that were zero on input cannot be told apart once dropped.
      std::size_t survivors = 0;
      std::size_t dropped = 0;
      std::size_t ambiguous = 0;
      auto is_zero = [](std::span<const double> r) {
        return std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
      };
      for (std::size_t i = 0; i < tokens.dim(0); ++i) {
        const auto out_row = train.tokens.row(i);
        const auto in_row = tokens.row(i);
        if (is_zero(in_row)) {
          ++ambiguous;
          survivors_ok = survivors_ok && is_zero(out_row);
        } else if (is_zero(out_row)) {
          ++dropped;
        } else {
          ++survivors;
          for (std::size_t k = 0; k < in_row.size(); ++k)
            survivors_ok = survivors_ok && out_row[k] == in_row[k] * expected_scale;
        }
      }
      survivors_ok = survivors_ok && survivors <= train.kept && train.kept <= survivors + ambiguous &&
                     survivors + dropped + ambiguous == tokens.dim(0);
      add_check("dropout_survivor_scaling", survivors_ok,
                {{"n", tokens.dim(0)}, {"kept", train.kept}, {"scale", train.scale}, {"expected_scale", expected_scale}});

      Rng erng(cfg.seed + 59);
      std::uniform_real_distribution<double> u(0.5, 1.5);
      Tensor probe({64, 8});
      for (double& v : probe.data()) v = u(erng);
      std::vector<double> acc(probe.size(), 0.0);
      constexpr int kTrials = 10000;
      for (int t = 0; t < kTrials; ++t) {
        const DropoutResult r = regional_dropout(probe, 0.5, true, erng);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += r.tokens.data()[i];
      }
      const double out_mean = std::accumulate(acc.begin(), acc.end(), 0.0) / (kTrials * static_cast<double>(acc.size()));
      const double in_mean = mean(probe);
      const double rel = std::abs(out_mean - in_mean) / std::abs(in_mean);
      add_check("dropout_expectation", rel < 0.01,
                {{"trials", kTrials}, {"pi_f", 0.5}, {"input_mean", in_mean}, {"output_mean", out_mean},
                 {"relative_deviation", rel}});
    }

    // Eval determinism of the whole path, then the frozen contract.
    {
      const Tensor* img = external ? nullptr : &image;
      const KernelRun a = run_kernel(base, cfg, img, cfg.query_type == 2 ? plain : forward, false);
      const KernelRun b = run_kernel(base, cfg, img, cfg.query_type == 2 ? plain : forward, false);
      const bool same = a.queries == b.queries && a.decoded == b.decoded && a.fused == b.fused && a.dropped == b.dropped;
      add_check("eval_determinism", same, same);
      if (cfg.training) {
        const KernelRun t = run_kernel(base, cfg, img, cfg.query_type == 2 ? plain : forward, true);
        add_check("training_path_shapes", t.decoded.shape() == a.decoded.shape() && t.fused.shape() == a.fused.shape(),
                  true);
      }
      const bool frozen = external ? bit_equal(base, snapshot)
                                   : bit_equal(snapshot, forward(image)) && vfm.weight() == weight_before;
      add_check("frozen_contract", frozen, frozen);
    }
  } catch (const ConfigError& e) {
    report.config_error = e.what();
  }
  return report;
}

nlohmann::json to_json(const F4MConfig& cfg) {
  return {{"query_type", cfg.query_type},
          {"grid", std::to_string(cfg.grid_rows) + "x" + std::to_string(cfg.grid_cols)},
          {"pi_f", cfg.pi_f},
          {"d_model", cfg.d_model},
          {"num_vfms", cfg.num_vfms},
          {"training", cfg.training},
          {"seed", cfg.seed},
          {"patch_grid", cfg.patch_grid},
          {"vfm_dim", cfg.vfm_dim}};
}

nlohmann::json to_json(const F4MCheckReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
  nlohmann::json out{{"config", to_json(report.config)},
                     {"external_tokens", report.external_tokens},
                     {"passed", report.passed()},
                     {"checks", std::move(checks)}};
  out["config_error"] = report.config_error ? nlohmann::json(*report.config_error) : nlohmann::json(nullptr);
  return out;
}

namespace {

std::vector<double> number_row(const nlohmann::json& row, const char* what) {
  if (!row.is_array()) throw SchemaError(std::string(what) + " rows must be arrays of numbers");
  std::vector<double> out;
  for (const auto& v : row) {
    if (!v.is_number()) throw SchemaError(std::string(what) + " rows must be arrays of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Tensor matrix_from(const nlohmann::json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) throw SchemaError(std::string(what) + " must be a non-empty array");
  std::vector<double> data;
  std::size_t width = 0;
  for (const auto& r : rows) {
    const auto vals = number_row(r, what);
    if (width == 0) width = vals.size();
    if (vals.size() != width || width == 0) throw SchemaError(std::string(what) + " rows have unequal widths");
    data.insert(data.end(), vals.begin(), vals.end());
  }
  return Tensor({rows.size(), width}, std::move(data));
}

}  // namespace

VfmOutput parse_vfm_tokens(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("global") || !doc.contains("regional")) {
    throw SchemaError("VFM token file needs 'global' and 'regional'");
  }
  VfmOutput out;
  const auto& g = doc.at("global");
  out.global_tokens = !g.empty() && g.front().is_number() ? matrix_from(nlohmann::json::array({g}), "global")
                                                           : matrix_from(g, "global");
  const auto& r = doc.at("regional");
  if (!r.is_array() || r.empty()) throw SchemaError("regional must be a non-empty array");
  if (r.front().is_array() && !r.front().empty() && r.front().front().is_array()) {
    std::vector<Tensor> rows;
    for (const auto& row : r) rows.push_back(matrix_from(row, "regional"));
    const std::size_t w = rows.front().dim(0);
    const std::size_t d = rows.front().dim(1);
    for (const auto& row : rows) {
      if (row.dim(0) != w || row.dim(1) != d) throw SchemaError("regional grid rows have unequal shapes");
    }
    out.regional_tokens = concat_rows(rows).reshaped({rows.size(), w, d});
  } else {
    const Tensor flat = matrix_from(r, "regional");
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat.dim(0)))));
    if (side * side != flat.dim(0)) throw SchemaError("flat regional token count must be a perfect square");
    out.regional_tokens = flat.reshaped({side, side, flat.dim(1)});
  }
  validate(out);
  return out;
}

}  // namespace hoirobust::f4m
