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

#include "hoirobust/cma.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hoirobust/json_io.hpp"
#include "hoirobust/parallel.hpp"

namespace hoirobust::cma {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  // splitmix64 finaliser over a golden-ratio stride.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void MixupConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (!(pi_c >= 0.0 && pi_c <= 1.0)) throw ConfigError("pi_c must lie in [0,1]");
  if (patch_size < 1) throw ConfigError("patch size must be >= 1");
}

double sample_beta(double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  for (;;) {
    const double x = gamma(rng);
    const double y = gamma(rng);
    if (x + y > 0.0) return x / (x + y);
  }
}

std::size_t PatchGrid::eligible() const {
  return static_cast<std::size_t>(std::count_if(state.begin(), state.end(), [](PatchState s) {
    return s != PatchState::kCovered;
  }));
}

std::size_t PatchGrid::dropped() const {
  return static_cast<std::size_t>(std::count(state.begin(), state.end(), PatchState::kDropped));
}

PatchGrid dropout_grid(int width, int height, std::span<const BoundingBox> boxes, double pi_c, int patch_size,
                       Rng& rng) {
  if (patch_size < 1) throw ConfigError("patch size must be >= 1");
  if (!(pi_c >= 0.0 && pi_c <= 1.0)) throw ConfigError("pi_c must lie in [0,1]");
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.cols = (width + patch_size - 1) / patch_size;
  grid.rows = (height + patch_size - 1) / patch_size;
  grid.state.assign(static_cast<std::size_t>(grid.cols) * grid.rows, PatchState::kKept);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < grid.rows; ++r) {
    const double y0 = r * patch_size;
    const double y1 = std::min(height, (r + 1) * patch_size);
    for (int c = 0; c < grid.cols; ++c) {
      const double x0 = c * patch_size;
      const double x1 = std::min(width, (c + 1) * patch_size);
      const bool covered = std::any_of(boxes.begin(), boxes.end(), [&](const BoundingBox& b) {
        return x0 < b.x2 && x1 > b.x1 && y0 < b.y2 && y1 > b.y1;
      });
      auto& s = grid.state[static_cast<std::size_t>(r) * grid.cols + c];
      if (covered) s = PatchState::kCovered;
      else if (u(rng) < pi_c) s = PatchState::kDropped;
    }
  }
  return grid;
}

Image apply_grid(const Image& image, const PatchGrid& grid) {
  Image out = image;
  const int ps = grid.patch_size;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      if (grid.at(c, r) != PatchState::kDropped) continue;
      for (int y = r * ps; y < std::min(image.height(), (r + 1) * ps); ++y)
        for (int x = c * ps; x < std::min(image.width(), (c + 1) * ps); ++x)
          for (int ch = 0; ch < Image::kChannels; ++ch) out.at(x, y, ch) = 0;
    }
  }
  return out;
}

Image patch_dropout(const Image& image, std::span<const BoundingBox> boxes, double pi_c, int patch_size,
                    std::uint64_t seed) {
  Rng rng(seed);
  return apply_grid(image, dropout_grid(image.width(), image.height(), boxes, pi_c, patch_size, rng));
}

std::vector<BoundingBox> gt_boxes(std::span<const GroundTruthInstance> gts) {
  std::vector<BoundingBox> boxes;
  boxes.reserve(gts.size() * 2);
  for (const auto& g : gts) {
    boxes.push_back(g.human);
    boxes.push_back(g.object);
  }
  return boxes;
}

namespace {

BoundingBox rescale(const BoundingBox& b, double sx, double sy, double w, double h) {
  return {std::clamp(b.x1 * sx, 0.0, w), std::clamp(b.y1 * sy, 0.0, h), std::clamp(b.x2 * sx, 0.0, w),
          std::clamp(b.y2 * sy, 0.0, h)};
}

}  // namespace

AugmentedSample sample_mix_with_ratio(const AugmentedSample& a, const AugmentedSample& b, double mu,
                                      const MixupConfig& cfg, Rng& rng) {
  cfg.validate();
  if (a.image.empty() || b.image.empty()) throw DataError("cannot mix a zero-sized image");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mixing ratio must lie in [0,1]");

  const int w = a.image.width();
  const int h = a.image.height();
  const auto boxes = gt_boxes(a.gts);
  const Image dropped = apply_grid(a.image, dropout_grid(w, h, boxes, cfg.pi_c, cfg.patch_size, rng));
  const Image partner = resize_bilinear(b.image, w, h);

  AugmentedSample out;
  out.id = a.id + "+" + b.id;
  out.image = Image(w, h);
  auto dst = out.image.pixels();
  auto pa = dropped.pixels();
  auto pb = partner.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = to_u8(mu * pa[i] + (1.0 - mu) * pb[i]);

  out.gts = a.gts;
  const double sx = static_cast<double>(w) / b.image.width();
  const double sy = static_cast<double>(h) / b.image.height();
  for (const auto& g : b.gts) {
    out.gts.push_back({rescale(g.human, sx, sy, w, h), rescale(g.object, sx, sy, w, h), g.hoi});
  }

  auto append = [&](const Provenance& p, const ImageId& id) {
    if (p.sources.empty()) {
      out.provenance.sources.push_back(id);
      out.provenance.domains.push_back("original");
      return;
    }
    out.provenance.sources.insert(out.provenance.sources.end(), p.sources.begin(), p.sources.end());
    out.provenance.domains.insert(out.provenance.domains.end(), p.domains.begin(), p.domains.end());
  };
  append(a.provenance, a.id);
  append(b.provenance, b.id);
  out.provenance.mu = mu;
  return out;
}

AugmentedSample sample_mix(const AugmentedSample& a, const AugmentedSample& b, const MixupConfig& cfg, Rng& rng) {
  cfg.validate();
  const double mu = sample_beta(cfg.alpha, rng);
  return sample_mix_with_ratio(a, b, mu, cfg, rng);
}

AugmentedSample sample_mix(const AugmentedSample& a, const AugmentedSample& b, const MixupConfig& cfg) {
  Rng rng(cfg.seed);
  return sample_mix(a, b, cfg, rng);
}

PairingPolicy parse_pairing(const std::string& s) {
  if (s == "original-synthetic" || s == "orig-synth") return PairingPolicy::kOriginalSynthetic;
  if (s == "cross-synthetic" || s == "cross-synth") return PairingPolicy::kCrossSynthetic;
  if (s == "both") return PairingPolicy::kBoth;
  throw ConfigError("unknown pairing policy '" + s + "'");
}

std::string to_string(PairingPolicy p) {
  switch (p) {
    case PairingPolicy::kOriginalSynthetic: return "original-synthetic";
    case PairingPolicy::kCrossSynthetic: return "cross-synthetic";
    case PairingPolicy::kBoth: return "both";
  }
  return "both";
}

std::filesystem::path resolve_image_path(const std::filesystem::path& root, const ImageId& id) {
  for (const char* ext : {"", ".png", ".jpg", ".jpeg"}) {
    auto p = root / (id + ext);
    if (std::filesystem::is_regular_file(p)) return p;
  }
  return root / (id + ".png");
}

std::vector<CorruptionSpec> parse_specs(const nlohmann::json& doc) {
  std::vector<CorruptionSpec> out;
  const nlohmann::json* arr = &doc;
  if (doc.is_object() && doc.contains("specs")) arr = &doc["specs"];
  if (arr->is_object()) {
    const int sev = arr->contains("severity") ? (*arr)["severity"].get<int>() : 3;
    for (const auto& s : default_specs(sev)) out.push_back(s);
    return out;
  }
  if (!arr->is_array()) throw SchemaError("specs: expected an array");
  for (const auto& s : *arr) {
    if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string()) {
      throw SchemaError("specs: each entry needs a string 'kind'");
    }
    CorruptionSpec spec;
    spec.kind = parse_corruption(s["kind"].get<std::string>());
    spec.severity = s.contains("severity") ? s["severity"].get<int>() : 3;
    if (spec.severity < 0 || spec.severity > kMaxSeverity) throw ConfigError("specs: severity outside 0..5");
    out.push_back(spec);
  }
  return out;
}

namespace {

struct Slot {
  bool ok = false;
  std::string error;
  AugmentedSample sample;
};

nlohmann::json provenance_json(const AugmentedSample& s) {
  nlohmann::json j = {{"id", s.id}, {"sources", s.provenance.sources}, {"domains", s.provenance.domains}};
  j["mu"] = s.provenance.mu ? nlohmann::json(*s.provenance.mu) : nlohmann::json(nullptr);
  return j;
}

std::string output_id(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mix_%06zu", k);
  return buf;
}

}  // namespace

AugmentSummary build_augmented_dataset(const DatasetIndex& dataset, const std::filesystem::path& image_root,
                                       const std::vector<CorruptionSpec>& specs, const MixupConfig& cfg,
                                       const AugmentOptions& options, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::vector<const ImageRecord*> records;
  for (const auto& [id, rec] : dataset.images) records.push_back(&rec);

  const auto images_dir = out_dir / "images";
  std::filesystem::create_directories(images_dir);

  auto load = [&](const ImageRecord& rec) {
    Image img = read_image(resolve_image_path(image_root, rec.id));
    if (img.width() != rec.width || img.height() != rec.height) {
      throw DataError("image " + rec.id + " is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                      " but annotated as " + std::to_string(rec.width) + "x" + std::to_string(rec.height));
    }
    return img;
  };

  std::vector<Slot> slots;
  if (!options.mix) {
    if (specs.empty()) throw ConfigError("synthesis-only mode needs at least one corruption spec");
    const std::size_t n = records.size() * specs.size();
    slots.resize(n);
    parallel_for(records.size(), options.workers, [&](std::size_t i) {
      const ImageRecord& rec = *records[i];
      Image src;
      try {
        src = load(rec);
      } catch (const std::exception& e) {
        for (std::size_t j = 0; j < specs.size(); ++j) slots[i * specs.size() + j].error = e.what();
        return;
      }
      for (std::size_t j = 0; j < specs.size(); ++j) {
        const std::size_t k = i * specs.size() + j;
        Slot& slot = slots[k];
        try {
          slot.sample.id = rec.id + "__" + specs[j].label();
          slot.sample.image = corrupt(src, specs[j], derive_seed(cfg.seed, k));
          slot.sample.gts = rec.gts;
          slot.sample.provenance = {{rec.id}, {specs[j].label()}, std::nullopt};
          write_png(images_dir / (slot.sample.id + ".png"), slot.sample.image);
          slot.ok = true;
        } catch (const std::exception& e) {
          slot.error = e.what();
        }
      }
    });
  } else {
    if (records.empty()) throw ConfigError("mixing needs at least one source image");
    if (options.pairing == PairingPolicy::kCrossSynthetic && specs.size() < 2) {
      throw ConfigError("cross-synthetic pairing needs at least two corruption specs");
    }
    if (specs.empty()) throw ConfigError("mixing needs at least one corruption spec");
    const std::size_t n = options.count == 0 ? records.size() : options.count;
    slots.resize(n);
    parallel_for(n, options.workers, [&](std::size_t k) {
      Slot& slot = slots[k];
      try {
        Rng rng(derive_seed(cfg.seed, k));
        std::uniform_int_distribution<std::size_t> pick_image(0, records.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_spec(0, specs.size() - 1);
        std::bernoulli_distribution coin(0.5);

        bool cross = options.pairing == PairingPolicy::kCrossSynthetic;
        if (options.pairing == PairingPolicy::kBoth) cross = specs.size() >= 2 && coin(rng);

        const ImageRecord& ra = *records[pick_image(rng)];
        const ImageRecord& rb = *records[pick_image(rng)];
        std::optional<std::size_t> spec_a;
        std::size_t spec_b = pick_spec(rng);
        if (cross) {
          std::size_t s = pick_spec(rng);
          while (s == spec_b) s = pick_spec(rng);
          spec_a = s;
        }
        const std::uint64_t seed_a = rng();
        const std::uint64_t seed_b = rng();

        auto make = [&](const ImageRecord& rec, std::optional<std::size_t> spec, std::uint64_t seed) {
          AugmentedSample s;
          s.id = rec.id;
          s.gts = rec.gts;
          Image img = load(rec);
          if (spec) {
            s.image = corrupt(img, specs[*spec], seed);
            s.provenance = {{rec.id}, {specs[*spec].label()}, std::nullopt};
          } else {
            s.image = std::move(img);
            s.provenance = {{rec.id}, {"original"}, std::nullopt};
          }
          return s;
        };
        AugmentedSample first = make(ra, spec_a, seed_a);
        AugmentedSample second = make(rb, spec_b, seed_b);
        // The dropout target is randomised between the two sources.
        if (coin(rng)) std::swap(first, second);

        slot.sample = sample_mix(first, second, cfg, rng);
        slot.sample.id = output_id(k);
        write_png(images_dir / (slot.sample.id + ".png"), slot.sample.image);
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    });
  }

  AugmentSummary summary;
  DatasetIndex out_ds;
  out_ds.categories = dataset.categories;
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t k = 0; k < slots.size(); ++k) {
    auto& slot = slots[k];
    if (!slot.ok) {
      summary.failures.push_back("output " + std::to_string(k) + ": " + slot.error);
      continue;
    }
    ImageRecord rec{slot.sample.id, slot.sample.image.width(), slot.sample.image.height(), slot.sample.gts};
    out_ds.images.emplace(rec.id, std::move(rec));
    samples.push_back(provenance_json(slot.sample));
    ++summary.emitted;
  }

  nlohmann::json spec_labels = nlohmann::json::array();
  for (const auto& s : specs) spec_labels.push_back(s.label());
  summary.annotations = to_json(out_ds);
  summary.provenance = {{"mix", options.mix},
                        {"pairing", to_string(options.pairing)},
                        {"alpha", cfg.alpha},
                        {"pi_c", cfg.pi_c},
                        {"patch_size", cfg.patch_size},
                        {"seed", cfg.seed},
                        {"specs", spec_labels},
                        {"samples", samples},
                        {"failures", summary.failures}};
  write_json_file(out_dir / "annotations.json", summary.annotations);
  write_json_file(out_dir / "provenance.json", summary.provenance);
  return summary;
}

}  // namespace hoirobust::cma
