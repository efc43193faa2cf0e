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

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace hoirobust::testing {
namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string to_str(__int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  if (neg) v = -v;
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

std::int64_t area(const IntBox& b) { return (b.x2 - b.x1) * (b.y2 - b.y1); }

Rational mean(const std::vector<Rational>& v) {
  if (v.empty()) return {};
  Rational s;
  for (const auto& x : v) s = s + x;
  return s / Rational::of(static_cast<std::int64_t>(v.size()));
}

}  // namespace

Rational::Rational(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const __int128 g = gcd128(n, d);
  n_ = g == 0 ? 0 : n / g;
  d_ = g == 0 ? 1 : d / g;
}

double Rational::to_double() const { return static_cast<double>(n_) / static_cast<double>(d_); }

std::string Rational::str() const { return to_str(n_) + "/" + to_str(d_); }

Rational operator+(const Rational& a, const Rational& b) { return {a.n_ * b.d_ + b.n_ * a.d_, a.d_ * b.d_}; }
Rational operator*(const Rational& a, const Rational& b) { return {a.n_ * b.n_, a.d_ * b.d_}; }
Rational operator/(const Rational& a, const Rational& b) { return {a.n_ * b.d_, a.d_ * b.n_}; }

IntBox to_int_box(const BoundingBox& b) {
  const IntBox out{std::llround(b.x1), std::llround(b.y1), std::llround(b.x2), std::llround(b.y2)};
  if (out.to_box().x1 != b.x1 || out.to_box().y1 != b.y1 || out.to_box().x2 != b.x2 || out.to_box().y2 != b.y2) {
    throw std::invalid_argument("oracle needs integer box coordinates");
  }
  return out;
}

Rational exact_iou(const IntBox& a, const IntBox& b) {
  const std::int64_t w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const std::int64_t h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0 || h <= 0) return {};
  const std::int64_t inter = w * h;
  return Rational::of(inter, area(a) + area(b) - inter);
}

OracleReport brute_force_map(const DatasetIndex& dataset, const DetectionSet& dets, eval::Setting setting,
                             Rational threshold) {
  const auto& table = dataset.categories;
  OracleReport out;
  std::vector<Rational> all;
  std::vector<Rational> rare;
  std::vector<Rational> nonrare;

  for (std::size_t c = 0; c < table.hoi.size(); ++c) {
    const auto cat = static_cast<HoiId>(c);
    struct Scored {
      double score;
      bool tp;
    };
    std::vector<Scored> scored;
    std::int64_t num_gt = 0;

    for (const auto& [id, rec] : dataset.images) {
      if (setting == eval::Setting::kKnownObject) {
        bool has_object = false;
        for (const auto& g : rec.gts) has_object = has_object || table.hoi[g.hoi].object == table.hoi[c].object;
        if (!has_object) continue;
      }
      std::vector<IntBox> gh;
      std::vector<IntBox> go;
      for (const auto& g : rec.gts) {
        if (g.hoi != cat) continue;
        gh.push_back(to_int_box(g.human));
        go.push_back(to_int_box(g.object));
      }
      num_gt += static_cast<std::int64_t>(gh.size());

      std::vector<DetectionInstance> mine;
      if (auto it = dets.by_image.find(id); it != dets.by_image.end()) {
        for (const auto& d : it->second)
          if (d.hoi == cat) mine.push_back(d);
      }
      // Scores are distinct, so a plain sort fixes the processing order.
      std::sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
      std::vector<bool> taken(gh.size(), false);
      for (const auto& d : mine) {
        const IntBox dh = to_int_box(d.human);
        const IntBox dob = to_int_box(d.object);
        int best = -1;
        Rational best_iou;
        for (std::size_t g = 0; g < gh.size(); ++g) {
          if (taken[g]) continue;
          const Rational a = exact_iou(dh, gh[g]);
          const Rational b = exact_iou(dob, go[g]);
          const Rational m = a < b ? a : b;
          if (!(m > threshold)) continue;
          if (best < 0 || m > best_iou) {
            best = static_cast<int>(g);
            best_iou = m;
          }
        }
        if (best >= 0) taken[static_cast<std::size_t>(best)] = true;
        scored.push_back({d.score, best >= 0});
      }
    }
    if (num_gt == 0) continue;

    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
    const std::size_t n = scored.size();
    std::vector<Rational> precision(n);
    std::int64_t tp = 0;
    std::vector<bool> flags;
    for (std::size_t i = 0; i < n; ++i) {
      tp += scored[i].tp ? 1 : 0;
      precision[i] = Rational::of(tp, static_cast<std::int64_t>(i + 1));
      flags.push_back(scored[i].tp);
    }
    // Each true positive raises recall by 1/num_gt; weight it by the best
    // precision reachable at that recall or beyond.
    Rational ap;
    for (std::size_t i = 0; i < n; ++i) {
      if (!scored[i].tp) continue;
      Rational envelope = precision[i];
      for (std::size_t j = i; j < n; ++j)
        if (precision[j] > envelope) envelope = precision[j];
      ap = ap + envelope / Rational::of(num_gt);
    }
    out.ap[cat] = ap;
    out.ranked_flags[cat] = flags;
    all.push_back(ap);
    (table.rare[c] ? rare : nonrare).push_back(ap);
  }
  out.map_full = mean(all);
  out.map_rare = mean(rare);
  out.map_nonrare = mean(nonrare);
  return out;
}

RandomInstance random_instance(std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomInstance inst;
  auto& table = inst.dataset.categories;
  table.interactions = {"hold", "ride"};
  table.objects = {"bicycle", "cup"};
  const std::vector<HoiCategory> pool{{0, 0}, {1, 0}, {0, 1}};
  const int ncat = uni(1, 3);
  for (int c = 0; c < ncat; ++c) {
    table.hoi.push_back(pool[static_cast<std::size_t>(c)]);
    table.rare.push_back(uni(0, 1) == 1);
  }

  const int nimg = uni(1, 5);
  std::vector<std::pair<ImageId, GroundTruthInstance>> all_gts;
  auto random_box = [&](int size) {
    const int x = uni(0, size - 4);
    const int y = uni(0, size - 4);
    return IntBox{x, y, uni(x + 2, size), uni(y + 2, size)};
  };
  for (int i = 0; i < nimg; ++i) {
    ImageRecord rec;
    rec.id = "img" + std::to_string(i);
    rec.width = 24;
    rec.height = 24;
    const int ngt = uni(0, 3);
    for (int g = 0; g < ngt; ++g) {
      GroundTruthInstance gt{random_box(24).to_box(), random_box(24).to_box(), uni(0, ncat - 1)};
      rec.gts.push_back(gt);
      all_gts.emplace_back(rec.id, gt);
    }
    inst.dataset.images.emplace(rec.id, rec);
  }

  std::vector<int> score_pool(100);
  std::iota(score_pool.begin(), score_pool.end(), 1);
  std::shuffle(score_pool.begin(), score_pool.end(), rng);
  const int ndet = uni(0, 6);
  auto jitter = [&](const BoundingBox& b) {
    IntBox ib = to_int_box(b);
    ib.x1 = std::clamp<std::int64_t>(ib.x1 + uni(-2, 2), 0, 22);
    ib.y1 = std::clamp<std::int64_t>(ib.y1 + uni(-2, 2), 0, 22);
    ib.x2 = std::clamp<std::int64_t>(ib.x2 + uni(-2, 2), ib.x1 + 1, 24);
    ib.y2 = std::clamp<std::int64_t>(ib.y2 + uni(-2, 2), ib.y1 + 1, 24);
    return ib.to_box();
  };
  for (int d = 0; d < ndet; ++d) {
    DetectionInstance det;
    ImageId image = "img" + std::to_string(uni(0, nimg - 1));
    if (!all_gts.empty() && uni(0, 3) != 0) {
      const auto& [id, gt] = all_gts[static_cast<std::size_t>(uni(0, static_cast<int>(all_gts.size()) - 1))];
      image = id;
      det.human = uni(0, 2) == 0 ? gt.human : jitter(gt.human);
      det.object = uni(0, 2) == 0 ? gt.object : jitter(gt.object);
      det.hoi = uni(0, 4) == 0 ? uni(0, ncat - 1) : gt.hoi;
    } else {
      det.human = random_box(24).to_box();
      det.object = random_box(24).to_box();
      det.hoi = uni(0, ncat - 1);
    }
    det.score = score_pool[static_cast<std::size_t>(d)] / 100.0;
    inst.dets.by_image[image].push_back(det);
  }
  inst.setting = uni(0, 1) == 0 ? eval::Setting::kDefault : eval::Setting::kKnownObject;
  return inst;
}

HoiCategoryTable hico_layout_table() {
  HoiCategoryTable t;
  for (int i = 0; i < 117; ++i) t.interactions.push_back("interaction_" + std::to_string(i));
  for (int o = 0; o < 80; ++o) t.objects.push_back("object_" + std::to_string(o));
  int rare = 0;
  for (int k = 0; k < 600; ++k) {
    const int r = k % 117;
    const int q = k / 117;
    t.hoi.push_back({r, (r + 13 * q) % 80});
    const bool is_rare = k % 4 == 1 && rare < 138;
    rare += is_rare ? 1 : 0;
    t.rare.push_back(is_rare);
  }
  return t;
}

}  // namespace hoirobust::testing
