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

#include "hoirobust/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hoirobust {
namespace {

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

const Json& require_array(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_array()) throw SchemaError(where + ": field '" + key + "' must be an array");
  return v;
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

int require_int(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw SchemaError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

double require_number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number()) throw SchemaError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<std::string> string_list(const Json& arr, const std::string& where) {
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_string()) throw SchemaError(where + ": expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool declares_xywh(const Json& doc) {
  auto it = doc.find("box_format");
  if (it == doc.end()) return false;
  if (!it->is_string()) throw SchemaError("box_format must be a string");
  const auto fmt = it->get<std::string>();
  if (fmt == "xyxy") return false;
  if (fmt == "xywh") return true;
  throw SchemaError("unknown box_format '" + fmt + "'");
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

BoundingBox parse_box(const Json& value, bool xywh, const std::string& where) {
  if (!value.is_array() || value.size() != 4) throw SchemaError(where + ": box must be an array of 4 numbers");
  double v[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!value[i].is_number()) throw SchemaError(where + ": box coordinates must be numbers");
    v[i] = value[i].get<double>();
  }
  BoundingBox box{v[0], v[1], v[2], v[3]};
  if (xywh) box = {v[0], v[1], v[0] + v[2], v[1] + v[3]};
  if (!box.valid()) throw InvariantError(where + ": degenerate or negative box");
  return box;
}

Json box_to_json(const BoundingBox& box) { return Json::array({box.x1, box.y1, box.x2, box.y2}); }

DatasetIndex parse_dataset(const Json& doc) {
  DatasetIndex ds;
  const bool xywh = declares_xywh(doc);
  const Json& cats = require(doc, "categories", "annotation");
  ds.categories.interactions = string_list(require_array(cats, "interactions", "categories"), "interactions");
  ds.categories.objects = string_list(require_array(cats, "objects", "categories"), "objects");
  for (const auto& pair : require_array(cats, "hoi", "categories")) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw SchemaError("categories.hoi entries must be [interaction_id, object_id]");
    }
    ds.categories.hoi.push_back({pair[0].get<int>(), pair[1].get<int>()});
  }
  for (const auto& flag : require_array(cats, "rare", "categories")) {
    if (!flag.is_boolean()) throw SchemaError("categories.rare entries must be booleans");
    ds.categories.rare.push_back(flag.get<bool>());
  }
  ds.categories.validate();

  for (const auto& img : require_array(doc, "images", "annotation")) {
    ImageRecord rec;
    rec.id = require_string(img, "id", "image");
    const std::string where = "image '" + rec.id + "'";
    rec.width = require_int(img, "width", where);
    rec.height = require_int(img, "height", where);
    if (rec.width <= 0 || rec.height <= 0) throw InvariantError(where + ": non-positive dimensions");
    for (const auto& gt : require_array(img, "gts", where)) {
      GroundTruthInstance inst;
      inst.human = parse_box(require(gt, "hbox", where), xywh, where + " hbox");
      inst.object = parse_box(require(gt, "obox", where), xywh, where + " obox");
      inst.hoi = require_int(gt, "hoi", where);
      if (!ds.categories.contains(inst.hoi)) {
        throw InvariantError(where + ": unknown hoi category " + std::to_string(inst.hoi));
      }
      if (!inst.human.within(rec.width, rec.height) || !inst.object.within(rec.width, rec.height)) {
        throw InvariantError(where + ": box outside image bounds");
      }
      rec.gts.push_back(inst);
    }
    auto id = rec.id;
    if (!ds.images.emplace(id, std::move(rec)).second) {
      throw InvariantError("duplicate image id '" + id + "'");
    }
  }
  return ds;
}

DatasetIndex load_dataset(const std::filesystem::path& path) { return parse_dataset(read_json_file(path)); }

Json to_json(const DatasetIndex& ds) {
  Json hoi = Json::array();
  for (const auto& c : ds.categories.hoi) hoi.push_back({c.interaction, c.object});
  Json rare = Json::array();
  for (bool r : ds.categories.rare) rare.push_back(r);
  Json images = Json::array();
  for (const auto& [id, rec] : ds.images) {
    Json gts = Json::array();
    for (const auto& g : rec.gts) {
      gts.push_back({{"hbox", box_to_json(g.human)}, {"obox", box_to_json(g.object)}, {"hoi", g.hoi}});
    }
    images.push_back({{"id", rec.id}, {"width", rec.width}, {"height", rec.height}, {"gts", std::move(gts)}});
  }
  return {{"categories",
           {{"interactions", ds.categories.interactions},
            {"objects", ds.categories.objects},
            {"hoi", std::move(hoi)},
            {"rare", std::move(rare)}}},
          {"images", std::move(images)}};
}

DetectionSet parse_detections(const Json& doc, const DatasetIndex& dataset) {
  DetectionSet set;
  set.method = doc.contains("method") ? require_string(doc, "method", "detections") : std::string{};
  set.domain = doc.contains("domain") ? require_string(doc, "domain", "detections") : std::string{};
  const bool xywh = declares_xywh(doc);
  std::size_t index = 0;
  for (const auto& d : require_array(doc, "detections", "detections")) {
    const std::string where = "detection #" + std::to_string(index++);
    const auto image_id = require_string(d, "image_id", where);
    const ImageRecord* rec = dataset.find(image_id);
    if (rec == nullptr) throw InvariantError(where + ": unknown image id '" + image_id + "'");
    DetectionInstance det;
    det.human = parse_box(require(d, "hbox", where), xywh, where + " hbox");
    det.object = parse_box(require(d, "obox", where), xywh, where + " obox");
    det.hoi = require_int(d, "hoi", where);
    det.score = require_number(d, "score", where);
    if (!std::isfinite(det.score) || det.score < 0.0 || det.score > 1.0) {
      throw InvariantError(where + ": score " + std::to_string(det.score) + " outside [0,1]");
    }
    if (!dataset.categories.contains(det.hoi)) {
      throw InvariantError(where + ": unknown hoi category " + std::to_string(det.hoi));
    }
    set.by_image[image_id].push_back(det);
  }
  return set;
}

DetectionSet load_detections(const std::filesystem::path& path, const DatasetIndex& dataset) {
  return parse_detections(read_json_file(path), dataset);
}

Json to_json(const DetectionSet& set) {
  Json dets = Json::array();
  for (const auto& [id, list] : set.by_image) {
    for (const auto& d : list) {
      dets.push_back({{"image_id", id},
                      {"hbox", box_to_json(d.human)},
                      {"obox", box_to_json(d.object)},
                      {"hoi", d.hoi},
                      {"score", d.score}});
    }
  }
  return {{"method", set.method}, {"domain", set.domain}, {"detections", std::move(dets)}};
}

DomainManifest parse_manifest(const Json& doc) {
  DomainManifest m;
  m.domains = string_list(require_array(doc, "domains", "manifest"), "manifest.domains");
  for (const auto& c : require_array(doc, "copies", "manifest")) {
    auto base = require_string(c, "base", "manifest copy");
    auto domain = require_string(c, "domain", "manifest copy");
    auto path = require_string(c, "path", "manifest copy");
    if (!m.copies.emplace(std::make_pair(base, domain), path).second) {
      throw InvariantError("manifest lists more than one copy of '" + base + "' in domain '" + domain + "'");
    }
  }
  return m;
}

DomainManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_json_file(path)); }

Json to_json(const DomainManifest& m) {
  Json copies = Json::array();
  for (const auto& [key, path] : m.copies) {
    copies.push_back({{"base", key.first}, {"domain", key.second}, {"path", path}});
  }
  return {{"domains", m.domains}, {"copies", std::move(copies)}};
}

Json to_json(const ManifestReport& r) {
  Json missing = Json::array();
  for (const auto& [b, d] : r.missing) missing.push_back({{"base", b}, {"domain", d}});
  Json unexpected = Json::array();
  for (const auto& [b, d] : r.unexpected) unexpected.push_back({{"base", b}, {"domain", d}});
  return {{"passed", r.passed},
          {"copies_per_domain", r.copies_per_domain},
          {"missing", std::move(missing)},
          {"unexpected", std::move(unexpected)}};
}

}  // namespace hoirobust
