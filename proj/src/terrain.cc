// Copyright 2026 The mmloco Authors
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

#include "mmloco/terrain.h"

#include <cmath>

#include "mmloco/common.h"

namespace mmloco {

std::string_view SegmentKindName(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kGap:
      return "gap";
    case SegmentKind::kPlateau:
      return "plateau";
    case SegmentKind::kBlock:
      return "block";
  }
  return "block";
}

Terrain Terrain::Gap(double start, double width) {
  Terrain t;
  t.Add({SegmentKind::kGap, start, width, kGapDepth});
  return t;
}

Terrain Terrain::Plateau(double start, double height, double length) {
  Terrain t;
  t.Add({SegmentKind::kPlateau, start, length, height});
  return t;
}

Terrain Terrain::Block(double start, double length, double height) {
  Terrain t;
  t.Add({SegmentKind::kBlock, start, length, height});
  return t;
}

Terrain& Terrain::Add(const TerrainSegment& segment) {
  if (!std::isfinite(segment.start) || !std::isfinite(segment.length) ||
      !std::isfinite(segment.height)) {
    throw InvalidInput("terrain segment values must be finite");
  }
  if (segment.kind != SegmentKind::kPlateau && !(segment.length > 0.0)) {
    throw InvalidInput(std::string(SegmentKindName(segment.kind)) +
                       " segment needs a positive length");
  }
  TerrainSegment s = segment;
  if (s.kind == SegmentKind::kGap) s.height = kGapDepth;
  segments_.push_back(s);
  return *this;
}

double Terrain::Evaluate(double x, bool include_gaps) const {
  double h = 0.0;
  for (const TerrainSegment& s : segments_) {
    const bool endless = s.kind == SegmentKind::kPlateau && s.length <= 0.0;
    if (x < s.start || (!endless && x >= s.start + s.length)) continue;
    if (s.kind == SegmentKind::kGap) {
      if (include_gaps) h = kGapDepth;
    } else {
      h = s.height;
    }
  }
  return h;
}

double Terrain::Height(double x) const { return Evaluate(x, true); }

double Terrain::SupportHeight(double x) const { return Evaluate(x, false); }

Json TerrainToJson(const Terrain& terrain) {
  Json segs = Json::array();
  for (const auto& s : terrain.segments()) {
    Json j{{"kind", std::string(SegmentKindName(s.kind))},
           {"start", s.start},
           {"length", s.length}};
    if (s.kind != SegmentKind::kGap) j["height"] = s.height;
    segs.push_back(std::move(j));
  }
  return Json{{"segments", std::move(segs)}};
}

Terrain TerrainFromJson(const Json& j) {
  Terrain terrain;
  try {
    if (!j.contains("segments")) return terrain;
    for (const Json& s : j.at("segments")) {
      const auto kind = s.at("kind").get<std::string>();
      TerrainSegment seg;
      if (kind == "gap") {
        seg.kind = SegmentKind::kGap;
        seg.length = s.contains("width") ? s.at("width").get<double>()
                                         : s.at("length").get<double>();
      } else if (kind == "plateau") {
        seg.kind = SegmentKind::kPlateau;
        seg.length = s.value("length", 0.0);
        seg.height = s.at("height").get<double>();
      } else if (kind == "block") {
        seg.kind = SegmentKind::kBlock;
        seg.length = s.at("length").get<double>();
        seg.height = s.at("height").get<double>();
      } else {
        throw InvalidInput("unknown terrain segment kind '" + kind +
                           "' (valid: gap, plateau, block)");
      }
      seg.start = s.at("start").get<double>();
      terrain.Add(seg);
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed terrain file: ") + e.what());
  }
  return terrain;
}

}  // namespace mmloco
