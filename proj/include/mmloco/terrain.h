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

#ifndef MMLOCO_TERRAIN_H_
#define MMLOCO_TERRAIN_H_

#include <string>
#include <string_view>
#include <vector>

#include "mmloco/io.h"

namespace mmloco {

// Depth of the drop used to represent gaps.
inline constexpr double kGapDepth = -1.0;

enum class SegmentKind { kGap, kPlateau, kBlock };

std::string_view SegmentKindName(SegmentKind kind);

// Piecewise-constant ground profile along x. Ground level is 0; segments are
// applied in order, later segments overriding earlier ones. A plateau is a
// raised section that extends to +infinity unless a length is given.
struct TerrainSegment {
  SegmentKind kind = SegmentKind::kBlock;
  double start = 0.0;
  double length = 0.0;  // gap width; <= 0 for an endless plateau
  double height = 0.0;  // ignored for gaps
};

class Terrain {
 public:
  Terrain() = default;

  static Terrain Flat() { return Terrain(); }
  static Terrain Gap(double start, double width);
  static Terrain Plateau(double start, double height, double length = 0.0);
  static Terrain Block(double start, double length, double height);

  // Validates (finite, gap width > 0, block length > 0) before appending.
  Terrain& Add(const TerrainSegment& segment);

  // Contact surface height.
  double Height(double x) const;
  // Support plane under a base at x. Over a gap this is the surface the gap
  // was cut into rather than the drop.
  double SupportHeight(double x) const;

  const std::vector<TerrainSegment>& segments() const { return segments_; }
  bool flat() const { return segments_.empty(); }

 private:
  double Evaluate(double x, bool include_gaps) const;

  std::vector<TerrainSegment> segments_;
};

Json TerrainToJson(const Terrain& terrain);
Terrain TerrainFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_TERRAIN_H_
