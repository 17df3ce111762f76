/*
 * Copyright 2026 The boxq Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BOXQ_BOX_H_
#define BOXQ_BOX_H_

#include <span>
#include <vector>

#include "boxq/types.h"

namespace boxq {

// Axis-aligned box {v : center - offset <= v <= center + offset}.
// offset is elementwise non-negative.
struct Box {
  std::vector<Real> center;
  std::vector<Real> offset;

  Box() = default;
  Box(std::vector<Real> c, std::vector<Real> o)
      : center(std::move(c)), offset(std::move(o)) {}
  // A point: zero offset.
  static Box Point(std::span<const Real> c);

  std::size_t dim() const { return center.size(); }
  std::vector<Real> Max() const;
  std::vector<Real> Min() const;
  bool Contains(std::span<const Real> v) const;
};

// Relation embeddings share the representation; only the role differs.
using RelationBox = Box;

// Translates the center and grows the offset.
Box Project(const Box& p, const RelationBox& r);

// Weighted center and shrunken minimum offset:
//   center = sum_i weights[i] * centers[i]
//   offset = min_i offsets[i] * shrink
// `weights` holds one d-vector per box; `shrink` is a d-vector in (0, 1).
Box Intersect(std::span<const Box> boxes,
              std::span<const std::vector<Real>> weights,
              std::span<const Real> shrink);

Real DistOutside(std::span<const Real> v, std::span<const Real> center,
                 std::span<const Real> offset);
Real DistInside(std::span<const Real> v, std::span<const Real> center,
                std::span<const Real> offset);
Real DistBox(std::span<const Real> v, std::span<const Real> center,
             std::span<const Real> offset, Real alpha);

inline Real DistOutside(std::span<const Real> v, const Box& p) {
  return DistOutside(v, p.center, p.offset);
}
inline Real DistInside(std::span<const Real> v, const Box& p) {
  return DistInside(v, p.center, p.offset);
}
inline Real DistBox(std::span<const Real> v, const Box& p, Real alpha) {
  return DistBox(v, p.center, p.offset, alpha);
}

// Minimum DistBox over the boxes. If `argmin` is given it receives the index
// of the first minimising box.
Real DistAgg(std::span<const Real> v, std::span<const Box> boxes, Real alpha,
             std::size_t* argmin = nullptr);

// Adds scale * d DistBox / d(v, center, offset) into the three spans.
// Subgradient convention: max(x, 0) has slope 0 at x = 0, the clamp of v onto
// the box takes its interior branch on the boundary, sign(0) = 0.
void AccumulateDistBoxGrad(std::span<const Real> v,
                           std::span<const Real> center,
                           std::span<const Real> offset, Real alpha, Real scale,
                           std::span<Real> d_v, std::span<Real> d_center,
                           std::span<Real> d_offset);

struct DistBoxGrad {
  std::vector<Real> d_v;
  std::vector<Real> d_center;
  std::vector<Real> d_offset;
};

DistBoxGrad GradDistBox(std::span<const Real> v, const Box& p, Real alpha);

}  // namespace boxq

#endif  // BOXQ_BOX_H_
