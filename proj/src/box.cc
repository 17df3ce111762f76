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

#include "boxq/box.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace boxq {
namespace {

void CheckDims(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" +
                        std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

Real Sign(Real x) { return x > 0 ? Real(1) : (x < 0 ? Real(-1) : Real(0)); }

}  // namespace

Box Box::Point(std::span<const Real> c) {
  return Box(std::vector<Real>(c.begin(), c.end()),
             std::vector<Real>(c.size(), Real(0)));
}

std::vector<Real> Box::Max() const {
  std::vector<Real> out(dim());
  for (std::size_t j = 0; j < dim(); ++j) out[j] = center[j] + offset[j];
  return out;
}

std::vector<Real> Box::Min() const {
  std::vector<Real> out(dim());
  for (std::size_t j = 0; j < dim(); ++j) out[j] = center[j] - offset[j];
  return out;
}

bool Box::Contains(std::span<const Real> v) const {
  for (std::size_t j = 0; j < dim(); ++j) {
    if (v[j] < center[j] - offset[j] || v[j] > center[j] + offset[j]) {
      return false;
    }
  }
  return true;
}

Box Project(const Box& p, const RelationBox& r) {
  CheckDims(p.dim(), r.dim(), "project");
  Box out = p;
  for (std::size_t j = 0; j < p.dim(); ++j) {
    out.center[j] += r.center[j];
    out.offset[j] += r.offset[j];
  }
  return out;
}

Box Intersect(std::span<const Box> boxes,
              std::span<const std::vector<Real>> weights,
              std::span<const Real> shrink) {
  if (boxes.empty()) throw ArgumentError("intersect: no boxes");
  CheckDims(boxes.size(), weights.size(), "intersect weights");
  const std::size_t d = boxes[0].dim();
  CheckDims(shrink.size(), d, "intersect shrink");
  Box out(std::vector<Real>(d, 0),
          std::vector<Real>(d, std::numeric_limits<Real>::infinity()));
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    CheckDims(boxes[i].dim(), d, "intersect");
    CheckDims(weights[i].size(), d, "intersect weights");
    for (std::size_t j = 0; j < d; ++j) {
      out.center[j] += weights[i][j] * boxes[i].center[j];
      out.offset[j] = std::min(out.offset[j], boxes[i].offset[j]);
    }
  }
  for (std::size_t j = 0; j < d; ++j) out.offset[j] *= shrink[j];
  return out;
}

Real DistOutside(std::span<const Real> v, std::span<const Real> center,
                 std::span<const Real> offset) {
  CheckDims(v.size(), center.size(), "dist_outside");
  Real total = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const Real hi = center[j] + offset[j];
    const Real lo = center[j] - offset[j];
    total += std::max(v[j] - hi, Real(0)) + std::max(lo - v[j], Real(0));
  }
  return total;
}

Real DistInside(std::span<const Real> v, std::span<const Real> center,
                std::span<const Real> offset) {
  CheckDims(v.size(), center.size(), "dist_inside");
  Real total = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const Real hi = center[j] + offset[j];
    const Real lo = center[j] - offset[j];
    total += std::abs(center[j] - std::min(hi, std::max(lo, v[j])));
  }
  return total;
}

Real DistBox(std::span<const Real> v, std::span<const Real> center,
             std::span<const Real> offset, Real alpha) {
  CheckDims(v.size(), center.size(), "dist_box");
  Real outside = 0;
  Real inside = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const Real hi = center[j] + offset[j];
    const Real lo = center[j] - offset[j];
    outside += std::max(v[j] - hi, Real(0)) + std::max(lo - v[j], Real(0));
    inside += std::abs(center[j] - std::min(hi, std::max(lo, v[j])));
  }
  return outside + alpha * inside;
}

Real DistAgg(std::span<const Real> v, std::span<const Box> boxes, Real alpha,
             std::size_t* argmin) {
  if (boxes.empty()) throw ArgumentError("dist_agg: no boxes");
  Real best = std::numeric_limits<Real>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Real d = DistBox(v, boxes[i], alpha);
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  if (argmin) *argmin = best_i;
  return best;
}

void AccumulateDistBoxGrad(std::span<const Real> v,
                           std::span<const Real> center,
                           std::span<const Real> offset, Real alpha, Real scale,
                           std::span<Real> d_v, std::span<Real> d_center,
                           std::span<Real> d_offset) {
  for (std::size_t j = 0; j < v.size(); ++j) {
    const Real hi = center[j] + offset[j];
    const Real lo = center[j] - offset[j];
    Real gv = 0, gc = 0, go = 0;
    if (v[j] > hi) {
      // Outside above: outside term v - hi, clamp saturated at hi so the
      // inside term is |c - hi| = offset.
      gv += 1;
      gc -= 1;
      go -= 1;
      go += alpha * Sign(offset[j]);
    } else if (v[j] < lo) {
      gv -= 1;
      gc += 1;
      go -= 1;
      go += alpha * Sign(offset[j]);
    } else {
      const Real s = Sign(center[j] - v[j]);
      gc += alpha * s;
      gv -= alpha * s;
    }
    d_v[j] += scale * gv;
    d_center[j] += scale * gc;
    d_offset[j] += scale * go;
  }
}

DistBoxGrad GradDistBox(std::span<const Real> v, const Box& p, Real alpha) {
  CheckDims(v.size(), p.dim(), "grad_dist_box");
  DistBoxGrad g{std::vector<Real>(v.size(), 0), std::vector<Real>(v.size(), 0),
                std::vector<Real>(v.size(), 0)};
  AccumulateDistBoxGrad(v, p.center, p.offset, alpha, 1, g.d_v, g.d_center,
                        g.d_offset);
  return g;
}

}  // namespace boxq
