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

#include <cmath>

#include "boxq/random.h"
#include "doctest.h"

namespace boxq {
namespace {

using Vec = std::vector<Real>;

Box RandomBox(Rng& rng, std::size_t d) {
  Box b{Vec(d), Vec(d)};
  for (std::size_t j = 0; j < d; ++j) {
    b.center[j] = rng.Uniform(-2, 2);
    b.offset[j] = rng.Uniform(0, 1.5);
  }
  return b;
}

Vec RandomVec(Rng& rng, std::size_t d, double scale = 3) {
  Vec v(d);
  for (auto& x : v) x = rng.Uniform(-scale, scale);
  return v;
}

TEST_CASE("project adds centers and offsets") {
  const Box p({1, 1}, {0, 0});
  const Box r({2, -1}, {0.5, 0.5});
  const Box out = Project(p, r);
  CHECK(out.center == Vec{3, 0});
  CHECK(out.offset == Vec{0.5, 0.5});
  const Box zero({0, 0}, {0, 0});
  CHECK(Project(r, zero).center == r.center);
  CHECK(Project(r, zero).offset == r.offset);
  CHECK_THROWS_AS(Project(p, Box({1}, {1})), ArgumentError);

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Box a = RandomBox(rng, 5), b = RandomBox(rng, 5);
    const Box c = Project(a, b);
    for (std::size_t j = 0; j < 5; ++j) CHECK(c.offset[j] >= a.offset[j]);
  }
}

TEST_CASE("intersect combines weighted centers and shrunken minimum") {
  const Box single({3, -1}, {2, 4});
  const std::vector<Vec> one = {{1, 1}};
  const Box halved = Intersect(std::span(&single, 1), one, Vec{0.5, 0.5});
  CHECK(halved.center == single.center);
  CHECK(halved.offset == Vec{1, 2});

  const std::vector<Box> two = {Box({0, 0}, {1, 1}), Box({2, 2}, {3, 3})};
  const std::vector<Vec> uniform = {{0.5, 0.5}, {0.5, 0.5}};
  const Box mid = Intersect(two, uniform, Vec{0.5, 0.5});
  CHECK(mid.center == Vec{1, 1});
  CHECK(mid.offset == Vec{0.5, 0.5});

  CHECK_THROWS_AS(Intersect(std::span<const Box>(), {}, Vec{0.5}),
                  ArgumentError);

  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<Box> boxes = {RandomBox(rng, 4), RandomBox(rng, 4),
                              RandomBox(rng, 4)};
    for (auto& b : boxes) {
      for (auto& o : b.offset) o += 0.1;
    }
    const std::vector<Vec> w(3, Vec(4, 1.0 / 3));
    Vec shrink(4);
    for (auto& s : shrink) s = rng.Uniform(0.01, 0.99);
    const Box out = Intersect(boxes, w, shrink);
    for (std::size_t j = 0; j < 4; ++j) {
      const Real m = std::min(
          {boxes[0].offset[j], boxes[1].offset[j], boxes[2].offset[j]});
      CHECK(out.offset[j] < m);
      CHECK(out.offset[j] >= 0);
    }
  }
}

TEST_CASE("distance examples") {
  const Box b({0, 0}, {1, 1});
  CHECK(DistOutside(Vec{0.5, 0.5}, b) == 0);
  CHECK(DistOutside(Vec{2, 0}, b) == doctest::Approx(1.0));
  CHECK(DistOutside(Vec{2, 3}, b) == doctest::Approx(3.0));
  CHECK(DistInside(Vec{0.5, 0.5}, b) == doctest::Approx(1.0));
  CHECK(DistInside(Vec{2, 0}, b) == doctest::Approx(1.0));
  CHECK(DistInside(Vec{0, 0}, b) == 0);
  CHECK(DistBox(Vec{0.5, 0.5}, b, 0.2) == doctest::Approx(0.2));
  CHECK(DistBox(Vec{2, 0}, b, 0.2) == doctest::Approx(1.2));
}

TEST_CASE("dist_agg takes the minimum") {
  const std::vector<Box> boxes = {Box({0, 0}, {1, 1}), Box({2, 0}, {1, 1})};
  // v=(2,0): 1.2 to the first box, 0 to the second.
  std::size_t arg = 9;
  CHECK(DistAgg(Vec{2, 0}, boxes, 0.2, &arg) == 0);
  CHECK(arg == 1);
  CHECK(DistAgg(Vec{0.5, 0.5}, std::span(boxes.data(), 1), 0.2) ==
        DistBox(Vec{0.5, 0.5}, boxes[0], 0.2));
  CHECK_THROWS_AS(DistAgg(Vec{0, 0}, std::span<const Box>(), 0.2),
                  ArgumentError);

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    // Three disjoint boxes along the first axis; v inside one of them.
    std::vector<Box> d = {Box({0, 0}, {0.5, 1}), Box({3, 0}, {0.5, 1}),
                          Box({6, 0}, {0.5, 1})};
    const std::size_t k = rng.Index(3);
    const Vec v = {d[k].center[0] + rng.Uniform(-0.5, 0.5), rng.Uniform(-1, 1)};
    Real max_inside = 0;
    for (const Box& b : d) {
      if (b.Contains(v)) max_inside = std::max(max_inside, DistInside(v, b));
    }
    CHECK(DistAgg(v, d, 0.2) <= 0.2 * max_inside + 1e-15);
    // Adding a box never increases the value.
    const Real before = DistAgg(v, std::span(d.data(), 2), 0.2);
    CHECK(DistAgg(v, d, 0.2) <= before);
  }
}

TEST_CASE("distance identities") {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const Box b = RandomBox(rng, 6);
    const Vec v = RandomVec(rng, 6);
    Real l1 = 0;
    for (std::size_t j = 0; j < 6; ++j) l1 += std::fabs(b.center[j] - v[j]);
    CHECK(std::fabs(DistBox(v, b, 1.0) - l1) <= 1e-12);
    CHECK((DistOutside(v, b) == 0) == b.Contains(v));
    // Translation equivariance.
    Box moved = b;
    Vec w = v;
    for (std::size_t j = 0; j < 6; ++j) {
      moved.center[j] += 0.75;
      w[j] += 0.75;
    }
    CHECK(DistBox(w, moved, 0.3) == doctest::Approx(DistBox(v, b, 0.3)));
    if (b.Contains(v)) {
      Real off = 0;
      for (Real o : b.offset) off += o;
      CHECK(DistBox(v, b, 0.3) <= 0.3 * off + 1e-12);
    }
  }
  const Box b({1, 2}, {0.5, 0.5});
  CHECK(DistBox(b.center, b, 0.2) == 0);
  CHECK(DistBox(Vec{1, 2.1}, b, 0.2) > 0);
}

TEST_CASE("gradient of dist_box") {
  const Real alpha = 0.2;
  // Above q_max in dimension 0, inside in dimension 1.
  const Box b({0, 0}, {1, 1});
  const DistBoxGrad g = GradDistBox(Vec{2, 0.5}, b, alpha);
  CHECK(g.d_v[0] == doctest::Approx(1.0));
  CHECK(g.d_center[1] == doctest::Approx(alpha * -1));  // sign(0 - 0.5)
  CHECK(g.d_v[1] == doctest::Approx(alpha * 1));

  Rng rng(5);
  const Real h = 1e-6;
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    Box p = RandomBox(rng, 3);
    Vec v = RandomVec(rng, 3);
    const DistBoxGrad grad = GradDistBox(v, p, alpha);
    auto check = [&](Vec& x, const Vec& analytic) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        const Real keep = x[j];
        x[j] = keep + h;
        const Real up = DistBox(v, p, alpha);
        x[j] = keep - h;
        const Real down = DistBox(v, p, alpha);
        x[j] = keep;
        const Real mid = DistBox(v, p, alpha);
        // One-sided slopes disagree near a kink; skip those.
        if (std::fabs((up - mid) - (mid - down)) > 1e-9) continue;
        const Real fd = (up - down) / (2 * h);
        CHECK(std::fabs(fd - analytic[j]) <=
              1e-5 * std::max<Real>(1, std::fabs(fd)));
        ++checked;
      }
    };
    check(v, grad.d_v);
    check(p.center, grad.d_center);
    check(p.offset, grad.d_offset);
  }
  CHECK(checked > 3000);
}

TEST_CASE("kink conventions") {
  // On the upper face: outside term inactive, clamp interior, so only the
  // inside term contributes.
  const Box b({0}, {1});
  const DistBoxGrad face = GradDistBox(Vec{1}, b, 0.5);
  CHECK(face.d_v[0] == doctest::Approx(0.5));
  CHECK(face.d_center[0] == doctest::Approx(-0.5));
  // At the center sign(0) = 0.
  const DistBoxGrad centre = GradDistBox(Vec{0}, b, 0.5);
  CHECK(centre.d_v[0] == 0);
  CHECK(centre.d_center[0] == 0);
  CHECK(centre.d_offset[0] == 0);
}

}  // namespace
}  // namespace boxq
