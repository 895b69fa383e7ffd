// Copyright 2026 The diqkd Authors
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

#include <algorithm>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "diqkd/rng.hpp"

using namespace diqkd;

TEST_CASE("counter stream reproduces the splitmix64 reference sequence") {
  // With key 0 the outputs are exactly splitmix64 seeded at 0; reference
  // values from the published splitmix64 test vector.
  CounterRng rng(0);
  CHECK(rng() == 0xE220A8397B1DCDAFULL);
  CHECK(rng() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng() == 0x06C45D188009454FULL);
}

TEST_CASE("identical keys and streams give identical sequences") {
  CounterRng a(123, "settings");
  CounterRng b(123, "settings");
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("different stream labels decorrelate") {
  CounterRng a(123, "settings");
  CounterRng b(123, "devices");
  int agree = 0;
  for (int i = 0; i < 64; ++i) agree += a() == b();
  CHECK(agree == 0);
}

TEST_CASE("fork by index yields distinct streams") {
  CounterRng root(99);
  CounterRng f0 = root.fork(std::uint64_t{0});
  CounterRng f1 = root.fork(std::uint64_t{1});
  CHECK(f0() != f1());
}

TEST_CASE("uniform lies in [0,1) and is roughly uniform") {
  CounterRng rng(7);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("below(n) is in range and covers all residues") {
  CounterRng rng(11);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.below(5);
    REQUIRE(v < 5);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (const int c : counts) CHECK(c > 800);
}

TEST_CASE("bernoulli matches its probability") {
  CounterRng rng(13);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) hits += rng.bernoulli(0.3);
  CHECK(static_cast<double>(hits) / 20000 ==
        doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("permutation is a bijection") {
  CounterRng rng(17);
  const auto perm = rng.permutation(257);
  std::vector<std::size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expect(257);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
  CHECK(perm != expect);  // astronomically unlikely to be the identity
}
