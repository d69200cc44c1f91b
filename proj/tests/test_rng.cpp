#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "gic/rng.hpp"

using gic::Rng;

TEST_CASE("identical seeds replay identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams are independent of sibling consumption") {
  Rng master(7);
  Rng sub_a = master.substream(1);
  const auto first = sub_a.next_u64();

  Rng master2(7);
  Rng other = master2.substream(2);
  (void)other.next_u64();  // consuming a sibling stream
  Rng sub_a2 = master2.substream(1);
  CHECK(sub_a2.next_u64() == first);

  CHECK(Rng(7).substream(1).next_u64() != Rng(7).substream(2).next_u64());
}

TEST_CASE("below is in range and visits every value") {
  Rng rng(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("permutation and sampling produce valid draws") {
  Rng rng(9);
  auto perm = rng.permutation(50);
  auto sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);

  const auto sample = rng.sample_without_replacement(100, 10);
  CHECK(sample.size() == 10);
  std::set<std::uint32_t> uniq(sample.begin(), sample.end());
  CHECK(uniq.size() == 10);
  for (const auto v : sample) CHECK(v < 100);
}

TEST_CASE("uniform stays in range") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  for (int i = 0; i < 100; ++i) {
    const double v = rng.uniform(-2.5, 1.5);
    CHECK(v >= -2.5);
    CHECK(v <= 1.5);
  }
}
