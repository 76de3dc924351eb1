#include <doctest.h>

#include <set>
#include <vector>

#include "oad/errors.hpp"
#include "oad/identification.hpp"

using namespace oad;

namespace {

SensorStateVector state_from(int sensor_count, std::initializer_list<int> attacked) {
  SensorStateVector s(sensor_count);
  for (const int i : attacked) s.set_attacked(i);
  return s;
}

ErrorStateVector vector_from_bits(int reference, std::initializer_list<int> bits) {
  ErrorStateVector e(reference);
  REQUIRE(bits.size() == e.size());
  std::size_t idx = 0;
  for (int i = 0; i + 1 < reference; ++i) {
    for (int j = i + 1; j < reference; ++j) {
      e.set(i, j, *(bits.begin() + idx) != 0);
      ++idx;
    }
  }
  return e;
}

// Drives the recursive inference with noiseless codewords of a known state,
// restricted at each level to the surviving sensors.
ErrorVectorProvider oracle_provider(const SensorStateVector& truth) {
  return [truth](int reference) {
    SensorStateVector level(reference + 1);
    for (int i = 0; i <= reference; ++i) level.set_attacked(i, truth.attacked(i));
    return expected_error_vector(level);
  };
}

}  // namespace

TEST_CASE("pair indexing is lexicographic") {
  CHECK(ErrorStateVector::pair_index(0, 1, 3) == 0);
  CHECK(ErrorStateVector::pair_index(0, 2, 3) == 1);
  CHECK(ErrorStateVector::pair_index(1, 2, 3) == 2);
  CHECK(ErrorStateVector::pair_index(0, 3, 4) == 2);
  CHECK(ErrorStateVector::pair_index(1, 2, 4) == 3);
  CHECK(ErrorStateVector::pair_index(2, 3, 4) == 5);
  CHECK_THROWS_AS(ErrorStateVector::pair_index(2, 1, 4), ContractError);
  CHECK_THROWS_AS(ErrorStateVector::pair_index(1, 4, 4), ContractError);
}

TEST_CASE("noiseless code of the all-clear state is all zeros") {
  const auto e = expected_error_vector(SensorStateVector(4));
  CHECK(e.all_zero());
}

TEST_CASE("attacking the reference camera sets every code bit") {
  const auto e = expected_error_vector(state_from(4, {3}));
  CHECK(e.all_one());
}

TEST_CASE("hand-computed codeword for n=4 with S1 attacked") {
  const auto e = expected_error_vector(state_from(5, {1}));
  CHECK(e.at(0, 1));
  CHECK_FALSE(e.at(0, 2));
  CHECK_FALSE(e.at(0, 3));
  CHECK(e.at(1, 2));
  CHECK(e.at(1, 3));
  CHECK_FALSE(e.at(2, 3));
}

TEST_CASE("codeword is monotone in the attacked set") {
  for (int n = 3; n <= 5; ++n) {
    const int sensors = n + 1;
    for (std::uint32_t mask = 0; mask < (1u << sensors); ++mask) {
      SensorStateVector base(sensors);
      for (int i = 0; i < sensors; ++i) base.set_attacked(i, (mask >> i) & 1u);
      const auto e_base = expected_error_vector(base);
      for (int extra = 0; extra < sensors; ++extra) {
        auto more = base;
        more.set_attacked(extra);
        const auto e_more = expected_error_vector(more);
        for (std::size_t k = 0; k < e_base.bits().size(); ++k) {
          CHECK(e_more.bits()[k] >= e_base.bits()[k]);
        }
      }
    }
  }
}

TEST_CASE("zero-entry inference recovers the spec'd base cases") {
  // No attack.
  auto s = apply_lemma1(vector_from_bits(3, {0, 0, 0}), 0, 1);
  CHECK(s.attacked_indices().empty());
  // S0 attacked: bits (0,1) and (0,2) fire.
  s = apply_lemma1(vector_from_bits(3, {1, 1, 0}), 1, 2);
  CHECK(s.attacked_indices() == std::vector<int>{0});
  // S1 attacked: bits (0,1) and (1,2) fire.
  s = apply_lemma1(vector_from_bits(3, {1, 0, 1}), 0, 2);
  CHECK(s.attacked_indices() == std::vector<int>{1});
  // S2 attacked: bits (0,2) and (1,2) fire.
  s = apply_lemma1(vector_from_bits(3, {0, 1, 1}), 0, 1);
  CHECK(s.attacked_indices() == std::vector<int>{2});
}

TEST_CASE("zero-entry inference on n=4 with two attacked sensors") {
  const auto e = expected_error_vector(state_from(5, {1, 3}));
  const auto s = apply_lemma1(e, 0, 2);
  CHECK(s.attacked_indices() == std::vector<int>{1, 3});
}

TEST_CASE("zero-entry inference rejects a nonzero anchor") {
  const auto e = vector_from_bits(3, {1, 0, 1});
  CHECK_THROWS_AS(apply_lemma1(e, 0, 1), ContractError);
}

TEST_CASE("every zero anchor yields the same inference on valid codewords") {
  for (int n = 3; n <= 6; ++n) {
    const int sensors = n + 1;
    for (std::uint32_t mask = 0; mask < (1u << sensors); ++mask) {
      SensorStateVector truth(sensors);
      for (int i = 0; i < sensors; ++i) truth.set_attacked(i, (mask >> i) & 1u);
      if (static_cast<int>(truth.attacked_indices().size()) > n - 2) continue;
      const auto e = expected_error_vector(truth);
      std::vector<SensorStateVector> results;
      for (int i = 0; i + 1 < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (!e.at(i, j)) results.push_back(apply_lemma1(e, i, j));
        }
      }
      for (const auto& r : results) CHECK(r == results.front());
    }
  }
}

TEST_CASE("brute-force enumeration pins the unique candidates") {
  auto matches = brute_force_identify(vector_from_bits(3, {0, 0, 0}), 3, 1);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].attacked_indices().empty());

  matches = brute_force_identify(vector_from_bits(3, {1, 1, 0}), 3, 1);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].attacked_indices() == std::vector<int>{0});

  matches = brute_force_identify(vector_from_bits(3, {1, 1, 1}), 3, 1);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].attacked_indices() == std::vector<int>{3});
}

TEST_CASE("recursive inference follows the documented example trace") {
  // n=4, truth {S3, S4}: level 4 is all ones, then level 3 is all ones.
  const auto truth = state_from(5, {3, 4});
  const auto result = identify(4, oracle_provider(truth));
  CHECK(result.attacked == std::vector<int>{3, 4});
  CHECK_FALSE(result.resolved);
  REQUIRE(result.levels.size() == 2);
  CHECK(result.levels[0].all_one());
  CHECK(result.levels[1].all_one());
}

TEST_CASE("exhaustive noiseless identification is exact for n = 3..6") {
  for (int n = 3; n <= 6; ++n) {
    const int sensors = n + 1;
    for (std::uint32_t mask = 0; mask < (1u << sensors); ++mask) {
      SensorStateVector truth(sensors);
      for (int i = 0; i < sensors; ++i) truth.set_attacked(i, (mask >> i) & 1u);
      if (static_cast<int>(truth.attacked_indices().size()) > n - 2) continue;

      const auto result = identify(n, oracle_provider(truth));
      CHECK(result.attacked == truth.attacked_indices());

      // Every recursion level's observed vector admits the restricted truth
      // among its brute-force candidates.
      int reference = n;
      for (const auto& level : result.levels) {
        SensorStateVector restricted(reference + 1);
        for (int i = 0; i <= reference; ++i) restricted.set_attacked(i, truth.attacked(i));
        const auto candidates =
            brute_force_identify(level, reference, reference - 2);
        bool found = false;
        for (const auto& c : candidates) found |= c == restricted;
        CHECK(found);
        --reference;
      }
    }
  }
}

TEST_CASE("identification rejects tiny rigs") {
  CHECK_THROWS_AS(identify(2, oracle_provider(SensorStateVector(3))), ContractError);
}
