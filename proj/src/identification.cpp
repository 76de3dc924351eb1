#include "oad/identification.hpp"

#include <algorithm>
#include <bit>

#include "oad/errors.hpp"

namespace oad {

std::size_t ErrorStateVector::pair_index(int i, int j, int reference) {
  if (!(0 <= i && i < j && j < reference))
    throw ContractError("error-state pair index requires 0 <= i < j < reference");
  const auto n = static_cast<std::size_t>(reference);
  const auto ii = static_cast<std::size_t>(i);
  const auto jj = static_cast<std::size_t>(j);
  return ii * n - ii * (ii + 1) / 2 + (jj - ii - 1);
}

bool ErrorStateVector::all_zero() const {
  return std::all_of(bits_.begin(), bits_.end(), [](uint8_t b) { return b == 0; });
}

bool ErrorStateVector::all_one() const {
  return std::all_of(bits_.begin(), bits_.end(), [](uint8_t b) { return b != 0; });
}

ErrorStateVector compute_error_state_vector(std::span<const DisparityMap> maps,
                                            const ThresholdSet& thresholds, int reference) {
  if (static_cast<int>(maps.size()) != reference)
    throw ContractError("need one disparity map per non-reference sensor");
  ErrorStateVector e(reference);
  for (int i = 0; i + 1 < reference; ++i) {
    for (int j = i + 1; j < reference; ++j) {
      DisparityError err = disparity_error(maps[i], maps[j]);
      err.triple = {i, j, reference};
      e.set(i, j, detect(err, thresholds.theta(i, j, reference)));
    }
  }
  return e;
}

ErrorStateVector expected_error_vector(const SensorStateVector& s) {
  const int n = s.sensor_count() - 1;
  if (n < 2) throw ContractError("expected_error_vector needs at least three sensors");
  ErrorStateVector e(n);
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      e.set(i, j, s.attacked(i) || s.attacked(j) || s.attacked(n));
    }
  }
  return e;
}

SensorStateVector apply_lemma1(const ErrorStateVector& e, int i0, int j0) {
  const int n = e.reference();
  if (e.at(i0, j0))
    throw ContractError("apply_lemma1 requires a zero entry at (i0, j0)");
  SensorStateVector s(n + 1);
  // e_{i0,j0,n} = 0 clears i0, j0 and the reference; every other state is
  // exposed by its pair with i0.
  for (int i = 0; i < n; ++i) {
    if (i == i0) continue;
    s.set_attacked(i, e.at(std::min(i, i0), std::max(i, i0)));
  }
  return s;
}

IdentificationResult identify(int n, const ErrorVectorProvider& error_vector_at) {
  if (n < 3) throw ContractError("identification needs at least three cameras");
  IdentificationResult result;
  std::vector<uint8_t> attacked(static_cast<std::size_t>(n) + 1, 0);

  for (int m = n;; --m) {
    ErrorStateVector e = error_vector_at(m);
    if (e.reference() != m)
      throw ContractError("error vector reference does not match the requested level");
    result.levels.push_back(e);

    if (e.all_zero()) break;
    if (!e.all_one()) {
      int i0 = -1;
      int j0 = -1;
      for (int i = 0; i + 1 < m && i0 < 0; ++i) {
        for (int j = i + 1; j < m; ++j) {
          if (!e.at(i, j)) {
            i0 = i;
            j0 = j;
            break;
          }
        }
      }
      const SensorStateVector s = apply_lemma1(e, i0, j0);
      for (int i = 0; i <= m; ++i) {
        if (s.attacked(i)) attacked[i] = 1;
      }
      break;
    }
    // All ones: the reference must be attacked, the rest needs another pass.
    attacked[m] = 1;
    if (m == 3) {
      result.resolved = false;
      break;
    }
  }

  for (int i = 0; i <= n; ++i) {
    if (attacked[i]) result.attacked.push_back(i);
  }
  return result;
}

std::vector<SensorStateVector> brute_force_identify(const ErrorStateVector& e, int n,
                                                    int max_attacked) {
  std::vector<SensorStateVector> matches;
  const int sensors = n + 1;
  for (std::uint32_t mask = 0; mask < (1u << sensors); ++mask) {
    if (static_cast<int>(std::popcount(mask)) > max_attacked) continue;
    SensorStateVector s(sensors);
    for (int i = 0; i < sensors; ++i) s.set_attacked(i, (mask >> i) & 1u);
    if (expected_error_vector(s) == e) matches.push_back(std::move(s));
  }
  return matches;
}

}  // namespace oad
