#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "oad/detection.hpp"

namespace oad {

/// Hidden per-sensor attack flags s_0..s_n (index 0 is the LiDAR).
struct SensorStateVector {
  std::vector<uint8_t> states;

  explicit SensorStateVector(int sensor_count = 0) : states(sensor_count, 0) {}

  int sensor_count() const { return static_cast<int>(states.size()); }
  bool attacked(int i) const { return states[i] != 0; }
  void set_attacked(int i, bool v = true) { states[i] = v ? 1 : 0; }

  std::vector<int> attacked_indices() const {
    std::vector<int> out;
    for (int i = 0; i < sensor_count(); ++i) {
      if (states[i]) out.push_back(i);
    }
    return out;
  }

  bool operator==(const SensorStateVector&) const = default;
};

/// Observed thresholded-error bits e_{i,j,n} over all sensor pairs i<j<n
/// sharing the reference sensor n, in lexicographic pair order.
class ErrorStateVector {
 public:
  ErrorStateVector() = default;
  explicit ErrorStateVector(int reference)
      : reference_(reference),
        bits_(static_cast<std::size_t>(reference) * (reference - 1) / 2, 0) {}

  static std::size_t pair_index(int i, int j, int reference);

  int reference() const { return reference_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int i, int j) const { return bits_[pair_index(i, j, reference_)] != 0; }
  void set(int i, int j, bool v) { bits_[pair_index(i, j, reference_)] = v ? 1 : 0; }

  bool all_zero() const;
  bool all_one() const;

  const std::vector<uint8_t>& bits() const { return bits_; }

  bool operator==(const ErrorStateVector&) const = default;

 private:
  int reference_ = 0;
  std::vector<uint8_t> bits_;
};

// Thresholds every pairwise disparity error of maps[0..n-1] (all referenced
// to sensor n, in a common scale) into the error bits. maps[i] holds
// DM_{i,n}; thresholds must contain every (i,j,n) entry.
ErrorStateVector compute_error_state_vector(std::span<const DisparityMap> maps,
                                            const ThresholdSet& thresholds, int reference);

// Noiseless code: e_{i,j,n} = s_i OR s_j OR s_n.
ErrorStateVector expected_error_vector(const SensorStateVector& s);

// Given a zero entry e_{i0,j0,n}=0: those three sensors are clean and every
// other state is read off the bit pairing it with i0. Throws ContractError
// when the entry is not zero.
SensorStateVector apply_lemma1(const ErrorStateVector& e, int i0, int j0);

struct IdentificationResult {
  std::vector<int> attacked;
  // False when the recursion bottomed out at the 4-sensor base case with an
  // all-ones vector, where the remaining states follow from the attack-count
  // bound rather than from an observed zero entry.
  bool resolved = true;
  std::vector<ErrorStateVector> levels;
};

using ErrorVectorProvider = std::function<ErrorStateVector(int reference)>;

// Recursive state inference. The provider must yield the error vector for
// the surviving sensors 0..reference with the given reference; on an
// all-ones vector the reference sensor is flagged and the next level runs
// with reference-1, down to reference 3.
IdentificationResult identify(int n, const ErrorVectorProvider& error_vector_at);

// Exhaustive enumeration of every state vector with at most max_attacked
// attacked sensors whose noiseless code matches e.
std::vector<SensorStateVector> brute_force_identify(const ErrorStateVector& e, int n,
                                                    int max_attacked);

}  // namespace oad
