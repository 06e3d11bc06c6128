#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace abba::models {

/// One participant. `subtrial` is a 0-based index into the trial's K subtrials.
struct SubjectRecord {
  int subtrial = 0;
  int treatment = 0;      ///< 1 = treatment arm, 0 = control
  double baseline = 1.0;  ///< positive disease-activity covariate; its log enters the model
  double y_continuous = 0.0;
  int y_binary = 0;  ///< 1 = failure event (e.g. rescue medication)

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

enum class Direction { Above, Below };

/// Responder definition: continuous score past the threshold, optionally with no failure event.
struct ResponderRule {
  double threshold = std::log(20.0);
  Direction direction = Direction::Above;
  bool success_requires_no_failure = true;
};

bool is_responder(const SubjectRecord& subject, const ResponderRule& rule);

/// 1 where the latent variable is positive. Convention: y* > 0 <=> no failure event (y_binary == 0).
std::vector<int> latent_sign_indicators(const std::vector<SubjectRecord>& data,
                                        const ResponderRule& rule = {});

/// Validated, immutable set of subject records spanning subtrials 0..K-1.
class Dataset {
 public:
  /// Throws MalformedInput for illegal field values and ValidationError when a subtrial
  /// in [0, subtrials) has no subjects at all.
  Dataset(std::vector<SubjectRecord> records, int subtrials);

  /// K inferred as 1 + the largest subtrial index.
  static Dataset from_records(std::vector<SubjectRecord> records);

  int subtrials() const noexcept { return subtrials_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<SubjectRecord>& records() const noexcept { return records_; }
  const SubjectRecord& operator[](std::size_t i) const { return records_[i]; }
  double log_baseline(std::size_t i) const { return log_baseline_[i]; }

  /// Indices (in dataset order) of the subjects in subtrial k.
  const std::vector<std::size_t>& members(int k) const { return members_[k]; }
  std::size_t arm_size(int k, int treatment) const;

  /// Subtrial k alone, relabelled as subtrial 0, subject order preserved.
  Dataset subset(int k) const;

 private:
  std::vector<SubjectRecord> records_;
  int subtrials_;
  std::vector<double> log_baseline_;
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace abba::models
