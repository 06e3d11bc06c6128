#include "abba/models/data.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "abba/errors.hpp"

namespace abba::models {

bool is_responder(const SubjectRecord& subject, const ResponderRule& rule) {
  const bool score = rule.direction == Direction::Above ? subject.y_continuous >= rule.threshold
                                                        : subject.y_continuous < rule.threshold;
  return score && (!rule.success_requires_no_failure || subject.y_binary == 0);
}

std::vector<int> latent_sign_indicators(const std::vector<SubjectRecord>& data,
                                        const ResponderRule& /*rule*/) {
  std::vector<int> signs(data.size());
  std::transform(data.begin(), data.end(), signs.begin(),
                 [](const SubjectRecord& s) { return s.y_binary == 0 ? 1 : 0; });
  return signs;
}

Dataset::Dataset(std::vector<SubjectRecord> records, int subtrials)
    : records_(std::move(records)), subtrials_(subtrials) {
  if (subtrials_ < 1) throw ValidationError("dataset: at least one subtrial is required");
  std::ostringstream problems;
  int bad = 0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const SubjectRecord& r = records_[i];
    auto fail = [&](const std::string& what) {
      if (bad++ < 20) problems << "\n  subject " << i << ": " << what;
    };
    if (r.subtrial < 0 || r.subtrial >= subtrials_) fail("subtrial index out of range");
    if (r.treatment != 0 && r.treatment != 1) fail("treatment must be 0 or 1");
    if (r.y_binary != 0 && r.y_binary != 1) fail("y_binary must be 0 or 1");
    if (!(r.baseline > 0.0) || !std::isfinite(r.baseline)) fail("baseline must be positive");
    if (!std::isfinite(r.y_continuous)) fail("y_continuous must be finite");
  }
  if (bad > 0) throw MalformedInput("invalid subject records:" + problems.str());

  members_.resize(subtrials_);
  log_baseline_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    members_[records_[i].subtrial].push_back(i);
    log_baseline_.push_back(std::log(records_[i].baseline));
  }
  for (int k = 0; k < subtrials_; ++k) {
    if (members_[k].empty()) {
      throw ValidationError("subtrial " + std::to_string(k + 1) + " has no subjects");
    }
  }
}

Dataset Dataset::from_records(std::vector<SubjectRecord> records) {
  int k = 0;
  for (const auto& r : records) k = std::max(k, r.subtrial + 1);
  return Dataset(std::move(records), k);
}

std::size_t Dataset::arm_size(int k, int treatment) const {
  return static_cast<std::size_t>(std::count_if(
      members_[k].begin(), members_[k].end(),
      [&](std::size_t i) { return records_[i].treatment == treatment; }));
}

Dataset Dataset::subset(int k) const {
  std::vector<SubjectRecord> sub;
  sub.reserve(members_[k].size());
  for (const std::size_t i : members_[k]) {
    SubjectRecord r = records_[i];
    r.subtrial = 0;
    sub.push_back(r);
  }
  return Dataset(std::move(sub), 1);
}

}  // namespace abba::models
