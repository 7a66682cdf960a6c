#pragma once

#include <string>

namespace dacp::eval {

/// Reference-based neural metrics (BERTScore, AlignScore) live outside this
/// toolkit. A scorer receives a candidate and a reference and returns a real
/// number.
class ExternalScorer {
 public:
  virtual ~ExternalScorer() = default;
  virtual double score(const std::string& candidate, const std::string& reference) = 0;
};

}  // namespace dacp::eval
