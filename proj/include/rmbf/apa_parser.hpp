#pragma once

#include "rmbf/anova.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rmbf {

// An F statistic as reported in running text, e.g. "F(1, 22) = 1.336, p = .26".
struct ReportedStat {
  double f_value = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  // "F(2, 38) < 1": f_value holds the bound. Since BF01 decreases in F, a
  // Bayes factor computed from it is a lower bound on BF01.
  bool f_upper_bound = false;
  std::optional<double> p_reported;
  bool p_upper_bound = false; // "p < .001"
  // Half-open byte range [begin, end) of the match in the input.
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;
};

// Every non-overlapping match of
//   F ws? ( ws? num ws? , ws? num ws? ) ws? (=|<) ws? num [ws? , ws? p ws? (=|<) ws? num]
// in order of appearance. F and p are case-insensitive; a number is
// digits with an optional fraction, or a bare fraction such as ".26". Never
// throws on content.
std::vector<ReportedStat> parse_reports(std::string_view text);

class DesignInferenceError : public std::runtime_error {
public:
  enum class Reason { non_integer_df, not_divisible, nonpositive_df };

  DesignInferenceError(Reason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  Reason reason() const { return reason_; }

private:
  Reason reason_;
};

// Inverts df1 = k - 1, df2 = (n - 1)(k - 1). Fractional (e.g.
// sphericity-corrected) or non-divisible dfs throw DesignInferenceError.
DesignSpec infer_rm_design(const ReportedStat& stat);
DesignSpec infer_rm_design(double df1, double df2);

} // namespace rmbf
