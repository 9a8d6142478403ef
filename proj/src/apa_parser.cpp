#include "rmbf/apa_parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace rmbf {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

class Cursor {
public:
  Cursor(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

  std::size_t pos() const { return pos_; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_letter(char lower) {
    if (pos_ < text_.size() &&
        std::tolower(static_cast<unsigned char>(text_[pos_])) == lower) {
      ++pos_;
      return true;
    }
    return false;
  }

  // '=' or '<'; sets `less` for the latter.
  bool accept_relation(bool& less) {
    if (accept('=')) {
      less = false;
      return true;
    }
    if (accept('<')) {
      less = true;
      return true;
    }
    return false;
  }

  // digits ('.' digits)? | '.' digits
  std::optional<double> number() {
    const std::size_t start = pos_;
    std::size_t p = pos_;
    while (p < text_.size() && is_digit(text_[p])) ++p;
    const bool has_int = p > start;
    if (p + 1 < text_.size() && text_[p] == '.' && is_digit(text_[p + 1])) {
      ++p;
      while (p < text_.size() && is_digit(text_[p])) ++p;
    } else if (!has_int) {
      return std::nullopt;
    }
    // from_chars rejects a leading '.', so prepend a zero.
    std::string token = has_int ? std::string(text_.substr(start, p - start))
                                : "0" + std::string(text_.substr(start, p - start));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
      return std::nullopt;
    }
    pos_ = p;
    return value;
  }

private:
  std::string_view text_;
  std::size_t pos_;
};

std::optional<ReportedStat> match_at(std::string_view text, std::size_t start) {
  Cursor c(text, start);
  ReportedStat stat;
  if (!c.accept_letter('f')) return std::nullopt;
  c.skip_ws();
  if (!c.accept('(')) return std::nullopt;
  c.skip_ws();
  const auto df1 = c.number();
  if (!df1) return std::nullopt;
  c.skip_ws();
  if (!c.accept(',')) return std::nullopt;
  c.skip_ws();
  const auto df2 = c.number();
  if (!df2) return std::nullopt;
  c.skip_ws();
  if (!c.accept(')')) return std::nullopt;
  c.skip_ws();
  if (!c.accept_relation(stat.f_upper_bound)) return std::nullopt;
  c.skip_ws();
  const auto f = c.number();
  if (!f) return std::nullopt;
  stat.df1 = *df1;
  stat.df2 = *df2;
  stat.f_value = *f;
  std::size_t end = c.pos();

  // Optional p clause; backtrack to `end` if incomplete.
  Cursor p(text, end);
  p.skip_ws();
  if (p.accept(',')) {
    p.skip_ws();
    if (p.accept_letter('p')) {
      p.skip_ws();
      bool less = false;
      if (p.accept_relation(less)) {
        p.skip_ws();
        if (const auto pv = p.number(); pv && *pv <= 1.0) {
          stat.p_reported = *pv;
          stat.p_upper_bound = less;
          end = p.pos();
        }
      }
    }
  }

  stat.begin = start;
  stat.end = end;
  stat.text = std::string(text.substr(start, end - start));
  return stat;
}

bool is_integral(double x) {
  return std::isfinite(x) && x == std::floor(x) && x < 9.0e15;
}

} // namespace

std::vector<ReportedStat> parse_reports(std::string_view text) {
  std::vector<ReportedStat> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if ((ch == 'F' || ch == 'f') && (i == 0 || !is_word_char(text[i - 1]))) {
      if (auto stat = match_at(text, i)) {
        if (stat->df1 >= 1.0 && stat->df2 >= 1.0) {
          i = stat->end;
          out.push_back(std::move(*stat));
          continue;
        }
      }
    }
    ++i;
  }
  return out;
}

DesignSpec infer_rm_design(double df1, double df2) {
  using Reason = DesignInferenceError::Reason;
  if (!(df1 >= 1.0) || !(df2 >= 1.0)) {
    throw DesignInferenceError(Reason::nonpositive_df,
                               fmt::format("degrees of freedom must be at least 1 (got {}, {})",
                                           df1, df2));
  }
  if (!is_integral(df1) || !is_integral(df2)) {
    throw DesignInferenceError(
        Reason::non_integer_df,
        fmt::format("fractional degrees of freedom ({}, {}) suggest a sphericity correction; "
                    "supply n and k explicitly",
                    df1, df2));
  }
  const auto d1 = static_cast<long>(df1);
  const auto d2 = static_cast<long>(df2);
  if (d2 % d1 != 0) {
    throw DesignInferenceError(
        Reason::not_divisible,
        fmt::format("df2 = {} is not a multiple of df1 = {}; not a one-factor repeated-measures "
                    "design",
                    d2, d1));
  }
  return {d2 / d1 + 1, d1 + 1};
}

DesignSpec infer_rm_design(const ReportedStat& stat) { return infer_rm_design(stat.df1, stat.df2); }

} // namespace rmbf
