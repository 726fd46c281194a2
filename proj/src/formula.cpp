#include <algorithm>
#include <cctype>
#include <set>

#include "rankinfer/errors.hpp"
#include "rankinfer/rankreg.hpp"

namespace rankinfer {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  RankRegressionModel parse() {
    RankRegressionModel model;
    model.response = term();
    expect('~');
    skip_space();
    if (peek() == '(') {
      ++pos_;
      model.regressors = term_sum();
      expect(')');
      expect(':');
      model.group = identifier();
    } else {
      model.regressors = term_sum();
      skip_space();
      if (peek() == ':') {
        if (model.regressors.size() != 1) {
          fail("interaction with a sum of terms needs parentheses: (a + b):G");
        }
        ++pos_;
        model.group = identifier();
      }
    }
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return model;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw FormulaError("formula error at position " + std::to_string(pos_ + 1) + ": " + message,
                       pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    skip_space();
    if (peek() != c) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but reached the end");
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  std::string identifier() {
    skip_space();
    if (!is_ident_start(peek())) fail("expected a column name");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Term term() {
    skip_space();
    const std::size_t start = pos_;
    std::string name = identifier();
    skip_space();
    if (name == "r" && peek() == '(') {
      ++pos_;
      Term t{identifier(), true};
      expect(')');
      return t;
    }
    if (peek() == '(') {
      pos_ = start;
      fail("only r(...) may be applied to a column");
    }
    return Term{std::move(name), false};
  }

  std::vector<Term> term_sum() {
    std::vector<Term> terms{term()};
    skip_space();
    while (peek() == '+') {
      ++pos_;
      terms.push_back(term());
      skip_space();
    }
    return terms;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

RankRegressionModel parse_formula(std::string_view text) {
  RankRegressionModel model = FormulaParser(text).parse();
  model.validate();
  return model;
}

std::string caret_diagnostic(std::string_view text, std::size_t position) {
  std::string out(text);
  out += '\n';
  out.append(std::min(position, text.size()), ' ');
  out += '^';
  return out;
}

void RankRegressionModel::validate() const {
  if (!(omega >= 0.0 && omega <= 1.0)) throw InvalidArgument("omega must lie in [0, 1]");
  if (regressors.empty()) throw InvalidArgument("model needs at least one regressor");
  int ranked = 0;
  std::set<std::string> seen;
  for (const auto& t : regressors) {
    if (t.ranked) ++ranked;
    if (!seen.insert(t.column).second) {
      throw InvalidArgument("column '" + t.column + "' appears more than once among regressors");
    }
    if (group && t.column == *group) {
      throw InvalidArgument("group column '" + *group + "' cannot also be a regressor");
    }
  }
  if (ranked > 1) throw InvalidArgument("at most one ranked regressor is supported");
}

const Term* RankRegressionModel::ranked_regressor() const {
  for (const auto& t : regressors) {
    if (t.ranked) return &t;
  }
  return nullptr;
}

std::string RankRegressionModel::formula() const {
  std::string rhs;
  for (std::size_t i = 0; i < regressors.size(); ++i) {
    if (i) rhs += " + ";
    rhs += regressors[i].label();
  }
  if (group) {
    rhs = regressors.size() == 1 ? rhs + ":" + *group : "(" + rhs + "):" + *group;
  }
  return response.label() + " ~ " + rhs;
}

}  // namespace rankinfer
