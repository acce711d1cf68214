#include "body_grammar.hpp"

#include <cctype>
#include <cstdlib>
#include <set>
#include <string>

namespace symcap {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SupportBody parse() {
    SupportBody b = body();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input '" + token_preview() + "'");
    return b;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

  std::string token_preview() const {
    std::size_t end = pos_;
    while (end < text_.size() && end - pos_ < 16 && !std::isspace(static_cast<unsigned char>(text_[end]))) {
      if (end > pos_ && std::string_view("(),[]=").find(text_[end]) != std::string_view::npos) break;
      ++end;
    }
    if (end == pos_ && pos_ < text_.size()) ++end;
    return pos_ < text_.size() ? std::string(text_.substr(pos_, end - pos_)) : std::string("<end of input>");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "' but found '" + token_preview() + "'");
    }
    ++pos_;
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name but found '" + token_preview() + "'");
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_ws();
    const std::string rest(text_.substr(pos_, std::min<std::size_t>(64, text_.size() - pos_)));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("expected a number but found '" + token_preview() + "'");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return v;
  }

  int integer() {
    const std::size_t at = pos_;
    const double v = number();
    if (v != static_cast<double>(static_cast<int>(v))) {
      pos_ = at;
      fail("expected an integer but found '" + token_preview() + "'");
    }
    return static_cast<int>(v);
  }

  std::vector<double> number_list_until(char close) {
    std::vector<double> xs;
    if (peek(close)) return xs;
    xs.push_back(number());
    while (peek(',')) {
      ++pos_;
      xs.push_back(number());
    }
    return xs;
  }

  std::vector<double> bracket_numbers() {
    expect('[');
    auto xs = number_list_until(']');
    expect(']');
    return xs;
  }

  std::vector<int> bracket_ints() {
    expect('[');
    std::vector<int> xs;
    if (!peek(']')) {
      xs.push_back(integer());
      while (peek(',')) {
        ++pos_;
        xs.push_back(integer());
      }
    }
    expect(']');
    return xs;
  }

  std::vector<std::vector<int>> bracket_int_sets() {
    expect('[');
    std::vector<std::vector<int>> sets;
    if (!peek(']')) {
      sets.push_back(bracket_ints());
      while (peek(',')) {
        ++pos_;
        sets.push_back(bracket_ints());
      }
    }
    expect(']');
    return sets;
  }

  Mat bracket_matrix() {
    expect('[');
    std::vector<std::vector<double>> rows;
    rows.push_back(bracket_numbers());
    while (peek(',')) {
      ++pos_;
      rows.push_back(bracket_numbers());
    }
    expect(']');
    Mat a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size()) fail("matrix rows have different lengths");
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return a;
  }

  template <class Fn>
  auto checked(Fn&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }

  SupportBody ballproduct() {
    BallProductSpec spec;
    bool have_rho = false, have_i = false, have_j = false;
    int explicit_n = 0;
    for (;;) {
      const std::size_t at = pos_;
      const std::string key = identifier();
      expect('=');
      if (key == "rho") {
        spec.radii = bracket_numbers();
        have_rho = true;
      } else if (key == "I") {
        spec.I = bracket_int_sets();
        have_i = true;
      } else if (key == "J") {
        spec.J = bracket_int_sets();
        have_j = true;
      } else if (key == "n") {
        explicit_n = integer();
      } else {
        pos_ = at;
        fail("unknown ballproduct key '" + key + "'");
      }
      if (!peek(',')) break;
      ++pos_;
    }
    if (!have_rho || !have_i || !have_j) fail("ballproduct needs rho=, I= and J=");
    int n = 0;
    for (const auto& s : spec.I) n += static_cast<int>(s.size());
    spec.n = explicit_n > 0 ? explicit_n : n;
    return checked([&] { return ball_product_body(spec); });
  }

  SupportBody body() {
    skip_ws();
    const std::size_t at = pos_;
    const std::string name = identifier();
    static const std::set<std::string> known{"ball",  "cube",  "ellipsoid", "polydisk", "superellipse",
                                             "ballproduct", "sum", "scale", "linimg"};
    if (!known.count(name)) {
      pos_ = at;
      fail("unknown body '" + name + "'");
    }
    expect('(');
    SupportBody out = [&]() -> SupportBody {
      if (name == "ball") {
        const int n = integer();
        return checked([&] { return unit_ball(n); });
      }
      if (name == "cube") {
        const int n = integer();
        return checked([&] { return cube(n); });
      }
      if (name == "ellipsoid") {
        const auto a = number_list_until(')');
        return checked([&] { return ellipsoid(a); });
      }
      if (name == "polydisk") {
        const auto r = number_list_until(')');
        return checked([&] { return polydisk(r); });
      }
      if (name == "superellipse") {
        const double p = number();
        expect(',');
        const double r = number();
        return checked([&] { return superellipse(p, r); });
      }
      if (name == "ballproduct") return ballproduct();
      if (name == "sum") {
        SupportBody acc = body();
        int terms = 1;
        while (peek(',')) {
          ++pos_;
          SupportBody next = body();
          acc = checked([&] { return minkowski_sum(acc, next); });
          ++terms;
        }
        if (terms < 2) fail("sum needs at least two bodies");
        return acc;
      }
      if (name == "scale") {
        const double c = number();
        expect(',');
        SupportBody k = body();
        return checked([&] { return scaled(k, c); });
      }
      if (name == "linimg") {
        const Mat a = bracket_matrix();
        expect(',');
        SupportBody k = body();
        return checked([&] { return linear_image(k, a); });
      }
      pos_ = at;
      fail("unknown body '" + name + "'");
    }();
    expect(')');
    return out;
  }
};

}  // namespace

SupportBody parse_body(std::string_view text) { return Parser(text).parse(); }

}  // namespace symcap
