#include "iac/sexpr.hpp"

#include <cctype>

#include "iac/errors.hpp"

namespace iac {

std::string_view SExpr::head() const {
  if (kind != Kind::List || items.empty() || items.front().kind != Kind::Symbol) return {};
  return items.front().text;
}

namespace {

bool simple_symbol_char(char c) {
  static constexpr std::string_view extra = "~!@$%^&*_-+=<>.?/";
  return std::isalnum(static_cast<unsigned char>(c)) || extra.find(c) != std::string_view::npos;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SmtSyntaxError(std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SExpr e;
    e.begin = pos_;
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      e.kind = SExpr::Kind::List;
      skip();
      while (true) {
        if (pos_ >= text_.size()) fail("unbalanced '('", e.begin);
        if (text_[pos_] == ')') break;
        e.items.push_back(read());
        skip();
      }
      ++pos_;
    } else if (c == ')') {
      fail("unexpected ')'", pos_);
    } else if (c == '|') {
      auto close = text_.find('|', pos_ + 1);
      if (close == std::string_view::npos) fail("unterminated quoted symbol", pos_);
      e.kind = SExpr::Kind::Symbol;
      e.quoted = true;
      e.text = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
      if (e.text.find('\\') != std::string::npos) fail("'\\' is not allowed in a quoted symbol", pos_);
      pos_ = close + 1;
    } else if (c == '"') {
      e.kind = SExpr::Kind::String;
      ++pos_;
      while (true) {
        if (pos_ >= text_.size()) fail("unterminated string literal", e.begin);
        if (text_[pos_] == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            e.text += '"';
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        e.text += text_[pos_++];
      }
    } else {
      auto start = pos_;
      while (pos_ < text_.size() && (simple_symbol_char(text_[pos_]) || text_[pos_] == ':' ||
                                     text_[pos_] == '#')) {
        ++pos_;
      }
      if (pos_ == start) fail(std::string("unexpected character '") + c + "'", pos_);
      e.text = std::string(text_.substr(start, pos_ - start));
      e.kind = classify(e.text);
    }
    e.end = pos_;
    return e;
  }

  static SExpr::Kind classify(const std::string& t) {
    if (t.front() == ':') return SExpr::Kind::Keyword;
    bool digits = true, dot = false;
    for (char ch : t) {
      if (ch == '.' && !dot) {
        dot = true;
      } else if (!std::isdigit(static_cast<unsigned char>(ch))) {
        digits = false;
        break;
      }
    }
    if (digits && t.front() != '.' && t.back() != '.') {
      return dot ? SExpr::Kind::Decimal : SExpr::Kind::Numeral;
    }
    return SExpr::Kind::Symbol;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).read_all(); }

std::string quote_symbol(std::string_view name) {
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name.front()));
  for (char c : name) simple = simple && simple_symbol_char(c);
  return simple ? std::string(name) : "|" + std::string(name) + "|";
}

std::string to_string(const SExpr& e) {
  switch (e.kind) {
    case SExpr::Kind::List: {
      std::string out = "(";
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i > 0) out += ' ';
        out += to_string(e.items[i]);
      }
      return out + ")";
    }
    case SExpr::Kind::Symbol:
      return e.quoted ? "|" + e.text + "|" : e.text;
    case SExpr::Kind::String: {
      std::string out = "\"";
      for (char c : e.text) {
        out += c;
        if (c == '"') out += '"';
      }
      return out + "\"";
    }
    default:
      return e.text;
  }
}

}  // namespace iac
