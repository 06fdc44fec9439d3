#include <algorithm>
#include <cctype>
#include <string>

#include "img2uml/plantuml.hpp"

namespace img2uml {

namespace {

bool is_ident_start(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool is_ident_char(char c) { return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

bool is_identifier(std::string_view s) {
  return !s.empty() && is_ident_start(s.front()) && std::all_of(s.begin(), s.end(), is_ident_char);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_blank(s.front())) {
    s.remove_prefix(1);
  }
  while (!s.empty() && is_blank(s.back())) {
    s.remove_suffix(1);
  }
  return s;
}

bool starts_with_word(std::string_view s, std::string_view word) {
  return s.substr(0, word.size()) == word && (s.size() == word.size() || !is_ident_char(s[word.size()]));
}

std::string excerpt(std::string_view s) {
  s = trim(s);
  constexpr std::size_t kMax = 40;
  if (s.size() > kMax) {
    return std::string(s.substr(0, kMax)) + "...";
  }
  return std::string(s);
}

/// Thrown inside line handlers; caught by the line loop, which records it and
/// resynchronizes at the next line.
struct LineError {
  Diagnostic diagnostic;
};

/// Index of the first `sep` in `s` that is not nested inside (), <> or [].
std::size_t find_top_level(std::string_view s, char sep) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == sep && depth == 0) {
      return i;
    }
    if (c == '(' || c == '<' || c == '[') {
      ++depth;
    } else if ((c == ')' || c == '>' || c == ']') && depth > 0) {
      --depth;
    }
  }
  return std::string_view::npos;
}

std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto at = find_top_level(s, sep);
    if (at == std::string_view::npos) {
      parts.push_back(s);
      return parts;
    }
    parts.push_back(s.substr(0, at));
    s.remove_prefix(at + 1);
  }
}

/// Splits "List<Map<K, V>> items" into {"List<Map<K, V>>", "items"}: the last
/// whitespace-separated word outside brackets, and whatever precedes it.
std::pair<std::string_view, std::string_view> split_last_word(std::string_view s) {
  s = trim(s);
  int depth = 0;
  std::size_t split = std::string_view::npos;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '<' || c == '[') {
      ++depth;
    } else if ((c == ')' || c == '>' || c == ']') && depth > 0) {
      --depth;
    } else if (is_blank(c) && depth == 0) {
      split = i;
    }
  }
  if (split == std::string_view::npos) {
    return {std::string_view{}, s};
  }
  return {trim(s.substr(0, split)), trim(s.substr(split + 1))};
}

enum class Head { None, Open, Triangle, Diamond, Filled };

struct Arrow {
  Head left = Head::None;
  Head right = Head::None;
  bool dotted = false;
  std::size_t length = 0;
};

enum class Reading { None, LeftToRight, RightToLeft };

struct ArrowMeaning {
  RelationshipKind kind;
  bool left_is_source;
  Reading direction;
};

bool is_layout_hint(std::string_view w) {
  static constexpr std::string_view kHints[] = {"up",   "down", "left", "right", "u",  "d",
                                                "l",    "r",    "do",   "le",    "ri", "dow",
                                                "lef",  "rig",  "righ", "norank"};
  return std::find(std::begin(kHints), std::end(kHints), w) != std::end(kHints);
}

/// Scans an arrow starting at `s[0]`. Returns nullopt if no arrow starts here.
std::optional<Arrow> scan_arrow(std::string_view s) {
  Arrow a;
  std::size_t p = 0;
  auto at = [&](std::size_t i) { return i < s.size() ? s[i] : '\0'; };
  auto is_line = [](char c) { return c == '-' || c == '.'; };

  if (at(p) == '<' && at(p + 1) == '|') {
    a.left = Head::Triangle;
    p += 2;
  } else if (at(p) == '<') {
    a.left = Head::Open;
    p += 1;
  } else if ((at(p) == 'o' || at(p) == '*') && is_line(at(p + 1))) {
    a.left = at(p) == 'o' ? Head::Diamond : Head::Filled;
    p += 1;
  }

  const char line = at(p);
  if (!is_line(line)) {
    return std::nullopt;
  }
  a.dotted = line == '.';
  while (at(p) == line) {
    ++p;
  }
  // Layout hints: `-up->`, `-[#red]->`, `-[hidden]-`.
  if (at(p) == '[') {
    const auto close = s.find(']', p);
    if (close == std::string_view::npos) {
      return std::nullopt;
    }
    p = close + 1;
    while (at(p) == line) {
      ++p;
    }
  } else if (std::isalpha(static_cast<unsigned char>(at(p)))) {
    std::size_t q = p;
    while (std::isalpha(static_cast<unsigned char>(at(q)))) {
      ++q;
    }
    if (at(q) == line && is_layout_hint(s.substr(p, q - p))) {
      p = q;
      while (at(p) == line) {
        ++p;
      }
    }
  }

  if (at(p) == '|' && at(p + 1) == '>') {
    a.right = Head::Triangle;
    p += 2;
  } else if (at(p) == '>') {
    a.right = Head::Open;
    p += 1;
  } else if ((at(p) == 'o' || at(p) == '*') && !is_ident_char(at(p + 1))) {
    a.right = at(p) == 'o' ? Head::Diamond : Head::Filled;
    p += 1;
  }
  a.length = p;
  return a;
}

std::optional<ArrowMeaning> interpret(const Arrow& a) {
  using H = Head;
  const H l = a.left;
  const H r = a.right;
  const auto inherit = a.dotted ? RelationshipKind::Realization : RelationshipKind::Generalization;

  if (l == H::None && r == H::None) {
    return ArrowMeaning{RelationshipKind::Association, true, Reading::None};
  }
  if (l == H::None && r == H::Open) {
    return a.dotted ? ArrowMeaning{RelationshipKind::Dependency, true, Reading::None}
                    : ArrowMeaning{RelationshipKind::Association, true, Reading::LeftToRight};
  }
  if (l == H::Open && r == H::None) {
    return a.dotted ? ArrowMeaning{RelationshipKind::Dependency, false, Reading::None}
                    : ArrowMeaning{RelationshipKind::Association, true, Reading::RightToLeft};
  }
  if (l == H::Triangle && r == H::None) {
    return ArrowMeaning{inherit, false, Reading::None};
  }
  if (l == H::None && r == H::Triangle) {
    return ArrowMeaning{inherit, true, Reading::None};
  }
  auto whole_part = [](H h) {
    return h == H::Diamond ? std::optional(RelationshipKind::Aggregation)
           : h == H::Filled ? std::optional(RelationshipKind::Composition)
                            : std::nullopt;
  };
  if (auto k = whole_part(l); k && (r == H::None || r == H::Open)) {
    return ArrowMeaning{*k, true, r == H::Open ? Reading::LeftToRight : Reading::None};
  }
  if (auto k = whole_part(r); k && (l == H::None || l == H::Open)) {
    return ArrowMeaning{*k, false, l == H::Open ? Reading::RightToLeft : Reading::None};
  }
  return std::nullopt;
}

/// Cursor over one source line.
class LineCursor {
 public:
  LineCursor(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && is_blank(text_[pos_])) {
      ++pos_;
    }
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek(std::size_t k = 0) const { return pos_ + k < text_.size() ? text_[pos_ + k] : '\0'; }
  std::string_view rest() const { return text_.substr(std::min(pos_, text_.size())); }
  int column() const { return static_cast<int>(pos_) + 1; }
  int line() const { return line_; }
  void advance(std::size_t n) { pos_ += n; }

  bool consume(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool consume_word(std::string_view w) {
    skip_ws();
    if (starts_with_word(rest(), w)) {
      pos_ += w.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::string message) const { fail_at(column(), std::move(message), rest()); }

  [[noreturn]] void fail_at(int column, std::string message, std::string_view near) const {
    std::string text = excerpt(near);
    if (text.empty()) {
      text = "end of line";
    }
    throw LineError{Diagnostic{line_, column, std::move(message), std::move(text)}};
  }

  /// Identifier or double-quoted name. Returns nullopt (without moving) when
  /// neither starts here.
  std::optional<std::string> read_name() {
    skip_ws();
    const int col = column();
    if (peek() == '"') {
      const auto close = text_.find('"', pos_ + 1);
      if (close == std::string_view::npos) {
        fail("unterminated quoted name");
      }
      std::string name(text_.substr(pos_ + 1, close - pos_ - 1));
      if (fold_text(name).empty()) {
        fail_at(col, "empty name", text_.substr(pos_, close - pos_ + 1));
      }
      pos_ = close + 1;
      return name;
    }
    if (!is_ident_start(peek())) {
      return std::nullopt;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::optional<std::pair<std::string, int>> read_quoted() {
    skip_ws();
    if (peek() != '"') {
      return std::nullopt;
    }
    const int col = column();
    const auto close = text_.find('"', pos_ + 1);
    if (close == std::string_view::npos) {
      fail("unterminated quoted text");
    }
    std::string value(text_.substr(pos_ + 1, close - pos_ - 1));
    pos_ = close + 1;
    return std::pair{std::move(value), col};
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

class Parser {
 public:
  explicit Parser(std::string_view source) {
    std::size_t start = 0;
    while (start <= source.size()) {
      auto nl = source.find('\n', start);
      if (nl == std::string_view::npos) {
        nl = source.size();
      }
      std::string_view line = source.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
      }
      lines_.push_back(line);
      start = nl + 1;
    }
  }

  ParseOutcome run() {
    std::size_t first = 0;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      if (trim(lines_[i]).starts_with("@startuml")) {
        first = i + 1;
        break;
      }
    }

    for (std::size_t i = first; i < lines_.size(); ++i) {
      const int line_no = static_cast<int>(i) + 1;
      const std::string_view raw = lines_[i];
      const std::string_view text = trim(raw);

      if (in_block_comment_) {
        in_block_comment_ = text.find("'/") == std::string_view::npos;
        continue;
      }
      if (text.starts_with("/'")) {
        in_block_comment_ = text.find("'/", 2) == std::string_view::npos;
        continue;
      }
      if (text.starts_with("@enduml")) {
        break;
      }
      if (skip_depth_ > 0) {
        skip_depth_ += brace_balance(text);
        continue;
      }

      try {
        if (body_open_) {
          body_line(raw, line_no);
        } else {
          top_line(raw, line_no);
        }
      } catch (const LineError& e) {
        diagnostics_.push_back(e.diagnostic);
      }
    }

    if (body_open_) {
      diagnostics_.push_back(Diagnostic{open_line_, open_column_,
                                        "missing '}' to close the body of '" + open_name_ + "'", "{"});
    }
    if (!diagnostics_.empty()) {
      return ParseOutcome(std::move(diagnostics_));
    }

    for (const auto& name : mentions_) {
      if (model_.find_classifier(name) == nullptr) {
        model_.classifiers.push_back(Classifier{name, ClassifierKind::Class, {}, {}, {}});
      }
    }
    return ParseOutcome(std::move(model_));
  }

 private:
  static int brace_balance(std::string_view s) {
    int n = 0;
    for (char c : s) {
      n += c == '{' ? 1 : c == '}' ? -1 : 0;
    }
    return n;
  }

  static int column_of(std::string_view line, std::string_view part) {
    return static_cast<int>(part.data() - line.data()) + 1;
  }

  void top_line(std::string_view raw, int line_no) {
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '\'') {
      return;
    }
    if (text.front() == '!') {
      if (starts_with_word(text.substr(1), "theme") || starts_with_word(text.substr(1), "pragma")) {
        return;
      }
      LineCursor(raw, line_no).fail_at(column_of(raw, text), "preprocessor directives are not supported", text);
    }
    static constexpr std::string_view kDirectives[] = {
        "skinparam", "hide", "show", "title", "scale", "caption", "header", "footer", "allowmixing", "remove"};
    if (text.starts_with("left to right direction") || text.starts_with("top to bottom direction")) {
      return;
    }
    for (auto d : kDirectives) {
      if (starts_with_word(text, d)) {
        if (d == "skinparam") {
          skip_depth_ = std::max(0, brace_balance(text));
        }
        return;
      }
    }
    if (starts_with_word(text, "class") || starts_with_word(text, "abstract") ||
        starts_with_word(text, "interface") || starts_with_word(text, "enum")) {
      declaration(raw, line_no);
      return;
    }
    relationship(raw, line_no);
  }

  void declaration(std::string_view raw, int line_no) {
    LineCursor cur(raw, line_no);
    const bool opens_body = trim(raw).ends_with("{");
    try {
      declaration_impl(cur);
    } catch (const LineError&) {
      if (opens_body) {
        skip_depth_ = 1;
      }
      throw;
    }
  }

  void declaration_impl(LineCursor& cur) {
    ClassifierKind kind = ClassifierKind::Class;
    if (cur.consume_word("abstract")) {
      kind = ClassifierKind::AbstractClass;
      cur.consume_word("class");
    } else if (cur.consume_word("class")) {
      kind = ClassifierKind::Class;
    } else if (cur.consume_word("interface")) {
      kind = ClassifierKind::Interface;
    } else if (cur.consume_word("enum")) {
      kind = ClassifierKind::Enumeration;
    }

    cur.skip_ws();
    const int name_col = cur.column();
    auto name = cur.read_name();
    if (!name) {
      cur.fail("expected a classifier name");
    }
    if (model_.find_classifier(*name) != nullptr) {
      cur.fail_at(name_col, "duplicate declaration of '" + *name + "'", *name);
    }
    model_.classifiers.push_back(Classifier{*name, kind, {}, {}, {}});
    const std::size_t index = model_.classifiers.size() - 1;
    mentions_.push_back(*name);

    while (!cur.at_end()) {
      const bool extends = cur.consume_word("extends");
      const bool implements = !extends && cur.consume_word("implements");
      if (extends || implements) {
        const auto rel_kind = implements ? RelationshipKind::Realization : RelationshipKind::Generalization;
        do {
          auto parent = cur.read_name();
          if (!parent) {
            cur.fail(std::string("expected a classifier name after '") + (implements ? "implements" : "extends") +
                     "'");
          }
          mentions_.push_back(*parent);
          Relationship r;
          r.kind = rel_kind;
          r.source = *name;
          r.target = *parent;
          model_.relationships.push_back(std::move(r));
        } while (cur.consume(','));
        continue;
      }
      if (cur.peek() == '{') {
        const int brace_col = cur.column();
        cur.advance(1);
        if (cur.consume('}')) {
          if (!cur.at_end()) {
            cur.fail("unexpected text after '{}'");
          }
          return;
        }
        if (!cur.at_end()) {
          cur.fail("members must start on the line after '{'");
        }
        body_open_ = true;
        body_index_ = index;
        open_line_ = cur.line();
        open_column_ = brace_col;
        open_name_ = *name;
        return;
      }
      if (cur.rest().starts_with("<<")) {
        cur.fail("stereotypes are not supported");
      }
      if (scan_arrow(cur.rest())) {
        cur.fail("a relationship arrow cannot appear in a class declaration; use 'class " + *name +
                 " extends Parent' or a separate relationship line such as 'Parent <|-- " + *name + "'");
      }
      cur.fail("unexpected text in the declaration of '" + *name + "'");
    }
  }

  void body_line(std::string_view raw, int line_no) {
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '\'') {
      return;
    }
    if (text.front() == '}') {
      body_open_ = false;
      if (trim(text.substr(1)).size() > 0) {
        LineCursor(raw, line_no)
            .fail_at(column_of(raw, text) + 1, "unexpected text after '}'", text.substr(1));
      }
      return;
    }
    static constexpr std::string_view kSeparators[] = {"--", "..", "==", "__"};
    for (auto sep : kSeparators) {
      if (text.starts_with(sep)) {
        return;
      }
    }

    Classifier& owner = model_.classifiers[body_index_];
    LineCursor cur(raw, line_no);
    if (owner.kind == ClassifierKind::Enumeration) {
      std::string_view literal = text;
      if (literal.ends_with(",") || literal.ends_with(";")) {
        literal = trim(literal.substr(0, literal.size() - 1));
      }
      if (!is_identifier(literal)) {
        cur.fail_at(column_of(raw, text), "expected an enumeration literal", text);
      }
      owner.literals.emplace_back(literal);
      return;
    }
    member(raw, text, cur, owner);
  }

  static std::string_view strip_modifiers(std::string_view s, std::string_view raw, const LineCursor& cur) {
    while (s.starts_with("{")) {
      const auto close = s.find('}');
      if (close == std::string_view::npos) {
        cur.fail_at(column_of(raw, s), "unterminated member modifier", s);
      }
      const std::string_view word = trim(s.substr(1, close - 1));
      if (word != "static" && word != "abstract" && word != "classifier" && word != "field" &&
          word != "method") {
        cur.fail_at(column_of(raw, s), "unsupported member modifier '{" + std::string(word) + "}'",
                    s.substr(0, close + 1));
      }
      s = trim(s.substr(close + 1));
    }
    return s;
  }

  void member(std::string_view raw, std::string_view text, LineCursor& cur, Classifier& owner) {
    std::string_view s = strip_modifiers(text, raw, cur);
    Visibility vis = Visibility::Unspecified;
    if (!s.empty()) {
      switch (s.front()) {
        case '+': vis = Visibility::Public; break;
        case '-': vis = Visibility::Private; break;
        case '#': vis = Visibility::Protected; break;
        case '~': vis = Visibility::Package; break;
        default: break;
      }
      if (vis != Visibility::Unspecified) {
        s = trim(s.substr(1));
      }
    }
    s = strip_modifiers(s, raw, cur);
    if (s.empty()) {
      cur.fail_at(column_of(raw, text), "expected a member name", text);
    }

    const auto open = find_top_level(s, '(');
    if (open != std::string_view::npos) {
      owner.methods.push_back(method(raw, s, open, vis, cur));
      return;
    }

    Attribute a;
    a.visibility = vis;
    const auto colon = s.find(':');
    if (colon != std::string_view::npos) {
      const std::string_view name = trim(s.substr(0, colon));
      const std::string_view type = trim(s.substr(colon + 1));
      if (!is_identifier(name)) {
        cur.fail_at(column_of(raw, s), "expected a single-word attribute name before ':'", s.substr(0, colon));
      }
      if (type.empty()) {
        cur.fail_at(column_of(raw, s) + static_cast<int>(colon), "missing type after ':'", s.substr(colon));
      }
      a.name = std::string(name);
      a.type_text = std::string(type);
    } else {
      const auto [type, name] = split_last_word(s);
      if (!is_identifier(name)) {
        cur.fail_at(column_of(raw, name), "expected a member name", name);
      }
      a.name = std::string(name);
      if (!type.empty()) {
        a.type_text = std::string(type);
      }
    }
    owner.attributes.push_back(std::move(a));
  }

  static Method method(std::string_view raw, std::string_view s, std::size_t open, Visibility vis,
                       const LineCursor& cur) {
    Method m;
    m.visibility = vis;

    int depth = 0;
    std::size_t close = std::string_view::npos;
    for (std::size_t i = open; i < s.size(); ++i) {
      if (s[i] == '(') {
        ++depth;
      } else if (s[i] == ')' && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close == std::string_view::npos) {
      cur.fail_at(column_of(raw, s) + static_cast<int>(open), "missing ')'", s.substr(open));
    }

    const auto [prefix_type, name] = split_last_word(s.substr(0, open));
    if (!is_identifier(name)) {
      cur.fail_at(column_of(raw, s), "expected a method name before '('", s.substr(0, open));
    }
    m.name = std::string(name);
    if (!prefix_type.empty()) {
      m.return_type_text = std::string(prefix_type);
    }

    const std::string_view params = trim(s.substr(open + 1, close - open - 1));
    if (!params.empty()) {
      for (std::string_view item : split_top_level(params, ',')) {
        const std::string_view p = trim(item);
        if (p.empty()) {
          cur.fail_at(column_of(raw, item), "empty parameter", params);
        }
        Parameter param;
        const auto colon = find_top_level(p, ':');
        if (colon != std::string_view::npos) {
          const std::string_view pname = trim(p.substr(0, colon));
          const std::string_view ptype = trim(p.substr(colon + 1));
          if (!is_identifier(pname)) {
            cur.fail_at(column_of(raw, p), "expected a parameter name before ':'", p);
          }
          if (ptype.empty()) {
            cur.fail_at(column_of(raw, p) + static_cast<int>(colon), "missing parameter type after ':'", p);
          }
          param.name = std::string(pname);
          param.type_text = std::string(ptype);
        } else {
          const auto [ptype, pname] = split_last_word(p);
          if (ptype.empty()) {
            param.type_text = std::string(pname);
          } else {
            if (!is_identifier(pname)) {
              cur.fail_at(column_of(raw, pname), "expected a parameter name", pname);
            }
            param.name = std::string(pname);
            param.type_text = std::string(ptype);
          }
        }
        m.parameters.push_back(std::move(param));
      }
    }

    const std::string_view after = trim(s.substr(close + 1));
    if (!after.empty()) {
      if (after.front() != ':') {
        cur.fail_at(column_of(raw, after), "unexpected text after ')'", after);
      }
      const std::string_view ret = trim(after.substr(1));
      if (ret.empty()) {
        cur.fail_at(column_of(raw, after), "missing return type after ':'", after);
      }
      if (m.return_type_text) {
        cur.fail_at(column_of(raw, after), "return type given both before the name and after ':'", after);
      }
      m.return_type_text = std::string(ret);
    }
    return m;
  }

  void relationship(std::string_view raw, int line_no) {
    LineCursor cur(raw, line_no);
    cur.skip_ws();
    auto left = cur.read_name();
    if (!left) {
      cur.fail("expected a declaration or a relationship");
    }

    std::optional<std::pair<std::string, int>> left_mult = cur.read_quoted();
    cur.skip_ws();
    const int arrow_col = cur.column();
    const auto arrow = scan_arrow(cur.rest());
    if (!arrow) {
      if (cur.peek() == '{') {
        cur.fail("expected a relationship arrow after '" + *left +
                 "'; to declare a class write 'class " + *left + " {'");
      }
      cur.fail("expected a relationship arrow after '" + *left + "'");
    }
    const std::string arrow_text(cur.rest().substr(0, arrow->length));
    cur.advance(arrow->length);
    const auto meaning = interpret(*arrow);
    if (!meaning) {
      cur.fail_at(arrow_col, "unsupported arrow '" + arrow_text + "'", arrow_text);
    }

    std::optional<std::pair<std::string, int>> right_mult = cur.read_quoted();
    cur.skip_ws();
    auto right = cur.read_name();
    if (!right && right_mult) {
      // `A -- "Pet Owner"`: the only quoted text is the name, not a multiplicity.
      if (fold_text(right_mult->first).empty()) {
        cur.fail_at(right_mult->second, "empty name", "\"" + right_mult->first + "\"");
      }
      right = std::move(right_mult->first);
      right_mult.reset();
    }
    if (!right) {
      cur.fail("expected a classifier name after '" + arrow_text + "'");
    }

    std::optional<std::string> label;
    Reading marker = Reading::None;
    if (cur.consume(':')) {
      std::string_view text = trim(cur.rest());
      auto is_marker = [](char c) { return c == '<' || c == '>'; };
      if (!text.empty() && is_marker(text.front()) && (text.size() == 1 || is_blank(text[1]))) {
        marker = text.front() == '>' ? Reading::LeftToRight : Reading::RightToLeft;
        text = trim(text.substr(1));
      } else if (!text.empty() && is_marker(text.back()) && (text.size() == 1 || is_blank(text[text.size() - 2]))) {
        marker = text.back() == '>' ? Reading::LeftToRight : Reading::RightToLeft;
        text = trim(text.substr(0, text.size() - 1));
      }
      if (!text.empty()) {
        label = std::string(text);
      }
    } else if (!cur.at_end()) {
      cur.fail("unexpected text after relationship");
    }

    for (const auto* m : {&left_mult, &right_mult}) {
      if (*m && !is_valid_multiplicity((*m)->first)) {
        cur.fail_at((*m)->second, "malformed multiplicity \"" + (*m)->first + "\"", "\"" + (*m)->first + "\"");
      }
    }

    Reading direction = meaning->direction;
    if (marker != Reading::None) {
      if (direction != Reading::None && direction != marker) {
        cur.fail_at(arrow_col, "label direction marker contradicts the arrow head", arrow_text);
      }
      direction = marker;
    }

    Relationship r;
    r.kind = meaning->kind;
    r.label = std::move(label);
    if (meaning->left_is_source) {
      r.source = *left;
      r.target = *right;
      r.source_multiplicity = left_mult ? std::optional(left_mult->first) : std::nullopt;
      r.target_multiplicity = right_mult ? std::optional(right_mult->first) : std::nullopt;
    } else {
      r.source = *right;
      r.target = *left;
      r.source_multiplicity = right_mult ? std::optional(right_mult->first) : std::nullopt;
      r.target_multiplicity = left_mult ? std::optional(left_mult->first) : std::nullopt;
    }
    const bool reads_toward_target = (direction == Reading::LeftToRight) == meaning->left_is_source;
    r.navigability = direction == Reading::None ? Navigability::None
                     : reads_toward_target      ? Navigability::SourceToTarget
                                                : Navigability::TargetToSource;

    if (r.kind == RelationshipKind::Generalization || r.kind == RelationshipKind::Realization) {
      if (left_mult || right_mult) {
        cur.fail_at(arrow_col, "multiplicities are not allowed on inheritance arrows", arrow_text);
      }
      if (r.navigability != Navigability::None) {
        cur.fail_at(arrow_col, "direction markers are not allowed on inheritance arrows", arrow_text);
      }
    }

    mentions_.push_back(*left);
    mentions_.push_back(*right);
    model_.relationships.push_back(std::move(r));
  }

  std::vector<std::string_view> lines_;
  UmlModel model_;
  std::vector<Diagnostic> diagnostics_;
  std::vector<std::string> mentions_;

  bool in_block_comment_ = false;
  int skip_depth_ = 0;

  bool body_open_ = false;
  std::size_t body_index_ = 0;
  int open_line_ = 0;
  int open_column_ = 0;
  std::string open_name_;
};

}  // namespace

ParseOutcome::ParseOutcome(std::vector<Diagnostic> diagnostics) : value_(std::move(diagnostics)) {}

std::string format_diagnostic(const Diagnostic& d) {
  std::string out = "line " + std::to_string(d.line) + ", column " + std::to_string(d.column) + ": " + d.message;
  if (!d.offending_text.empty()) {
    out += " (near '" + d.offending_text + "')";
  }
  return out;
}

ParseOutcome parse_plantuml(std::string_view source) { return Parser(source).run(); }

}  // namespace img2uml
