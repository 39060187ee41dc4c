#include "predplan/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <utility>

namespace predplan {

std::string_view cmp_symbol(Cmp cmp) {
  switch (cmp) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
  }
  return "?";
}

Cmp negate_cmp(Cmp cmp) {
  switch (cmp) {
    case Cmp::Lt: return Cmp::Ge;
    case Cmp::Le: return Cmp::Gt;
    case Cmp::Gt: return Cmp::Le;
    case Cmp::Ge: return Cmp::Lt;
    case Cmp::Eq: return Cmp::Ne;
    case Cmp::Ne: return Cmp::Eq;
  }
  throw NormalizeError("comparator has no complement");
}

std::string literal_to_string(const Literal& value) {
  if (const double* num = std::get_if<double>(&value)) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%g", *num);
    return buffer;
  }
  return "'" + std::get<std::string>(value) + "'";
}

std::string Atom::text() const {
  return column + " " + std::string(cmp_symbol(cmp)) + " " +
         literal_to_string(value);
}

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at offset " + std::to_string(position)),
      position(position) {}

NormalizeError::NormalizeError(const std::string& message)
    : std::runtime_error(message) {}

namespace {

enum class TokKind {
  Ident,
  Number,
  String,
  LParen,
  RParen,
  KwAnd,
  KwOr,
  KwNot,
  Compare,
  End,
};

struct Token {
  TokKind kind = TokKind::End;
  std::size_t position = 0;
  std::string text;
  double number = 0.0;
  Cmp cmp = Cmp::Lt;
};

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token token = current_;
    advance();
    return token;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    current_ = Token{};
    current_.position = pos_;
    if (pos_ >= text_.size()) {
      current_.kind = TokKind::End;
      return;
    }
    const char c = text_[pos_];
    if (c == '(') {
      current_.kind = TokKind::LParen;
      ++pos_;
      return;
    }
    if (c == ')') {
      current_.kind = TokKind::RParen;
      ++pos_;
      return;
    }
    if (c == '\'') {
      lex_string();
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
        (c == '-' && pos_ + 1 < text_.size() &&
         (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          text_[pos_ + 1] == '.'))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      lex_word();
      return;
    }
    lex_comparator();
  }

  void lex_string() {
    const std::size_t start = pos_;
    ++pos_;
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != '\'') {
      value.push_back(text_[pos_]);
      ++pos_;
    }
    if (pos_ >= text_.size()) {
      throw ParseError("unterminated string literal", start);
    }
    ++pos_;
    current_.kind = TokKind::String;
    current_.text = std::move(value);
  }

  void lex_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{}) {
      throw ParseError("malformed numeric literal", pos_);
    }
    current_.kind = TokKind::Number;
    current_.number = value;
    pos_ += static_cast<std::size_t>(ptr - begin);
  }

  void lex_word() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    std::string_view word = text_.substr(start, pos_ - start);
    if (iequals(word, "and")) {
      current_.kind = TokKind::KwAnd;
    } else if (iequals(word, "or")) {
      current_.kind = TokKind::KwOr;
    } else if (iequals(word, "not")) {
      current_.kind = TokKind::KwNot;
    } else {
      current_.kind = TokKind::Ident;
      current_.text = std::string(word);
    }
  }

  void lex_comparator() {
    const std::size_t start = pos_;
    const char c = text_[pos_];
    auto two = [&](char second) {
      return pos_ + 1 < text_.size() && text_[pos_ + 1] == second;
    };
    current_.kind = TokKind::Compare;
    if (c == '<') {
      current_.cmp = two('=') ? (pos_ += 2, Cmp::Le) : (pos_ += 1, Cmp::Lt);
    } else if (c == '>') {
      current_.cmp = two('=') ? (pos_ += 2, Cmp::Ge) : (pos_ += 1, Cmp::Gt);
    } else if (c == '=') {
      pos_ += 1;
      current_.cmp = Cmp::Eq;
    } else if (c == '!' && two('=')) {
      pos_ += 2;
      current_.cmp = Cmp::Ne;
    } else {
      throw ParseError("unexpected character '" + std::string(1, c) + "'",
                       start);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) {}

  ParseNodePtr run() {
    ParseNodePtr node = parse_or();
    const Token& token = lexer_.peek();
    if (token.kind != TokKind::End) {
      throw ParseError("trailing input after expression", token.position);
    }
    return node;
  }

 private:
  ParseNodePtr parse_or() {
    ParseNodePtr left = parse_and();
    if (lexer_.peek().kind != TokKind::KwOr) return left;
    auto node = std::make_unique<ParseNode>();
    node->kind = ParseNode::Kind::Or;
    node->children.push_back(std::move(left));
    while (lexer_.peek().kind == TokKind::KwOr) {
      lexer_.take();
      node->children.push_back(parse_and());
    }
    return node;
  }

  ParseNodePtr parse_and() {
    ParseNodePtr left = parse_unary();
    if (lexer_.peek().kind != TokKind::KwAnd) return left;
    auto node = std::make_unique<ParseNode>();
    node->kind = ParseNode::Kind::And;
    node->children.push_back(std::move(left));
    while (lexer_.peek().kind == TokKind::KwAnd) {
      lexer_.take();
      node->children.push_back(parse_unary());
    }
    return node;
  }

  ParseNodePtr parse_unary() {
    const Token& token = lexer_.peek();
    if (token.kind == TokKind::KwNot) {
      lexer_.take();
      auto node = std::make_unique<ParseNode>();
      node->kind = ParseNode::Kind::Not;
      node->children.push_back(parse_unary());
      return node;
    }
    if (token.kind == TokKind::LParen) {
      lexer_.take();
      ParseNodePtr inner = parse_or();
      const Token& close = lexer_.peek();
      if (close.kind != TokKind::RParen) {
        throw ParseError("expected ')'", close.position);
      }
      lexer_.take();
      return inner;
    }
    return parse_atom();
  }

  ParseNodePtr parse_atom() {
    Token ident = lexer_.take();
    if (ident.kind != TokKind::Ident) {
      throw ParseError("expected column identifier", ident.position);
    }
    Token cmp = lexer_.take();
    if (cmp.kind != TokKind::Compare) {
      throw ParseError("expected comparator", cmp.position);
    }
    Token literal = lexer_.take();
    auto node = std::make_unique<ParseNode>();
    node->kind = ParseNode::Kind::Leaf;
    node->column = std::move(ident.text);
    node->cmp = cmp.cmp;
    if (literal.kind == TokKind::Number) {
      node->value = literal.number;
    } else if (literal.kind == TokKind::String) {
      node->value = std::move(literal.text);
    } else {
      throw ParseError("expected literal", literal.position);
    }
    return node;
  }

  Lexer lexer_;
};

// NOT-free copy of the parse tree, with De Morgan applied on the way down.
ParseNodePtr push_not(const ParseNode& node, bool negated) {
  switch (node.kind) {
    case ParseNode::Kind::Not:
      return push_not(*node.children[0], !negated);
    case ParseNode::Kind::Leaf: {
      auto leaf = std::make_unique<ParseNode>();
      leaf->kind = ParseNode::Kind::Leaf;
      leaf->column = node.column;
      leaf->cmp = negated ? negate_cmp(node.cmp) : node.cmp;
      leaf->value = node.value;
      return leaf;
    }
    case ParseNode::Kind::And:
    case ParseNode::Kind::Or: {
      const bool is_and = (node.kind == ParseNode::Kind::And) != negated;
      auto out = std::make_unique<ParseNode>();
      out->kind = is_and ? ParseNode::Kind::And : ParseNode::Kind::Or;
      for (const auto& child : node.children) {
        out->children.push_back(push_not(*child, negated));
      }
      return out;
    }
  }
  throw NormalizeError("unreachable parse node kind");
}

// Merge same-kind children into their parent and drop single-child wrappers.
ParseNodePtr flatten(ParseNodePtr node) {
  if (node->kind == ParseNode::Kind::Leaf) return node;
  std::vector<ParseNodePtr> merged;
  for (auto& child : node->children) {
    ParseNodePtr flat = flatten(std::move(child));
    if (flat->kind == node->kind) {
      for (auto& grand : flat->children) {
        merged.push_back(std::move(grand));
      }
    } else {
      merged.push_back(std::move(flat));
    }
  }
  if (merged.size() == 1) return std::move(merged[0]);
  node->children = std::move(merged);
  return node;
}

}  // namespace

ParseNodePtr parse(std::string_view text) { return Parser(text).run(); }

PredicateTree normalize(const ParseNode& root) {
  ParseNodePtr clean = flatten(push_not(root, false));

  PredicateTree tree;
  std::map<std::string, int> seen;  // atom text -> atom id

  // Depth-first copy; leaves receive ids in left-to-right order.
  auto build = [&](auto&& self, const ParseNode& node, int parent,
                   int level) -> int {
    const int index = static_cast<int>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    tree.nodes_[index].parent = parent;
    tree.nodes_[index].level = level;
    if (node.kind == ParseNode::Kind::Leaf) {
      Atom atom;
      atom.id = static_cast<int>(tree.atoms_.size()) + 1;
      atom.column = node.column;
      atom.cmp = node.cmp;
      atom.value = node.value;
      auto [it, inserted] = seen.emplace(atom.text(), atom.id);
      if (!inserted) {
        throw NormalizeError("duplicate atom '" + atom.text() + "'");
      }
      tree.nodes_[index].kind = NodeKind::Leaf;
      tree.nodes_[index].atom = atom.id;
      tree.nodes_[index].atom_lo = atom.id;
      tree.nodes_[index].atom_hi = atom.id;
      tree.atoms_.push_back(std::move(atom));
      return index;
    }
    tree.nodes_[index].kind =
        node.kind == ParseNode::Kind::And ? NodeKind::And : NodeKind::Or;
    for (const auto& child : node.children) {
      const int child_index = self(self, *child, index, level + 1);
      tree.nodes_[index].children.push_back(child_index);
    }
    tree.nodes_[index].atom_lo =
        tree.nodes_[tree.nodes_[index].children.front()].atom_lo;
    tree.nodes_[index].atom_hi =
        tree.nodes_[tree.nodes_[index].children.back()].atom_hi;
    return index;
  };
  build(build, *clean, -1, 1);

  tree.depth_ = 1;
  for (const auto& node : tree.nodes_) {
    if (node.kind != NodeKind::Leaf) {
      tree.depth_ = std::max(tree.depth_, node.level);
    }
  }

  tree.lineage_.resize(tree.atoms_.size());
  for (int index = 0; index < static_cast<int>(tree.nodes_.size()); ++index) {
    const auto& node = tree.nodes_[index];
    if (node.kind != NodeKind::Leaf) continue;
    std::vector<int> path;
    for (int cursor = index; cursor != -1;
         cursor = tree.nodes_[cursor].parent) {
      path.push_back(cursor);
    }
    tree.lineage_[node.atom - 1].assign(path.rbegin(), path.rend());
  }
  return tree;
}

PredicateTree compile(std::string_view text) {
  ParseNodePtr raw = parse(text);
  return normalize(*raw);
}

std::string PredicateTree::text() const {
  auto render = [&](auto&& self, const Node& node) -> std::string {
    if (node.kind == NodeKind::Leaf) return atom(node.atom).text();
    const std::string_view joiner =
        node.kind == NodeKind::And ? " AND " : " OR ";
    std::string out;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) out += joiner;
      const Node& child = nodes_[node.children[i]];
      if (child.kind == NodeKind::Leaf) {
        out += self(self, child);
      } else {
        out += "(" + self(self, child) + ")";
      }
    }
    return out;
  };
  return render(render, nodes_[0]);
}

}  // namespace predplan
