#include "bpnet/netio.hpp"

#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <sstream>

#include "bpnet/errors.hpp"

namespace bpnet::io {

namespace {

enum class TokenKind { ident, number, punct, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string_view text;
  double value = 0.0;
  SourceSpan span;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space_and_comments();
    current_.span = {line_, column_};
    if (pos_ >= text_.size()) {
      current_ = Token{TokenKind::end, "", 0.0, current_.span};
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        bump();
      }
      current_.kind = TokenKind::ident;
      current_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      lex_number();
      return;
    }
    if (c == '{' || c == '}' || c == '(' || c == ')' || c == '|' || c == '=') {
      current_.kind = TokenKind::punct;
      current_.text = text_.substr(pos_, 1);
      bump();
      return;
    }
    throw ParseError(current_.span, std::string("unexpected character '") + c + "'");
  }

  void lex_number() {
    std::size_t start = pos_;
    if (text_[pos_] == '+' || text_[pos_] == '-') bump();
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) bump();
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      bump();
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      bump();
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) bump();
      digits();
    }
    std::string_view body = text_.substr(start, pos_ - start);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc{} || ptr != body.data() + body.size()) {
      throw ParseError(current_.span, "malformed number: '" + std::string(body) + "'");
    }
    current_.kind = TokenKind::number;
    current_.text = body;
    current_.value = value;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  Token current_;
};

[[noreturn]] void fail(const Token& at, const std::string& message) {
  throw ParseError(at.span, message);
}

Token expect_ident(Lexer& lex, const char* what) {
  Token t = lex.take();
  if (t.kind != TokenKind::ident) {
    fail(t, std::string("expected ") + what + ", found '" + std::string(t.text) + "'");
  }
  return t;
}

void expect_punct(Lexer& lex, char c) {
  Token t = lex.take();
  if (t.kind != TokenKind::punct || t.text[0] != c) {
    fail(t, std::string("expected '") + c + "', found '" + std::string(t.text) + "'");
  }
}

bool at_punct(const Lexer& lex, char c) {
  return lex.peek().kind == TokenKind::punct && lex.peek().text[0] == c;
}

std::vector<double> parse_row(Lexer& lex) {
  expect_punct(lex, '(');
  std::vector<double> row;
  while (!at_punct(lex, ')')) {
    Token t = lex.take();
    if (t.kind != TokenKind::number) {
      fail(t, "expected real or ')', found '" + std::string(t.text) + "'");
    }
    row.push_back(t.value);
  }
  lex.take();  // ')'
  return row;
}

}  // namespace

Network parse_network(std::string_view text) {
  Lexer lex(text);
  Network net;
  std::map<std::string, SourceSpan> node_spans;
  std::map<std::string, bool> has_table;

  // Nodes must be declared before they are referenced; the canonical
  // serialization puts all node lines first.
  auto resolve = [&](const Token& id) {
    auto n = net.find(id.text);
    if (!n) fail(id, "unknown node: " + std::string(id.text));
    return *n;
  };

  auto attach_table = [&](const Token& child, std::vector<std::string> parents,
                          std::vector<std::vector<double>> rows,
                          const std::vector<SourceSpan>& row_spans) {
    std::string id(child.text);
    if (has_table[id]) fail(child, "duplicate table for node: " + id);
    has_table[id] = true;

    std::vector<std::size_t> cards;
    cards.reserve(parents.size());
    for (const auto& p : parents) cards.push_back(net.cardinality(net.index_of(p)));
    std::size_t expected_rows = radix_count(cards);
    if (rows.size() != expected_rows) {
      fail(child, "expected " + std::to_string(expected_rows) + " rows, found " +
                      std::to_string(rows.size()));
    }
    std::size_t child_card = net.cardinality(net.index_of(id));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != child_card) {
        throw ParseError(row_spans[r], "expected " + std::to_string(child_card) +
                                           " entries, found " +
                                           std::to_string(rows[r].size()));
      }
    }
    net.set_cpt(id, std::move(parents), std::move(rows));
  };

  while (lex.peek().kind != TokenKind::end) {
    Token keyword = expect_ident(lex, "'node', 'prior' or 'cpt'");
    if (keyword.text == "node") {
      Token id = expect_ident(lex, "node id");
      if (net.find(id.text)) {
        fail(id, "duplicate node: " + std::string(id.text));
      }
      expect_punct(lex, '{');
      std::vector<std::string> states;
      while (!at_punct(lex, '}')) {
        Token s = expect_ident(lex, "state label or '}'");
        for (const auto& existing : states) {
          if (existing == s.text) fail(s, "duplicate state label: " + std::string(s.text));
        }
        states.emplace_back(s.text);
      }
      lex.take();  // '}'
      if (states.size() < 2) {
        fail(id, "node " + std::string(id.text) + " needs at least 2 states");
      }
      node_spans[std::string(id.text)] = id.span;
      has_table[std::string(id.text)] = false;
      net.add_node(std::string(id.text), std::move(states));
    } else if (keyword.text == "prior") {
      Token id = expect_ident(lex, "node id");
      resolve(id);
      std::vector<SourceSpan> spans{lex.peek().span};
      std::vector<std::vector<double>> rows;
      rows.push_back(parse_row(lex));
      attach_table(id, {}, std::move(rows), spans);
    } else if (keyword.text == "cpt") {
      Token id = expect_ident(lex, "node id");
      resolve(id);
      expect_punct(lex, '|');
      std::vector<std::string> parents;
      while (!at_punct(lex, '{')) {
        Token p = expect_ident(lex, "parent id or '{'");
        resolve(p);
        parents.emplace_back(p.text);
      }
      lex.take();  // '{'
      std::vector<std::vector<double>> rows;
      std::vector<SourceSpan> spans;
      while (!at_punct(lex, '}')) {
        spans.push_back(lex.peek().span);
        rows.push_back(parse_row(lex));
      }
      lex.take();  // '}'
      attach_table(id, std::move(parents), std::move(rows), spans);
    } else {
      fail(keyword, "expected 'node', 'prior' or 'cpt', found '" + std::string(keyword.text) + "'");
    }
  }

  for (const auto& node : net.nodes()) {
    if (!has_table[node.id]) {
      throw ParseError(node_spans[node.id], "no prior or cpt for node: " + node.id);
    }
  }
  return net;
}

Network parse_network(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  return parse_network(std::string_view(text));
}

namespace {

void append_real(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, ptr);
}

void append_row(std::string& out, const std::vector<double>& row) {
  out += "(";
  for (double v : row) {
    out += ' ';
    append_real(out, v);
  }
  out += " )";
}

}  // namespace

std::string serialize_network(const Network& net) {
  std::string out;
  for (const auto& node : net.nodes()) {
    out += "node " + node.id + " {";
    for (const auto& s : node.states) out += " " + s;
    out += " }\n";
  }
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const Cpt& cpt = net.cpt(i);
    if (cpt.parents.empty()) {
      out += "prior " + net.node(i).id + " ";
      append_row(out, cpt.rows[0]);
      out += "\n";
    } else {
      out += "cpt " + net.node(i).id + " |";
      for (const auto& p : cpt.parents) out += " " + p;
      out += " {\n";
      for (const auto& row : cpt.rows) {
        out += "  ";
        append_row(out, row);
        out += "\n";
      }
      out += "}\n";
    }
  }
  return out;
}

Evidence parse_evidence(std::string_view text, const Network& net) {
  Lexer lex(text);
  Evidence ev;
  while (lex.peek().kind != TokenKind::end) {
    Token id = expect_ident(lex, "node id");
    auto node = net.find(id.text);
    if (!node) fail(id, "unknown node: " + std::string(id.text));
    expect_punct(lex, '=');
    Token state = expect_ident(lex, "state label");
    if (!net.state_index(*node, state.text)) {
      fail(state, "unknown state '" + std::string(state.text) + "' for node " +
                      std::string(id.text));
    }
    if (ev.observations.count(std::string(id.text)) != 0) {
      fail(id, "duplicate observation for node: " + std::string(id.text));
    }
    ev.observations.emplace(std::string(id.text), std::string(state.text));
  }
  return ev;
}

Evidence parse_evidence(std::istream& in, const Network& net) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  return parse_evidence(std::string_view(text), net);
}

}  // namespace bpnet::io
