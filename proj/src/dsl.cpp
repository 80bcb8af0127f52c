#include "counterpoint/dsl.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

namespace counterpoint::dsl {

namespace {

enum class Tok { Name, String, LBrace, RBrace, LParen, RParen, Colon, Semicolon, Arrow, End, Invalid };

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
         c == '$' || static_cast<unsigned char>(c) >= 0x80;
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run(std::vector<Diagnostic>& diags) {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      SourcePos pos{line_, col_};
      if (i_ >= text_.size()) {
        out.push_back({Tok::End, "end of input", pos});
        return out;
      }
      char c = text_[i_];
      if (is_name_char(c)) {
        std::string s;
        while (i_ < text_.size() && is_name_char(text_[i_])) s += advance();
        out.push_back({Tok::Name, s, pos});
        continue;
      }
      if (c == '"') {
        advance();
        std::string s;
        bool closed = false;
        while (i_ < text_.size()) {
          char d = advance();
          if (d == '"') {
            closed = true;
            break;
          }
          if (d == '\n') break;
          s += d;
        }
        if (!closed) {
          diags.push_back({ErrorKind::SyntaxError, pos, "unterminated string"});
          out.push_back({Tok::Invalid, s, pos});
        } else {
          out.push_back({Tok::String, s, pos});
        }
        continue;
      }
      if (c == '-' && i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
        advance();
        advance();
        out.push_back({Tok::Arrow, "->", pos});
        continue;
      }
      advance();
      switch (c) {
        case '{': out.push_back({Tok::LBrace, "{", pos}); break;
        case '}': out.push_back({Tok::RBrace, "}", pos}); break;
        case '(': out.push_back({Tok::LParen, "(", pos}); break;
        case ')': out.push_back({Tok::RParen, ")", pos}); break;
        case ':': out.push_back({Tok::Colon, ":", pos}); break;
        case ';': out.push_back({Tok::Semicolon, ";", pos}); break;
        default: out.push_back({Tok::Invalid, std::string(1, c), pos}); break;
      }
    }
  }

 private:
  char advance() {
    char c = text_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#' || (c == '/' && i_ + 1 < text_.size() && text_[i_ + 1] == '/')) {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  const std::string& text_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

enum class StmtKind { Action, Counter, Done, Switch, Order, Block };

struct Stmt;

struct Case {
  std::string value;
  SourcePos pos;
  std::vector<Stmt> body;
};

struct Stmt {
  StmtKind kind;
  SourcePos pos;
  std::optional<std::string> label;
  std::string name;  // action/counter name, switch property, order source
  std::string target;  // order destination
  SourcePos target_pos;
  std::vector<Case> cases;
  std::vector<Stmt> body;
};

const std::set<std::string, std::less<>> kUnsupported = {
    "if", "else", "while", "for", "do", "loop", "goto", "return", "break", "continue",
    "fn", "func", "function", "def", "let", "var", "const", "int", "call",
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags) : toks_(std::move(tokens)), diags_(diags) {}

  std::vector<Stmt> program() {
    std::vector<Stmt> out;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::RBrace) {
        error(peek().pos, "unmatched '}'");
        next();
        continue;
      }
      if (auto s = statement()) out.push_back(std::move(*s));
    }
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  void error(SourcePos pos, std::string msg) { diags_.push_back({ErrorKind::SyntaxError, pos, std::move(msg)}); }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  // Skips to just past the next ';' (or to a '}' / end) after a syntax error.
  void recover() {
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::End || t.kind == Tok::RBrace) return;
      next();
      if (t.kind == Tok::Semicolon) return;
    }
  }

  bool expect(Tok kind, const char* what) {
    if (peek().kind == kind) {
      next();
      return true;
    }
    error(peek().pos, std::string("expected ") + what + ", found " + describe(peek()));
    recover();
    return false;
  }

  std::optional<std::string> name(const char* what) {
    if (peek().kind == Tok::Name || peek().kind == Tok::String) return next().text;
    error(peek().pos, std::string("expected ") + what + ", found " + describe(peek()));
    recover();
    return std::nullopt;
  }

  std::optional<Stmt> statement() {
    const Token& first = peek();
    std::optional<std::string> label;
    SourcePos label_pos = first.pos;
    if ((first.kind == Tok::Name || first.kind == Tok::String) && peek(1).kind == Tok::Colon &&
        !(first.kind == Tok::Name && first.text == "case")) {
      label = first.text;
      next();
      next();
    }

    const Token& t = peek();
    Stmt s;
    s.pos = label ? label_pos : t.pos;
    s.label = label;

    if (t.kind == Tok::LBrace) {
      if (label) {
        error(t.pos, "labels cannot be attached to a compound statement");
      }
      next();
      s.kind = StmtKind::Block;
      s.body = block_until_rbrace();
      return s;
    }
    if (t.kind != Tok::Name) {
      error(t.pos, "expected a statement, found " + describe(t));
      if (t.kind != Tok::RBrace && t.kind != Tok::End) next();
      recover();
      return std::nullopt;
    }
    if (kUnsupported.count(t.text)) {
      error(t.pos, "'" + t.text + "' is not supported: the language has no functions, loops, or variables");
      next();
      skip_construct();
      return std::nullopt;
    }
    if (t.text == "case") {
      error(t.pos, "'case' outside of a switch");
      next();
      recover();
      return std::nullopt;
    }
    if (t.text == "action" || t.text == "counter") {
      s.kind = t.text == "action" ? StmtKind::Action : StmtKind::Counter;
      next();
      auto n = name(s.kind == StmtKind::Action ? "an action name" : "a counter name");
      if (!n) return std::nullopt;
      s.name = *n;
      if (!expect(Tok::Semicolon, "';'")) return std::nullopt;
      return s;
    }
    if (t.text == "done") {
      s.kind = StmtKind::Done;
      next();
      if (!expect(Tok::Semicolon, "';'")) return std::nullopt;
      return s;
    }
    if (t.text == "order") {
      if (label) error(s.pos, "labels cannot be attached to an order statement");
      s.kind = StmtKind::Order;
      next();
      auto from = name("a label");
      if (!from) return std::nullopt;
      s.name = *from;
      if (!expect(Tok::Arrow, "'->'")) return std::nullopt;
      s.target_pos = peek().pos;
      auto to = name("a label");
      if (!to) return std::nullopt;
      s.target = *to;
      if (!expect(Tok::Semicolon, "';'")) return std::nullopt;
      return s;
    }
    if (t.text == "switch") {
      s.kind = StmtKind::Switch;
      next();
      if (!expect(Tok::LParen, "'('")) return std::nullopt;
      auto prop = name("a property name");
      if (!prop) return std::nullopt;
      s.name = *prop;
      if (!expect(Tok::RParen, "')'")) return std::nullopt;
      if (peek().kind != Tok::LBrace) {
        error(peek().pos, "expected '{' after switch, found " + describe(peek()));
        recover();
        return std::nullopt;
      }
      next();
      switch_body(s);
      return s;
    }
    error(t.pos, "unknown statement " + describe(t));
    next();
    recover();
    return std::nullopt;
  }

  // After an unsupported keyword, skip a balanced (...) and {...} construct or
  // up to the next ';'.
  void skip_construct() {
    int depth = 0;
    while (peek().kind != Tok::End) {
      const Token& t = next();
      if (t.kind == Tok::LBrace || t.kind == Tok::LParen) ++depth;
      if (t.kind == Tok::RBrace || t.kind == Tok::RParen) {
        if (--depth <= 0 && t.kind == Tok::RBrace) return;
      }
      if (t.kind == Tok::Semicolon && depth == 0) return;
    }
  }

  std::vector<Stmt> block_until_rbrace() {
    std::vector<Stmt> out;
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::End) {
        error(peek().pos, "expected '}', found end of input");
        return out;
      }
      if (auto s = statement()) out.push_back(std::move(*s));
    }
    next();
    return out;
  }

  void switch_body(Stmt& s) {
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::RBrace) {
        next();
        return;
      }
      if (t.kind == Tok::End) {
        error(t.pos, "expected '}', found end of input");
        return;
      }
      if (t.kind == Tok::Name && t.text == "case") {
        Case c;
        c.pos = t.pos;
        next();
        auto v = name("a case value");
        if (!v) continue;
        c.value = *v;
        if (!expect(Tok::Colon, "':'")) continue;
        while (!(peek().kind == Tok::Name && peek().text == "case") && peek().kind != Tok::RBrace &&
               peek().kind != Tok::End) {
          if (auto st = statement()) c.body.push_back(std::move(*st));
        }
        s.cases.push_back(std::move(c));
        continue;
      }
      error(t.pos, "expected 'case' or '}', found " + describe(t));
      next();
      recover();
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
};

std::vector<Stmt> parse_ast(const DslSource& src, std::vector<Diagnostic>& diags) {
  auto tokens = Lexer(src.text).run(diags);
  for (const auto& t : tokens) {
    if (t.kind == Tok::Invalid && t.text.size() == 1) {
      diags.push_back({ErrorKind::SyntaxError, t.pos, "unexpected character '" + t.text + "'"});
    }
  }
  std::vector<Token> clean;
  for (auto& t : tokens) {
    if (t.kind != Tok::Invalid) clean.push_back(std::move(t));
  }
  return Parser(std::move(clean), diags).program();
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.pos < b.pos; });
}

bool terminates(const std::vector<Stmt>& block);

bool terminates(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Done: return true;
    case StmtKind::Block: return terminates(s.body);
    case StmtKind::Switch:
      return !s.cases.empty() &&
             std::all_of(s.cases.begin(), s.cases.end(), [](const Case& c) { return terminates(c.body); });
    default: return false;
  }
}

bool terminates(const std::vector<Stmt>& block) {
  return std::any_of(block.begin(), block.end(), [](const Stmt& s) { return terminates(s); });
}

// Semantic checks that need no graph: unknown counters, labels, empty
// switches, duplicate case values, unreachable statements.
class Checker {
 public:
  Checker(const CounterNamespace* ns, std::vector<Diagnostic>& diags) : ns_(ns), diags_(diags) {}

  void run(const std::vector<Stmt>& program) {
    block(program);
    for (const auto& o : orders_) {
      if (!labels_.count(o->name)) {
        diags_.push_back({ErrorKind::UnknownLabel, o->pos, "order refers to unknown label '" + o->name + "'"});
      }
      if (!labels_.count(o->target)) {
        diags_.push_back({ErrorKind::UnknownLabel, o->target_pos, "order refers to unknown label '" + o->target + "'"});
      }
    }
  }

 private:
  void block(const std::vector<Stmt>& stmts) {
    bool ended = false;
    bool reported = false;
    for (const auto& s : stmts) {
      if (ended && !reported && s.kind != StmtKind::Order) {
        diags_.push_back({ErrorKind::UnreachableStatement, s.pos, "statement can never execute: every path before it ends in 'done'"});
        reported = true;
      }
      stmt(s);
      if (terminates(s)) ended = true;
    }
  }

  void stmt(const Stmt& s) {
    if (s.label) {
      if (!labels_.insert(*s.label).second) {
        diags_.push_back({ErrorKind::DuplicateLabel, s.pos, "label '" + *s.label + "' is already defined"});
      }
    }
    switch (s.kind) {
      case StmtKind::Counter:
        if (ns_ && !ns_->contains(s.name)) {
          diags_.push_back({ErrorKind::UnknownCounter, s.pos, "unknown counter '" + s.name + "'"});
        }
        break;
      case StmtKind::Switch: {
        if (s.cases.empty()) {
          diags_.push_back({ErrorKind::EmptySwitch, s.pos, "switch on '" + s.name + "' has no cases"});
        }
        std::set<std::string> values;
        for (const auto& c : s.cases) {
          if (!values.insert(c.value).second) {
            diags_.push_back({ErrorKind::SyntaxError, c.pos, "duplicate case '" + c.value + "' in switch on '" + s.name + "'"});
          }
          block(c.body);
        }
        break;
      }
      case StmtKind::Block: block(s.body); break;
      case StmtKind::Order: orders_.push_back(&s); break;
      default: break;
    }
  }

  const CounterNamespace* ns_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> labels_;
  std::vector<const Stmt*> orders_;
};

struct Exit {
  NodeId from;
  std::optional<std::string> value;
};

struct Fragment {
  NodeId entry;
  std::vector<Exit> exits;
};

class Compiler {
 public:
  explicit Compiler(MuDD::Builder& b) : b_(b) {}

  void program(const std::vector<Stmt>& stmts) {
    auto frag = block(stmts);
    if (!frag) {
      b_.set_entry(b_.add_done());
    } else {
      b_.set_entry(frag->entry);
      if (!frag->exits.empty()) connect(frag->exits, b_.add_done());
    }
    for (const auto* o : orders_) b_.add_happens_before(labels_.at(o->name), labels_.at(o->target));
  }

 private:
  void connect(const std::vector<Exit>& exits, NodeId to) {
    for (const auto& e : exits) b_.add_causality(e.from, to, e.value);
  }

  std::optional<Fragment> block(const std::vector<Stmt>& stmts) {
    std::optional<Fragment> acc;
    for (const auto& s : stmts) {
      auto f = stmt(s);
      if (!f) continue;
      if (!acc) {
        acc = std::move(f);
      } else {
        connect(acc->exits, f->entry);
        acc->exits = std::move(f->exits);
      }
    }
    return acc;
  }

  std::optional<Fragment> stmt(const Stmt& s) {
    std::optional<Fragment> out;
    switch (s.kind) {
      case StmtKind::Action: {
        auto n = b_.add_event(s.name, s.label);
        out = Fragment{n, {Exit{n, std::nullopt}}};
        break;
      }
      case StmtKind::Counter: {
        auto n = b_.add_counter(s.name, s.label);
        out = Fragment{n, {Exit{n, std::nullopt}}};
        break;
      }
      case StmtKind::Done: out = Fragment{b_.add_done(s.label), {}}; break;
      case StmtKind::Switch: {
        auto d = b_.add_decision(s.name, s.label);
        Fragment f{d, {}};
        for (const auto& c : s.cases) {
          auto body = block(c.body);
          if (body) {
            b_.add_causality(d, body->entry, c.value);
            f.exits.insert(f.exits.end(), body->exits.begin(), body->exits.end());
          } else {
            f.exits.push_back(Exit{d, c.value});
          }
        }
        out = std::move(f);
        break;
      }
      case StmtKind::Block: out = block(s.body); break;
      case StmtKind::Order: orders_.push_back(&s); break;
    }
    if (out && s.label) labels_[*s.label] = out->entry;
    return out;
  }

  MuDD::Builder& b_;
  std::map<std::string, NodeId> labels_;
  std::vector<const Stmt*> orders_;
};

void collect_counters(const std::vector<Stmt>& stmts, std::vector<std::string>& out) {
  for (const auto& s : stmts) {
    if (s.kind == StmtKind::Counter && std::find(out.begin(), out.end(), s.name) == out.end()) out.push_back(s.name);
    collect_counters(s.body, out);
    for (const auto& c : s.cases) collect_counters(c.body, out);
  }
}

std::string summary(const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return "no diagnostics";
  const auto& d = diags.front();
  std::string s = std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " + d.message;
  if (diags.size() > 1) s += " (and " + std::to_string(diags.size() - 1) + " more)";
  return s;
}

}  // namespace

DslError::DslError(std::string origin, std::vector<Diagnostic> diagnostics)
    : Error(diagnostics.empty() ? ErrorKind::SyntaxError : diagnostics.front().kind,
            origin + ":" + summary(diagnostics)),
      origin_(std::move(origin)),
      diagnostics_(std::move(diagnostics)) {}

DslSource load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return DslSource{ss.str(), path.string()};
}

MuDD parse(const DslSource& src, const CounterNamespace& ns) {
  std::vector<Diagnostic> diags;
  auto ast = parse_ast(src, diags);
  Checker(&ns, diags).run(ast);
  if (!diags.empty()) {
    sort_diagnostics(diags);
    throw DslError(src.origin, std::move(diags));
  }
  MuDD::Builder builder(ns);
  Compiler(builder).program(ast);
  return builder.build();
}

CounterNamespace infer_namespace(const DslSource& src) {
  std::vector<Diagnostic> diags;
  auto ast = parse_ast(src, diags);
  if (!diags.empty()) {
    sort_diagnostics(diags);
    throw DslError(src.origin, std::move(diags));
  }
  std::vector<std::string> names;
  collect_counters(ast, names);
  return CounterNamespace(std::move(names));
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics, const std::string& origin) {
  auto sorted = diagnostics;
  sort_diagnostics(sorted);
  std::string out;
  for (const auto& d : sorted) {
    out += origin + ":" + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " +
           std::string(to_string(d.kind)) + ": " + d.message + "\n";
  }
  return out;
}

namespace {

std::string quoted(const std::string& s) {
  bool plain = !s.empty() && std::all_of(s.begin(), s.end(), is_name_char);
  static const std::set<std::string> keywords = {"action", "counter", "done", "switch", "order", "case"};
  if (plain && !keywords.count(s) && !kUnsupported.count(s)) return s;
  return "\"" + s + "\"";
}

class Printer {
 public:
  explicit Printer(const MuDD& m) : m_(m), n_(m.nodes().size()) {
    compute_post_dominators();
    for (const auto& hb : m_.happens_before_edges()) {
      for (auto id : {hb.from, hb.to}) {
        if (!m_.node(id).label) synthetic_labels_[id.value] = "n" + std::to_string(id.value);
      }
    }
  }

  std::string run() {
    emit(m_.entry(), std::nullopt, 0);
    for (const auto& hb : m_.happens_before_edges()) {
      out_ << "order " << quoted(label_of(hb.from)) << " -> " << quoted(label_of(hb.to)) << ";\n";
    }
    return out_.str();
  }

 private:
  std::string label_of(NodeId id) const {
    if (m_.node(id).label) return *m_.node(id).label;
    return synthetic_labels_.at(id.value);
  }

  // Post-dominator sets over the DAG with all done nodes feeding one virtual
  // exit. Sets along a chain are nested, so the immediate post-dominator is
  // the strict post-dominator with the largest set.
  void compute_post_dominators() {
    std::vector<std::size_t> order;
    std::vector<int> state(n_, 0);
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t root = 0; root < n_; ++root) {
      if (state[root]) continue;
      stack.push_back({root, 0});
      state[root] = 1;
      while (!stack.empty()) {
        auto& [v, k] = stack.back();
        const auto& edges = m_.out_edges(NodeId{static_cast<std::uint32_t>(v)});
        if (k < edges.size()) {
          auto t = m_.causality_edges()[edges[k++]].to.value;
          if (!state[t]) {
            state[t] = 1;
            stack.push_back({t, 0});
          }
        } else {
          order.push_back(v);
          stack.pop_back();
        }
      }
    }
    pdom_.assign(n_, {});
    for (auto v : order) {  // successors first
      const auto& edges = m_.out_edges(NodeId{static_cast<std::uint32_t>(v)});
      std::vector<bool> set(n_, false);
      if (!edges.empty()) {
        set = pdom_[m_.causality_edges()[edges.front()].to.value];
        for (auto e : edges) {
          const auto& other = pdom_[m_.causality_edges()[e].to.value];
          for (std::size_t i = 0; i < n_; ++i) set[i] = set[i] && other[i];
        }
      }
      set[v] = true;
      pdom_[v] = std::move(set);
    }
    ipdom_.assign(n_, std::nullopt);
    for (std::size_t v = 0; v < n_; ++v) {
      std::size_t best_size = 0;
      for (std::size_t u = 0; u < n_; ++u) {
        if (u == v || !pdom_[v][u]) continue;
        auto size = static_cast<std::size_t>(std::count(pdom_[u].begin(), pdom_[u].end(), true));
        if (size > best_size) {
          best_size = size;
          ipdom_[v] = NodeId{static_cast<std::uint32_t>(u)};
        }
      }
    }
  }

  void indent(int depth) {
    for (int i = 0; i < depth; ++i) out_ << "  ";
  }

  void prefix(NodeId id, int depth) {
    indent(depth);
    auto it = synthetic_labels_.find(id.value);
    std::optional<std::string> label = m_.node(id).label;
    if (!label && it != synthetic_labels_.end()) label = it->second;
    if (label && printed_labels_.insert(*label).second) out_ << quoted(*label) << ": ";
  }

  void emit(std::optional<NodeId> cur, std::optional<NodeId> stop, int depth) {
    while (cur && cur != stop) {
      const NodeId id = *cur;
      const Node& node = m_.node(id);
      prefix(id, depth);
      switch (node.kind) {
        case NodeKind::Done:
          out_ << "done;\n";
          return;
        case NodeKind::Event:
        case NodeKind::Counter:
          out_ << (node.kind == NodeKind::Event ? "action " : "counter ") << quoted(node.name) << ";\n";
          cur = m_.causality_edges()[m_.out_edges(id).front()].to;
          break;
        case NodeKind::Decision: {
          out_ << "switch (" << quoted(node.name) << ") {\n";
          auto join = ipdom_[id.value];
          for (auto e : m_.out_edges(id)) {
            const auto& edge = m_.causality_edges()[e];
            indent(depth + 1);
            out_ << "case " << quoted(*edge.value) << ":\n";
            emit(edge.to, join, depth + 2);
          }
          indent(depth);
          out_ << "}\n";
          cur = join;
          break;
        }
      }
    }
  }

  const MuDD& m_;
  std::size_t n_;
  std::vector<std::vector<bool>> pdom_;
  std::vector<std::optional<NodeId>> ipdom_;
  std::map<std::uint32_t, std::string> synthetic_labels_;
  std::set<std::string> printed_labels_;
  std::ostringstream out_;
};

}  // namespace

std::string to_source(const MuDD& model) { return Printer(model).run(); }

}  // namespace counterpoint::dsl
