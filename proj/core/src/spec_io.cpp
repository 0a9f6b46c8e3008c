#include "flowobs/spec_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "flowobs/errors.hpp"

namespace flowobs {
namespace {

enum class Tok { kIdent, kNumber, kLBrace, kRBrace, kComma, kColon, kArrow, kEnd };

struct Token {
  Tok kind;
  std::string text;
  std::size_t column;  // 1-based
};

std::string describe(const Token& t) {
  return t.kind == Tok::kEnd ? "end of line" : "'" + t.text + "'";
}

bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_ident_body(char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9') || c == '.' || c == '\'';
}

std::vector<Token> lex_line(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const std::size_t col = i + 1;
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (static_cast<unsigned char>(c) >= 0x80) {
      throw SyntaxError(line_no, col,
                        "non-ASCII character (identifiers are ASCII only)");
    }
    switch (c) {
      case '{': out.push_back({Tok::kLBrace, "{", col}); ++i; continue;
      case '}': out.push_back({Tok::kRBrace, "}", col}); ++i; continue;
      case ',': out.push_back({Tok::kComma, ",", col}); ++i; continue;
      case ':': out.push_back({Tok::kColon, ":", col}); ++i; continue;
      case '-':
        if (i + 1 < line.size() && line[i + 1] == '>') {
          out.push_back({Tok::kArrow, "->", col});
          i += 2;
          continue;
        }
        break;
      default: break;
    }
    if (is_ident_body(c) && c != '.' && c != '\'') {
      std::size_t j = i;
      while (j < line.size() && is_ident_body(line[j])) ++j;
      std::string text(line.substr(i, j - i));
      const bool numeric =
          std::all_of(text.begin(), text.end(),
                      [](char ch) { return ch >= '0' && ch <= '9'; });
      if (!numeric && !is_ident_start(text.front())) {
        throw SyntaxError(line_no, col,
                          "identifier '" + text + "' must start with a letter");
      }
      out.push_back({numeric ? Tok::kNumber : Tok::kIdent, std::move(text), col});
      i = j;
      continue;
    }
    throw SyntaxError(line_no, col,
                      std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::kEnd, "", line.size() + 1});
  return out;
}

struct Cursor {
  const std::vector<Token>& toks;
  std::size_t line;
  std::size_t pos = 0;

  const Token& peek() const { return toks[pos]; }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(line, peek().column,
                      "expected " + expected + ", found " + describe(peek()));
  }

  const Token& expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail(what);
    return toks[pos++];
  }

  std::string ident(const std::string& what) {
    return expect(Tok::kIdent, what).text;
  }

  void keyword(const std::string& kw) {
    if (peek().kind != Tok::kIdent || peek().text != kw) fail("'" + kw + "'");
    ++pos;
  }

  bool at_keyword(const std::string& kw) const {
    return peek().kind == Tok::kIdent && peek().text == kw;
  }

  void end() {
    if (peek().kind != Tok::kEnd) fail("end of line");
  }

  // {a,b,c}
  std::vector<std::string> id_list(const std::string& what) {
    expect(Tok::kLBrace, "'{'");
    std::vector<std::string> out;
    out.push_back(ident(what));
    while (peek().kind == Tok::kComma) {
      ++pos;
      out.push_back(ident(what));
    }
    expect(Tok::kRBrace, "'}'");
    return out;
  }
};

struct RawTransition {
  std::string id;
  std::vector<std::string> pre;
  std::vector<std::string> post;
  std::string src, dest, cmd;
  std::string link;
  std::size_t line;
};

struct RawFlow {
  std::string id;
  std::size_t line;
  std::vector<std::string> places;
  std::set<std::string> initial;
  std::set<std::string> end;
  std::vector<RawTransition> transitions;
};

struct RawLink {
  std::string id, src, dest;
  std::uint32_t channel;
  std::size_t line;
};

struct RawInitiator {
  std::string component;
  std::vector<std::string> flows;
  std::size_t line;
};

struct RawDocument {
  std::string name;
  std::vector<std::pair<std::string, std::size_t>> components;
  std::vector<RawLink> links;
  std::vector<RawFlow> flows;
  std::vector<RawInitiator> initiators;
};

RawDocument parse_raw(std::string_view text) {
  RawDocument doc;
  bool have_header = false;
  RawFlow* current = nullptr;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    const std::string_view line = text.substr(start, stop - start);
    start = stop + 1;
    ++line_no;

    const auto toks = lex_line(line, line_no);
    if (toks.front().kind == Tok::kEnd) continue;
    Cursor cur{toks, line_no};

    if (!have_header) {
      if (!cur.at_keyword("system")) {
        throw SyntaxError(line_no, toks.front().column,
                          "expected 'system' header");
      }
      ++cur.pos;
      doc.name = cur.ident("system name");
      cur.end();
      have_header = true;
      continue;
    }

    const Token& head = cur.peek();
    if (head.kind != Tok::kIdent) cur.fail("a directive");
    const std::string directive = head.text;
    ++cur.pos;

    if (directive == "system") {
      throw SyntaxError(line_no, head.column, "duplicate 'system' header");
    } else if (directive == "component") {
      doc.components.emplace_back(cur.ident("component id"), line_no);
      while (cur.peek().kind == Tok::kIdent) {
        doc.components.emplace_back(cur.ident("component id"), line_no);
      }
      cur.end();
      current = nullptr;
    } else if (directive == "link") {
      RawLink l;
      l.line = line_no;
      l.id = cur.ident("link id");
      l.src = cur.ident("source component");
      cur.expect(Tok::kArrow, "'->'");
      l.dest = cur.ident("destination component");
      l.channel = 0;
      if (cur.at_keyword("channel")) {
        ++cur.pos;
        const Token& n = cur.expect(Tok::kNumber, "channel number");
        try {
          const unsigned long v = std::stoul(n.text);
          if (v > 0xffffffffUL) throw std::out_of_range("channel");
          l.channel = static_cast<std::uint32_t>(v);
        } catch (const std::exception&) {
          throw SyntaxError(line_no, n.column, "channel number out of range");
        }
      }
      cur.end();
      doc.links.push_back(std::move(l));
      current = nullptr;
    } else if (directive == "flow") {
      doc.flows.push_back(RawFlow{cur.ident("flow id"), line_no, {}, {}, {}, {}});
      cur.end();
      current = &doc.flows.back();
    } else if (directive == "place") {
      if (current == nullptr) {
        throw SyntaxError(line_no, head.column, "'place' outside a flow block");
      }
      do {
        const Token& id = cur.expect(Tok::kIdent, "place id");
        if (id.text == "initial" || id.text == "end") cur.fail("place id");
        current->places.push_back(id.text);
        if (cur.at_keyword("initial")) {
          ++cur.pos;
          current->initial.insert(id.text);
        } else if (cur.at_keyword("end")) {
          ++cur.pos;
          current->end.insert(id.text);
        }
      } while (cur.peek().kind == Tok::kIdent);
      cur.end();
    } else if (directive == "transition") {
      if (current == nullptr) {
        throw SyntaxError(line_no, head.column,
                          "'transition' outside a flow block");
      }
      RawTransition t;
      t.line = line_no;
      t.id = cur.ident("transition id");
      cur.keyword("pre");
      t.pre = cur.id_list("place id");
      cur.keyword("post");
      t.post = cur.id_list("place id");
      cur.keyword("event");
      t.src = cur.ident("event source");
      cur.expect(Tok::kColon, "':'");
      t.dest = cur.ident("event destination");
      cur.expect(Tok::kColon, "':'");
      t.cmd = cur.ident("event command");
      cur.keyword("on");
      t.link = cur.ident("link id");
      cur.end();
      current->transitions.push_back(std::move(t));
    } else if (directive == "initiator") {
      RawInitiator i;
      i.line = line_no;
      i.component = cur.ident("component id");
      cur.keyword("flows");
      i.flows = cur.id_list("flow id");
      cur.end();
      doc.initiators.push_back(std::move(i));
      current = nullptr;
    } else {
      throw SyntaxError(line_no, head.column,
                        "unknown directive '" + directive + "'");
    }
  }
  if (!have_header) throw SyntaxError(1, 1, "expected 'system' header");
  return doc;
}

std::string at_line(std::size_t line) {
  return " (line " + std::to_string(line) + ")";
}

SystemSpec build(const RawDocument& doc) {
  SystemSpec spec;
  spec.name = SystemName(doc.name);

  for (const auto& [name, line] : doc.components) {
    if (!spec.topology.components.insert(ComponentId(name)).second) {
      throw SemanticError(name, "component '" + name + "' declared twice" +
                                    at_line(line));
    }
  }
  auto require_component = [&](const std::string& name, std::size_t line) {
    if (!spec.topology.components.contains(ComponentId(name))) {
      throw SemanticError(name, "unknown component '" + name + "'" +
                                    at_line(line));
    }
  };

  std::set<std::tuple<std::string, std::string, std::uint32_t>> endpoints;
  for (const auto& l : doc.links) {
    require_component(l.src, l.line);
    require_component(l.dest, l.line);
    if (l.src == l.dest) {
      throw SemanticError(l.id, "link '" + l.id + "' connects '" + l.src +
                                    "' to itself" + at_line(l.line));
    }
    if (spec.topology.find_link(LinkId(l.id)) != nullptr) {
      throw SemanticError(l.id, "link '" + l.id + "' declared twice" +
                                    at_line(l.line));
    }
    if (!endpoints.emplace(l.src, l.dest, l.channel).second) {
      throw SemanticError(l.id, "link '" + l.id + "' duplicates " + l.src +
                                    " -> " + l.dest + " channel " +
                                    std::to_string(l.channel) + at_line(l.line));
    }
    spec.topology.links.push_back(
        Link{LinkId(l.id), ComponentId(l.src), ComponentId(l.dest), l.channel});
  }
  std::sort(spec.topology.links.begin(), spec.topology.links.end(),
            [](const Link& a, const Link& b) { return a.id < b.id; });

  std::set<std::string> flow_ids;
  for (const auto& rf : doc.flows) {
    if (!flow_ids.insert(rf.id).second) {
      throw SemanticError(rf.id, "flow '" + rf.id + "' declared twice" +
                                     at_line(rf.line));
    }
    std::vector<PlaceId> places;
    for (const auto& p : rf.places) places.emplace_back(p);
    std::set<PlaceId> initial, end;
    for (const auto& p : rf.initial) initial.emplace(p);
    for (const auto& p : rf.end) end.emplace(p);

    std::vector<Transition> transitions;
    for (const auto& rt : rf.transitions) {
      require_component(rt.src, rt.line);
      require_component(rt.dest, rt.line);
      Event e{ComponentId(rt.src), ComponentId(rt.dest), rt.cmd};
      const Link* link = spec.topology.find_link(LinkId(rt.link));
      if (link == nullptr) {
        throw SemanticError(rt.link, "unknown link '" + rt.link + "'" +
                                         at_line(rt.line));
      }
      if (link->src != e.src || link->dest != e.dest) {
        throw SemanticError(e.to_string(),
                            "event '" + e.to_string() + "' cannot travel on link '" +
                                rt.link + "' (" + link->src.str() + " -> " +
                                link->dest.str() + ")" + at_line(rt.line));
      }
      auto [it, inserted] = spec.topology.event_link_map.emplace(e, link->id);
      if (!inserted && it->second != link->id) {
        throw SemanticError(e.to_string(),
                            "event '" + e.to_string() + "' mapped to both '" +
                                it->second.str() + "' and '" + rt.link + "'" +
                                at_line(rt.line));
      }
      Transition t;
      t.id = TransitionId(rt.id);
      for (const auto& p : rt.pre) t.preset.emplace(p);
      for (const auto& p : rt.post) t.postset.emplace(p);
      t.event = std::move(e);
      transitions.push_back(std::move(t));
    }
    spec.flows.emplace_back(FlowId(rf.id), std::move(places),
                            std::move(transitions), std::move(initial),
                            std::move(end));
  }
  std::sort(spec.flows.begin(), spec.flows.end(),
            [](const Flow& a, const Flow& b) { return a.id() < b.id(); });

  for (const auto& ri : doc.initiators) {
    require_component(ri.component, ri.line);
    if (spec.find_initiator(ComponentId(ri.component)) != nullptr) {
      throw SemanticError(ri.component, "initiator '" + ri.component +
                                            "' declared twice" +
                                            at_line(ri.line));
    }
    Initiator init{ComponentId(ri.component), {}};
    for (const auto& f : ri.flows) {
      if (!flow_ids.contains(f)) {
        throw SemanticError(f, "initiator '" + ri.component +
                                   "' references unknown flow '" + f + "'" +
                                   at_line(ri.line));
      }
      init.flows.emplace(f);
    }
    spec.initiators.push_back(std::move(init));
  }
  std::sort(spec.initiators.begin(), spec.initiators.end(),
            [](const Initiator& a, const Initiator& b) {
              return a.component < b.component;
            });
  return spec;
}

}  // namespace

SystemSpec parse_system_unchecked(std::string_view text) {
  const RawDocument doc = parse_raw(text);
  try {
    return build(doc);
  } catch (const InvalidIdentifier& e) {
    throw SemanticError("", e.what());
  }
}

std::vector<Finding> check_system(const SystemSpec& spec) {
  std::vector<Finding> out;
  for (const auto& flow : spec.flows) {
    for (auto f : validate(flow).findings) {
      f.message = "flow '" + flow.id().str() + "': " + f.message;
      f.subject = flow.id().str();
      out.push_back(std::move(f));
    }
    for (const auto& e : flow.events()) {
      if (!spec.topology.event_link_map.contains(e)) {
        out.push_back({FindingKind::kUnmappedEvent, flow.id().str(),
                       "flow '" + flow.id().str() + "': unmapped event: '" +
                           e.to_string() + "' has no link"});
      }
    }
  }
  for (const auto& init : spec.initiators) {
    for (const auto& fid : init.flows) {
      const Flow* flow = spec.find_flow(fid);
      if (flow == nullptr) {
        out.push_back({FindingKind::kInitiatorMismatch, fid.str(),
                       "initiator mismatch: '" + init.component.str() +
                           "' lists unknown flow '" + fid.str() + "'"});
        continue;
      }
      const auto starts = start_events(*flow);
      const bool ok = std::any_of(starts.begin(), starts.end(), [&](const Event& e) {
        return e.src == init.component;
      });
      if (!ok) {
        out.push_back({FindingKind::kInitiatorMismatch, fid.str(),
                       "initiator mismatch: no start event of flow '" +
                           fid.str() + "' is sent by '" +
                           init.component.str() + "'"});
      }
    }
  }
  return out;
}

SystemSpec parse_system(std::string_view text) {
  SystemSpec spec = parse_system_unchecked(text);
  const auto findings = check_system(spec);
  if (!findings.empty()) {
    std::string message = findings.front().message;
    for (std::size_t i = 1; i < findings.size(); ++i) {
      message += "; " + findings[i].message;
    }
    const std::string entity = findings.front().subject;
    throw SemanticError(entity, message);
  }
  return spec;
}

std::string serialize_system(const SystemSpec& spec) {
  std::ostringstream out;
  out << "system " << spec.name << "\n\n";

  if (!spec.topology.components.empty()) {
    out << "component";
    for (const auto& c : spec.topology.components) out << ' ' << c;
    out << "\n\n";
  }

  auto links = spec.topology.links;
  std::sort(links.begin(), links.end(),
            [](const Link& a, const Link& b) { return a.id < b.id; });
  for (const auto& l : links) {
    out << "link " << l.id << ' ' << l.src << " -> " << l.dest;
    if (l.channel != 0) out << " channel " << l.channel;
    out << '\n';
  }
  if (!links.empty()) out << '\n';

  auto join = [](const std::set<PlaceId>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ",") + id.str();
    return s;
  };

  std::vector<const Flow*> flows;
  for (const auto& f : spec.flows) flows.push_back(&f);
  std::sort(flows.begin(), flows.end(),
            [](const Flow* a, const Flow* b) { return a->id() < b->id(); });
  for (const Flow* f : flows) {
    out << "flow " << f->id() << '\n';
    for (const auto& p : f->places()) {
      out << "  place " << p;
      if (f->initial_marking().marked.contains(p)) out << " initial";
      if (f->end_marking().marked.contains(p)) out << " end";
      out << '\n';
    }
    for (const auto& t : f->transitions()) {
      out << "  transition " << t.id << " pre {" << join(t.preset)
          << "} post {" << join(t.postset) << "} event " << t.event << " on "
          << spec.topology.link_of(t.event) << '\n';
    }
    out << '\n';
  }

  auto initiators = spec.initiators;
  std::sort(initiators.begin(), initiators.end(),
            [](const Initiator& a, const Initiator& b) {
              return a.component < b.component;
            });
  for (const auto& init : initiators) {
    out << "initiator " << init.component << " flows {";
    bool first = true;
    for (const auto& f : init.flows) {
      out << (first ? "" : ",") << f;
      first = false;
    }
    out << "}\n";
  }
  return out.str();
}

namespace {
constexpr std::string_view kPrototypeText =
#include "prototype_spec.inc"
    ;
}  // namespace

std::string_view prototype_text() { return kPrototypeText; }

SystemSpec load_prototype() {
  static const SystemSpec spec = parse_system(kPrototypeText);
  return spec;
}

SystemSpec load_system(const std::string& path_or_prototype) {
  if (path_or_prototype == "prototype") return load_prototype();
  std::ifstream in(path_or_prototype, std::ios::binary);
  if (!in) {
    throw std::ios_base::failure("cannot open '" + path_or_prototype + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

}  // namespace flowobs
