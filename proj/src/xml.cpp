#include "partscene/xml.hpp"

#include "partscene/errors.hpp"

namespace partscene {

XmlElement& XmlElement::attr(const std::string& key, const std::string& value) {
  attributes.emplace_back(key, value);
  return *this;
}

XmlElement& XmlElement::child(XmlElement element) {
  children.push_back(std::move(element));
  return *this;
}

const std::string* XmlElement::find_attr(const std::string& key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return &v;
  return nullptr;
}

std::vector<const XmlElement*> XmlElement::find_all(const std::string& child_name) const {
  std::vector<const XmlElement*> out;
  for (const auto& c : children)
    if (c.name == child_name) out.push_back(&c);
  return out;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void write_element(const XmlElement& e, int depth, std::string& out) {
  out.append(2 * depth, ' ');
  out += '<';
  out += e.name;
  for (const auto& [k, v] : e.attributes) {
    out += ' ';
    out += k;
    out += "=\"";
    out += escape(v);
    out += '"';
  }
  if (e.children.empty()) {
    out += "/>\n";
    return;
  }
  out += ">\n";
  for (const auto& c : e.children) write_element(c, depth + 1, out);
  out.append(2 * depth, ' ');
  out += "</";
  out += e.name;
  out += ">\n";
}

struct Parser {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("xml: " + what + " (line " + std::to_string(line) + ")");
  }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }

  char take() {
    if (pos >= text.size()) fail("unexpected end of input");
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  bool consume(const std::string& token) {
    if (text.compare(pos, token.size(), token) != 0) return false;
    for (size_t i = 0; i < token.size(); ++i) take();
    return true;
  }

  void skip_whitespace() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) take();
  }

  void skip_misc() {
    for (;;) {
      skip_whitespace();
      if (consume("<?")) {
        while (!consume("?>")) take();
      } else if (consume("<!--")) {
        while (!consume("-->")) take();
      } else {
        return;
      }
    }
  }

  std::string read_name() {
    std::string name;
    while (pos < text.size()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' ||
          c == '.') {
        name += take();
      } else {
        break;
      }
    }
    if (name.empty()) fail("expected a name");
    return name;
  }

  std::string unescape(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size();) {
      if (s[i] != '&') {
        out += s[i++];
        continue;
      }
      const auto semi = s.find(';', i);
      if (semi == std::string::npos) fail("unterminated entity");
      const std::string entity = s.substr(i, semi - i + 1);
      if (entity == "&amp;")
        out += '&';
      else if (entity == "&lt;")
        out += '<';
      else if (entity == "&gt;")
        out += '>';
      else if (entity == "&quot;")
        out += '"';
      else if (entity == "&apos;")
        out += '\'';
      else
        fail("unknown entity " + entity);
      i = semi + 1;
    }
    return out;
  }

  XmlElement parse_element() {
    if (!consume("<")) fail("expected '<'");
    XmlElement element;
    element.name = read_name();
    for (;;) {
      skip_whitespace();
      if (consume("/>")) return element;
      if (consume(">")) break;
      const std::string key = read_name();
      skip_whitespace();
      if (!consume("=")) fail("expected '=' after attribute name");
      skip_whitespace();
      const char quote = take();
      if (quote != '"' && quote != '\'') fail("expected a quoted attribute value");
      std::string value;
      while (peek() != quote) value += take();
      take();  // closing quote
      element.attributes.emplace_back(key, unescape(value));
    }
    // children / text until the matching close tag
    for (;;) {
      while (pos < text.size() && peek() != '<') take();  // text content ignored
      if (consume("<!--")) {
        while (!consume("-->")) take();
        continue;
      }
      if (text.compare(pos, 2, "</") == 0) {
        consume("</");
        const std::string closing = read_name();
        if (closing != element.name)
          fail("mismatched close tag </" + closing + "> for <" + element.name + ">");
        skip_whitespace();
        if (!consume(">")) fail("expected '>' in close tag");
        return element;
      }
      element.children.push_back(parse_element());
    }
  }
};

}  // namespace

std::string write_xml(const XmlElement& root) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  write_element(root, 0, out);
  return out;
}

XmlElement parse_xml(const std::string& text) {
  Parser parser(text);
  parser.skip_misc();
  XmlElement root = parser.parse_element();
  parser.skip_misc();
  if (parser.pos != text.size()) parser.fail("trailing content after the root element");
  return root;
}

}  // namespace partscene
