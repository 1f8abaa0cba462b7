#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace partscene {

// Minimal XML element tree: enough for URDF emission and validation.
// No namespaces, no entities beyond the five predefined ones.
struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;  // insertion order
  std::vector<XmlElement> children;

  XmlElement() = default;
  explicit XmlElement(std::string n) : name(std::move(n)) {}

  XmlElement& attr(const std::string& key, const std::string& value);
  XmlElement& child(XmlElement element);
  const std::string* find_attr(const std::string& key) const;
  std::vector<const XmlElement*> find_all(const std::string& child_name) const;
};

// Serializes with an XML declaration, two-space indentation, and attributes
// in insertion order. Deterministic for identical input.
std::string write_xml(const XmlElement& root);

// Parses a single-root document. Throws ParseError with a line hint on
// malformed input. Text content is discarded (URDF carries none we need).
XmlElement parse_xml(const std::string& text);

}  // namespace partscene
