#ifndef TABML_TESTS_XML_CHECK_HPP_
#define TABML_TESTS_XML_CHECK_HPP_

#include <cctype>
#include <string>
#include <vector>

namespace tabml::testing {

// Minimal well-formedness check for the SVG subset we emit: balanced tags,
// quoted attributes, known entities. Returns an empty string when fine.
inline std::string XmlProblem(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  auto entity_ok = [&](std::size_t at) {
    for (const char* e : {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"}) {
      if (doc.compare(at, std::string(e).size(), e) == 0) return true;
    }
    return false;
  };
  while (i < doc.size()) {
    if (doc[i] == '&') {
      if (!entity_ok(i)) return "bad entity at " + std::to_string(i);
      ++i;
      continue;
    }
    if (doc[i] == '>') return "stray '>' at " + std::to_string(i);
    if (doc[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(doc[i]))) {
        return "text outside root at " + std::to_string(i);
      }
      ++i;
      continue;
    }
    if (doc.compare(i, 5, "<?xml") == 0) {
      const auto end = doc.find("?>", i);
      if (end == std::string::npos || i != 0) return "bad declaration";
      i = end + 2;
      continue;
    }
    const bool closing = i + 1 < doc.size() && doc[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    std::string name;
    while (j < doc.size() && (std::isalnum(static_cast<unsigned char>(doc[j])) || doc[j] == '-' || doc[j] == ':')) {
      name += doc[j++];
    }
    if (name.empty()) return "empty tag name at " + std::to_string(i);
    bool self_closing = false;
    while (true) {
      while (j < doc.size() && std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
      if (j >= doc.size()) return "unterminated tag " + name;
      if (doc[j] == '>') {
        ++j;
        break;
      }
      if (doc[j] == '/' && j + 1 < doc.size() && doc[j + 1] == '>') {
        self_closing = true;
        j += 2;
        break;
      }
      if (closing) return "attributes on closing tag " + name;
      std::string attr;
      while (j < doc.size() && (std::isalnum(static_cast<unsigned char>(doc[j])) || doc[j] == '-' || doc[j] == ':')) {
        attr += doc[j++];
      }
      if (attr.empty() || j + 1 >= doc.size() || doc[j] != '=' || doc[j + 1] != '"') {
        return "bad attribute in " + name;
      }
      const auto end = doc.find('"', j + 2);
      if (end == std::string::npos) return "unterminated attribute in " + name;
      const std::string value = doc.substr(j + 2, end - j - 2);
      if (value.find('<') != std::string::npos) return "'<' inside attribute of " + name;
      j = end + 1;
    }
    if (closing) {
      if (stack.empty() || stack.back() != name) return "mismatched </" + name + ">";
      stack.pop_back();
    } else if (!self_closing) {
      if (stack.empty() && root_seen) return "second root element " + name;
      root_seen = true;
      stack.push_back(name);
    } else if (stack.empty()) {
      return "self-closing root " + name;
    }
    i = j;
  }
  if (!stack.empty()) return "unclosed <" + stack.back() + ">";
  if (!root_seen) return "no root element";
  return "";
}

}  // namespace tabml::testing

#endif  // TABML_TESTS_XML_CHECK_HPP_
