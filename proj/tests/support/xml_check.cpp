#include "xml_check.hpp"

#include <expat.h>

namespace rlg::testing {

namespace {

void on_start(void* user, const XML_Char* name, const XML_Char**) {
  auto* s = static_cast<XmlSummary*>(user);
  if (s->root.empty()) s->root = name;
  ++s->element_counts[name];
}

void on_end(void*, const XML_Char*) {}

}  // namespace

XmlSummary parse_xml(const std::string& text) {
  XmlSummary s;
  XML_Parser p = XML_ParserCreate(nullptr);
  XML_SetUserData(p, &s);
  XML_SetElementHandler(p, on_start, on_end);
  if (XML_Parse(p, text.data(), static_cast<int>(text.size()), 1) == XML_STATUS_OK) {
    s.well_formed = true;
  } else {
    s.error = std::string(XML_ErrorString(XML_GetErrorCode(p))) + " at line " +
              std::to_string(XML_GetCurrentLineNumber(p));
  }
  XML_ParserFree(p);
  return s;
}

}  // namespace rlg::testing
