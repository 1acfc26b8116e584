#include "socdp/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace socdp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_escaped(std::ostream& os, std::string_view s) {
  os << '"';
  for (const char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      case '\r': os << "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          os << buf;
        } else {
          os << c;
        }
    }
  }
  os << '"';
}

}  // namespace

JsonWriter::JsonWriter(std::ostream& os, int indent) : os_(os), indent_(indent) {}

void JsonWriter::newline() {
  os_ << '\n';
  for (std::size_t i = 0; i < stack_.size() * static_cast<std::size_t>(indent_); ++i) os_ << ' ';
}

// Separator and indentation handling shared by every value form. A value is
// legal at the top level (once), as an array element, or right after a key.
void JsonWriter::before_value() {
  if (done_) throw std::logic_error("JsonWriter: document already finished");
  if (stack_.empty()) return;
  Level& top = stack_.back();
  if (top.kind == '{') {
    if (!key_pending_) throw std::logic_error("JsonWriter: object member needs a key first");
    key_pending_ = false;
    return;
  }
  if (!top.empty) os_ << ',';
  top.empty = false;
  newline();
}

JsonWriter& JsonWriter::key(std::string_view k) {
  if (stack_.empty() || stack_.back().kind != '{')
    throw std::logic_error("JsonWriter: key outside of an object");
  if (key_pending_) throw std::logic_error("JsonWriter: key already pending");
  Level& top = stack_.back();
  if (!top.empty) os_ << ',';
  top.empty = false;
  newline();
  write_escaped(os_, k);
  os_ << ": ";
  key_pending_ = true;
  return *this;
}

JsonWriter& JsonWriter::begin_object() {
  before_value();
  os_ << '{';
  stack_.push_back({'{', true});
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  if (stack_.empty() || stack_.back().kind != '{' || key_pending_)
    throw std::logic_error("JsonWriter: mismatched end_object");
  const bool was_empty = stack_.back().empty;
  stack_.pop_back();
  if (!was_empty) newline();
  os_ << '}';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  before_value();
  os_ << '[';
  stack_.push_back({'[', true});
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  if (stack_.empty() || stack_.back().kind != '[')
    throw std::logic_error("JsonWriter: mismatched end_array");
  const bool was_empty = stack_.back().empty;
  stack_.pop_back();
  if (!was_empty) newline();
  os_ << ']';
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  if (!std::isfinite(v))
    throw std::invalid_argument("JsonWriter: non-finite doubles have no JSON form");
  before_value();
  os_ << format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  before_value();
  os_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  before_value();
  os_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  before_value();
  os_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  before_value();
  os_ << (v ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  before_value();
  write_escaped(os_, v);
  return *this;
}

JsonWriter& JsonWriter::null() {
  before_value();
  os_ << "null";
  return *this;
}

void JsonWriter::finish() {
  if (!stack_.empty() || key_pending_)
    throw std::logic_error("JsonWriter: finish with open containers");
  os_ << '\n';
  done_ = true;
}

}  // namespace socdp
