#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

namespace socdp {

// Streaming JSON emitter with deterministic bytes: keys appear in insertion
// order, doubles are printed with 17 significant digits (enough to round-trip
// exactly), and indentation is fixed. Used for every artifact the toolkit
// writes, so identical inputs yield identical files.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& os, int indent = 2);

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();

  // Key of the next member; must be inside an object.
  JsonWriter& key(std::string_view k);

  JsonWriter& value(double v);  // must be finite
  JsonWriter& value(int v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();

  template <typename T>
  JsonWriter& kv(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }

  // Emits the trailing newline; the writer must be back at the top level.
  void finish();

 private:
  void before_value();
  void newline();

  std::ostream& os_;
  int indent_;
  struct Level {
    char kind;  // '{' or '['
    bool empty = true;
  };
  std::vector<Level> stack_;
  bool key_pending_ = false;
  bool done_ = false;
};

// %.17g rendering shared by the JSON and CSV emitters.
std::string format_double(double v);

}  // namespace socdp
