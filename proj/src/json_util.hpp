#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ffnav/errors.hpp"

// Shared helpers for the versioned JSON file formats. Every loader goes
// through these so that I/O, schema, and version failures surface as the
// corresponding error types instead of raw nlohmann exceptions.
namespace ffnav::jsonio
{

using nlohmann::json;

inline json load_json_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open file for reading: " + path);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception & e) {
    throw SchemaError("malformed JSON in " + path + ": " + e.what());
  }
}

inline void save_json_file(const json & j, const std::string & path, int indent = -1)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open file for writing: " + path);
  }
  out << j.dump(indent) << '\n';
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

// Validates the "format"/"version" envelope every file format carries.
inline void check_format(const json & j, const std::string & format, int version)
{
  if (!j.is_object() || !j.contains("format") || !j.contains("version")) {
    throw SchemaError("missing format/version envelope (expected " + format + ")");
  }
  std::string file_format;
  int file_version = 0;
  try {
    file_format = j.at("format").get<std::string>();
    file_version = j.at("version").get<int>();
  } catch (const json::exception & e) {
    throw SchemaError(std::string("bad format/version envelope: ") + e.what());
  }
  if (file_format != format || file_version != version) {
    throw VersionMismatchError(
      "unsupported file format " + file_format + " v" + std::to_string(file_version) +
      " (expected " + format + " v" + std::to_string(version) + ")");
  }
}

inline const json & require(const json & j, const char * key)
{
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(std::string("missing required field: ") + key);
  }
  return j.at(key);
}

template <typename T>
T field(const json & j, const char * key)
{
  try {
    return require(j, key).get<T>();
  } catch (const json::exception & e) {
    throw SchemaError(std::string("bad value for field ") + key + ": " + e.what());
  }
}

template <typename T>
T field_or(const json & j, const char * key, T fallback)
{
  if (!j.is_object() || !j.contains(key)) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception & e) {
    throw SchemaError(std::string("bad value for field ") + key + ": " + e.what());
  }
}

}  // namespace ffnav::jsonio
