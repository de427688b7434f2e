#pragma once

#include <stdexcept>

#include "star/error.hpp"

namespace star::detail {

template <typename Fn>
void for_each_record(std::istream& in, const std::string& file, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecord(file, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedRecord(file, line_no, "expected a JSON object");
    try {
      fn(j, line_no);
    } catch (const std::invalid_argument& e) {
      throw MalformedRecord(file, line_no, e.what());
    } catch (const json::exception& e) {
      throw MalformedRecord(file, line_no, e.what());
    }
  }
}

}  // namespace star::detail
