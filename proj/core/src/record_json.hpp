#pragma once

// JSON conversions for the line-delimited record files. Private to star_core.

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "star/memory_store.hpp"

namespace star::detail {

using json = nlohmann::json;

// Parsers throw std::invalid_argument with a human-readable reason; callers
// attach file and line.
CaptionRecord caption_from_json(const json& j, bool strict);
Primitive primitive_from_json(const json& j, bool strict);
KeyframeRecord keyframe_from_json(const json& j, bool strict);

json to_json(const CaptionRecord& c, bool with_embedding);
json to_json(const Primitive& p, bool with_feature);
json to_json(const KeyframeRecord& k);

json to_json(const Vec3& v);

// Reads one JSON object per non-blank line, calling fn(object, line_no).
// Parse failures and exceptions from fn become MalformedRecord(file, line).
template <typename Fn>
void for_each_record(std::istream& in, const std::string& file, Fn&& fn);

// Rounds every floating-point value to 9 significant digits so that dump()
// yields the canonical text form.
json round_floats(const json& j, int significant_digits = 9);

}  // namespace star::detail

#include "record_json_impl.hpp"
