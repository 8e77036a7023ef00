#pragma once

// The vendored nlohmann/json single header; pulled in here so public
// headers can expose to_json/from_json on their types.
#include <json.hpp>
