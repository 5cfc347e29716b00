#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "emgrl/diff/params.hpp"

namespace emgrl::diff {

inline constexpr const char* kParamFormat = "emgrl.paramset";
inline constexpr int kParamFormatVersion = 1;

/// Hex-float text for a double; round-trips bit-exactly.
std::string encode_double(double x);
double decode_double(const std::string& s);

/// Versioned key -> array document with hex-float values.
nlohmann::json to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& doc);

void save_params(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_params(const std::filesystem::path& path);

}  // namespace emgrl::diff
