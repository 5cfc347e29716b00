#include "emgrl/diff/serialize.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace emgrl::diff {

std::string encode_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::hex);
    if (ec != std::errc{}) throw std::runtime_error("encode_double: formatting failed");
    return std::string(buf, end);
}

double decode_double(const std::string& s) {
    double x = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    bool negative = false;
    if (first != last && *first == '-') {
        negative = true;
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, x, std::chars_format::hex);
    if (ec != std::errc{} || ptr != last) throw std::runtime_error("decode_double: bad hex float '" + s + "'");
    return negative ? -x : x;
}

nlohmann::json to_json(const ParamSet& params) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& [name, b] : params) {
        nlohmann::json data = nlohmann::json::array();
        for (double x : b.values()) data.push_back(encode_double(x));
        blocks.push_back({{"name", name}, {"rows", b.rows()}, {"cols", b.cols()}, {"data", std::move(data)}});
    }
    return {{"format", kParamFormat}, {"version", kParamFormatVersion}, {"blocks", std::move(blocks)}};
}

ParamSet params_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != kParamFormat)
        throw std::runtime_error("params_from_json: not an emgrl.paramset document");
    if (doc.value("version", 0) != kParamFormatVersion)
        throw std::runtime_error("params_from_json: unsupported version " + doc.value("version", nlohmann::json()).dump());
    ParamSet out;
    for (const auto& jb : doc.at("blocks")) {
        const auto name = jb.at("name").get<std::string>();
        const auto rows = jb.at("rows").get<std::size_t>();
        const auto cols = jb.at("cols").get<std::size_t>();
        const auto& data = jb.at("data");
        if (data.size() != rows * cols)
            throw std::runtime_error("params_from_json: block '" + name + "' has wrong element count");
        Block& b = out.add(name, rows, cols);
        auto v = b.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = decode_double(data[i].get<std::string>());
    }
    return out;
}

void save_params(const ParamSet& params, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_params: cannot open " + path.string());
    os << to_json(params).dump(1) << '\n';
}

ParamSet load_params(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_params: cannot open " + path.string());
    return params_from_json(nlohmann::json::parse(is));
}

}  // namespace emgrl::diff
