#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cfj/cfj.hpp"

namespace cfj::test {

inline std::filesystem::path fixture_dir() { return CFJ_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return CFJ_TEST_DATA_DIR; }

inline Program fixture(const std::string& id) { return parse_program(read_file(fixture_dir() / (id + ".cfj"))); }

inline std::string golden(const std::string& name) { return read_file(fixture_dir() / "golden" / name); }

inline ClassName C(std::string_view s) { return ClassName(s); }
inline LayerName L(std::string_view s) { return LayerName(s); }
inline MethodName M(std::string_view s) { return MethodName(s); }

inline LayerSeq seq(std::initializer_list<std::string_view> names) {
    std::vector<LayerName> out;
    for (auto n : names) out.push_back(LayerName(n));
    return LayerSeq(out);
}

inline LayerSet set(std::initializer_list<std::string_view> names) {
    LayerSet out;
    for (auto n : names) out.insert(LayerName(n));
    return out;
}

/// Every duplicate-free sequence over `pool` of length 0..max_len.
inline std::vector<LayerSeq> sequences(const std::vector<LayerName>& pool, std::size_t max_len) {
    std::vector<LayerSeq> out{LayerSeq{}};
    std::vector<std::vector<LayerName>> frontier{{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::vector<LayerName>> next;
        for (const auto& s : frontier)
            for (LayerName l : pool)
                if (std::find(s.begin(), s.end(), l) == s.end()) {
                    auto t = s;
                    t.push_back(l);
                    out.emplace_back(t);
                    next.push_back(std::move(t));
                }
        frontier = std::move(next);
    }
    return out;
}

inline std::vector<LayerSeq> prefixes(const LayerSeq& s) {
    std::vector<LayerSeq> out;
    for (std::size_t n = 0; n <= s.size(); ++n)
        out.emplace_back(std::vector<LayerName>(s.items().begin(), s.items().begin() + static_cast<long>(n)));
    return out;
}

inline std::vector<LayerName> layer_names(const Tables& t) {
    std::vector<LayerName> out;
    for (const auto& l : t.layers()) out.push_back(l.name);
    return out;
}

/// Table classes plus Object.
inline std::vector<ClassName> class_names(const Tables& t) {
    std::vector<ClassName> out{object_class()};
    for (const auto& c : t.classes()) out.push_back(c.name);
    return out;
}

/// Every method name declared anywhere, base or partial.
inline std::vector<MethodName> method_names(const Tables& t) {
    std::set<MethodName> out;
    for (const auto& c : t.classes())
        for (const auto& m : c.methods) out.insert(m.name);
    for (const auto& l : t.layers())
        for (const auto& pm : l.partial_methods) out.insert(pm.name);
    return {out.begin(), out.end()};
}

}  // namespace cfj::test
