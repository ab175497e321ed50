#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>

namespace cfj {

/// Process-wide string interner. Interned strings live until exit, so the
/// returned pointers can be compared for identity.
class Interner {
public:
    static const std::string* intern(std::string_view text) {
        auto& self = instance();
        std::lock_guard lock(self.mutex_);
        auto it = self.pool_.emplace(text).first;
        return &*it;
    }

private:
    static Interner& instance() {
        static Interner interner;
        return interner;
    }

    std::mutex mutex_;
    std::unordered_set<std::string> pool_;
};

/// An interned identifier tagged with its syntactic role. Equality is pointer
/// identity; ordering is lexicographic so that iteration over ordered
/// containers is deterministic across runs.
template <class Role>
class Ident {
public:
    Ident() : text_(Interner::intern("")) {}
    explicit Ident(std::string_view text) : text_(Interner::intern(text)) {}

    [[nodiscard]] const std::string& str() const { return *text_; }
    [[nodiscard]] std::string_view view() const { return *text_; }
    [[nodiscard]] bool empty() const { return text_->empty(); }
    [[nodiscard]] const void* id() const { return text_; }

    friend bool operator==(Ident a, Ident b) { return a.text_ == b.text_; }
    friend std::strong_ordering operator<=>(Ident a, Ident b) {
        if (a.text_ == b.text_) return std::strong_ordering::equal;
        return *a.text_ <=> *b.text_;
    }
    friend std::ostream& operator<<(std::ostream& os, Ident n) { return os << *n.text_; }

private:
    const std::string* text_;
};

using ClassName = Ident<struct ClassRole>;
using LayerName = Ident<struct LayerRole>;
using MethodName = Ident<struct MethodRole>;
using FieldName = Ident<struct FieldRole>;
using VarName = Ident<struct VarRole>;

inline ClassName object_class() { return ClassName("Object"); }
inline LayerName base_layer() { return LayerName("Base"); }
inline VarName this_var() { return VarName("this"); }

}  // namespace cfj

template <class Role>
struct std::hash<cfj::Ident<Role>> {
    std::size_t operator()(cfj::Ident<Role> n) const noexcept {
        return std::hash<const void*>{}(n.id());
    }
};
