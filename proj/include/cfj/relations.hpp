#pragma once

#include <algorithm>

#include "cfj/ast.hpp"

namespace cfj {

/// C <: D, the reflexive-transitive closure of `extends`.
inline bool class_sub(const Tables& t, ClassName c, ClassName d) {
    const auto& chain = t.class_chain(c);
    return std::find(chain.begin(), chain.end(), d) != chain.end();
}

/// L1 <=w L2: reflexive-transitive closure of layer `extends`, ignoring requires.
inline bool weak_sub(const Tables& t, LayerName l1, LayerName l2) {
    const auto& chain = t.layer_chain(l1);
    return std::find(chain.begin(), chain.end(), l2) != chain.end();
}

/// L1 <= L2: like weak_sub, but each extends step on the way must keep the
/// requires set unchanged (a layer directly under Base must require nothing).
inline bool normal_sub(const Tables& t, LayerName l1, LayerName l2) {
    const auto& chain = t.layer_chain(l1);
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (chain[i] == l2) return true;
        if (i + 1 < chain.size() && t.requires_of(chain[i]) != t.requires_of(chain[i + 1])) return false;
    }
    return false;
}

/// Subtyping on types: classes by class_sub, layers by normal_sub, never across.
inline bool subtype(const Tables& t, const Type& a, const Type& b) {
    if (a.is_class() && b.is_class()) return class_sub(t, a.as_class(), b.as_class());
    if (a.is_layer() && b.is_layer()) return normal_sub(t, a.as_layer(), b.as_layer());
    return false;
}

/// Every member of lam2 has a weak sublayer in lam1.
inline bool set_weak_sub(const Tables& t, const LayerSet& lam1, const LayerSet& lam2) {
    return std::all_of(lam2.begin(), lam2.end(), [&](LayerName l0) {
        return std::any_of(lam1.begin(), lam1.end(), [&](LayerName l1) { return weak_sub(t, l1, l0); });
    });
}

inline bool is_swappable(const Tables& t, LayerName l) {
    const auto* d = t.find_layer(l);
    return d && d->swappable;
}

/// The swap-aware variant: L0 may also be matched by any L1 that sits under
/// the same swappable layer as L0.
inline bool set_sw_sub(const Tables& t, const LayerSet& lam1, const LayerSet& lam2) {
    return std::all_of(lam2.begin(), lam2.end(), [&](LayerName l0) {
        return std::any_of(lam1.begin(), lam1.end(), [&](LayerName l1) {
            if (weak_sub(t, l1, l0)) return true;
            for (LayerName l2 : t.layer_chain(l0))
                if (is_swappable(t, l2) && weak_sub(t, l1, l2)) return true;
            return false;
        });
    });
}

}  // namespace cfj
