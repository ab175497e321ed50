#include <gtest/gtest.h>

#include "support.hpp"

using namespace cfj;
using namespace cfj::test;

namespace {

const char* kConflict = R"(
class Int extends Object { }
class Bool extends Object { }
class C extends Object { }
layer P { Int C.m() { return new Int(); } }
layer Q { Bool C.m() { return new Bool(); } }
main { new C() }
)";

// Accepted fixtures; the lemmas below assume the tables typecheck.
std::vector<std::string> accepted_ids() {
    std::vector<std::string> out;
    for (const auto& f : load_fixtures(fixture_dir()))
        if (f.accept_type) out.push_back(f.id);
    return out;
}

}  // namespace

TEST(Fields, Object) {
    auto p = fixture("lookup1");
    EXPECT_TRUE(fields(p.t(), object_class()).empty());
    EXPECT_TRUE(fields(p.t(), C("C")).empty());
    EXPECT_THROW(fields(p.t(), C("Nope")), UnknownClass);
}

TEST(Fields, SuperclassFirst) {
    auto p = parse_program("class T extends Object { } class S extends Object { } "
                           "class A extends Object { T f; } class B extends A { S g; } main { new T() }");
    auto fs = fields(p.t(), C("B"));
    ASSERT_EQ(fs.size(), 2u);
    EXPECT_EQ(fs[0].name, FieldName("f"));
    EXPECT_EQ(fs[0].type, Type(C("T")));
    EXPECT_EQ(fs[1].name, FieldName("g"));
    EXPECT_EQ(fs[1].type, Type(C("S")));
}

TEST(PMBody, InheritedFromSuperlayer) {
    auto p = fixture("lookup1");
    auto r = pmbody(p.t(), M("m"), C("C"), L("L2"));
    ASSERT_TRUE(r);
    EXPECT_EQ(r->found_layer, L("L3"));
    EXPECT_FALSE(pmbody(p.t(), M("m"), C("C"), L("L1")));
    EXPECT_FALSE(pmbody(p.t(), M("m"), C("C"), base_layer()));
}

TEST(MBody, LayerInheritanceWins) {
    auto p = fixture("lookup1");
    auto r = mbody(p.t(), M("m"), C("C"), seq({"L1", "L2"}), seq({"L1", "L2"}));
    ASSERT_TRUE(r);
    EXPECT_EQ(r->found_class, C("C"));
    EXPECT_EQ(r->found_prefix, seq({"L1", "L2"}));
    EXPECT_EQ(r->defining_layer, L("L3"));
    EXPECT_EQ(render(r->body), "new C()");
}

TEST(MBody, FallsThroughToSuperclass) {
    auto p = fixture("lookup1");
    auto r = mbody(p.t(), M("m"), C("C"), seq({"L1"}), seq({"L1"}));
    ASSERT_TRUE(r);
    EXPECT_EQ(r->found_class, C("D"));
    EXPECT_EQ(r->found_prefix, seq({"L1"}));
    EXPECT_EQ(r->defining_layer, L("L1"));
    EXPECT_EQ(render(r->body), "new D()");
}

TEST(MBody, BaseMethodDirectly) {
    auto p = fixture("lookup1");
    auto r = mbody(p.t(), M("m"), C("D"), seq({}), seq({}));
    ASSERT_TRUE(r);
    EXPECT_EQ(r->found_class, C("D"));
    EXPECT_TRUE(r->found_prefix.empty());
    EXPECT_FALSE(r->defining_layer);
    EXPECT_FALSE(mbody(p.t(), M("m"), object_class(), seq({}), seq({})));
    EXPECT_FALSE(mbody(p.t(), M("nope"), C("C"), seq({"L1"}), seq({"L1"})));
}

TEST(MBody, ShortPrefixThenFullSequenceAtSuperclass) {
    auto p = fixture("lookup2");
    // Nothing left in the prefix for C, so continue at D with the full sequence.
    auto r = mbody(p.t(), M("m"), C("C"), seq({}), seq({"L1", "L2", "L3"}));
    ASSERT_TRUE(r);
    EXPECT_EQ(r->found_class, C("D"));
    EXPECT_EQ(r->defining_layer, L("L1"));
    EXPECT_EQ(r->found_prefix, seq({"L1"}));
}

TEST(PMType, Lookup2) {
    auto p = fixture("lookup2");
    auto s = pmtype(p.t(), M("m"), C("C"), L("L3"));
    ASSERT_TRUE(s);
    EXPECT_TRUE(s->params.empty());
    EXPECT_EQ(s->ret, Type(C("U")));
    EXPECT_FALSE(pmtype(p.t(), M("m"), C("C"), base_layer()));
    EXPECT_FALSE(pmtype(p.t(), M("m"), C("D"), L("L3")));
    EXPECT_TRUE(pmtype(p.t(), M("m"), C("E"), L("L3")));
}

TEST(MType, Base) {
    auto p = fixture("lookup2");
    auto r = mtype(p.t(), M("m"), C("E"), {}, {});
    ASSERT_TRUE(r.defined());
    EXPECT_EQ(render(r.sig()), "() -> U");
    EXPECT_EQ(r.witnesses.size(), 1u);
    EXPECT_FALSE(r.witnesses[0].layer);
}

TEST(MType, CounterexampleProceed) {
    auto p = fixture("cex_requires");
    auto r = mtype(p.t(), M("m"), C("C"), set({"L"}), set({"L"}));
    ASSERT_TRUE(r.defined());
    EXPECT_EQ(render(r.sig()), "() -> Int");
}

TEST(MType, SuperWithSecondSet) {
    auto p = fixture("lookup2");
    // Nothing for C in the first set, so D is asked with the second.
    auto r = mtype(p.t(), M("m"), C("C"), {}, set({"L1"}));
    ASSERT_TRUE(r.defined());
    EXPECT_EQ(r.witnesses.size(), 2u);
}

TEST(MType, Conflict) {
    auto p = parse_program(kConflict);
    auto r = mtype(p.t(), M("m"), C("C"), set({"P", "Q"}), set({"P", "Q"}));
    EXPECT_TRUE(r.conflict());
    EXPECT_FALSE(r.defined());
    ASSERT_EQ(r.witnesses.size(), 2u);
    EXPECT_TRUE(mtype(p.t(), M("m"), C("C"), set({"P"}), set({"P"})).defined());
    EXPECT_EQ(mtype(p.t(), M("m"), C("C"), {}, {}).status, MTypeResult::Status::Undefined);
}

TEST(NoConflict, Examples) {
    auto p = fixture("lookup2");
    EXPECT_TRUE(noconflict(p.t(), L("L1"), L("L1")));
    EXPECT_TRUE(noconflict(p.t(), L("L1"), L("L2")));
    auto q = parse_program(kConflict);
    EXPECT_FALSE(noconflict(q.t(), L("P"), L("Q")));
    EXPECT_FALSE(noconflict(q.t(), L("Q"), L("P")));
}

TEST(OverrideH, Examples) {
    auto p = fixture("lookup2");
    EXPECT_TRUE(override_h(p.t(), L("L1"), C("D")));
    EXPECT_TRUE(override_h(p.t(), L("L2"), C("E")));
    auto q = fixture("reject_override_h");
    EXPECT_FALSE(override_h(q.t(), L("P"), C("Obj")));
}

TEST(OverrideV, Examples) {
    auto p = fixture("lookup2");
    EXPECT_TRUE(override_v(p.t(), C("D")));
    EXPECT_TRUE(override_v(p.t(), C("U")));
    EXPECT_FALSE(override_v(fixture("reject_override_v").t(), C("Sub")));
    EXPECT_FALSE(override_v(fixture("reject_override_v_layer").t(), C("Sub")));
    EXPECT_TRUE(override_v(fixture("covariant_return").t(), C("Sub")));
}

// Properties over the lookup grid of every accepted fixture: all
// duplicate-free layer sequences of length <= 4 and all their prefixes.
class LookupGrid : public ::testing::TestWithParam<std::string> {};

TEST_P(LookupGrid, MBodyAgreesWithMType) {
    auto p = fixture(GetParam());
    const auto& t = p.t();
    for (const auto& full : sequences(layer_names(t), 4))
        for (const auto& pre : prefixes(full))
            for (ClassName c : class_names(t))
                for (MethodName m : method_names(t)) {
                    auto mb = mbody(t, m, c, pre, full);
                    auto mt = mtype(t, m, c, pre.as_set(), full.as_set());
                    ASSERT_FALSE(mt.conflict()) << c << "." << m;
                    ASSERT_EQ(mb.has_value(), mt.defined())
                        << c << "." << m << " " << render(pre) << " " << render(full);
                    if (!mb) continue;
                    EXPECT_EQ(mb->params.size(), mt.sig().params.size());
                    EXPECT_TRUE(mb->found_prefix.is_prefix_of(full));
                    if (!mb->found_prefix.empty()) {
                        EXPECT_NE(mb->found_prefix.back(), base_layer());
                    }
                    EXPECT_TRUE(class_sub(t, c, mb->found_class));
                }
}

TEST_P(LookupGrid, PMBodyFindsASuperlayer) {
    auto p = fixture(GetParam());
    const auto& t = p.t();
    for (LayerName l : layer_names(t))
        for (ClassName c : class_names(t))
            for (MethodName m : method_names(t)) {
                auto pb = pmbody(t, m, c, l);
                auto pt = pmtype(t, m, c, l);
                ASSERT_EQ(pb.has_value(), pt.has_value());
                if (!pb) continue;
                EXPECT_TRUE(weak_sub(t, l, pb->found_layer));
                EXPECT_NE(pb->found_layer, base_layer());
                EXPECT_EQ(pb->params.size(), pt->params.size());
            }
}

TEST_P(LookupGrid, OverridePredicatesHold) {
    auto p = fixture(GetParam());
    const auto& t = p.t();
    for (LayerName a : layer_names(t)) {
        for (LayerName b : layer_names(t)) EXPECT_TRUE(noconflict(t, a, b));
        for (ClassName c : class_names(t)) EXPECT_TRUE(override_h(t, a, c));
    }
    for (ClassName c : class_names(t)) EXPECT_TRUE(override_v(t, c));
}

INSTANTIATE_TEST_SUITE_P(Accepted, LookupGrid, ::testing::ValuesIn(accepted_ids()));

TEST(LookupCache, MatchesDirectCalls) {
    auto p = fixture("lookup2");
    LookupCache cache(p.t());
    for (const auto& full : sequences(layer_names(p.t()), 3))
        for (const auto& pre : prefixes(full))
            for (ClassName c : class_names(p.t())) {
                const auto& a = cache.mbody(M("m"), c, pre, full);
                const auto& again = cache.mbody(M("m"), c, pre, full);
                auto b = mbody(p.t(), M("m"), c, pre, full);
                ASSERT_EQ(a.has_value(), b.has_value());
                EXPECT_EQ(&a, &again);
                if (a) {
                    EXPECT_EQ(a->found_class, b->found_class);
                    EXPECT_EQ(a->found_prefix, b->found_prefix);
                    EXPECT_EQ(a->defining_layer, b->defining_layer);
                }
                EXPECT_EQ(cache.mtype(M("m"), c, pre.as_set(), full.as_set()).status,
                          mtype(p.t(), M("m"), c, pre.as_set(), full.as_set()).status);
            }
}
