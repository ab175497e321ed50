#include <gtest/gtest.h>

#include "support.hpp"

using namespace cfj;
using namespace cfj::test;

TEST(Names, InterningGivesIdentity) {
    EXPECT_EQ(C("Foo"), C(std::string("Fo") + "o"));
    EXPECT_NE(C("Foo"), C("Bar"));
    EXPECT_EQ(C("Foo").id(), C("Foo").id());
    EXPECT_LT(L("A"), L("B"));
}

TEST(Names, Roots) {
    EXPECT_EQ(object_class().str(), "Object");
    EXPECT_EQ(base_layer().str(), "Base");
}

TEST(LayerSeq, RejectsDuplicates) {
    EXPECT_THROW(seq({"A", "B", "A"}), std::invalid_argument);
    EXPECT_NO_THROW(seq({"A", "B"}));
}

TEST(LayerSeq, PrefixAndInit) {
    auto s = seq({"L1", "L2", "L3"});
    EXPECT_TRUE(seq({}).is_prefix_of(s));
    EXPECT_TRUE(seq({"L1", "L2"}).is_prefix_of(s));
    EXPECT_FALSE(seq({"L2"}).is_prefix_of(s));
    EXPECT_EQ(s.init(), seq({"L1", "L2"}));
    EXPECT_EQ(seq({}).init(), seq({}));
    EXPECT_EQ(s.back(), L("L3"));
    EXPECT_EQ(s.as_set(), set({"L3", "L1", "L2"}));
}

TEST(Cursor, PrefixInvariantEnforced) {
    EXPECT_THROW(make_triple(C("C"), seq({"L2"}), seq({"L1", "L2"})), std::logic_error);
    EXPECT_NO_THROW(make_triple(C("C"), seq({"L1"}), seq({"L1", "L2"})));
    EXPECT_THROW(make_quad(C("C"), L("L4"), seq({"L3"}), seq({"L1"})), std::logic_error);
}

TEST(Value, AnnotatedReceiverMustBeValue) {
    auto cur = Cursor{make_triple(C("C"), seq({}), seq({}))};
    EXPECT_THROW(make_annotated(invoke(new_class("C"), "m"), cur, M("m"), {}), std::logic_error);
    EXPECT_NO_THROW(make_annotated(new_class("C"), cur, M("m"), {}));
}

TEST(Value, Conversion) {
    auto e = new_class("Pair", {new_class("A"), new_layer("L")});
    ASSERT_TRUE(is_value(e));
    auto v = to_value(e);
    ASSERT_TRUE(v);
    EXPECT_TRUE(equal(to_expr(*v), e));
    EXPECT_FALSE(is_value(new_class("Pair", {var("x")})));
    EXPECT_FALSE(to_value(invoke(new_class("A"), "m")));
}

TEST(Tables, ChainsAreRootedAndCycleSafe) {
    auto p = fixture("lookup1");
    const auto& t = p.t();
    EXPECT_EQ(t.class_chain(C("C")), (std::vector<ClassName>{C("C"), C("D"), C("E"), object_class()}));
    EXPECT_EQ(t.layer_chain(L("L2")), (std::vector<LayerName>{L("L2"), L("L3"), base_layer()}));
    EXPECT_EQ(t.class_chain(object_class()), std::vector<ClassName>{object_class()});

    auto loop = parse_program_unvalidated("class A extends B { } class B extends A { } main { new A() }");
    EXPECT_LE(loop.t().class_chain(C("A")).size(), 3u);
}

// Every accepted fixture: both extends relations reach their roots.
TEST(Tables, FixtureHierarchiesReachRoots) {
    for (const auto& f : load_fixtures(fixture_dir())) {
        auto p = parse_program(f.source);
        for (const auto& c : p.t().classes()) EXPECT_EQ(p.t().class_chain(c.name).back(), object_class()) << f.id;
        for (const auto& l : p.t().layers()) EXPECT_EQ(p.t().layer_chain(l.name).back(), base_layer()) << f.id;
    }
}

namespace {
ValidationReport validate_text(const std::string& text) { return validate_tables(parse_program_unvalidated(text)); }
}  // namespace

TEST(Validate, SelfExtendingClassIsACycle) {
    auto r = validate_text("class A extends A { } main { new Object() }");
    EXPECT_TRUE(r.has(7));
}

TEST(Validate, LayerCycle) {
    auto r = validate_text("layer P extends Q { } layer Q extends P { } main { new Object() }");
    EXPECT_TRUE(r.has(7));
}

TEST(Validate, NoMethodsOnObject) {
    auto r = validate_text("class A extends Object { } layer P { A Object.m() { return new A(); } } main { new A() }");
    EXPECT_TRUE(r.has(8));
}

TEST(Validate, RootsNotRedeclared) {
    EXPECT_TRUE(validate_text("class Object extends Object { } main { new Object() }").has(2));
    EXPECT_TRUE(validate_text("layer Base { } main { new Object() }").has(5));
}

TEST(Validate, UnresolvedNames) {
    EXPECT_TRUE(validate_text("class A extends Missing { } main { new A() }").has(3));
    EXPECT_TRUE(validate_text("layer P extends Missing { } main { new Object() }").has(6));
    EXPECT_TRUE(validate_text("layer P requires Missing { } main { new Object() }").has(6));
    EXPECT_TRUE(validate_text("class A extends Object { Missing f; } main { new Object() }").has(3));
}

TEST(Validate, DuplicateDeclarations) {
    EXPECT_TRUE(validate_text("class A extends Object { } class A extends Object { } main { new A() }").has(1));
    EXPECT_TRUE(validate_text("layer P { } layer P { } main { new Object() }").has(4));
}

TEST(Validate, DuplicateMembers) {
    EXPECT_FALSE(validate_text("class A extends Object { A f; A f; } main { new Object() }").ok());
    EXPECT_FALSE(validate_text("class A extends Object { A m(A x, A x) { return x; } } main { new Object() }").ok());
    EXPECT_FALSE(validate_text("layer P { } layer Q requires P, P { } main { new Object() }").ok());
    EXPECT_FALSE(validate_text("layer P requires P { } main { new Object() }").ok());
}

TEST(Validate, LookupFixtureIsClean) {
    auto r = validate_tables(parse_program_unvalidated(read_file(fixture_dir() / "lookup2.cfj")));
    EXPECT_TRUE(r.ok());
}

TEST(Validate, EveryFixtureIsClean) {
    for (const auto& f : load_fixtures(fixture_dir()))
        EXPECT_TRUE(validate_tables(parse_program_unvalidated(f.source)).ok()) << f.id;
}
