#include <gtest/gtest.h>

#include "support.hpp"

using namespace cfj;
using namespace cfj::test;

TEST(Parse, SmallestProgram) {
    auto p = parse_program("class C extends Object { } main { new C() }");
    EXPECT_EQ(p.t().classes().size(), 1u);
    EXPECT_TRUE(p.t().layers().empty());
    const auto* n = as<NewClass>(p.main);
    ASSERT_TRUE(n);
    EXPECT_EQ(n->cls, C("C"));
    EXPECT_TRUE(n->args.empty());
}

TEST(Parse, LookupListing) {
    auto p = fixture("lookup1");
    EXPECT_EQ(p.t().classes().size(), 3u);
    EXPECT_EQ(p.t().layers().size(), 3u);
    EXPECT_EQ(p.t().superlayer(L("L2")), L("L3"));
    EXPECT_EQ(p.t().superlayer(L("L1")), base_layer());
    EXPECT_EQ(p.t().superclass(C("C")), C("D"));
}

TEST(Parse, LayerHeaderDefaults) {
    auto p = parse_program("layer P { } swappable layer Q extends P requires R { } layer R { } main { new Object() }");
    const auto* q = p.t().find_layer(L("Q"));
    ASSERT_TRUE(q);
    EXPECT_TRUE(q->swappable);
    EXPECT_EQ(q->superlayer, L("P"));
    EXPECT_EQ(q->requires_set(), set({"R"}));
    const auto* pl = p.t().find_layer(L("P"));
    EXPECT_FALSE(pl->swappable);
    EXPECT_TRUE(pl->requires_set().empty());
}

TEST(Parse, LayerNamesInTypesAndNew) {
    auto p = parse_program("class A extends Object { P f; A m(P x) { return new A(new P()); } } layer P { } "
                           "main { new A(new P()) }");
    const auto* a = p.t().find_class(C("A"));
    ASSERT_TRUE(a);
    EXPECT_TRUE(a->fields[0].type.is_layer());
    EXPECT_TRUE(a->methods[0].params[0].type.is_layer());
    const auto* n = as<NewClass>(p.main);
    ASSERT_TRUE(n);
    EXPECT_TRUE(as<NewLayer>(n->args[0]));
}

TEST(Parse, SwapTakesActivationFirst) {
    auto p = parse_program("swappable layer S { } layer T extends S { } main { swap (new T(), S) { new Object() } }");
    const auto* s = as<Swap>(p.main);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->swappable, L("S"));
    EXPECT_TRUE(as<NewLayer>(s->layer));
}

TEST(Parse, PostfixChains) {
    auto p = parse_program("class A extends Object { A f; A m() { return this.f.m().f; } } main { new Object() }");
    const auto* g = as<FieldGet>(p.t().find_class(C("A"))->methods[0].body);
    ASSERT_TRUE(g);
    EXPECT_TRUE(as<Invoke>(g->target));
}

TEST(ParseError, WithNeedsBody) {
    try {
        parse_program("layer P { } main { with new P() { } }");
        FAIL() << "accepted an empty with body";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.span().line, 1);
        EXPECT_FALSE(e.expected().empty());
    }
}

TEST(ParseError, Positions) {
    try {
        parse_program("class A extends Object {\n  A m() { return ; }\n}\nmain { new A() }");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.span().line, 2);
        EXPECT_EQ(e.span().column, 18);
    }
}

TEST(ParseError, ContextRestrictions) {
    EXPECT_THROW(parse_program("class A extends Object { A m() { return proceed(); } } main { new A() }"), ParseError);
    EXPECT_THROW(parse_program("class A extends Object { A m() { return superproceed(); } } main { new A() }"),
                 ParseError);
    EXPECT_THROW(parse_program("main { proceed() }"), ParseError);
    EXPECT_THROW(parse_program("main { super.m() }"), ParseError);
}

TEST(ParseError, Misc) {
    EXPECT_THROW(parse_program("main { }"), ParseError);
    EXPECT_THROW(parse_program("class A extends Object { }"), ParseError);
    EXPECT_THROW(parse_program("main { new A() } trailing"), ParseError);
    EXPECT_THROW(parse_program("main { new A()< }"), ParseError);
    EXPECT_THROW(parse_program("class extends Object { } main { new Object() }"), ParseError);
}

TEST(ParseError, ValidationRunsAfterParsing) {
    try {
        parse_program("class A extends A { } main { new Object() }");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_TRUE(e.report().has(7));
    }
}

TEST(Parse, CommentsAreIgnored) {
    auto p = parse_program("// header\nclass A extends Object { } // trailing\nmain { // x\n new A() }");
    EXPECT_EQ(render(p.main), "new A()");
}

TEST(Render, Basics) {
    EXPECT_EQ(render(new_layer("L1")), "new L1()");
    EXPECT_EQ(render(seq({})), "•");
    EXPECT_EQ(render(seq({"L1"})), "L1");
    EXPECT_EQ(render(seq({"L1", "L2"})), "(L1;L2)");
    EXPECT_EQ(render_active(seq({"L1", "L2"})), "[L1;L2]");
    EXPECT_EQ(render_active(seq({})), "[]");
    EXPECT_EQ(render(set({"B", "A"})), "{A, B}");
}

TEST(Render, RuntimeForms) {
    auto full = seq({"L1", "L2", "L3"});
    auto triple = make_expr(make_annotated(new_class("C"), make_triple(C("C"), full, full), M("m"), {}));
    EXPECT_EQ(render(triple), "new C()<C,(L1;L2;L3),(L1;L2;L3)>.m()");
    auto quad = make_expr(make_annotated(new_class("C"), make_quad(C("C"), L("L4"), full, full), M("m"), {}));
    EXPECT_EQ(render(quad), "new C()<C,L4,(L1;L2;L3),(L1;L2;L3)>.m()");
}

TEST(Render, MainExpressionReparses) {
    auto p = fixture("game");
    auto text = render(p.main);
    EXPECT_TRUE(equal(parse_main_expr(p.t(), text), p.main));
}

TEST(Render, RuntimeFormsAreNotSource) {
    auto p = fixture("lookup2");
    auto r = eval(p.t(), p.main, 2);
    ASSERT_EQ(r.trace.entries.size(), 2u);
    EXPECT_THROW(parse_main_expr(p.t(), render(r.trace.entries[1].expr_after)), ParseError);
}

// parse . render . parse is a fixpoint on every fixture.
TEST(RoundTrip, Fixtures) {
    for (const auto& f : load_fixtures(fixture_dir())) {
        auto p1 = parse_program(f.source);
        auto text = render(p1);
        auto p2 = parse_program(text);
        EXPECT_EQ(render(p2), text) << f.id;
        EXPECT_TRUE(equal(p1.main, p2.main)) << f.id;
        ASSERT_EQ(p1.t().classes().size(), p2.t().classes().size());
        for (std::size_t i = 0; i < p1.t().classes().size(); ++i) {
            const auto& a = p1.t().classes()[i];
            const auto& b = p2.t().classes()[i];
            EXPECT_EQ(a.name, b.name);
            EXPECT_EQ(a.superclass, b.superclass);
            ASSERT_EQ(a.methods.size(), b.methods.size());
            for (std::size_t j = 0; j < a.methods.size(); ++j)
                EXPECT_TRUE(equal(a.methods[j].body, b.methods[j].body)) << f.id;
        }
        ASSERT_EQ(p1.t().layers().size(), p2.t().layers().size());
        for (std::size_t i = 0; i < p1.t().layers().size(); ++i) {
            const auto& a = p1.t().layers()[i];
            const auto& b = p2.t().layers()[i];
            EXPECT_EQ(a.name, b.name);
            EXPECT_EQ(a.superlayer, b.superlayer);
            EXPECT_EQ(a.swappable, b.swappable);
            EXPECT_EQ(a.requires_set(), b.requires_set());
            ASSERT_EQ(a.partial_methods.size(), b.partial_methods.size());
            for (std::size_t j = 0; j < a.partial_methods.size(); ++j)
                EXPECT_TRUE(equal(a.partial_methods[j].body, b.partial_methods[j].body)) << f.id;
        }
    }
}

// Rendering a program is deterministic and stable under a second trip.
TEST(RoundTrip, RenderIsStable) {
    for (const auto& f : load_fixtures(fixture_dir())) {
        auto once = render(parse_program(f.source));
        EXPECT_EQ(render(parse_program(once)), once) << f.id;
    }
}

TEST(RoundTrip, MalformedCorpus) {
    for (const auto& entry : std::filesystem::directory_iterator(data_dir())) {
        if (entry.path().extension() != ".cfj") continue;
        auto text = read_file(entry.path());
        EXPECT_ANY_THROW(parse_program(text)) << entry.path().filename();
    }
}
