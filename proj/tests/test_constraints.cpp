#include <doctest.h>

#include <algorithm>
#include <random>

#include "scfuzz/constraints.hpp"
#include "scfuzz/generator.hpp"

using namespace scfuzz;

static Quad quad(std::set<std::string> t_bt, std::set<std::string> t_nbt,
                 std::set<std::string> a_bt = {}, std::set<std::string> a_nbt = {}) {
    Quad q;
    q.t_bt = std::move(t_bt);
    q.t_nbt = std::move(t_nbt);
    q.a_bt = std::move(a_bt);
    q.a_nbt = std::move(a_nbt);
    return q;
}

TEST_CASE("object paths") {
    ObjectPath p = parse_path("o2.__index__");
    CHECK(p.root == "o2");
    REQUIRE(p.segments.size() == 1);
    CHECK(p.segments[0] == "__index__");
    CHECK(p.text() == "o2.__index__");
    CHECK(parse_path("o1").is_root());
    CHECK(parse_path("o1").contains(p) == false);
    CHECK(parse_path("o2").contains(p));
    CHECK_FALSE(p.contains(p));

    // Bracketed segments may contain dots and quotes.
    ObjectPath q = parse_path("rec.[\"a.b\"].x");
    REQUIRE(q.segments.size() == 2);
    CHECK(q.segments[0] == "[\"a.b\"]");
    CHECK(q.segments[1] == "x");
    CHECK(parse_path(q.text()) == q);
    CHECK_THROWS_AS(parse_path(""), ConfigError);
    CHECK_THROWS_AS(parse_path("a..b"), ConfigError);
}

TEST_CASE("validate_quad") {
    TypeLattice lat = TypeLattice::default_lattice();
    CHECK(validate_quad(quad({"dict"}, {"float"}), lat));
    CHECK_FALSE(validate_quad(quad({"bool"}, {"long"}), lat));
    CHECK_FALSE(validate_quad(quad({}, {}, {"__index__"}, {"__index__"}), lat));
    // The other direction of comparability stays legal: an integer that is
    // not a bool.
    CHECK(validate_quad(quad({"long"}, {"bool"}), lat));
    CHECK_THROWS_AS(validate_quad(quad({"ghost"}, {}), lat), ConfigError);

    Quad exact = quad({"dict"}, {});
    exact.exact_type = "dict";
    CHECK(validate_quad(exact, lat));
    exact.forbidden_exact = {"dict"};
    CHECK_FALSE(validate_quad(exact, lat));
    Quad dangling;
    dangling.exact_type = "dict";
    CHECK_FALSE(validate_quad(dangling, lat));  // exact type must sit in t_bt
}

TEST_CASE("validate_quad idempotent under re-insertion") {
    TypeLattice lat = TypeLattice::default_lattice();
    Quad q = quad({"dict"}, {"float"});
    bool before = validate_quad(q, lat);
    q.t_bt.insert("dict");
    CHECK(validate_quad(q, lat) == before);
}

static StructureConstraint worked_example_sc() {
    StructureConstraint sc;
    Quad& root = sc.ensure_path(parse_path("o2"));
    root.t_nbt = {"float", "long"};
    root.a_nbt = {"__index__"};
    sc.ensure_path(parse_path("o2.__index__"));
    return sc;
}

TEST_CASE("canonical key is deterministic and order-insensitive") {
    StructureConstraint a = worked_example_sc();
    CHECK(canonical_key(a) ==
          R"({"o2":{"a_nbt":["__index__"],"t_nbt":["float","long"]},"o2.__index__":{}})");
    CHECK(canonical_key(a) == canonical_key(worked_example_sc()));

    // Same content, different insertion order.
    StructureConstraint b;
    b.ensure_path(parse_path("o2.__index__"));
    Quad& root = b.mappings[parse_path("o2")];
    root.a_nbt.insert("__index__");
    root.t_nbt.insert("long");
    root.t_nbt.insert("float");
    CHECK(canonical_key(b) == canonical_key(a));

    StructureConstraint c = worked_example_sc();
    c.mappings[parse_path("o2")].a_nbt.insert("__len__");
    CHECK(canonical_key(c) != canonical_key(a));
}

TEST_CASE("canonical key omits untouched argument roots") {
    StructureConstraint sc = worked_example_sc();
    sc.ensure_path(parse_path("o1"));  // second argument, never constrained
    CHECK(canonical_key(sc) ==
          R"({"o2":{"a_nbt":["__index__"],"t_nbt":["float","long"]},"o2.__index__":{}})");
    StructureConstraint empty;
    empty.ensure_path(parse_path("o1"));
    empty.ensure_path(parse_path("o2"));
    CHECK(canonical_key(empty) == "{}");
}

TEST_CASE("constraint JSON round trip") {
    StructureConstraint sc = worked_example_sc();
    Quad& root = sc.mappings[parse_path("o2")];
    root.forbidden_exact = {"dict"};
    std::string key = canonical_key(sc);
    StructureConstraint back = constraint_from_json(key);
    CHECK(canonical_key(back) == key);
    CHECK_THROWS(constraint_from_json("[1,2]"));
    CHECK_THROWS(constraint_from_json("not json"));
}

TEST_CASE("satisfied_by on the worked example") {
    Universe u(TypeLattice::default_lattice());
    StructureConstraint sc = worked_example_sc();

    std::map<std::string, ValuePtr> str_input{
        {"o2", u.make_scalar("str", Scalar{std::string{"abc"}})}};
    CHECK(satisfied_by(sc, str_input, u));

    std::map<std::string, ValuePtr> long_input{
        {"o2", u.make_scalar("long", Scalar{std::int64_t{5}})}};
    CHECK_FALSE(satisfied_by(sc, long_input, u));

    // dict carries no __index__ either; satisfied.
    std::map<std::string, ValuePtr> dict_input{{"o2", u.make_collection("dict", {})}};
    CHECK(satisfied_by(sc, dict_input, u));
}

TEST_CASE("satisfied_by element and exact semantics") {
    Universe u(TypeLattice::default_lattice());
    StructureConstraint sc;
    Quad& root = sc.ensure_path(parse_path("rec"));
    root.t_bt = {"dict"};
    root.a_bt = {"names"};
    sc.ensure_path(parse_path("rec.names"));

    ValuePtr with = u.make_collection("dict", {{"names", u.make_collection("list", {})}});
    ValuePtr without = u.make_collection("dict", {});
    CHECK(satisfied_by(sc, {{"rec", with}}, u));
    CHECK_FALSE(satisfied_by(sc, {{"rec", without}}, u));

    StructureConstraint exact;
    Quad& q = exact.ensure_path(parse_path("o"));
    q.t_bt = {"dict"};
    q.exact_type = "dict";
    ValuePtr bare = u.make_collection("dict", {});
    ValuePtr sub = u.make_object(u.add_synthesized({"dict"}), {}, std::nullopt, std::nullopt);
    CHECK(satisfied_by(exact, {{"o", bare}}, u));
    CHECK_FALSE(satisfied_by(exact, {{"o", sub}}, u));

    StructureConstraint forbidden;
    Quad& fq = forbidden.ensure_path(parse_path("o"));
    fq.t_bt = {"dict"};
    fq.forbidden_exact = {"dict"};
    CHECK_FALSE(satisfied_by(forbidden, {{"o", bare}}, u));
    CHECK(satisfied_by(forbidden, {{"o", sub}}, u));
}

TEST_CASE("unresolvable paths falsify unless only forbidden") {
    Universe u(TypeLattice::default_lattice());
    // A constrained child path that cannot resolve falsifies the whole
    // conjunction even if the parent quad passes.
    StructureConstraint sc;
    sc.ensure_path(parse_path("o"));
    Quad& child = sc.ensure_path(parse_path("o.__index__"));
    child.t_bt = {"float"};
    std::map<std::string, ValuePtr> str_input{
        {"o", u.make_scalar("str", Scalar{std::string{"s"}})}};
    CHECK_FALSE(satisfied_by(sc, str_input, u));

    // Intrinsic methods resolve through their canonical stubs.
    std::map<std::string, ValuePtr> long_input{
        {"o", u.make_scalar("long", Scalar{std::int64_t{3}})}};
    StructureConstraint intr;
    intr.ensure_path(parse_path("o"));
    Quad& ichild = intr.ensure_path(parse_path("o.__index__"));
    ichild.t_bt = {"long"};
    CHECK(satisfied_by(intr, long_input, u));
}

// Random constraints and inputs: adding an element to any quad set never
// turns an unsatisfied constraint satisfied.
TEST_CASE("satisfaction is monotone under strengthening") {
    Universe u(TypeLattice::default_lattice());
    std::mt19937_64 rng(99);
    const std::vector<std::string> types{"long", "float", "str", "dict", "list", "bool"};
    const std::vector<std::string> keys{"__index__", "__len__", "names", "x"};

    for (int round = 0; round < 300; ++round) {
        StructureConstraint sc;
        Quad& q = sc.ensure_path(parse_path("o"));
        for (int i = 0; i < 2; ++i) {
            if (rng() % 2) q.t_bt.insert(types[rng() % types.size()]);
            if (rng() % 2) q.t_nbt.insert(types[rng() % types.size()]);
            if (rng() % 2) q.a_bt.insert(keys[rng() % keys.size()]);
            if (rng() % 2) q.a_nbt.insert(keys[rng() % keys.size()]);
        }
        ValuePtr v;
        switch (rng() % 4) {
            case 0: v = u.make_scalar("long", Scalar{std::int64_t{1}}); break;
            case 1: v = u.make_scalar("str", Scalar{std::string{"s"}}); break;
            case 2: v = u.make_collection("dict", {{"names", u.make_collection("list", {})}}); break;
            default: v = u.make_collection("list", {}); break;
        }
        std::map<std::string, ValuePtr> inputs{{"o", v}};
        bool before = satisfied_by(sc, inputs, u);

        StructureConstraint harder = sc;
        Quad& hq = harder.mappings[parse_path("o")];
        switch (rng() % 4) {
            case 0: hq.t_bt.insert(types[rng() % types.size()]); break;
            case 1: hq.t_nbt.insert(types[rng() % types.size()]); break;
            case 2: hq.a_bt.insert(keys[rng() % keys.size()]); break;
            default: hq.a_nbt.insert(keys[rng() % keys.size()]); break;
        }
        bool after = satisfied_by(harder, inputs, u);
        if (!before) CHECK_FALSE(after);
    }
}

TEST_CASE("equal canonical keys agree on satisfaction") {
    Universe u(TypeLattice::default_lattice());
    StructureConstraint a = worked_example_sc();
    StructureConstraint b = constraint_from_json(canonical_key(a));
    REQUIRE(canonical_key(a) == canonical_key(b));
    std::vector<ValuePtr> probes{
        u.make_scalar("str", Scalar{std::string{"abc"}}),
        u.make_scalar("long", Scalar{std::int64_t{0}}),
        u.make_collection("dict", {}),
        u.make_scalar("float", Scalar{1.0}),
    };
    for (const auto& v : probes) {
        std::map<std::string, ValuePtr> inputs{{"o2", v}};
        CHECK(satisfied_by(a, inputs, u) == satisfied_by(b, inputs, u));
    }
}
