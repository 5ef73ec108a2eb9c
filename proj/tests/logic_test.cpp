#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>

#include "doctest.h"
#include "srl/logic.hpp"

using namespace srl;

namespace {

SignaturePtr make_sig_pr() {
  auto sig = std::make_shared<Signature>();
  sig->add_sort("person");
  sig->add_relation("P", {});
  sig->add_relation("R", {0});
  return sig;
}

SignaturePtr make_sig_rq() {
  auto sig = std::make_shared<Signature>();
  sig->add_sort("person");
  sig->add_relation("R", {0});
  sig->add_relation("Q", {0});
  return sig;
}

}  // namespace

TEST_CASE("holds evaluates truth-functionally") {
  auto sig = make_sig_rq();
  World w(sig, DomainAssignment{{3}});
  w.set(0, {0}, true);  // R(e1)
  w.set(1, {1}, true);  // Q(e2)

  CHECK(holds(w, *f_true(), {}));
  CHECK_FALSE(holds(w, *f_false(), {}));

  auto rx = f_atom(0, {Term::var("x", 0)});
  CHECK_FALSE(holds(w, *f_not(rx), {{"x", 0}}));
  CHECK(holds(w, *f_not(rx), {{"x", 1}}));

  auto f = f_and(f_atom(0, {Term::var("x", 0)}), f_atom(1, {Term::var("y", 0)}));
  CHECK(holds(w, *f, {{"x", 0}, {"y", 1}}));
  CHECK_FALSE(holds(w, *f, {{"x", 1}, {"y", 1}}));

  CHECK_THROWS_AS(holds(w, *rx, {}), ValidationError);
}

TEST_CASE("count_true_groundings multiplies independent literals") {
  auto sig = make_sig_rq();
  World w(sig, DomainAssignment{{3}});
  w.set(0, {0}, true);
  w.set(0, {1}, true);
  w.set(1, {0}, true);
  w.set(1, {1}, true);
  w.set(1, {2}, true);

  auto f = f_and(f_atom(0, {Term::var("x", 0)}), f_atom(1, {Term::var("y", 0)}));
  CHECK(count_true_groundings(w, *f) == 6);  // |R| * |Q| = 2 * 3

  auto shared =
      f_and(f_atom(0, {Term::var("x", 0)}), f_atom(1, {Term::var("x", 0)}));
  World w2(sig, DomainAssignment{{3}});
  w2.set(0, {0}, true);
  w2.set(1, {0}, true);
  CHECK(count_true_groundings(w2, *shared) == 1);

  // Tautologies count every grounding.
  auto taut = f_or(f_atom(0, {Term::var("x", 0)}),
                   f_not(f_atom(0, {Term::var("x", 0)})));
  CHECK(count_true_groundings(w, *taut) == 3);
  CHECK(count_true_groundings(w, *f_true()) == 1);  // no free variables
}

TEST_CASE("variable-free formulas count as 0 or 1") {
  auto sig = make_sig_pr();
  World w(sig, DomainAssignment{{2}});
  auto p = f_atom(0, {});
  CHECK(count_true_groundings(w, *p) == 0);
  w.set(0, {}, true);
  CHECK(count_true_groundings(w, *p) == 1);
}

TEST_CASE("free_variables returns first-occurrence order") {
  auto sig = make_sig_rq();
  auto f = f_or(f_atom(0, {Term::var("x", 0)}),
                f_and(f_atom(1, {Term::var("y", 0)}),
                      f_atom(0, {Term::var("x", 0)})));
  auto vars = free_variables(*f);
  REQUIRE(vars.size() == 2);
  CHECK(vars[0].first == "x");
  CHECK(vars[1].first == "y");
  CHECK(free_variables(*f_atom(0, {})).empty());

  auto swapped = std::make_shared<Signature>();
  swapped->add_sort("s");
  swapped->add_relation("R", {0, 0});
  auto g = f_or(f_atom(0, {Term::var("x", 0), Term::var("y", 0)}),
                f_atom(0, {Term::var("y", 0), Term::var("x", 0)}));
  auto gv = free_variables(*g);
  REQUIRE(gv.size() == 2);
  CHECK(gv[0].first == "x");
  CHECK(gv[1].first == "y");
}

TEST_CASE("world enumeration is complete, distinct, and ordered") {
  auto sig = make_sig_pr();
  DomainAssignment domains{{1}};
  CHECK(world_count(*sig, domains) == 4);

  std::vector<std::string> records;
  for_each_world(sig, domains,
                 [&](const World& w) { records.push_back(w.canonical_record()); });
  REQUIRE(records.size() == 4);
  // Bit k of the index toggles ground atom k: P first, then R(e1).
  CHECK(records[0] == "");
  CHECK(records[1] == "P");
  CHECK(records[2] == "R(e1)");
  CHECK(records[3] == "P;R(e1)");
  std::sort(records.begin(), records.end());
  CHECK(std::unique(records.begin(), records.end()) == records.end());

  auto unary = std::make_shared<Signature>();
  unary->add_sort("s");
  unary->add_relation("R", {0});
  CHECK(world_count(*unary, DomainAssignment{{2}}) == 4);

  auto prop = std::make_shared<Signature>();
  prop->add_sort("s");
  prop->add_relation("P", {});
  CHECK(world_count(*prop, DomainAssignment{{1}}) == 2);
}

TEST_CASE("state-space cap is an explicit error") {
  auto sig = std::make_shared<Signature>();
  sig->add_sort("s");
  sig->add_relation("R", {0, 0});
  DomainAssignment domains{{8}};  // 64 atoms
  CHECK_THROWS_AS(world_count(*sig, domains, 1 << 20), CapError);
  CHECK_THROWS_WITH_AS(world_count(*sig, domains, 1 << 20),
                       doctest::Contains("state space too large"), CapError);
}

TEST_CASE("arity cap is enforced") {
  Signature sig;
  sig.add_sort("s");
  CHECK_THROWS_AS(sig.add_relation("R", {0, 0, 0, 0}), CapError);
}

TEST_CASE("reduct keeps retained interpretations") {
  auto sig = make_sig_pr();
  World w(sig, DomainAssignment{{2}});
  w.set(0, {}, true);
  w.set(1, {0}, true);

  World r = reduct(w, {"P"});
  CHECK(r.signature().relation_count() == 1);
  CHECK(r.get(0, {}));

  World full = reduct(w, {"P", "R"});
  CHECK(full.canonical_record() == w.canonical_record());

  CHECK_THROWS_AS(reduct(w, {"Z"}), ValidationError);
}

TEST_CASE("element renaming leaves counts unchanged") {
  auto sig = make_sig_rq();
  DomainAssignment domains{{3}};
  std::mt19937_64 rng(11);
  auto f = f_implies(f_atom(0, {Term::var("x", 0)}),
                     f_and(f_atom(1, {Term::var("y", 0)}),
                           f_atom(0, {Term::var("y", 0)})));
  for (int trial = 0; trial < 30; ++trial) {
    World w(sig, domains);
    for (int r = 0; r < 2; ++r)
      for (int e = 0; e < 3; ++e) w.set(r, {e}, (rng() & 1) != 0);
    std::vector<int> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    World mapped(sig, domains);
    for (int r = 0; r < 2; ++r)
      for (int e = 0; e < 3; ++e) mapped.set(r, {perm[e]}, w.get(r, {e}));
    CHECK(count_true_groundings(w, *f) == count_true_groundings(mapped, *f));
  }
}

TEST_CASE("grounding-count bounds hold on random worlds") {
  auto sig = make_sig_rq();
  DomainAssignment domains{{2}};
  auto f = f_and(f_atom(0, {Term::var("x", 0)}), f_atom(1, {Term::var("y", 0)}));
  CHECK(total_grounding_count(*f, domains) == 4);
  for_each_world(sig, domains, [&](const World& w) {
    auto c = count_true_groundings(w, *f);
    CHECK(c <= 4);
  });
}

TEST_CASE("tuple indexing round-trips with the first argument most significant") {
  auto sig = std::make_shared<Signature>();
  sig->add_sort("s");
  sig->add_relation("R", {0, 0});
  World w(sig, DomainAssignment{{3}});
  CHECK(w.tuple_index(0, {0, 0}) == 0);
  CHECK(w.tuple_index(0, {0, 2}) == 2);
  CHECK(w.tuple_index(0, {1, 0}) == 3);
  for (std::uint64_t i = 0; i < 9; ++i)
    CHECK(w.tuple_index(0, w.tuple_from_index(0, i)) == i);
}
