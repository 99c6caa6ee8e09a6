#include "xdr/core/config.hpp"
#include "xdr/core/errors.hpp"
#include "xdr/core/manifest.hpp"
#include "xdr/core/phase.hpp"
#include "xdr/core/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace xdr;

TEST_CASE("defaults follow the published training setup") {
  const auto c = default_config();
  CHECK(c.hyper.tau == 0.2);
  CHECK(c.hyper.k == 50);
  CHECK(c.hyper.beta == 0.5);
  CHECK(c.hyper.lambda == 1.0);
  CHECK(c.hyper.learning_rate == 2.5e-4);
  CHECK(c.hyper.batch_size == 64);
  CHECK(c.schedule.od_epochs == 50);
  CHECK(c.schedule.pa1_epochs == 30);
  CHECK(c.schedule.pa2_epochs == 20);
  CHECK(c.schedule.total() == 100);
  CHECK(c.hyper.momentum_m == 0.999);
  CHECK(c.hyper.bank_capacity == 4096);
  CHECK(c.eval_k == std::vector<int>{50, 100, 200});
}

TEST_CASE("prompt templates for the benchmark domains") {
  CHECK(default_prompt_template("Art Painting") == "a painting of a {object}");
  CHECK(default_prompt_template("cartoon") == "a cartoon of a {object}");
  CHECK(default_prompt_template("photo") == "a photo of a {object}");
  CHECK(default_prompt_template("sketch") == "a sketch of a {object}");
  CHECK(default_prompt_template("Art") == "a painting of a {object}");
  CHECK(default_prompt_template("Clipart") == "a clipart of a {object}");
  CHECK(default_prompt_template("Real") == "a photo of a {object}");
  CHECK(default_prompt_template("Product") == "a product photo of a {object}");
  CHECK(default_prompt_template("infograph") == "an infograph of a {object}");
  CHECK(default_prompt_template("painting") == "a painting of a {object}");
  CHECK(default_prompt_template("quickdraw").empty());
}

TEST_CASE("domain spec validation") {
  DomainSpec ok{0, "sketch", "a sketch of a {object}"};
  CHECK_NOTHROW(validate_domain_spec(ok));
  CHECK(ok.object_slot() == 4);
  CHECK(ok.template_tokens().size() == 5);
  CHECK_THROWS_AS(validate_domain_spec({0, "x", "a sketch of a thing"}), ValidationError);
  CHECK_THROWS_AS(validate_domain_spec({0, "x", "{object} {object}"}), ValidationError);
  CHECK_THROWS_AS(validate_domain_spec({0, "x", "{object}"}), ValidationError);
  CHECK_THROWS_AS(validate_domain_specs({ok, ok}), ValidationError);
}

TEST_CASE("config parsing") {
  const auto c = parse_config("tau = 0.1\nk = 7 # comment\n\nod_epochs = 2\neval_k = 1, 5\n");
  CHECK(c.hyper.tau == 0.1);
  CHECK(c.hyper.k == 7);
  CHECK(c.schedule.od_epochs == 2);
  CHECK(c.eval_k == std::vector<int>{1, 5});
  CHECK(c.domains == default_domains());

  SUBCASE("unknown key is named") {
    try {
      parse_config("temperature = 0.2\n");
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("temperature") != std::string::npos);
    }
  }
  SUBCASE("k = 0 is rejected") {
    try {
      parse_config("k = 0\n");
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("k must be ≥ 1") != std::string::npos);
    }
  }
  SUBCASE("bad values") {
    CHECK_THROWS_AS(parse_config("tau = 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("tau = abc\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("momentum = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("use_od = false\nuse_pa1 = false\nuse_pa2 = false\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("dataset = tree\n"), ValidationError);
  }
  SUBCASE("domains from the file replace the defaults") {
    const auto d = parse_config("domains = clipart, infograph\n");
    REQUIRE(d.domains.size() == 2);
    CHECK(d.domains[0].name == "clipart");
    CHECK(d.domains[1].prompt_template == "an infograph of a {object}");
    CHECK(d.domains[1].id == 1);
    const auto e = parse_config("domain.ink.template = an ink drawing of a {object}\ndomain.photo.template = a photo of a {object}\n");
    CHECK(e.domains[0].name == "ink");
  }
}

TEST_CASE("config text round trip") {
  auto c = default_config();
  c.hyper.tau = 0.1 + 0.2;  // not exactly representable in short decimal
  c.hyper.learning_rate = 1.0 / 3.0;
  c.seed = 18446744073709551615ull;
  c.dataset.kind = "tree";
  c.dataset.roots = {{"photo", "/data/p"}, {"sketch", "/data/s"}};
  c.dataset.class_filter = {"dog", "cat"};
  c.ablation.use_pa1 = false;
  const auto back = parse_config(serialize_config(c));
  CHECK(back == c);
}

TEST_CASE("load_config reports missing files") {
  CHECK_THROWS_AS(load_config("/nonexistent/xdr.cfg"), IoError);
}

TEST_CASE("phase selection") {
  const PhaseSchedule s{50, 30, 20};
  CHECK(select_phase(0, s) == Phase::OD);
  CHECK(select_phase(49, s) == Phase::OD);
  CHECK(select_phase(50, s) == Phase::PA1);
  CHECK(select_phase(79, s) == Phase::PA1);
  CHECK(select_phase(80, s) == Phase::PA2);
  CHECK(select_phase(99, s) == Phase::PA2);
  CHECK_THROWS_AS(select_phase(100, s), RangeError);
  CHECK_THROWS_AS(select_phase(-1, s), RangeError);

  SUBCASE("monotone and covering") {
    for (PhaseSchedule t : {PhaseSchedule{3, 2, 4}, PhaseSchedule{1, 1, 1}, PhaseSchedule{0, 5, 1}}) {
      int last = -1;
      std::set<Phase> seen;
      for (int e = 0; e < t.total(); ++e) {
        const int p = static_cast<int>(select_phase(e, t));
        CHECK(p >= last);
        last = p;
        seen.insert(select_phase(e, t));
      }
      CHECK(seen.size() == static_cast<std::size_t>((t.od_epochs > 0) + (t.pa1_epochs > 0) + (t.pa2_epochs > 0)));
    }
  }
  CHECK_THROWS_AS(validate_schedule({-1, 0, 0}), ValidationError);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
  auto a = make_rng(3, {4});
  a.discard(17);
  auto b = rng_from_state(rng_state(a));
  CHECK(a == b);
  CHECK(a() == b());
  CHECK_THROWS(rng_from_state("not a state"));
}

TEST_CASE("label taint flag") {
  EvalLabel l(3);
  CHECK_FALSE(l.was_read());
  CHECK(l.read_for_evaluation() == 3);
  CHECK(l.was_read());
  l.clear_read_flag();
  CHECK_FALSE(l.was_read());
  EvalLabel none;
  CHECK_FALSE(none.has_value());
  CHECK_THROWS(none.read_for_evaluation());
}

TEST_CASE("manifest records config and ablation row") {
  auto c = default_config();
  c.ablation.use_od = false;
  const auto m = make_manifest(c, "train");
  CHECK(m["command"] == "train");
  CHECK(m["ablation"]["row"] == "PA1+PA2");
  CHECK(m["config"]["k"] == "50");
  CHECK(m["adopted_defaults"].contains("momentum"));
  CHECK(m["adopted_defaults"].contains("bank_capacity"));
  CHECK(ablation_row({true, false, false}) == "OD");
  CHECK(ablation_row({true, true, true}) == "OD+PA1+PA2");

  const auto path = std::filesystem::temp_directory_path() / "xdr_test_manifest" / "m.json";
  write_json(path, m);
  std::ifstream in(path);
  CHECK(nlohmann::json::parse(in) == m);
}
