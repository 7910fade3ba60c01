#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "sbmlab/config.hpp"
#include "sbmlab/runner.hpp"

using namespace sbm;

namespace {

const char* kMinimalDuality = R"(
[grid]
L = 5
N = 64
[initial]
u1 = gaussian_bump mass=1.5 width=0.5 + constant 0.2
u2 = gaussian_bump mass=1.0 width=0.5
[test_functions]
phi = gaussian_bump mass=1.0 width=0.5
[run]
kind = duality
T = 0.25
)";

std::string error_text(const ParseResult& r) {
    std::string out;
    for (const auto& e : r.errors) out += std::to_string(e.line) + ": " + e.message + "\n";
    return out;
}

}  // namespace

TEST_CASE("minimal duality config parses with defaults filled") {
    const ParseResult r = parse_config(kMinimalDuality);
    REQUIRE_MESSAGE(r.ok(), error_text(r));
    const ExperimentConfig& cfg = *r.config;
    CHECK(cfg.kind == ExperimentKind::Duality);
    CHECK(cfg.lambda == 0.5);
    CHECK(cfg.z_max == 4.0);
    CHECK(cfg.clip == NegativityPolicy::ClipState);
    CHECK(cfg.effective_replicas() == 10000);
    CHECK(cfg.horizon == 0.25);
    CHECK(cfg.points == 64);
}

TEST_CASE("lambda above 1 names the stability bound with its line") {
    std::string text = kMinimalDuality;
    text += "[scheme]\nlambda = 1.5\n";
    const ParseResult r = parse_config(text);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.message.find("stability bound") != std::string::npos && e.line > 0) found = true;
    CHECK(found);
}

TEST_CASE("horizon violating the torus rule names the rule") {
    std::string text = R"(
[grid]
L = 5
N = 64
[initial]
u1 = constant 1
u2 = constant 1
[test_functions]
phi = gaussian_bump mass=1 width=0.5
[run]
kind = duality
T = 100
)";
    const ParseResult r = parse_config(text);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.message.find("torus-horizon rule") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("longtime kinds are exempt from the torus-horizon rule") {
    const char* text = R"(
[grid]
L = 10
N = 128
[initial]
v0 = constant 1
[test_functions]
g = gaussian_bump mass=1 width=0.5
[run]
kind = pam-decay
T = 20
replicas = 100
)";
    const ParseResult r = parse_config(text);
    CHECK_MESSAGE(r.ok(), error_text(r));
}

TEST_CASE("unknown keys and sections are reported with line numbers") {
    std::string text = kMinimalDuality;
    text += "[grid]\nM = 3\n";
    ParseResult r = parse_config(text);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.message.find("unknown key 'M'") != std::string::npos && e.line > 0) found = true;
    CHECK(found);

    r = parse_config("[nope]\nx = 1\n");
    bool section_err = false;
    for (const auto& e : r.errors)
        if (e.message.find("unknown section") != std::string::npos) section_err = true;
    CHECK(section_err);
}

TEST_CASE("malformed values, duplicates and missing keys") {
    ParseResult r = parse_config("[run]\nkind = duality\nT = abc\n");
    CHECK(!r.ok());

    r = parse_config("[grid]\nL = 5\nL = 6\n[run]\nkind = duality\nT = 0.1\n");
    bool dup = false;
    for (const auto& e : r.errors)
        if (e.message.find("duplicate key") != std::string::npos) dup = true;
    CHECK(dup);

    r = parse_config("[run]\nkind = duality\n");  // no T, no data
    CHECK(!r.ok());

    r = parse_config("x = 1\n");
    bool outside = false;
    for (const auto& e : r.errors)
        if (e.message.find("outside any") != std::string::npos) outside = true;
    CHECK(outside);

    r = parse_config("[run]\nkind = flying-circus\nT = 1\n");
    bool unknown_kind = false;
    for (const auto& e : r.errors)
        if (e.message.find("unknown experiment kind") != std::string::npos) unknown_kind = true;
    CHECK(unknown_kind);
}

TEST_CASE("descriptor grammar") {
    CHECK(parse_descriptor("constant 2.5").describe() == "constant 2.5");
    CHECK_THROWS_AS(parse_descriptor("constant"), std::invalid_argument);
    CHECK_THROWS_AS(parse_descriptor("gaussian_bump"), std::invalid_argument);
    CHECK_THROWS_AS(parse_descriptor("gaussian_bump mass=1 amplitude=1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_descriptor("gaussian_bump mass=1 widht=0.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_descriptor("wiggle a=1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_descriptor("sine amplitude=1 k=0.5"), std::invalid_argument);
    CHECK_NOTHROW(parse_descriptor("smooth_cutoff_bump amplitude=1 n=1"));
    CHECK_NOTHROW(parse_descriptor("table 1 2 3 4"));
    CHECK_NOTHROW(parse_descriptor("zero"));
    const InitialData sum = parse_descriptor("gaussian_bump mass=1 width=0.5 + constant 0.2 + sine amplitude=0.1 k=2");
    CHECK(sum.terms.size() == 3);
    CHECK(!sum.integrable_like());
}

TEST_CASE("negative initial data is rejected at parse time") {
    std::string text = R"(
[grid]
L = 5
N = 64
[initial]
u1 = gaussian_bump mass=-1.0 width=0.5
u2 = constant 1
[test_functions]
phi = gaussian_bump mass=1 width=0.5
[run]
kind = duality
T = 0.25
)";
    const ParseResult r = parse_config(text);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.message.find("nonnegative") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("global-extinction rejects non-integrable initial descriptors at parse time") {
    const char* text = R"(
[grid]
L = 5
N = 64
[test_functions]
phi = constant 1
psi = gaussian_bump mass=1 width=0.5
[run]
kind = global-extinction
T = 10
replicas = 100
)";
    const ParseResult r = parse_config(text);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.message.find("integrable") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("rho other than 1 is rejected for duality-family kinds") {
    std::string text = kMinimalDuality;
    text += "[model]\nkind = sbm\nrho = 0.5\n";
    const ParseResult r = parse_config(text);
    CHECK(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.message.find("rho = 1") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("clip accepts on, off and full-truncation") {
    std::string text = kMinimalDuality;
    text += "[scheme]\nclip = full-truncation\n";
    const ParseResult r = parse_config(text);
    REQUIRE_MESSAGE(r.ok(), error_text(r));
    CHECK(r.config->clip == NegativityPolicy::FullTruncation);
    CHECK(r.config->hash() != parse_config(kMinimalDuality).config->hash());

    std::string bad = kMinimalDuality;
    bad += "[scheme]\nclip = maybe\n";
    CHECK(!parse_config(bad).ok());
}

TEST_CASE("config hash is stable and sensitive") {
    const ParseResult a = parse_config(kMinimalDuality);
    const ParseResult b = parse_config(kMinimalDuality);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.config->hash() == b.config->hash());

    ExperimentConfig changed = *a.config;
    changed.base_seed += 1;
    CHECK(changed.hash() != a.config->hash());
}

TEST_CASE("kind names round-trip and list covers all 8") {
    const auto names = all_kind_names();
    CHECK(names.size() == 8);
    for (const auto& n : names) {
        const auto k = kind_from_name(n);
        REQUIRE(k.has_value());
        CHECK(std::string(kind_name(*k)) == n);
    }
    CHECK(!kind_from_name("bogus").has_value());
}

TEST_CASE("list and describe") {
    CHECK(list_experiments().size() == 8);
    const std::string d = describe_experiment("global-extinction");
    CHECK(d.find("total") != std::string::npos);
    CHECK_THROWS_AS(describe_experiment("bogus"), std::invalid_argument);
    for (const auto& k : list_experiments()) CHECK(!describe_experiment(k).empty());
}

TEST_CASE("resolve_time_grid rounds lambda down and lands checkpoints on steps") {
    const GridSpec g = make_grid(5.0, 64);
    const TimeGrid tg = resolve_time_grid(g, 0.5, 0.5, 5, true);
    CHECK(tg.lambda_actual <= 0.5 + 1e-12);
    CHECK(tg.n_steps % 5 == 0);
    CHECK(tg.dt * tg.n_steps == doctest::Approx(0.5).epsilon(1e-14));
    REQUIRE(tg.checkpoint_steps.size() == 6);
    CHECK(tg.checkpoint_steps.front() == 0);
    CHECK(tg.checkpoint_steps.back() == tg.n_steps);

    const TimeGrid no_zero = resolve_time_grid(g, 0.5, 0.5, 5, false);
    CHECK(no_zero.checkpoint_steps.size() == 5);

    CHECK_THROWS_AS(resolve_time_grid(g, 1.5, 0.5, 5, true), std::invalid_argument);
}
