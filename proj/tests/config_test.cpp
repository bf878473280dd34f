#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "qoc/config.hpp"

namespace {

std::string parse_failure(const std::string& text) {
  try {
    (void)qoc::parse_config_text(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& message, const std::string& needle) {
  return message.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("preset defaults describe the three benchmark setups") {
    const qoc::RunConfig spins = qoc::preset_config("spins");
    CHECK(spins.preset == qoc::ProblemPreset::spins);
    CHECK(spins.spins.count == 5);
    CHECK(spins.spins.coupling == 140.0);
    CHECK(spins.spins.duration == 14.0);
    CHECK(spins.spins.steps == 32768);
    CHECK(spins.spins.penalty == 0.0);
    CHECK(spins.solver.kind == qoc::SolverSpec::Kind::gradient);
    CHECK(spins.solver.step_size == 1e4);
    CHECK(spins.ism.variant == qoc::IsmConfig::Variant::interpolated);
    CHECK(spins.initial_control.kind == qoc::InitialControlSpec::Kind::random);

    const qoc::RunConfig quick = qoc::preset_config("spins", /*quick=*/true);
    CHECK(quick.spins.count == 3);
    CHECK(quick.spins.steps == 1024);
    CHECK(quick.spins.duration == doctest::Approx(0.14));
    CHECK(quick.ism.max_outer == 25);

    const qoc::RunConfig rotor = qoc::preset_config("rotor");
    CHECK(rotor.rotor.j_max == 10);
    CHECK(rotor.rotor.rotational_constant == doctest::Approx(6.6376e-6).epsilon(1e-15));
    CHECK(rotor.rotor.dipole == doctest::Approx(1.1413).epsilon(1e-15));
    CHECK(rotor.rotor.steps == 512);
    CHECK(rotor.rotor.penalty_peak == 1e5);
    CHECK(rotor.rotor.penalty_floor == 1e4);
    CHECK(rotor.solver.kind == qoc::SolverSpec::Kind::monotonic);
    CHECK(rotor.initial_control.kind == qoc::InitialControlSpec::Kind::zero);

    const qoc::RunConfig bec = qoc::preset_config("condensate");
    CHECK(bec.condensate.points == 50);
    CHECK(bec.condensate.kappa == 1.0);
    CHECK(bec.condensate.duration == 8.0);
    CHECK(bec.condensate.steps == 512);
    CHECK(bec.ism.variant == qoc::IsmConfig::Variant::split);
    CHECK(bec.ism.log_exact_objective);
    CHECK(bec.initial_control.kind == qoc::InitialControlSpec::Kind::ramp);
    CHECK(bec.initial_control.from == 1.0);
    CHECK(bec.initial_control.to == 0.0);

    CHECK_THROWS_AS((void)qoc::preset_config("molecule"), std::invalid_argument);
  }

  TEST_CASE("echoed configs reparse to the same echo") {
    for (const std::string name : {"spins", "rotor", "condensate"}) {
      for (bool quick : {false, true}) {
        const qoc::RunConfig cfg = qoc::preset_config(name, quick);
        const std::string once = qoc::config_to_json(cfg);
        const qoc::RunConfig back = qoc::parse_config_text(once);
        CHECK(qoc::config_to_json(back) == once);
      }
    }
  }

  TEST_CASE("overrides replace only the named keys") {
    const qoc::RunConfig cfg = qoc::parse_config_text(R"({
      "preset": "rotor",
      "rotor": {"steps": 256, "duration": 50000.0},
      "ism": {"subintervals": 8, "variant": "split", "plan": "direct", "workers": 2},
      "solver": {"kind": "newton", "gmres_tol": 1e-8}
    })");
    CHECK(cfg.preset == qoc::ProblemPreset::rotor);
    CHECK(cfg.rotor.steps == 256);
    CHECK(cfg.rotor.duration == 50000.0);
    CHECK(cfg.rotor.j_max == 10);
    CHECK(cfg.rotor.penalty_peak == 1e5);
    CHECK(cfg.ism.subintervals == 8);
    CHECK(cfg.ism.workers == 2);
    CHECK(cfg.ism.variant == qoc::IsmConfig::Variant::split);
    CHECK(cfg.ism.plan == qoc::IsmConfig::BoundaryPlan::direct);
    CHECK(cfg.solver.kind == qoc::SolverSpec::Kind::newton);
    CHECK(cfg.solver.gmres_tol == 1e-8);
    CHECK(cfg.solver.gmres_restart == 30);

    const qoc::RunConfig quick = qoc::parse_config_text(R"({"preset": "spins", "quick": true})");
    CHECK(quick.spins.count == 3);
    CHECK(quick.spins.steps == 1024);

    const qoc::RunConfig pairs = qoc::parse_config_text(
        R"({"preset": "spins", "spins": {"count": 2, "couplings": [[1, 2]]}})");
    REQUIRE(pairs.spins.couplings.size() == 1);
    CHECK(pairs.spins.couplings[0] == std::pair<int, int>(1, 2));
  }

  TEST_CASE("bad keys and types fail with their dotted path") {
    CHECK(mentions(parse_failure(R"({"rotor": {"stepz": 1}})"), "rotor.stepz"));
    CHECK(mentions(parse_failure(R"({"presett": "spins"})"), "presett"));
    CHECK(mentions(parse_failure(R"({"spins": {"steps": "many"}})"), "spins.steps"));
    CHECK(mentions(parse_failure(R"({"spins": {"steps": "many"}})"), "expected an integer"));
    CHECK(mentions(parse_failure(R"({"ism": {"variant": "weird"}})"), "ism.variant"));
    CHECK(mentions(parse_failure("{nope"), "not valid JSON"));
    CHECK(mentions(parse_failure(R"({"spins": {"couplings": [[1]]}})"),
                   "spins.couplings[0]"));
    CHECK_THROWS_AS((void)qoc::parse_config_text("[1, 2]"), std::invalid_argument);
  }

  TEST_CASE("config files load like inline text") {
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "qoc_config_test.json";
    {
      std::FILE* f = std::fopen(path.string().c_str(), "w");
      REQUIRE(f != nullptr);
      std::fputs(R"({"preset": "condensate", "condensate": {"steps": 64}})", f);
      std::fclose(f);
    }
    const qoc::RunConfig cfg = qoc::load_config(path.string());
    CHECK(cfg.preset == qoc::ProblemPreset::condensate);
    CHECK(cfg.condensate.steps == 64);
    std::filesystem::remove(path);
    CHECK_THROWS_AS((void)qoc::load_config(path.string()), std::runtime_error);
  }

  TEST_CASE("problems and first guesses build from configs") {
    const qoc::RunConfig spins = qoc::preset_config("spins", /*quick=*/true);
    const qoc::ControlProblem sp = qoc::build_problem(spins);
    CHECK(sp.grid.steps == 1024);
    CHECK(sp.model->channels() == 6);
    const qoc::ControlField u1 = qoc::build_initial_control(spins, sp);
    const qoc::ControlField u2 = qoc::build_initial_control(spins, sp);
    CHECK(u1.samples() == u2.samples());
    CHECK(u1.samples().cwiseAbs().maxCoeff() <= spins.initial_control.amplitude);

    qoc::RunConfig rotor = qoc::preset_config("rotor", /*quick=*/true);
    rotor.rotor.steps = 64;
    const qoc::ControlProblem rp = qoc::build_problem(rotor);
    CHECK(rp.model->channels() == 1);
    CHECK(rp.initial.rows() == 11);
    const qoc::ControlField zero = qoc::build_initial_control(rotor, rp);
    CHECK(zero.samples().cwiseAbs().maxCoeff() == 0.0);

    qoc::RunConfig bec = qoc::preset_config("condensate", /*quick=*/true);
    bec.condensate.steps = 32;
    bec.condensate.points = 32;
    const qoc::ControlProblem bp = qoc::build_problem(bec);
    const qoc::ControlField ramp = qoc::build_initial_control(bec, bp);
    CHECK(ramp.samples()(0, 0) == doctest::Approx(1.0 - 0.5 / 32.0).epsilon(1e-15));
    CHECK(ramp.samples()(0, 31) == doctest::Approx(0.5 / 32.0).epsilon(1e-15));

    // Ramps assume a single channel; the spin setups have two per site.
    qoc::RunConfig bad = spins;
    bad.initial_control.kind = qoc::InitialControlSpec::Kind::ramp;
    CHECK_THROWS_AS((void)qoc::build_initial_control(bad, sp), std::invalid_argument);

    // First guesses can come from a control file on the run grid.
    const std::filesystem::path csv =
        std::filesystem::temp_directory_path() / "qoc_config_guess.csv";
    qoc::write_control_csv(csv.string(), u1);
    qoc::RunConfig from_file = spins;
    from_file.initial_control.kind = qoc::InitialControlSpec::Kind::file;
    from_file.initial_control.path = csv.string();
    const qoc::ControlField loaded = qoc::build_initial_control(from_file, sp);
    CHECK((loaded.samples() - u1.samples()).cwiseAbs().maxCoeff() < 1e-12);
    std::filesystem::remove(csv);
  }
}
