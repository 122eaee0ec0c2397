#include <cmath>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "jsrcert/errors.hpp"
#include "jsrcert/sampling.hpp"

using namespace jsrcert;
using jsrcert::testing::for_all;
using jsrcert::testing::Gen;
using jsrcert::testing::parrilo;
using jsrcert::testing::scalar_modes;

namespace {

ObservationSet parse(const std::string& text) {
  std::istringstream in(text);
  return read_observations(in, "inline");
}

}  // namespace

TEST(SampleUnitSphere, OneDimensionalIsSign) {
  Rng rng = make_stream(1, {});
  for (int i = 0; i < 100; ++i) {
    const Vector x = sample_unit_sphere(1, rng);
    ASSERT_EQ(x.size(), 1);
    EXPECT_TRUE(x(0) == 1.0 || x(0) == -1.0);
  }
}

TEST(SampleUnitSphere, UnitNorm) {
  for_all(200, 31, [](Gen& g, int) {
    const int n = g.integer(1, 10);
    EXPECT_NEAR(sample_unit_sphere(n, g.engine()).norm(), 1.0, 1e-12);
  });
}

TEST(SampleUnitSphere, FirstCoordinateHasZeroMean) {
  Rng rng = make_stream(2, {});
  constexpr int draws = 100000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) sum += sample_unit_sphere(2, rng)(0);
  EXPECT_LE(std::abs(sum / draws), 4.0 / std::sqrt(static_cast<double>(draws)));
}

TEST(SampleModeSequence, SingleMode) {
  Rng rng = make_stream(3, {});
  const ModeSequence s = sample_mode_sequence(1, 7, rng);
  EXPECT_EQ(s, ModeSequence(7, 0));
}

TEST(SampleModeSequence, UniformFrequency) {
  Rng rng = make_stream(4, {});
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += sample_mode_sequence(2, 1, rng)[0] == 0;
  EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
}

TEST(SampleModeSequence, Replay) {
  Rng a = make_stream(5, {9});
  Rng b = make_stream(5, {9});
  EXPECT_EQ(sample_mode_sequence(4, 50, a), sample_mode_sequence(4, 50, b));
}

TEST(DeriveSeed, DistinctKeysGiveDistinctStreams) {
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {1}));
  EXPECT_NE(derive_seed(1, {0}), derive_seed(2, {0}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_EQ(derive_seed(7, {3, 4}), derive_seed(7, {3, 4}));
}

TEST(Simulate, ScalarModeScalesState) {
  const ObservationSet obs = simulate(scalar_modes(2, 2.0), 20, 2, 6);
  ASSERT_EQ(obs.size(), 20u);
  EXPECT_EQ(obs.dim, 2);
  EXPECT_EQ(obs.trace_length, 2);
  for (const auto& o : obs.observations) {
    EXPECT_NEAR(o.x0.norm(), 1.0, 1e-12);
    EXPECT_LE((o.xl - 4.0 * o.x0).norm(), 1e-15);
    ASSERT_EQ(o.intermediate.size(), 1u);
    ASSERT_TRUE(o.hidden_modes.has_value());
    EXPECT_EQ(o.hidden_modes->size(), 2u);
  }
}

TEST(ApplyModes, ParriloByHand) {
  const ModeSet m = parrilo();
  Vector e2(2);
  e2 << 0, 1;
  EXPECT_EQ(apply_modes(m, {0}, e2), Vector::Zero(2));
  Vector e1(2);
  e1 << 1, 0;
  EXPECT_EQ(apply_modes(m, {0}, e1), Vector::Ones(2));
}

TEST(Simulate, MatchesHiddenSequence) {
  const ModeSet m = parrilo();
  const ObservationSet obs = simulate(m, 50, 3, 7);
  for (const auto& o : obs.observations) {
    Vector x = o.x0;
    for (int j : *o.hidden_modes) x = m.matrices[static_cast<std::size_t>(j)] * x;
    EXPECT_EQ(x, o.xl);
  }
}

TEST(Simulate, DeterministicGivenSeed) {
  const ModeSet m = parrilo();
  const ObservationSet a = simulate(m, 100, 2, 42);
  const ObservationSet b = simulate(m, 100, 2, 42);
  const ObservationSet c = simulate(m, 100, 2, 43);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.observations[i].x0, b.observations[i].x0);
    EXPECT_EQ(a.observations[i].xl, b.observations[i].xl);
    EXPECT_EQ(*a.observations[i].hidden_modes, *b.observations[i].hidden_modes);
    differs |= a.observations[i].x0 != c.observations[i].x0;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.provenance.seed, 42u);
  EXPECT_EQ(a.provenance.generator, kGeneratorName);
}

TEST(Simulate, PrefixStable) {
  // Trajectory i draws from stream (seed, i), so N only truncates.
  const ModeSet m = parrilo();
  const ObservationSet small = simulate(m, 10, 1, 8);
  const ObservationSet large = simulate(m, 100, 1, 8);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small.observations[i].x0, large.observations[i].x0);
}

TEST(Endpoints, CarryNoModeInformation) {
  const ObservationSet obs = simulate(parrilo(), 5, 1, 9);
  const EndpointSet e = obs.endpoints();
  ASSERT_EQ(e.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(e.x0[i], obs.observations[i].x0);
    EXPECT_EQ(e.xl[i], obs.observations[i].xl);
  }
  const EndpointSet sub = e.subset({4, 1});
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub.x0[0], e.x0[4]);
  EXPECT_EQ(sub.xl[1], e.xl[1]);
}

TEST(LoadObservations, ThreeTrajectories) {
  const ObservationSet obs = parse(
      "traj_id,step,x1,x2\n"
      "a,0,1,0\n"
      "a,1,1,1\n"
      "b,0,0,1\n"
      "b,1,0,0\n"
      "c,0,0.6,0.8\n"
      "c,1,0.2,0.1\n");
  EXPECT_EQ(obs.size(), 3u);
  EXPECT_EQ(obs.dim, 2);
  EXPECT_EQ(obs.trace_length, 1);
  EXPECT_EQ(obs.provenance.source, "inline");
}

TEST(LoadObservations, RescalesByInitialNorm) {
  const ObservationSet obs = parse(
      "traj_id,step,x1,x2\n"
      "0,0,3,4\n"
      "0,1,2,0\n");
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_NEAR(obs.observations[0].x0(0), 0.6, 1e-15);
  EXPECT_NEAR(obs.observations[0].x0(1), 0.8, 1e-15);
  EXPECT_NEAR(obs.observations[0].xl(0), 0.4, 1e-15);
  EXPECT_EQ(obs.observations[0].xl(1), 0.0);
}

TEST(LoadObservations, RejectsOriginWithLine) {
  try {
    parse(
        "traj_id,step,x1,x2\n"
        "0,0,1,0\n"
        "0,1,1,1\n"
        "1,0,0,0\n"
        "1,1,0,0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(LoadObservations, RaggedRowNamesLine) {
  try {
    parse(
        "traj_id,step,x1,x2\n"
        "0,0,1,0\n"
        "0,1,1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadObservations, RejectsMalformedInput) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("id,step,x1\n0,0,1\n0,1,1\n"), ParseError);
  EXPECT_THROW(parse("traj_id,step,x1,x2\n"), ParseError);
  // Mixed trace lengths.
  EXPECT_THROW(parse("traj_id,step,x1,x2\n0,0,1,0\n0,1,1,0\n1,0,1,0\n1,1,1,0\n1,2,1,0\n"), ParseError);
  // Missing step 0, duplicate step, non-numeric value, non-finite value.
  EXPECT_THROW(parse("traj_id,step,x1,x2\n0,1,1,0\n0,2,1,0\n"), ParseError);
  EXPECT_THROW(parse("traj_id,step,x1,x2\n0,0,1,0\n0,0,1,0\n0,1,1,0\n"), ParseError);
  EXPECT_THROW(parse("traj_id,step,x1,x2\n0,0,1,zero\n0,1,1,0\n"), ParseError);
  EXPECT_THROW(parse("traj_id,step,x1,x2\n0,0,1,0\n0,1,inf,0\n"), ParseError);
  // A trajectory needs at least one step.
  EXPECT_THROW(parse("traj_id,step,x1,x2\n0,0,1,0\n"), ParseError);
}

TEST(LoadObservations, IntermediateStatesAreKeptButNotEndpoints) {
  const ObservationSet obs = parse(
      "traj_id,step,x1,x2\n"
      "0,0,0,2\n"
      "0,1,2,0\n"
      "0,2,4,4\n");
  ASSERT_EQ(obs.trace_length, 2);
  ASSERT_EQ(obs.observations[0].intermediate.size(), 1u);
  EXPECT_NEAR(obs.observations[0].intermediate[0](0), 1.0, 1e-15);
  EXPECT_NEAR(obs.observations[0].xl(0), 2.0, 1e-15);
}

TEST(SaveLoad, RoundTripIsExact) {
  const ObservationSet obs = simulate(parrilo(), 200, 3, 10);
  const auto path = std::filesystem::temp_directory_path() / "jsrcert_roundtrip.csv";
  save_observations(obs, path);
  const ObservationSet back = load_observations(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), obs.size());
  EXPECT_EQ(back.trace_length, 3);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_EQ(back.observations[i].x0, obs.observations[i].x0);
    EXPECT_EQ(back.observations[i].xl, obs.observations[i].xl);
    ASSERT_EQ(back.observations[i].intermediate.size(), 2u);
    EXPECT_EQ(back.observations[i].intermediate[1], obs.observations[i].intermediate[1]);
    EXPECT_FALSE(back.observations[i].hidden_modes.has_value());
  }
}

TEST(ModeSetJson, RoundTripAndValidation) {
  const ModeSet m = parrilo();
  const ModeSet back = mode_set_from_json(mode_set_to_json(m));
  ASSERT_EQ(back.count(), 2);
  EXPECT_EQ(back.matrices[0], m.matrices[0]);
  EXPECT_EQ(back.matrices[1], m.matrices[1]);

  const ModeSet parsed = mode_set_from_json(R"({"dim": 2, "matrices": [[[1,0],[1,0]], [[0,1],[0,-1]]]})");
  EXPECT_EQ(parsed.matrices[1], m.matrices[1]);
  EXPECT_THROW(mode_set_from_json(R"({"dim": 2, "matrices": [[[1,0]]]})"), ParseError);
  EXPECT_THROW(mode_set_from_json(R"({"dim": 2, "matrices": []})"), InvalidArgument);
  EXPECT_THROW(mode_set_from_json("not json"), ParseError);
}

TEST(CapMembership, Examples) {
  Vector c(2);
  c << 1, 0;
  Vector e2(2);
  e2 << 0, 1;
  EXPECT_TRUE(cap_membership(c, 0.25, c));
  EXPECT_FALSE(cap_membership(c, 0.25, e2));
  Vector x(2);
  x << 0.01, std::sqrt(1.0 - 1e-4);
  EXPECT_TRUE(cap_membership(c, 0.5, x));
  EXPECT_TRUE(cap_membership(c, 0.9, x));
  EXPECT_FALSE(cap_membership(c, 0.9, e2));
}

TEST(SamplingProperty, MonteCarloCapMeasure) {
  constexpr int samples = 100000;
  Gen g(32);
  for (int n = 2; n <= 4; ++n) {
    for (double eps : {0.05, 0.1, 0.25}) {
      const Vector c = g.unit(n);
      Rng rng = make_stream(33, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(eps * 100)});
      int inside = 0;
      for (int i = 0; i < samples; ++i) inside += cap_membership(c, eps, sample_unit_sphere(n, rng));
      const double band = 4.0 * std::sqrt(eps * (1.0 - eps) / samples);
      EXPECT_NEAR(static_cast<double>(inside) / samples, eps, band) << "n=" << n << " eps=" << eps;
    }
  }
}
