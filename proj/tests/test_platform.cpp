#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hcpfactor/platform.hpp"

using namespace hcpfactor;

namespace {

PlatformSpec two_level_spec() {
  // 2x2 grid of PEs inside one pair of nodes; bufferized upper level.
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 2000;
  s.levels.push_back({1, 2, 2, 1e-9, 1e-10, 2000, NetworkKind::fully_pipelined});
  s.levels.push_back({2, 1, 2, 1e-6, 1e-9, 2000, NetworkKind::bufferized});
  return s;
}

}  // namespace

TEST_CASE("validate derives subtree and memory tables") {
  ValidatedPlatform pf = ValidatedPlatform::validate(two_level_spec());
  CHECK(pf.depth() == 2);
  CHECK(pf.total_nodes() == 8.0);
  CHECK(pf.subtree_nodes(1) == 8.0);
  CHECK(pf.subtree_nodes(2) == 2.0);
  CHECK(pf.aggregated_memory(1) == 2000.0);
  CHECK(pf.aggregated_memory(2) == 8000.0);
}

TEST_CASE("single level platform is valid") {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e6;
  s.levels.push_back({1, 4, 4, 1e-9, 1e-10, 1e6, NetworkKind::fully_pipelined});
  ValidatedPlatform pf = ValidatedPlatform::validate(s);
  CHECK(pf.total_nodes() == 16.0);
}

TEST_CASE("validation rejects broken configurations") {
  CHECK_THROWS_AS(ValidatedPlatform::validate(PlatformSpec{}), EmptyPlatform);

  PlatformSpec s = two_level_spec();
  s.levels[1].buffer_words = 1000;  // B_2 = B_1/2 breaks the sandwich
  CHECK_THROWS_AS(ValidatedPlatform::validate(s), BufferConstraintViolation);

  s = two_level_spec();
  s.levels[1].buffer_words = 9000;  // > P_1 B_1 = 8000
  CHECK_THROWS_AS(ValidatedPlatform::validate(s), BufferConstraintViolation);

  s = two_level_spec();
  s.levels[1].network = NetworkKind::fully_pipelined;  // needs B_2 = 8000
  CHECK_THROWS_AS(ValidatedPlatform::validate(s), NetworkKindMismatch);

  s = two_level_spec();
  s.levels[0].buffer_words = 1500;  // B_1 must equal M_1
  CHECK_THROWS_AS(ValidatedPlatform::validate(s), BufferConstraintViolation);
}

TEST_CASE("p2p cost on one level") {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e6;
  s.levels.push_back({1, 2, 2, 2e-9, 3e-10, 1e6, NetworkKind::fully_pipelined});
  ValidatedPlatform pf = ValidatedPlatform::validate(s);
  CostVector c = p2p_cost(500, 1, pf);
  CHECK(c.words[0] == 500.0);
  CHECK(c.messages[0] == 1.0);
  CHECK(c.comm_time[0] == doctest::Approx(500 * 3e-10 + 2e-9).epsilon(1e-15));
}

TEST_CASE("p2p cost splits volume down the hierarchy") {
  ValidatedPlatform pf = ValidatedPlatform::validate(two_level_spec());
  // D=8000 between the two level-2 nodes: W_2=8000 in ceil(8000/2000)=4
  // messages, W_1 = W_2/P_1 = 2000 in a single message.
  CostVector c = p2p_cost(8000, 2, pf);
  CHECK(c.words[1] == 8000.0);
  CHECK(c.messages[1] == 4.0);
  CHECK(c.words[0] == 2000.0);
  CHECK(c.messages[0] == 1.0);
}

TEST_CASE("p2p words relation W_k = W_{k+1}/P_k holds exactly") {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1 << 20;
  s.levels.push_back({1, 2, 2, 1e-9, 1e-10, 1 << 20, NetworkKind::fully_pipelined});
  s.levels.push_back({2, 2, 1, 1e-7, 1e-9, 4.0 * (1 << 20), NetworkKind::fully_pipelined});
  s.levels.push_back({3, 3, 3, 1e-6, 1e-8, 8.0 * (1 << 20), NetworkKind::fully_pipelined});
  ValidatedPlatform pf = ValidatedPlatform::validate(s);
  CostVector c = p2p_cost(72.0 * 512, 3, pf);
  CHECK(c.words[2] / pf.level(2).nodes() == c.words[1]);
  CHECK(c.words[1] / pf.level(1).nodes() == c.words[0]);
}

TEST_CASE("degenerate transfers") {
  ValidatedPlatform pf = ValidatedPlatform::validate(two_level_spec());
  CostVector z = p2p_cost(0, 2, pf);
  for (double w : z.words) CHECK(w == 0.0);
  for (double m : z.messages) CHECK(m == 0.0);
  CHECK_THROWS_AS(p2p_cost(10, 3, pf), LevelOutOfRange);
  CHECK_THROWS_AS(p2p_cost(1e9, 2, pf), MemoryOverflow);
}

TEST_CASE("bcast cost is ceil(log2 q) p2p rounds") {
  ValidatedPlatform pf = ValidatedPlatform::validate(two_level_spec());
  CostVector one = p2p_cost(8000, 2, pf);
  CostVector b1 = bcast_cost(8000, 2, 1, pf);
  CostVector b2 = bcast_cost(8000, 2, 2, pf);
  CostVector b8 = bcast_cost(8000, 2, 8, pf);
  for (int k = 0; k < 2; ++k) {
    CHECK(b1.words[k] == 0.0);
    CHECK(b2.words[k] == one.words[k]);
    CHECK(b8.words[k] == 3.0 * one.words[k]);
    CHECK(b8.messages[k] == 3.0 * one.messages[k]);
  }
}

TEST_CASE("lower bounds") {
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = 1e8;
  s.levels.push_back({1, 4, 4, 1e-9, 1e-10, 1e8, NetworkKind::fully_pipelined});
  ValidatedPlatform pf = ValidatedPlatform::validate(s);
  LowerBounds b = lower_bounds(1024, 1, pf);
  CHECK(b.words_bound == 1048576.0 / 4.0);
  CHECK(b.memory_bound == 1048576.0 / 16.0);

  // One-node subtree: words bound is the full matrix.
  PlatformSpec s1;
  s1.gamma = 1e-9;
  s1.mem_level1_words = 1e8;
  s1.levels.push_back({1, 1, 1, 1e-9, 1e-10, 1e8, NetworkKind::fully_pipelined});
  ValidatedPlatform one = ValidatedPlatform::validate(s1);
  CHECK(lower_bounds(100, 1, one).words_bound == 10000.0);
}

TEST_CASE("latency bound takes the sqrt(P) form when B_1 = M_1 = n^2/P") {
  // n^2/P words of memory per PE; messages bound = n^2/(B_1 sqrt(P)) = sqrt(P).
  const double n = 1024;
  const double p = 64;
  PlatformSpec s;
  s.gamma = 1e-9;
  s.mem_level1_words = n * n / p;
  s.levels.push_back({1, 8, 8, 1e-9, 1e-10, n * n / p, NetworkKind::fully_pipelined});
  ValidatedPlatform pf = ValidatedPlatform::validate(s);
  CHECK(lower_bounds(n, 1, pf).messages_bound == std::sqrt(p));
}

TEST_CASE("words bound decreases as subtree grows") {
  ValidatedPlatform pf = ValidatedPlatform::validate(two_level_spec());
  CHECK(lower_bounds(64, 1, pf).words_bound < lower_bounds(64, 2, pf).words_bound);
}
