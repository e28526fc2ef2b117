#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cohscat/parallel.hpp"
#include "cohscat/rng.hpp"

namespace cohscat {
namespace {

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerVectors) {
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(PhiloxStream, ReproducibleAndDistinctAcrossStreams) {
    PhiloxStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        seen.insert(x);
        seen.insert(c.next_u64());
        seen.insert(d.next_u64());
    }
    EXPECT_EQ(seen.size(), 300u);
}

TEST(PhiloxStream, UniformMomentsInOpenInterval) {
    PhiloxStream s(1, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum2 += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 0.003);
}

TEST(Parallel, ChunksCoverRangeOnce) {
    for (unsigned threads : {1u, 2u, 5u}) {
        std::vector<int> hit(101, 0);
        parallel_chunks(hit.size(), threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) ++hit[i];
        });
        for (int h : hit) EXPECT_EQ(h, 1);
    }
}

TEST(Parallel, PropagatesExceptions) {
    EXPECT_THROW(parallel_chunks(10, 3, [](std::size_t b, std::size_t) {
                     if (b > 0) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}

TEST(Parallel, ExplicitThreadRequestWins) { EXPECT_EQ(resolve_threads(3), 3u); }

}  // namespace
}  // namespace cohscat
